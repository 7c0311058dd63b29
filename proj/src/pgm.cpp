// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dtfuse Authors

#include "dtfuse/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "dtfuse/errors.hpp"

namespace dtfuse {

FrameFormat parse_frame_format(std::string_view s) {
    if (s == "pgm" || s == "pgm-sequence") return FrameFormat::PgmSequence;
    if (s == "raw" || s == "raw-y8") return FrameFormat::RawY8;
    throw UsageError("unknown frame format '" + std::string(s) + "'");
}

namespace {

class HeaderReader {
public:
    explicit HeaderReader(std::string_view b, std::size_t pos) : b_(b), pos_(pos) {}

    void skip_space_and_comments() {
        while (pos_ < b_.size()) {
            if (b_[pos_] == '#') {
                while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(b_[pos_]))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    int number(const char* what) {
        skip_space_and_comments();
        const std::size_t start = pos_;
        long v = 0;
        while (pos_ < b_.size() && std::isdigit(static_cast<unsigned char>(b_[pos_]))) {
            v = v * 10 + (b_[pos_] - '0');
            if (v > 1 << 20) throw ParseError(std::string("PGM ") + what + " too large", start);
            ++pos_;
        }
        if (pos_ == start) throw ParseError(std::string("PGM header: expected ") + what, start);
        return static_cast<int>(v);
    }

    std::size_t pos() const { return pos_; }
    void advance(std::size_t n) { pos_ += n; }

private:
    std::string_view b_;
    std::size_t pos_;
};

Frame from_bytes(const unsigned char* p, int w, int h) {
    std::vector<float> px(static_cast<std::size_t>(w) * h);
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<float>(p[i]);
    return make_frame(w, h, std::move(px));
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

std::vector<Frame> decode_pgm(std::string_view bytes) {
    std::vector<Frame> out;
    std::size_t pos = 0;
    while (true) {
        HeaderReader r(bytes, pos);
        r.skip_space_and_comments();
        if (r.pos() >= bytes.size()) break;
        const std::size_t magic = r.pos();
        if (bytes.size() - magic < 2 || bytes[magic] != 'P' || bytes[magic + 1] != '5')
            throw ParseError("not a binary PGM (expected P5)", magic);
        r.advance(2);
        const int w = r.number("width");
        const int h = r.number("height");
        const std::size_t mv_at = r.pos();
        const int maxval = r.number("maxval");
        if (w < 1 || h < 1) throw ParseError("PGM dimensions must be positive", mv_at);
        if (maxval != 255) throw ParseError("PGM maxval must be 255", mv_at);
        // exactly one whitespace byte separates the header from the raster
        if (r.pos() >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[r.pos()])))
            throw ParseError("PGM header not terminated", r.pos());
        r.advance(1);
        const std::size_t need = static_cast<std::size_t>(w) * h;
        if (bytes.size() - r.pos() < need) throw ParseError("PGM pixel payload truncated", bytes.size());
        out.push_back(from_bytes(reinterpret_cast<const unsigned char*>(bytes.data() + r.pos()), w, h));
        pos = r.pos() + need;
    }
    if (out.empty()) throw ParseError("no PGM image found", 0);
    return out;
}

std::vector<Frame> decode_raw_y8(std::string_view bytes, int width, int height) {
    if (width < 1 || height < 1) throw UsageError("raw-y8 input needs an explicit --size");
    const std::size_t n = static_cast<std::size_t>(width) * height;
    if (bytes.empty()) throw ParseError("raw-y8 stream is empty", 0);
    if (bytes.size() % n) throw ParseError("raw-y8 stream is not a whole number of frames", bytes.size() / n * n);
    std::vector<Frame> out;
    for (std::size_t off = 0; off < bytes.size(); off += n)
        out.push_back(from_bytes(reinterpret_cast<const unsigned char*>(bytes.data() + off), width, height));
    return out;
}

std::vector<Frame> load_frames(const std::filesystem::path& path, FrameFormat format, int width, int height) {
    std::vector<Frame> frames;
    if (format == FrameFormat::RawY8) {
        frames = decode_raw_y8(slurp(path), width, height);
    } else if (std::filesystem::is_directory(path)) {
        std::vector<std::filesystem::path> files;
        for (const auto& e : std::filesystem::directory_iterator(path))
            if (e.is_regular_file() && e.path().extension() == ".pgm") files.push_back(e.path());
        std::sort(files.begin(), files.end());
        if (files.empty()) throw InvalidInput("no .pgm files in " + path.string());
        for (const auto& f : files) {
            auto more = decode_pgm(slurp(f));
            std::move(more.begin(), more.end(), std::back_inserter(frames));
        }
    } else {
        frames = decode_pgm(slurp(path));
    }
    for (const auto& f : frames)
        if (f.width() != frames.front().width() || f.height() != frames.front().height())
            throw InvalidInput("frame dimensions differ within " + path.string());
    if (width > 0 && height > 0 && (frames.front().width() != width || frames.front().height() != height))
        throw InvalidInput("frames in " + path.string() + " are not " + std::to_string(width) + "x" +
                           std::to_string(height));
    return frames;
}

std::string encode_pgm(const Frame& f) {
    std::string out = "P5\n" + std::to_string(f.width()) + " " + std::to_string(f.height()) + "\n255\n";
    const std::size_t head = out.size();
    out.resize(head + f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const float v = std::round(std::clamp(f.data()[i], 0.0f, 255.0f));
        out[head + i] = static_cast<char>(static_cast<unsigned char>(v));
    }
    return out;
}

void write_pgm(const std::filesystem::path& path, const Frame& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write " + path.string());
    const std::string bytes = encode_pgm(f);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace dtfuse
