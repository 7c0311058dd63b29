// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dtfuse Authors

#include "dtfuse/wavelet.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <stdexcept>

namespace dtfuse {

namespace {

constexpr float kInvSqrt2 = static_cast<float>(1.0 / std::numbers::sqrt2);

int half_up(int n) { return (n + 1) / 2; }

std::pair<Plane, Plane> analyze_cols(const Plane& plane, const FilterPair& bank, BackendId backend) {
    auto [lo, hi] = analyze_rows(plane.transposed(), bank, backend);
    return {lo.transposed(), hi.transposed()};
}

Plane synthesize_cols(const Plane& lo, const Plane& hi, const FilterPair& synth, BackendId backend) {
    return synthesize_rows(lo.transposed(), hi.transposed(), synth, backend).transposed();
}

Plane lowpass_cols(const Plane& plane, const FilterPair& bank, BackendId backend) {
    return analyze_cols(plane, bank, backend).first;
}

enum TreeIdx { AA, AB, BA, BB };
constexpr Tree kRowTree[4] = {Tree::A, Tree::A, Tree::B, Tree::B};
constexpr Tree kColTree[4] = {Tree::A, Tree::B, Tree::A, Tree::B};

// Real subbands of the four trees for one subband type.
using Quad = std::array<Plane, 4>;

std::pair<ComplexSubband, ComplexSubband> quad_to_complex(const Quad& q) {
    const int w = q[AA].width(), h = q[AA].height();
    ComplexSubband z1{Orientation::P15, Plane(w, h), Plane(w, h)};
    ComplexSubband z2{Orientation::P15, Plane(w, h), Plane(w, h)};
    for (std::size_t i = 0; i < q[AA].size(); ++i) {
        const float aa = q[AA].data()[i], ab = q[AB].data()[i], ba = q[BA].data()[i], bb = q[BB].data()[i];
        z1.re.data()[i] = (aa - bb) * kInvSqrt2;
        z1.im.data()[i] = (ab + ba) * kInvSqrt2;
        z2.re.data()[i] = (aa + bb) * kInvSqrt2;
        z2.im.data()[i] = (ab - ba) * kInvSqrt2;
    }
    return {std::move(z1), std::move(z2)};
}

Quad complex_to_quad(const ComplexSubband& z1, const ComplexSubband& z2) {
    const int w = z1.width(), h = z1.height();
    Quad q{Plane(w, h), Plane(w, h), Plane(w, h), Plane(w, h)};
    for (std::size_t i = 0; i < q[AA].size(); ++i) {
        const float r1 = z1.re.data()[i], i1 = z1.im.data()[i], r2 = z2.re.data()[i], i2 = z2.im.data()[i];
        q[AA].data()[i] = (r1 + r2) * kInvSqrt2;
        q[BB].data()[i] = (r2 - r1) * kInvSqrt2;
        q[AB].data()[i] = (i1 + i2) * kInvSqrt2;
        q[BA].data()[i] = (i1 - i2) * kInvSqrt2;
    }
    return q;
}

// Which of (z1, z2) carries each orientation. Level 1 filters have the
// opposite phase relation between trees for the HL and LH bands.
struct BandMap {
    Orientation z1, z2;
};
BandMap band_map(int level, int type) {  // type: 0 = LH, 1 = HL, 2 = HH
    if (type == 2) return {Orientation::P45, Orientation::M45};
    if (level == 1) return type == 1 ? BandMap{Orientation::P15, Orientation::M15} : BandMap{Orientation::P75, Orientation::M75};
    return type == 1 ? BandMap{Orientation::M15, Orientation::P15} : BandMap{Orientation::M75, Orientation::P75};
}

void check_backends(std::span<const BackendId> backends, int levels) {
    if (static_cast<int>(backends.size()) != levels)
        throw std::invalid_argument("need exactly one backend per level");
}

// LL of tree t after `levels` levels, starting from a reconstructed frame.
std::array<Plane, 4> lowpass_chain(const Plane& f, int levels, const FilterBank& bank,
                                   std::span<const BackendId> backends) {
    std::array<Plane, 4> cur{f, f, f, f};
    for (int l = 1; l <= levels; ++l) {
        const BackendId be = backends[l - 1];
        if (l == 1) {
            const Plane p = f.padded_even();
            const Plane ra = analyze_rows(p, bank.analysis(1, Tree::A), be).first;
            const Plane rb = analyze_rows(p, bank.analysis(1, Tree::B), be).first;
            cur[AB] = lowpass_cols(ra, bank.analysis(1, Tree::B), be);
            cur[BA] = lowpass_cols(rb, bank.analysis(1, Tree::A), be);
            cur[BB] = lowpass_cols(rb, bank.analysis(1, Tree::B), be);
        } else {
            for (int t : {AB, BA, BB})
                cur[t] = lowpass_level(cur[t], bank.analysis(l, kRowTree[t]), bank.analysis(l, kColTree[t]), be);
        }
    }
    return cur;
}

// Rebuilds the frame seen by one tree from its deepest LL and per-level details.
Plane tree_inverse(int t, Plane ll, const std::vector<std::array<Plane, 3>>& details,
                   const std::vector<std::pair<int, int>>& shapes, const FilterBank& bank,
                   std::span<const BackendId> backends) {
    for (int l = static_cast<int>(details.size()); l >= 1; --l) {
        const auto& d = details[l - 1];
        Subbands2D s{std::move(ll), d[0], d[1], d[2]};
        const Plane full =
            idwt2d_level(s, bank.synthesis(l, kRowTree[t]), bank.synthesis(l, kColTree[t]), backends[l - 1]);
        ll = full.cropped(shapes[l - 1].first, shapes[l - 1].second);
    }
    return ll;
}

}  // namespace

int degrees(Orientation o) {
    switch (o) {
        case Orientation::P15: return 15;
        case Orientation::M15: return -15;
        case Orientation::P45: return 45;
        case Orientation::M45: return -45;
        case Orientation::P75: return 75;
        case Orientation::M75: return -75;
    }
    return 0;
}

std::string_view to_string(Orientation o) {
    switch (o) {
        case Orientation::P15: return "+15";
        case Orientation::M15: return "-15";
        case Orientation::P45: return "+45";
        case Orientation::M45: return "-45";
        case Orientation::P75: return "+75";
        case Orientation::M75: return "-75";
    }
    return "?";
}

void check_pyramid(const Pyramid& p) {
    if (p.source_width < 1 || p.source_height < 1) throw std::invalid_argument("pyramid source size invalid");
    if (p.levels.empty()) throw std::invalid_argument("pyramid has no levels");
    int w = p.source_width, h = p.source_height;
    for (std::size_t l = 0; l < p.levels.size(); ++l) {
        w = half_up(w);
        h = half_up(h);
        for (int b = 0; b < 6; ++b) {
            const auto& band = p.levels[l].bands[b];
            if (band.orientation != kOrientations[b])
                throw std::invalid_argument("pyramid orientation order broken");
            if (band.re.width() != w || band.re.height() != h || band.im.width() != w || band.im.height() != h)
                throw std::invalid_argument("pyramid level " + std::to_string(l + 1) + " has wrong subband size");
        }
    }
    if (p.lowpass.width() != w || p.lowpass.height() != h)
        throw std::invalid_argument("pyramid lowpass has wrong size");
}

bool same_shape(const Pyramid& a, const Pyramid& b) {
    if (a.source_width != b.source_width || a.source_height != b.source_height || a.depth() != b.depth())
        return false;
    for (int l = 0; l < a.depth(); ++l)
        for (int k = 0; k < 6; ++k) {
            const auto &x = a.levels[l].bands[k], &y = b.levels[l].bands[k];
            if (x.width() != y.width() || x.height() != y.height()) return false;
        }
    return a.lowpass.width() == b.lowpass.width() && a.lowpass.height() == b.lowpass.height();
}

std::vector<float> extend_symmetric(std::span<const float> line, std::size_t left, std::size_t right) {
    const std::size_t n = line.size();
    if (n == 0) throw std::invalid_argument("cannot extend an empty line");
    if (left > n || right > n) throw std::invalid_argument("extension longer than line");
    if (n == 1) return std::vector<float>(1 + left + right, line[0]);
    const long period = 2 * static_cast<long>(n) - 2;
    std::vector<float> out;
    out.reserve(n + left + right);
    for (long i = -static_cast<long>(left); i < static_cast<long>(n + right); ++i) {
        long m = ((i % period) + period) % period;
        if (m >= static_cast<long>(n)) m = period - m;
        out.push_back(line[static_cast<std::size_t>(m)]);
    }
    return out;
}

namespace {
// out must hold line.size() + 12 samples; copied as runs of the source.
void extend_periodic_into(std::span<const float> line, std::span<float> out) {
    const std::size_t n = line.size();
    std::size_t src = (n * kTaps - 6) % n;
    for (std::size_t i = 0; i < out.size();) {
        const std::size_t run = std::min(n - src, out.size() - i);
        std::copy_n(line.data() + src, run, out.data() + i);
        i += run;
        src = 0;
    }
}
}  // namespace

std::vector<float> extend_periodic(std::span<const float> line) {
    const std::size_t n = line.size();
    if (n == 0) throw std::invalid_argument("cannot extend an empty line");
    std::vector<float> out(n + kTaps);
    extend_periodic_into(line, out);
    return out;
}

void fold_periodic(std::span<const float> full, std::span<float> out) {
    const std::size_t n = out.size();
    if (n == 0 || full.size() != n + kTaps) throw std::invalid_argument("fold length mismatch");
    std::fill(out.begin(), out.end(), 0.0f);
    std::size_t dst = (n * kTaps - 6) % n;
    for (float v : full) {
        out[dst] += v;
        if (++dst == n) dst = 0;
    }
}

LinePair analysis_pair(std::span<const float> line, const Taps& lp, const Taps& hp, BackendId backend) {
    if (line.size() < kTaps + 2 || (line.size() - kTaps) % 2)
        throw std::invalid_argument("analysis line length must be 2*outwidth + 12");
    const std::size_t ow = (line.size() - kTaps) / 2;
    LinePair r{std::vector<float>(ow), std::vector<float>(ow)};
    analysis_line(backend, line, lp, hp, r.lo, r.hi);
    return r;
}

std::vector<float> synthesis_pair(std::span<const float> lo, std::span<const float> hi, const Taps& lp_s,
                                  const Taps& hp_s, BackendId backend) {
    if (lo.size() != hi.size()) throw std::invalid_argument("lo/hi length mismatch");
    std::vector<float> y(2 * lo.size() + kTaps);
    synthesis_line(backend, lo, hi, lp_s, hp_s, y);
    return y;
}

std::pair<Plane, Plane> analyze_rows(const Plane& plane, const FilterPair& bank, BackendId backend) {
    if (plane.empty()) throw std::invalid_argument("empty plane");
    if (plane.width() % 2) throw std::invalid_argument("row analysis needs an even width");
    const int ow = plane.width() / 2;
    Plane lo(ow, plane.height()), hi(ow, plane.height());
    std::vector<float> ext(static_cast<std::size_t>(plane.width()) + kTaps);
    for (int y = 0; y < plane.height(); ++y) {
        extend_periodic_into(plane.row(y), ext);
        analysis_line(backend, ext, bank.lp, bank.hp, lo.row(y), hi.row(y));
    }
    return {std::move(lo), std::move(hi)};
}

Plane synthesize_rows(const Plane& lo, const Plane& hi, const FilterPair& synth, BackendId backend) {
    if (lo.width() != hi.width() || lo.height() != hi.height()) throw std::invalid_argument("lo/hi plane mismatch");
    if (lo.empty()) throw std::invalid_argument("empty plane");
    Plane out(2 * lo.width(), lo.height());
    std::vector<float> full(2 * static_cast<std::size_t>(lo.width()) + kTaps);
    for (int y = 0; y < lo.height(); ++y) {
        synthesis_line(backend, lo.row(y), hi.row(y), synth.lp, synth.hp, full);
        fold_periodic(full, out.row(y));
    }
    return out;
}

Subbands2D dwt2d_level(const Plane& plane, const FilterPair& row_bank, const FilterPair& col_bank,
                       BackendId backend) {
    if (plane.empty()) throw std::invalid_argument("empty plane");
    const Plane p = plane.padded_even();
    auto [lo, hi] = analyze_rows(p, row_bank, backend);
    auto [ll, lh] = analyze_cols(lo, col_bank, backend);
    auto [hl, hh] = analyze_cols(hi, col_bank, backend);
    return {std::move(ll), std::move(lh), std::move(hl), std::move(hh)};
}

Plane idwt2d_level(const Subbands2D& s, const FilterPair& row_synth, const FilterPair& col_synth, BackendId backend) {
    const Plane lo = synthesize_cols(s.LL, s.LH, col_synth, backend);
    const Plane hi = synthesize_cols(s.HL, s.HH, col_synth, backend);
    return synthesize_rows(lo, hi, row_synth, backend);
}

Plane lowpass_level(const Plane& plane, const FilterPair& row_bank, const FilterPair& col_bank, BackendId backend) {
    if (plane.empty()) throw std::invalid_argument("empty plane");
    const Plane lo = analyze_rows(plane.padded_even(), row_bank, backend).first;
    return lowpass_cols(lo, col_bank, backend);
}

int max_levels(int width, int height) {
    const int m = std::min(width, height);
    return m < 1 ? 0 : std::bit_width(static_cast<unsigned>(m)) - 1;
}

Pyramid dtcwt_forward(const Frame& frame, int levels, const FilterBank& bank, BackendId backend) {
    const std::vector<BackendId> b(static_cast<std::size_t>(std::max(levels, 0)), backend);
    return dtcwt_forward(frame, levels, bank, b);
}

Pyramid dtcwt_forward(const Frame& frame, int levels, const FilterBank& bank, std::span<const BackendId> backends) {
    check_frame(frame);
    if (levels < 1) throw std::invalid_argument("levels must be >= 1");
    if (levels > max_levels(frame.width(), frame.height()))
        throw std::invalid_argument("too many levels for a " + std::to_string(frame.width()) + "x" +
                                    std::to_string(frame.height()) + " frame");
    check_backends(backends, levels);
    Pyramid pyr;
    pyr.source_width = frame.width();
    pyr.source_height = frame.height();
    std::array<Plane, 4> cur{frame, frame, frame, frame};
    for (int l = 1; l <= levels; ++l) {
        const BackendId be = backends[l - 1];
        std::array<Quad, 3> det;  // LH, HL, HH
        std::array<Plane, 4> next;
        if (l == 1) {
            // Trees sharing a row filter share the row pass.
            const Plane p = frame.padded_even();
            for (Tree rt : {Tree::A, Tree::B}) {
                auto [lo, hi] = analyze_rows(p, bank.analysis(1, rt), be);
                for (Tree ct : {Tree::A, Tree::B}) {
                    const int t = (rt == Tree::A ? 0 : 2) + (ct == Tree::A ? 0 : 1);
                    auto [ll, lh] = analyze_cols(lo, bank.analysis(1, ct), be);
                    auto [hl, hh] = analyze_cols(hi, bank.analysis(1, ct), be);
                    next[t] = std::move(ll);
                    det[0][t] = std::move(lh);
                    det[1][t] = std::move(hl);
                    det[2][t] = std::move(hh);
                }
            }
        } else {
            for (int t = 0; t < 4; ++t) {
                auto s = dwt2d_level(cur[t], bank.analysis(l, kRowTree[t]), bank.analysis(l, kColTree[t]), be);
                next[t] = std::move(s.LL);
                det[0][t] = std::move(s.LH);
                det[1][t] = std::move(s.HL);
                det[2][t] = std::move(s.HH);
            }
        }
        PyramidLevel lev;
        for (int type = 0; type < 3; ++type) {
            auto [z1, z2] = quad_to_complex(det[type]);
            const BandMap m = band_map(l, type);
            z1.orientation = m.z1;
            z2.orientation = m.z2;
            lev[m.z1] = std::move(z1);
            lev[m.z2] = std::move(z2);
        }
        pyr.levels.push_back(std::move(lev));
        cur = std::move(next);
    }
    pyr.lowpass = std::move(cur[AA]);
    return pyr;
}

Frame dtcwt_inverse(const Pyramid& pyramid, const FilterBank& bank, BackendId backend) {
    const std::vector<BackendId> b(pyramid.levels.size(), backend);
    return dtcwt_inverse(pyramid, bank, b);
}

Frame dtcwt_inverse(const Pyramid& pyramid, const FilterBank& bank, std::span<const BackendId> backends) {
    check_pyramid(pyramid);
    const int levels = pyramid.depth();
    check_backends(backends, levels);
    std::vector<std::pair<int, int>> shapes{{pyramid.source_width, pyramid.source_height}};
    for (int l = 0; l < levels; ++l) shapes.emplace_back(half_up(shapes.back().first), half_up(shapes.back().second));

    // Real subbands of every tree: details[t][l] = {LH, HL, HH}.
    std::array<std::vector<std::array<Plane, 3>>, 4> details;
    for (auto& d : details) d.resize(levels);
    for (int l = 1; l <= levels; ++l) {
        const auto& lev = pyramid.levels[l - 1];
        for (int type = 0; type < 3; ++type) {
            const BandMap m = band_map(l, type);
            const Quad q = complex_to_quad(lev[m.z1], lev[m.z2]);
            for (int t = 0; t < 4; ++t) details[t][l - 1][type] = q[t];
        }
    }
    // Tree aa carries the stored lowpass. The other trees' deepest lowpass is
    // regenerated from its reconstruction, then all four estimates are averaged.
    const Plane faa = tree_inverse(AA, pyramid.lowpass, details[AA], shapes, bank, backends);
    const auto lows = lowpass_chain(faa, levels, bank, backends);
    Frame out = faa;
    for (int t : {AB, BA, BB}) {
        const Plane ft = tree_inverse(t, lows[t], details[t], shapes, bank, backends);
        for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += ft.data()[i];
    }
    for (float& v : out.data()) v *= 0.25f;
    return out;
}

RealPyramid dwt_forward(const Frame& frame, int levels, const FilterBank& bank, BackendId backend) {
    check_frame(frame);
    if (levels < 1 || levels > max_levels(frame.width(), frame.height()))
        throw std::invalid_argument("invalid level count");
    RealPyramid r;
    Plane cur = frame;
    for (int l = 1; l <= levels; ++l) {
        auto s = dwt2d_level(cur, bank.analysis(l, Tree::A), bank.analysis(l, Tree::A), backend);
        r.levels.push_back({std::move(s.LH), std::move(s.HL), std::move(s.HH)});
        cur = std::move(s.LL);
    }
    r.lowpass = std::move(cur);
    return r;
}

namespace {

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_plane(std::vector<std::uint8_t>& b, const Plane& p) {
    for (float f : p.data()) put_u32(b, std::bit_cast<std::uint32_t>(f));
}

struct Reader {
    std::span<const std::uint8_t> b;
    std::size_t pos = 0;

    std::uint32_t u32() {
        if (pos + 4 > b.size()) throw std::invalid_argument("pyramid dump truncated");
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    Plane plane(int w, int h) {
        Plane p(w, h);
        for (float& f : p.data()) f = std::bit_cast<float>(u32());
        return p;
    }
};

}  // namespace

std::vector<std::uint8_t> dump_pyramid(const Pyramid& p) {
    check_pyramid(p);
    std::vector<std::uint8_t> b{'D', 'T', 'C', 'P'};
    put_u32(b, 1);
    put_u32(b, static_cast<std::uint32_t>(p.source_width));
    put_u32(b, static_cast<std::uint32_t>(p.source_height));
    put_u32(b, static_cast<std::uint32_t>(p.depth()));
    for (const auto& lev : p.levels)
        for (const auto& band : lev.bands) {
            put_plane(b, band.re);
            put_plane(b, band.im);
        }
    put_plane(b, p.lowpass);
    return b;
}

Pyramid load_pyramid(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), "DTCP", 4) != 0)
        throw std::invalid_argument("not a pyramid dump");
    Reader r{bytes, 4};
    if (r.u32() != 1) throw std::invalid_argument("unsupported pyramid dump version");
    Pyramid p;
    p.source_width = static_cast<int>(r.u32());
    p.source_height = static_cast<int>(r.u32());
    const int levels = static_cast<int>(r.u32());
    if (p.source_width < 1 || p.source_height < 1 || levels < 1 || levels > 30)
        throw std::invalid_argument("pyramid dump header is inconsistent");
    int w = p.source_width, h = p.source_height;
    for (int l = 0; l < levels; ++l) {
        w = half_up(w);
        h = half_up(h);
        PyramidLevel lev;
        for (int k = 0; k < 6; ++k) {
            lev.bands[k].orientation = kOrientations[k];
            lev.bands[k].re = r.plane(w, h);
            lev.bands[k].im = r.plane(w, h);
        }
        p.levels.push_back(std::move(lev));
    }
    p.lowpass = r.plane(w, h);
    if (r.pos != bytes.size()) throw std::invalid_argument("trailing bytes after pyramid dump");
    return p;
}

void write_pyramid(const Pyramid& p, const std::filesystem::path& path) {
    const auto bytes = dump_pyramid(p);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Pyramid read_pyramid(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::invalid_argument("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return load_pyramid(bytes);
}

}  // namespace dtfuse
