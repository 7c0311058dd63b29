// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dtfuse Authors

#include "dtfuse/engine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "dtfuse/errors.hpp"
#include "dtfuse/wavelet.hpp"

namespace dtfuse {

std::size_t forward_in_words(std::size_t ow) { return 2 * ow + kTaps; }
std::size_t forward_out_words(std::size_t ow) { return 2 * ow; }
std::size_t inverse_in_words(std::size_t ow) { return 2 * ow; }
std::size_t inverse_out_words(std::size_t ow) { return 2 * ow + kTaps; }

CommandCycles forward_command_cycles(const EngineTiming& t, std::size_t ow) {
    const double loop = double(ow) + 6.0 + t.pipeline_depth;
    return {t.xfer_in_cycles_per_word * double(forward_in_words(ow)),
            t.cmd_overhead_cycles + loop + t.xfer_out_cycles_per_word * double(forward_out_words(ow))};
}

CommandCycles inverse_command_cycles(const EngineTiming& t, std::size_t ow) {
    const double loop = double(ow) + 6.0 + t.pipeline_depth;
    return {t.xfer_in_cycles_per_word * double(inverse_in_words(ow)),
            t.cmd_overhead_cycles + loop + t.xfer_out_cycles_per_word * double(inverse_out_words(ow))};
}

namespace {

void check_window(std::size_t area, std::size_t words, const char* what) {
    if (area >= EngineState::kBufferWords || words > EngineState::kBufferWords - area)
        throw CapacityExceeded(std::string(what) + " window of " + std::to_string(words) + " words at offset " +
                               std::to_string(area) + " exceeds the 4096-word buffer");
}

std::uint64_t charge(EngineState& s, const CommandCycles& c) {
    const auto cycles = static_cast<std::uint64_t>(std::llround(c.total()));
    s.cycle_counter += cycles;
    return cycles;
}

}  // namespace

void load_coefficients(EngineState& s, std::span<const float> lp, std::span<const float> hp) {
    if (lp.size() != kTaps || hp.size() != kTaps)
        throw std::invalid_argument("coefficient arrays must hold exactly 12 taps");
    std::copy(lp.begin(), lp.end(), s.coeff_register_lp.begin());
    std::copy(hp.begin(), hp.end(), s.coeff_register_hp.begin());
    s.mode = EngineMode::LoadCoeffs;
}

std::uint64_t forward_line(EngineState& s, std::size_t in_area, std::size_t out_area, std::size_t outwidth) {
    if (outwidth == 0) throw std::invalid_argument("outwidth must be >= 1");
    check_window(in_area, forward_in_words(outwidth), "forward input");
    check_window(out_area, forward_out_words(outwidth), "forward output");
    s.mode = EngineMode::Forward;
    const float* in = s.in_buffer.data() + in_area;
    float* out = s.out_buffer.data() + out_area;
    auto& sr = s.shift_register;
    const auto& clp = s.coeff_register_lp;
    const auto& chp = s.coeff_register_hp;
    sr.fill(0.0f);
    const std::size_t iters = outwidth + 6;
    for (std::size_t i = 0; i < iters; ++i) {
        const float input_a = in[i * 2];
        const float input_b = in[i * 2 + 1];
        float hpMult = chp[0] * sr[0];
        float lpMult = clp[0] * sr[0];
        float hpAcc = hpMult;
        float lpAcc = lpMult;
        for (std::size_t j = 1; j < 11; ++j) {
            lpMult = clp[j] * sr[j];
            hpMult = chp[j] * sr[j];
            hpAcc += hpMult;
            lpAcc += lpMult;
            sr[j - 1] = sr[j + 1];
        }
        lpMult = clp[11] * sr[11];
        hpMult = chp[11] * sr[11];
        hpAcc += hpMult;
        lpAcc += lpMult;
        sr[10] = input_a;
        sr[11] = input_b;
        if (i > 5) {
            out[i * 2 - 12] = hpAcc;
            out[i * 2 + 1 - 12] = lpAcc;
        }
    }
    sr.fill(0.0f);
    return charge(s, forward_command_cycles(s.timing, outwidth));
}

std::uint64_t inverse_line(EngineState& s, std::size_t in_area, std::size_t out_area, std::size_t outwidth) {
    if (outwidth == 0) throw std::invalid_argument("outwidth must be >= 1");
    check_window(in_area, inverse_in_words(outwidth), "inverse input");
    check_window(out_area, inverse_out_words(outwidth), "inverse output");
    s.mode = EngineMode::Inverse;
    const float* in = s.in_buffer.data() + in_area;
    float* out = s.out_buffer.data() + out_area;
    auto& acc = s.shift_register;
    const auto& clp = s.coeff_register_lp;
    const auto& chp = s.coeff_register_hp;
    acc.fill(0.0f);
    // Transposed form: the register holds the 12 partial output samples that
    // the current coefficient pair still contributes to.
    const std::size_t iters = outwidth + 6;
    for (std::size_t i = 0; i < iters; ++i) {
        if (i < outwidth) {
            const float hp_in = in[i * 2];
            const float lp_in = in[i * 2 + 1];
            for (std::size_t j = 0; j < kTaps; ++j) {
                const float a = lp_in * clp[j];
                acc[j] += a;
                const float b = hp_in * chp[j];
                acc[j] += b;
            }
        }
        out[i * 2] = acc[0];
        out[i * 2 + 1] = acc[1];
        for (std::size_t j = 0; j + 2 < kTaps; ++j) acc[j] = acc[j + 2];
        acc[10] = 0.0f;
        acc[11] = 0.0f;
    }
    return charge(s, inverse_command_cycles(s.timing, outwidth));
}

double pipelined_cycles(const CommandCycles& c, std::size_t count, bool fits_area) {
    if (count == 0) return 0.0;
    if (!fits_area) return double(count) * c.total();
    return c.fill + double(count - 1) * std::max(c.fill, c.engine) + c.engine;
}

namespace {

struct PassTotals {
    double cycles = 0, sequential = 0, fill = 0, engine = 0;

    void add(const CommandCycles& c, std::size_t count, bool fits) {
        cycles += pipelined_cycles(c, count, fits);
        sequential += double(count) * c.total();
        fill += double(count) * c.fill;
        engine += double(count) * c.engine;
    }
};

// Streams each row of `src` through forward_line, alternating areas.
std::pair<Plane, Plane> engine_rows_forward(EngineState& s, const Plane& src, PassTotals& tot) {
    const std::size_t ow = static_cast<std::size_t>(src.width()) / 2;
    const bool fits = forward_in_words(ow) <= EngineState::kAreaWords;
    Plane lo(static_cast<int>(ow), src.height()), hi(static_cast<int>(ow), src.height());
    for (int y = 0; y < src.height(); ++y) {
        const std::size_t area = fits ? (y % 2) * EngineState::kAreaWords : 0;
        const auto ext = extend_periodic(src.row(y));
        std::copy(ext.begin(), ext.end(), s.in_buffer.begin() + static_cast<std::ptrdiff_t>(area));
        forward_line(s, area, area, ow);
        for (std::size_t k = 0; k < ow; ++k) {
            hi.at(int(k), y) = s.out_buffer[area + 2 * k];
            lo.at(int(k), y) = s.out_buffer[area + 2 * k + 1];
        }
    }
    tot.add(forward_command_cycles(s.timing, ow), static_cast<std::size_t>(src.height()), fits);
    return {lo, hi};
}

Plane engine_rows_inverse(EngineState& s, const Plane& lo, const Plane& hi, PassTotals& tot) {
    const std::size_t n = static_cast<std::size_t>(lo.width());
    const bool fits = inverse_out_words(n) <= EngineState::kAreaWords;
    Plane out(static_cast<int>(2 * n), lo.height());
    for (int y = 0; y < lo.height(); ++y) {
        const std::size_t area = fits ? (y % 2) * EngineState::kAreaWords : 0;
        for (std::size_t k = 0; k < n; ++k) {
            s.in_buffer[area + 2 * k] = hi.at(int(k), y);
            s.in_buffer[area + 2 * k + 1] = lo.at(int(k), y);
        }
        inverse_line(s, area, area, n);
        fold_periodic(std::span<const float>(s.out_buffer).subspan(area, inverse_out_words(n)), out.row(y));
    }
    tot.add(inverse_command_cycles(s.timing, n), static_cast<std::size_t>(lo.height()), fits);
    return out;
}

void put(Plane& dst, const Plane& src, int x0, int y0) {
    for (int y = 0; y < src.height(); ++y)
        std::copy(src.row(y).begin(), src.row(y).end(), dst.row(y0 + y).begin() + x0);
}

}  // namespace

DriverResult driver_submit_plane(EngineState& s, const Plane& plane, Direction direction, const FilterPair& taps,
                                 PassScope scope) {
    if (plane.empty()) throw std::invalid_argument("empty plane");
    const bool rows_only = scope == PassScope::RowsOnly;
    if (plane.width() > 2048 || (!rows_only && plane.height() > 2048))
        throw CapacityExceeded("plane dimension exceeds the 2048-sample engine limit");
    if (plane.width() % 2 || (!rows_only && plane.height() % 2))
        throw std::invalid_argument("driver needs even plane dimensions");
    const int w = plane.width() / 2, h = plane.height() / 2;
    PassTotals tot;
    DriverResult r;
    r.plane = Plane(plane.width(), plane.height());
    load_coefficients(s, taps.lp, taps.hp);
    if (rows_only && direction == Direction::Forward) {
        auto [lo, hi] = engine_rows_forward(s, plane, tot);
        put(r.plane, lo, 0, 0);
        put(r.plane, hi, w, 0);
    } else if (rows_only) {
        Plane lo(w, plane.height()), hi(w, plane.height());
        for (int y = 0; y < plane.height(); ++y)
            for (int x = 0; x < w; ++x) {
                lo.at(x, y) = plane.at(x, y);
                hi.at(x, y) = plane.at(w + x, y);
            }
        r.plane = engine_rows_inverse(s, lo, hi, tot);
    } else if (direction == Direction::Forward) {
        auto [lo, hi] = engine_rows_forward(s, plane, tot);
        auto [ll, lh] = engine_rows_forward(s, lo.transposed(), tot);
        auto [hl, hh] = engine_rows_forward(s, hi.transposed(), tot);
        put(r.plane, ll.transposed(), 0, 0);
        put(r.plane, hl.transposed(), w, 0);
        put(r.plane, lh.transposed(), 0, h);
        put(r.plane, hh.transposed(), w, h);
    } else {
        const Plane ll = plane.cropped(w, h);
        Plane hl(w, h), lh(w, h), hh(w, h);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                hl.at(x, y) = plane.at(w + x, y);
                lh.at(x, y) = plane.at(x, h + y);
                hh.at(x, y) = plane.at(w + x, h + y);
            }
        const Plane lo = engine_rows_inverse(s, ll.transposed(), lh.transposed(), tot).transposed();
        const Plane hi = engine_rows_inverse(s, hl.transposed(), hh.transposed(), tot).transposed();
        r.plane = engine_rows_inverse(s, lo, hi, tot);
    }
    r.cycles = tot.cycles;
    r.cycles_sequential = tot.sequential;
    r.fill_cycles = tot.fill;
    r.engine_cycles = tot.engine;
    return r;
}

namespace {

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_u64(std::vector<std::uint8_t>& b, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_floats(std::vector<std::uint8_t>& b, std::span<const float> v) {
    for (float f : v) put_u32(b, std::bit_cast<std::uint32_t>(f));
}

struct Reader {
    std::span<const std::uint8_t> b;
    std::size_t pos = 0;

    std::uint64_t get(int n) {
        if (pos + n > b.size()) throw std::invalid_argument("engine dump truncated");
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= std::uint64_t(b[pos + i]) << (8 * i);
        pos += n;
        return v;
    }
    void floats(std::span<float> dst) {
        for (float& f : dst) f = std::bit_cast<float>(static_cast<std::uint32_t>(get(4)));
    }
};

}  // namespace

std::vector<std::uint8_t> dump_engine_state(const EngineState& s) {
    std::vector<std::uint8_t> b{'W', 'E', 'N', 'G'};
    put_u32(b, 1);
    put_u32(b, static_cast<std::uint32_t>(s.mode));
    put_u64(b, s.cycle_counter);
    put_floats(b, s.coeff_register_lp);
    put_floats(b, s.coeff_register_hp);
    put_floats(b, s.shift_register);
    put_floats(b, s.in_buffer);
    put_floats(b, s.out_buffer);
    return b;
}

EngineState load_engine_state(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), "WENG", 4) != 0)
        throw std::invalid_argument("not an engine dump");
    Reader r{bytes, 4};
    if (r.get(4) != 1) throw std::invalid_argument("unsupported engine dump version");
    EngineState s;
    const auto mode = r.get(4);
    if (mode > 2) throw std::invalid_argument("bad engine mode in dump");
    s.mode = static_cast<EngineMode>(mode);
    s.cycle_counter = r.get(8);
    r.floats(s.coeff_register_lp);
    r.floats(s.coeff_register_hp);
    r.floats(s.shift_register);
    r.floats(s.in_buffer);
    r.floats(s.out_buffer);
    return s;
}

}  // namespace dtfuse
