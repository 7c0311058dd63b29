// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dtfuse Authors

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "dtfuse/backend.hpp"
#include "dtfuse/filter_bank.hpp"
#include "dtfuse/plane.hpp"

namespace dtfuse {

// Six oriented directions, in dump order.
enum class Orientation { P15, M15, P45, M45, P75, M75 };
inline constexpr std::array<Orientation, 6> kOrientations{Orientation::P15, Orientation::M15, Orientation::P45,
                                                          Orientation::M45, Orientation::P75, Orientation::M75};
int degrees(Orientation o);
std::string_view to_string(Orientation o);

struct ComplexSubband {
    Orientation orientation = Orientation::P15;
    Plane re;
    Plane im;

    int width() const { return re.width(); }
    int height() const { return re.height(); }
};

struct PyramidLevel {
    std::array<ComplexSubband, 6> bands;  // indexed in kOrientations order

    ComplexSubband& operator[](Orientation o) { return bands[static_cast<int>(o)]; }
    const ComplexSubband& operator[](Orientation o) const { return bands[static_cast<int>(o)]; }
};

struct Pyramid {
    std::vector<PyramidLevel> levels;
    Plane lowpass;
    int source_width = 0;
    int source_height = 0;

    int depth() const { return static_cast<int>(levels.size()); }
};

// Throws std::invalid_argument unless level shapes follow ceil(dim / 2^l).
void check_pyramid(const Pyramid& p);
bool same_shape(const Pyramid& a, const Pyramid& b);

// Whole-sample symmetric reflection: [1,2,3] with (2,1) -> [3,2,1,2,3,2].
std::vector<float> extend_symmetric(std::span<const float> line, std::size_t left, std::size_t right);
// Circular extension by 6 samples per side, giving the 2n+12 analysis frame.
std::vector<float> extend_periodic(std::span<const float> line);
// Folds a 2n+12 synthesis frame back onto n samples circularly.
void fold_periodic(std::span<const float> full, std::span<float> out);

struct LinePair {
    std::vector<float> lo;
    std::vector<float> hi;
};

// line must already be extended: length 2*outwidth + 12.
LinePair analysis_pair(std::span<const float> line, const Taps& lp, const Taps& hp, BackendId backend);
// Returns the 2*n+12 sample frame aligned with the analysis input.
std::vector<float> synthesis_pair(std::span<const float> lo, std::span<const float> hi, const Taps& lp_s,
                                  const Taps& hp_s, BackendId backend);

// LH: horizontal lowpass / vertical highpass. HL: horizontal highpass / vertical lowpass.
struct Subbands2D {
    Plane LL, LH, HL, HH;
};

// One separable level with circular boundaries, rows first then columns.
// Odd dimensions are first padded by repeating the last row/column.
Subbands2D dwt2d_level(const Plane& plane, const FilterPair& row_bank, const FilterPair& col_bank, BackendId backend);
// Inverse of dwt2d_level on the padded (even) grid.
Plane idwt2d_level(const Subbands2D& s, const FilterPair& row_synth, const FilterPair& col_synth, BackendId backend);
// LL only, for rebuilding lowpass chains.
Plane lowpass_level(const Plane& plane, const FilterPair& row_bank, const FilterPair& col_bank, BackendId backend);

// Row-only passes used by the engine driver and tests.
std::pair<Plane, Plane> analyze_rows(const Plane& plane, const FilterPair& bank, BackendId backend);
Plane synthesize_rows(const Plane& lo, const Plane& hi, const FilterPair& synth, BackendId backend);

int max_levels(int width, int height);

Pyramid dtcwt_forward(const Frame& frame, int levels, const FilterBank& bank, BackendId backend);
// backends[l] runs level l+1.
Pyramid dtcwt_forward(const Frame& frame, int levels, const FilterBank& bank, std::span<const BackendId> backends);
Frame dtcwt_inverse(const Pyramid& pyramid, const FilterBank& bank, BackendId backend);
Frame dtcwt_inverse(const Pyramid& pyramid, const FilterBank& bank, std::span<const BackendId> backends);

// Single-tree (tree a) real DWT, used as the shift-variance baseline.
struct RealPyramid {
    std::vector<std::array<Plane, 3>> levels;  // LH, HL, HH
    Plane lowpass;
};
RealPyramid dwt_forward(const Frame& frame, int levels, const FilterBank& bank, BackendId backend);

// "DTCP" dump, little-endian.
std::vector<std::uint8_t> dump_pyramid(const Pyramid& p);
Pyramid load_pyramid(std::span<const std::uint8_t> bytes);
void write_pyramid(const Pyramid& p, const std::filesystem::path& path);
Pyramid read_pyramid(const std::filesystem::path& path);

}  // namespace dtfuse
