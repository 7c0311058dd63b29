// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dtfuse Authors

#pragma once

#include <array>
#include <filesystem>
#include <string>

namespace dtfuse {

inline constexpr std::size_t kTaps = 12;
using Taps = std::array<float, kTaps>;

struct FilterPair {
    Taps lp{};
    Taps hp{};
};

enum class Tree { A, B };

// Analysis/synthesis taps for both trees. Every array is exactly 12 taps wide,
// zero padded. Deeper-level tree-b filters are the tap reversal of tree a.
struct FilterBank {
    FilterPair level1_analysis_a;
    FilterPair level1_analysis_b;
    FilterPair level1_synthesis_a;
    FilterPair level1_synthesis_b;
    FilterPair qshift_analysis_a;
    FilterPair qshift_synthesis_a;

    const FilterPair& level1_analysis(Tree t) const { return t == Tree::A ? level1_analysis_a : level1_analysis_b; }
    const FilterPair& level1_synthesis(Tree t) const { return t == Tree::A ? level1_synthesis_a : level1_synthesis_b; }
    FilterPair qshift_analysis(Tree t) const;
    FilterPair qshift_synthesis(Tree t) const;

    // Filters used at 1-based decomposition level `level`.
    FilterPair analysis(int level, Tree t) const;
    FilterPair synthesis(int level, Tree t) const;
};

Taps reversed(const Taps& t);

// Near-symmetric 5/7 biorthogonal pair at level 1, 10-tap quarter-shift pair deeper.
const FilterBank& default_filter_bank();

// Throws std::invalid_argument describing the first violated invariant:
// lowpass sums to sqrt(2), highpass sums to 0, and each analysis/synthesis
// pair reconstructs random periodic lines to 1e-6.
void validate_filter_bank(const FilterBank& bank);

// Worst reconstruction error over a few random periodic lines for one pair.
double pair_reconstruction_error(const FilterPair& analysis, const FilterPair& synthesis);

// key = comma separated 12 taps. Keys:
//   level1.a.analysis.lp  level1.a.analysis.hp  level1.a.synthesis.lp  level1.a.synthesis.hp
//   level1.b.*            qshift.analysis.lp    qshift.analysis.hp     qshift.synthesis.lp  qshift.synthesis.hp
// Missing keys keep the default bank's values. The result is validated.
FilterBank parse_filter_bank(const std::string& text);
FilterBank load_filter_bank(const std::filesystem::path& path);
std::string format_filter_bank(const FilterBank& bank);

}  // namespace dtfuse
