// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dtfuse Authors

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dtfuse/engine.hpp"
#include "dtfuse/filter_bank.hpp"

namespace dtfuse {

enum class BackendId { Scalar, Vector, Accel };

inline constexpr BackendId kAllBackends[] = {BackendId::Scalar, BackendId::Vector, BackendId::Accel};

std::string_view to_string(BackendId id);
// Accepts "scalar", "vector", "accel"; throws std::invalid_argument otherwise.
BackendId parse_backend(std::string_view s);

// Line primitives shared by every backend.
//
// analysis_line: lo[k] = sum_j lp[j] * x[2k+j], hi likewise, for k < lo.size();
//   x.size() must equal 2*lo.size() + 12.
// synthesis_line: y[2k+j] += lo[k]*lp[j], then += hi[k]*hp[j], k ascending;
//   y.size() must equal 2*lo.size() + 12 and is overwritten.
void analysis_line(BackendId id, std::span<const float> x, const Taps& lp, const Taps& hp,
                   std::span<float> lo, std::span<float> hi);
void synthesis_line(BackendId id, std::span<const float> lo, std::span<const float> hi, const Taps& lp,
                    const Taps& hp, std::span<float> y);

// Lane-grouped dot product: 4-wide groups, pairwise horizontal reduction per
// group, scalar tail for the remainder. Exposed for tail-path testing.
float lane_dot(std::span<const float> a, std::span<const float> b);

// Engine instance behind the Accel backend on the calling thread; exposed so
// callers can read or reset its cycle counter.
EngineState& accel_engine();

struct CapabilityReport {
    std::vector<BackendId> available;
    int lane_width = 4;
    bool vector_native = false;  // false: Vector runs the portable fallback path
    std::string lane_isa;        // "sse", "neon" or "none"

    bool has(BackendId id) const;
    // Comma separated mode tokens as used in bench CSV, e.g. "scalar,vector,accel".
    std::string modes_csv() const;
};

CapabilityReport capability_report();

struct EquivalenceEntry {
    int width = 0;
    int height = 0;
    double max_rel_deviation = 0;
    bool pass = false;
};

struct EquivalenceReport {
    BackendId reference = BackendId::Scalar;
    BackendId candidate = BackendId::Scalar;
    double tolerance = 1e-5;
    std::vector<EquivalenceEntry> entries;

    bool pass() const;
    double max_rel_deviation() const;
};

// Forward + inverse on seeded random frames for each size, comparing every
// pyramid coefficient and the reconstruction. levels = 0 picks the deepest
// level up to 3 that the size admits.
EquivalenceReport verify_equivalence(BackendId reference, BackendId candidate,
                                     const std::vector<std::pair<int, int>>& sizes, double tolerance = 1e-5,
                                     unsigned seed = 1, int levels = 0);

}  // namespace dtfuse
