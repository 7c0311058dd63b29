// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dtfuse Authors

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dtfuse/backend.hpp"
#include "dtfuse/engine.hpp"

namespace dtfuse {

// What a cost query covers. Total is one fusion step: two forward
// transforms, the fusion rule and one inverse transform.
enum class Workload { Forward, Inverse, Total };

std::string_view to_string(Workload w);
Workload parse_workload(std::string_view s);

struct CostModelParams {
    double clock_hz = 1.0e8;
    double cmd_overhead_cycles = 0;
    double xfer_in_cycles_per_word = 0;
    double xfer_out_cycles_per_word = 0;
    double pipeline_depth = 0;
    double cpu_ns_per_tap_scalar = 0;
    double cpu_ns_per_tap_vector = 0;
    // Fixed CPU cost of every filtered line (loop setup, boundary extension).
    double cpu_ns_per_line = 0;
    // Fusion rule cost per coefficient position, same on every mode.
    double cpu_ns_per_fuse_coeff = 0;
    double power_base_mw = 0;
    double power_accel_extra_mw = 19.2;

    // Throws NotCalibrated unless every parameter is positive (cpu_ns_per_line may be 0).
    void require_calibrated() const;
    bool calibrated() const noexcept;
    EngineTiming engine_timing() const;
};

// Parameters produced by calibrate_to_paper with the built-in anchors.
CostModelParams paper_calibrated_params();

// key = value text, '#' comments.
std::string format_params(const CostModelParams& p);
CostModelParams parse_params(const std::string& text);
CostModelParams load_params(const std::filesystem::path& path);
void save_params(const CostModelParams& p, const std::filesystem::path& path);

// One group of identical line commands issued back to back (one plane pass).
struct PassSpec {
    Direction kind = Direction::Forward;
    std::size_t commands = 0;
    std::size_t outwidth = 0;
    int level = 1;  // pyramid level the pass belongs to
};

// Every line pass the transform code issues for a width x height frame.
std::vector<PassSpec> enumerate_passes(int width, int height, int levels, Workload w);
// Coefficient positions visited by the fusion rule (six bands per level plus lowpass).
std::size_t fuse_coefficients(int width, int height, int levels);
// 12 taps x 2 filters per output pair.
double tap_operations(int width, int height, int levels, Workload w);

// Seconds on one backend. Accel: double-buffered engine cycles / clock_hz.
double predict_time(const CostModelParams& p, BackendId backend, int width, int height, int levels, Workload w);
// Cost of only the passes that belong to `level` (1-based) within a
// `levels`-deep Forward or Inverse workload.
double predict_level_time(const CostModelParams& p, BackendId backend, int width, int height, int levels, int level,
                          Workload w);
// Fusion-rule cost, identical on every mode.
double predict_fuse_time(const CostModelParams& p, int width, int height, int levels);
double predict_cycles(const CostModelParams& p, int width, int height, int levels, Workload w);
double power_mw(const CostModelParams& p, BackendId backend);
// millijoules = power x seconds.
double predict_energy(const CostModelParams& p, BackendId backend, double seconds);

struct Anchor {
    std::string label;
    Workload workload = Workload::Forward;
    int width = 0;
    int height = 0;
    BackendId numerator = BackendId::Accel;
    BackendId denominator = BackendId::Scalar;
    double ratio = 1.0;  // time(numerator) / time(denominator)
    // Relative residual this anchor must stay under (capped by the options bound).
    double tolerance = 0.05;
};

// Forward, inverse and total at 88x72 for both offload modes, plus the
// 32x24 forward accelerator-versus-lanes slowdown.
std::vector<Anchor> paper_anchors();

// Square side interval in which a crossover must fall (exclusive bounds).
struct CrossoverTarget {
    Workload workload = Workload::Forward;
    bool energy = false;
    int lo_width = 0, lo_height = 0;
    int hi_width = 0, hi_height = 0;
};
std::vector<CrossoverTarget> paper_crossover_targets();

struct AnchorResidual {
    Anchor anchor;
    double model_ratio = 0;
    double residual = 0;  // |model - target| / target
};

struct CalibrationReport {
    CostModelParams params;
    std::vector<AnchorResidual> residuals;
    // Accel/Vector cost ratio at both ends of each crossover target.
    std::vector<std::pair<double, double>> crossover_ratios;
    bool crossovers_ok = false;
    double max_residual = 0;
    bool converged = false;
    std::string text() const;
};

struct CalibrationOptions {
    int levels = 3;
    double max_residual = 0.05;
    std::vector<CrossoverTarget> crossovers = paper_crossover_targets();
};

// Least-squares fit of the engine and CPU constants to anchor ratios, with
// the crossover placements as penalty terms, then a p-norm refinement that
// pushes the fit toward the smallest worst-case residual. Fills `report` when given.
// Throws CalibrationFailed when any anchor residual reaches max_residual or a
// crossover lands outside its interval.
CostModelParams calibrate_to_paper(const std::vector<Anchor>& anchors, const CalibrationOptions& opt = {},
                                   CalibrationReport* report = nullptr);
CalibrationReport evaluate_calibration(const CostModelParams& p, const std::vector<Anchor>& anchors,
                                       const CalibrationOptions& opt = {});

}  // namespace dtfuse
