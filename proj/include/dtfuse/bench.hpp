// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dtfuse Authors

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dtfuse/cost_model.hpp"
#include "dtfuse/dispatch.hpp"
#include "dtfuse/fusion.hpp"
#include "dtfuse/pgm.hpp"

namespace dtfuse {

struct BenchRecord {
    std::string mode;  // backend name or "auto"
    int width = 0;
    int height = 0;
    int levels = 0;
    int frames = 0;
    double t_forward_s = 0;
    double t_inverse_s = 0;
    double t_fuse_rule_s = 0;
    double t_total_s = 0;
    double power_mw = 0;
    double energy_mj = 0;
    Provenance provenance = Provenance::Measured;
};

// BenchRecord fields in order, then provenance. A leading '#' line carries
// run metadata such as the frame extraction method.
std::string bench_csv(const std::vector<BenchRecord>& records, const std::string& metadata = "extraction=center-crop");
std::vector<BenchRecord> parse_bench_csv(const std::string& text);

// Forward, inverse and fusion-rule fractions of each record's total time.
std::string share_csv(const std::vector<BenchRecord>& records);

struct PipelineConfig {
    std::filesystem::path input_a;
    std::filesystem::path input_b;
    FrameFormat format = FrameFormat::PgmSequence;
    Size size;  // required for raw-y8
    int levels = 3;
    FusionRule rule;
    std::optional<BackendId> backend;  // empty: adaptive dispatch
    Objective objective = Objective::MinTime;
    std::optional<CostModelParams> cost_model;  // defaults to paper_calibrated_params()
    std::filesystem::path output;  // directory for fused_NNNN.pgm; empty writes nothing
    int loop = 1;  // passes over the input sequence
};

struct FusionRun {
    std::vector<Frame> fused;
    std::vector<BenchRecord> records;  // one per fused frame
    DispatchPlan plan;
};

// Plan used for a mode: a forced backend on every level, or per-level argmin
// over a modeled cost table (see TableOptions for its depth).
DispatchPlan plan_for(std::optional<BackendId> backend, Size frame, int levels, Objective o,
                      const CostModelParams& params);

// Stage-timed fusion of one pair. Equal to fuse_frames under the same plan.
Frame fuse_timed(const Frame& a, const Frame& b, int levels, const FusionRule& rule, const DispatchPlan& plan,
                 BenchRecord& timing);

// Modeled stage costs for a plan. Mixed plans are costed level by level.
BenchRecord model_record(const DispatchPlan& plan, int levels, const CostModelParams& params);

FusionRun fuse_sequences(const std::vector<Frame>& a, const std::vector<Frame>& b, const PipelineConfig& cfg);
// Loads both inputs, fuses frame by frame and writes the outputs.
FusionRun run_fusion(const PipelineConfig& cfg);

Frame center_crop(const Frame& f, Size s);

// Seeded pair of one scene: A is sharp on the left half, B on the right.
std::pair<Frame, Frame> synthetic_pair(Size s, unsigned seed);

struct BenchOptions {
    std::vector<Size> sizes = {{32, 24}, {35, 35}, {40, 40}, {64, 48}, {88, 72}};
    std::vector<std::string> modes = {"scalar", "vector", "accel", "auto"};
    int frames = 10;
    int levels = 3;
    FusionRule rule;
    Objective objective = Objective::MinTime;
    unsigned seed = 1;
    // Source sequences; sizes are center crops of these. Empty: synthetic_pair at 88x72.
    std::vector<Frame> source_a, source_b;
};

// CPU-only modes are timed on this host (measured rows); every mode also
// gets a modeled row from the cost model. Throws UsageError for unknown modes or sizes larger than the source.
std::vector<BenchRecord> run_bench(const BenchOptions& opt, const CostModelParams& params);

// forward.svg, inverse_total.svg and energy.svg in `dir`; returns the paths.
std::vector<std::filesystem::path> emit_plots(const std::string& csv, const std::filesystem::path& dir);

}  // namespace dtfuse
