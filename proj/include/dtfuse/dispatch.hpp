// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dtfuse Authors

#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "dtfuse/backend.hpp"
#include "dtfuse/cost_model.hpp"

namespace dtfuse {

enum class Objective { MinTime, MinEnergy };
enum class Provenance { Measured, Modeled };
enum class TableSource { PaperModel, Microbenchmark };

std::string_view to_string(Objective o);
std::string_view to_string(Provenance p);
// "time" / "min-time", "energy" / "min-energy".
Objective parse_objective(std::string_view s);
Provenance parse_provenance(std::string_view s);

struct Size {
    int width = 0;
    int height = 0;
    auto operator<=>(const Size&) const = default;
};

// "88x72" -> {88, 72}; throws UsageError.
Size parse_size(std::string_view s);
std::vector<Size> parse_size_list(std::string_view s);
std::string to_string(Size s);

struct CostEntry {
    double time_s = 0;
    double energy_mj = 0;
    Provenance provenance = Provenance::Modeled;
    bool present = true;  // false: backend was unavailable when the table was built
};

class CostTable {
public:
    void insert(BackendId b, Size s, Workload w, const CostEntry& e);
    std::optional<CostEntry> exact(BackendId b, Size s, Workload w) const;
    // Exact hit or bilinear interpolation over the width x height grid.
    // Throws ExtrapolationRefused outside the grid hull or when a corner is missing.
    CostEntry query(BackendId b, Size s, Workload w) const;
    double cost(BackendId b, Size s, Workload w, Objective o) const;

    // Backends with at least one present entry, in Accel, Vector, Scalar order.
    std::vector<BackendId> backends() const;
    // The requested sizes ordered by pixel count, then width.
    const std::vector<Size>& sweep() const { return sweep_; }
    void set_sweep(std::vector<Size> s) { sweep_ = std::move(s); }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    using Key = std::tuple<BackendId, int, int, Workload>;
    const std::map<Key, CostEntry>& entries() const { return entries_; }

    // backend,width,height,direction,time_s,energy_mj,provenance
    std::string to_csv() const;
    static CostTable from_csv(const std::string& text);

private:
    std::map<Key, CostEntry> entries_;
    std::vector<Size> sweep_;
};

struct TableOptions {
    // Workload depth per entry. 3 is the depth the stored model constants were
    // fitted at, so the table keeps the fitted crossover placement.
    int levels = 3;
    int bench_frames = 10;       // repetitions per measured entry (median kept)
    unsigned seed = 1;
    std::vector<BackendId> backends = {BackendId::Scalar, BackendId::Vector, BackendId::Accel};
};

// PaperModel: every backend from the cost model. Microbenchmark: Scalar and
// Vector timed on this host, Accel from the model. Entries cover the
// cartesian grid of the requested widths and heights so bilinear lookups
// inside the sweep hull always resolve.
CostTable build_cost_table(TableSource source, const std::vector<Size>& sizes, const CostModelParams& params,
                           const TableOptions& opt = {});

// Argmin of the objective; ties go Accel, then Vector, then Scalar.
BackendId select_backend(const CostTable& table, Size s, Workload w, Objective o);

enum class Granularity { PerLevel, WholeTransform };

struct DispatchPlan {
    Objective objective = Objective::MinTime;
    Size frame;
    std::vector<BackendId> backends;  // one per level
};

// Level l (1-based) is chosen at ceil(dims / 2^(l-1)) with the single-level
// workload `w`. WholeTransform uses the level-1 choice everywhere.
DispatchPlan plan_pyramid(const CostTable& table, Size frame, int levels, Objective o,
                          Workload w = Workload::Total, Granularity g = Granularity::PerLevel);
DispatchPlan uniform_plan(BackendId b, Size frame, int levels);

// Adjacent pair of sweep sizes (ordered by pixel count) where the cheaper of
// a and b changes. Empty when the ordering never flips.
std::optional<std::pair<Size, Size>> find_crossover(const CostTable& table, BackendId a, BackendId b, Workload w,
                                                    Objective o);

// Default sweep for dispatch tables: square sides from 2 to 128, small
// enough for the deepest level of any legal pyramid on a 128x128 frame.
std::vector<Size> default_dispatch_grid();

}  // namespace dtfuse
