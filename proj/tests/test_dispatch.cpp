// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dtfuse Authors

#include <gtest/gtest.h>

#include <random>

#include "dtfuse/cost_model.hpp"
#include "dtfuse/dispatch.hpp"
#include "dtfuse/errors.hpp"
#include "dtfuse/fusion.hpp"
#include "test_support.hpp"

using namespace dtfuse;
using dtfuse::testing::random_frame;

namespace {

const std::vector<Size> kSweepSizes = {{32, 24}, {35, 35}, {40, 40}, {64, 48}, {88, 72}};

CostTable paper_table(int levels) {
    TableOptions opt;
    opt.levels = levels;
    return build_cost_table(TableSource::PaperModel, kSweepSizes, paper_calibrated_params(), opt);
}

const CostTable& dispatch_table() {
    static const CostTable t =
        build_cost_table(TableSource::PaperModel, default_dispatch_grid(), paper_calibrated_params());
    return t;
}

// time = 1 + w + 2h for Scalar, energy = 3 * time
CostTable linear_table(const std::vector<int>& ws, const std::vector<int>& hs) {
    CostTable t;
    for (int w : ws)
        for (int h : hs) {
            const double time = 1.0 + w + 2.0 * h;
            t.insert(BackendId::Scalar, {w, h}, Workload::Forward, {time, 3 * time, Provenance::Measured, true});
        }
    return t;
}

BackendId brute_argmin(const CostTable& t, Size s, Workload w, Objective o) {
    // strict < in Accel, Vector, Scalar order keeps the documented tie-break
    std::optional<BackendId> best;
    double cost = 0;
    for (BackendId b : {BackendId::Accel, BackendId::Vector, BackendId::Scalar}) {
        double c;
        try {
            c = t.cost(b, s, w, o);
        } catch (const ExtrapolationRefused&) {
            continue;
        }
        if (!best || c < cost) {
            best = b;
            cost = c;
        }
    }
    return *best;
}

}  // namespace

// ---- cost model ----

TEST(CostModel, ParamsTextRoundTrip) {
    const CostModelParams p = paper_calibrated_params();
    const CostModelParams q = parse_params(format_params(p));
    EXPECT_EQ(q.cmd_overhead_cycles, p.cmd_overhead_cycles);
    EXPECT_EQ(q.cpu_ns_per_tap_vector, p.cpu_ns_per_tap_vector);
    EXPECT_EQ(q.power_base_mw, p.power_base_mw);
    const CostModelParams r = parse_params("# comment\n[costmodel]\nclock_hz = 2e8\nfusion.highpass_rule = max\n");
    EXPECT_EQ(r.clock_hz, 2e8);
    EXPECT_THROW(parse_params("cpu_ns_per_tap = 3\n"), std::invalid_argument);
    EXPECT_THROW(parse_params("clock_hz = fast\n"), std::invalid_argument);
    EXPECT_THROW(parse_params("clock_hz\n"), std::invalid_argument);
}

TEST(CostModel, UncalibratedRefused) {
    const CostModelParams p;
    EXPECT_FALSE(p.calibrated());
    EXPECT_THROW(predict_time(p, BackendId::Scalar, 88, 72, 1, Workload::Forward), NotCalibrated);
    EXPECT_THROW(build_cost_table(TableSource::PaperModel, kSweepSizes, p), NotCalibrated);
    EXPECT_TRUE(paper_calibrated_params().calibrated());
}

TEST(CostModel, PassEnumeration) {
    // 88x72, one level: two row passes of 72 lines (ow 44), eight column passes of 44 lines (ow 36)
    const auto f = enumerate_passes(88, 72, 1, Workload::Forward);
    ASSERT_EQ(f.size(), 10u);
    EXPECT_EQ(f[0].commands, 72u);
    EXPECT_EQ(f[0].outwidth, 44u);
    EXPECT_EQ(f[9].commands, 44u);
    EXPECT_EQ(f[9].outwidth, 36u);
    EXPECT_EQ(tap_operations(88, 72, 1, Workload::Forward), 24.0 * (2 * 72 * 44 + 8 * 44 * 36));
    // odd sizes are padded: 35 -> 36
    EXPECT_EQ(enumerate_passes(35, 35, 1, Workload::Forward)[0].outwidth, 18u);
    EXPECT_EQ(fuse_coefficients(88, 72, 1), 7u * 44 * 36);
    EXPECT_EQ(fuse_coefficients(88, 72, 2), 6u * 44 * 36 + 7u * 22 * 18);
    const auto t = enumerate_passes(88, 72, 2, Workload::Total);
    EXPECT_EQ(t.size(), 2 * enumerate_passes(88, 72, 2, Workload::Forward).size() +
                            enumerate_passes(88, 72, 2, Workload::Inverse).size());
}

TEST(CostModel, LevelCostsSumToWhole) {
    const CostModelParams p = paper_calibrated_params();
    for (BackendId b : kAllBackends)
        for (Workload w : {Workload::Forward, Workload::Inverse}) {
            double sum = 0;
            for (int l = 1; l <= 3; ++l) sum += predict_level_time(p, b, 88, 72, 3, l, w);
            EXPECT_NEAR(sum, predict_time(p, b, 88, 72, 3, w), 1e-12 * sum);
        }
    const double total = predict_time(p, BackendId::Vector, 64, 48, 3, Workload::Total);
    EXPECT_NEAR(total,
                2 * predict_time(p, BackendId::Vector, 64, 48, 3, Workload::Forward) +
                    predict_time(p, BackendId::Vector, 64, 48, 3, Workload::Inverse) +
                    predict_fuse_time(p, 64, 48, 3),
                1e-12 * total);
    EXPECT_THROW(predict_level_time(p, BackendId::Scalar, 88, 72, 3, 4, Workload::Forward), std::invalid_argument);
}

TEST(CostModel, PowerPremium) {
    const CostModelParams p = paper_calibrated_params();
    EXPECT_NEAR(power_mw(p, BackendId::Accel) - power_mw(p, BackendId::Scalar), 19.2, 1e-9);
    EXPECT_NEAR(19.2 / power_mw(p, BackendId::Scalar), 0.036, 1e-12);
    EXPECT_EQ(power_mw(p, BackendId::Vector), power_mw(p, BackendId::Scalar));
    EXPECT_DOUBLE_EQ(predict_energy(p, BackendId::Accel, 2.0), 2.0 * power_mw(p, BackendId::Accel));
}

TEST(Calibration, StoredParamsMeetEveryAnchor) {
    const auto rep = evaluate_calibration(paper_calibrated_params(), paper_anchors(), {});
    EXPECT_TRUE(rep.converged) << rep.text();
    ASSERT_EQ(rep.residuals.size(), 7u);
    for (const auto& r : rep.residuals) EXPECT_LT(r.residual, 0.05) << r.anchor.label;
    EXPECT_TRUE(rep.crossovers_ok);
}

TEST(Calibration, ContradictoryAnchorsFail) {
    const auto base = paper_anchors();
    std::vector<Anchor> bad = {base[1], base[1]};
    bad[1].ratio = 0.5;  // same workload cannot be both 0.9 and 0.5
    CalibrationOptions opt;
    opt.crossovers.clear();
    try {
        calibrate_to_paper(bad, opt);
        FAIL() << "expected CalibrationFailed";
    } catch (const CalibrationFailed& e) {
        EXPECT_NE(e.report().find("max residual"), std::string::npos);
    }
    EXPECT_THROW(calibrate_to_paper({}, opt), std::invalid_argument);
    bad[0].numerator = bad[0].denominator;
    EXPECT_THROW(calibrate_to_paper(bad, opt), std::invalid_argument);
}

// ---- sizes ----

TEST(Sizes, Parse) {
    EXPECT_EQ(parse_size("88x72"), (Size{88, 72}));
    EXPECT_EQ(parse_size_list("32x24,35x35").size(), 2u);
    EXPECT_EQ(to_string(Size{64, 48}), "64x48");
    EXPECT_THROW(parse_size("88*72"), UsageError);
    EXPECT_THROW(parse_size("0x5"), UsageError);
    EXPECT_THROW(parse_size("12x"), UsageError);
    EXPECT_THROW(parse_size_list("32x24,big"), UsageError);
    EXPECT_EQ(parse_objective("energy"), Objective::MinEnergy);
}

// ---- table ----

TEST(CostTable, BilinearIsExactOnLinearCosts) {
    const CostTable t = linear_table({10, 20, 40}, {10, 30});
    for (Size s : {Size{10, 10}, Size{15, 10}, Size{33, 17}, Size{40, 30}, Size{21, 29}}) {
        const CostEntry e = t.query(BackendId::Scalar, s, Workload::Forward);
        EXPECT_NEAR(e.time_s, 1.0 + s.width + 2.0 * s.height, 1e-9) << to_string(s);
        EXPECT_NEAR(e.energy_mj, 3.0 * (1.0 + s.width + 2.0 * s.height), 1e-9);
        EXPECT_EQ(e.provenance, Provenance::Measured);
    }
}

TEST(CostTable, RefusesExtrapolation) {
    const CostTable t = linear_table({10, 20}, {10, 20});
    EXPECT_THROW(t.query(BackendId::Scalar, {9, 15}, Workload::Forward), ExtrapolationRefused);
    EXPECT_THROW(t.query(BackendId::Scalar, {15, 21}, Workload::Forward), ExtrapolationRefused);
    EXPECT_THROW(t.query(BackendId::Vector, {15, 15}, Workload::Forward), ExtrapolationRefused);
    EXPECT_THROW(t.query(BackendId::Scalar, {15, 15}, Workload::Inverse), ExtrapolationRefused);
    EXPECT_THROW(select_backend(CostTable{}, {15, 15}, Workload::Forward, Objective::MinTime), ExtrapolationRefused);
}

TEST(CostTable, EmptySizeListGivesEmptyTable) {
    EXPECT_TRUE(build_cost_table(TableSource::PaperModel, {}, paper_calibrated_params()).empty());
}

TEST(CostTable, CsvRoundTrip) {
    const CostTable t = paper_table(1);
    const CostTable u = CostTable::from_csv(t.to_csv());
    EXPECT_EQ(u.size(), t.size());
    EXPECT_EQ(u.sweep(), t.sweep());
    for (const auto& [k, e] : t.entries()) {
        const auto f = u.exact(std::get<0>(k), {std::get<1>(k), std::get<2>(k)}, std::get<3>(k));
        ASSERT_TRUE(f);
        EXPECT_EQ(f->time_s, e.time_s);
        EXPECT_EQ(f->energy_mj, e.energy_mj);
        EXPECT_EQ(f->provenance, e.provenance);
    }
    EXPECT_EQ(t.to_csv().substr(0, t.to_csv().find('\n')), "backend,width,height,direction,time_s,energy_mj,provenance");
    // without the trailing sweep comment the sweep falls back to every grid size
    std::string bare = t.to_csv();
    bare.erase(bare.find("# sweep="));
    EXPECT_EQ(CostTable::from_csv(bare).sweep().size(), 25u);
    EXPECT_THROW(CostTable::from_csv("nonsense\n"), InvalidInput);
    EXPECT_THROW(CostTable::from_csv("backend,width,height,direction,time_s,energy_mj,provenance\nscalar,1\n"),
                 InvalidInput);
}

TEST(CostTable, CoversCartesianGridAndSweepOrder) {
    const CostTable t = paper_table(1);
    // 5 widths x 5 heights x 3 backends x 3 directions
    EXPECT_EQ(t.size(), 5u * 5 * 3 * 3);
    ASSERT_EQ(t.sweep().size(), 5u);
    EXPECT_EQ(t.sweep().front(), (Size{32, 24}));
    EXPECT_EQ(t.sweep().back(), (Size{88, 72}));
    EXPECT_NO_THROW(t.query(BackendId::Accel, {50, 30}, Workload::Total));
}

TEST(CostTable, MicrobenchmarkVectorBeatsScalar) {
    TableOptions opt;
    opt.backends = {BackendId::Scalar, BackendId::Vector};
    opt.bench_frames = 10;
    const CostTable t =
        build_cost_table(TableSource::Microbenchmark, {{64, 48}, {88, 72}}, paper_calibrated_params(), opt);
    for (Size s : {Size{64, 48}, Size{88, 72}}) {
        const auto e = t.query(BackendId::Vector, s, Workload::Forward);
        EXPECT_EQ(e.provenance, Provenance::Measured);
        EXPECT_GT(e.time_s, 0);
        EXPECT_LT(e.time_s, t.query(BackendId::Scalar, s, Workload::Forward).time_s) << to_string(s);
    }
    EXPECT_EQ(t.backends(), (std::vector<BackendId>{BackendId::Vector, BackendId::Scalar}));
}

// ---- decisions ----

TEST(SelectBackend, TieBreakOrder) {
    CostTable t;
    for (BackendId b : kAllBackends) t.insert(b, {10, 10}, Workload::Forward, {1.0, 1.0, Provenance::Modeled, true});
    EXPECT_EQ(select_backend(t, {10, 10}, Workload::Forward, Objective::MinTime), BackendId::Accel);
    t.insert(BackendId::Accel, {10, 10}, Workload::Forward, {2.0, 2.0, Provenance::Modeled, true});
    EXPECT_EQ(select_backend(t, {10, 10}, Workload::Forward, Objective::MinTime), BackendId::Vector);
    t.insert(BackendId::Vector, {10, 10}, Workload::Forward, {0, 0, Provenance::Modeled, false});
    EXPECT_EQ(select_backend(t, {10, 10}, Workload::Forward, Objective::MinTime), BackendId::Scalar);
}

TEST(SelectBackend, ReferenceExamples) {
    const CostTable t = paper_table(3);
    EXPECT_EQ(select_backend(t, {32, 24}, Workload::Forward, Objective::MinTime), BackendId::Vector);
    EXPECT_EQ(select_backend(t, {88, 72}, Workload::Forward, Objective::MinTime), BackendId::Accel);
    EXPECT_EQ(select_backend(t, {64, 48}, Workload::Total, Objective::MinEnergy), BackendId::Accel);
}

TEST(SelectBackend, ArgminInvariantUnderScaling) {
    const CostTable& t = dispatch_table();
    CostTable scaled;
    for (const auto& [k, e] : t.entries()) {
        CostEntry f = e;
        f.time_s *= 7.5;
        f.energy_mj *= 7.5;
        scaled.insert(std::get<0>(k), {std::get<1>(k), std::get<2>(k)}, std::get<3>(k), f);
    }
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> d(8, 128);
    for (int i = 0; i < 50; ++i) {
        const Size s{d(rng), d(rng)};
        for (Objective o : {Objective::MinTime, Objective::MinEnergy})
            EXPECT_EQ(select_backend(t, s, Workload::Total, o), select_backend(scaled, s, Workload::Total, o));
    }
}

TEST(PlanPyramid, MatchesBruteForceArgmin) {
    const CostTable& t = dispatch_table();
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> d(32, 128), lv(1, 3);
    for (int i = 0; i < 20; ++i) {
        const Size s{d(rng), d(rng)};
        const int levels = lv(rng);
        for (Objective o : {Objective::MinTime, Objective::MinEnergy}) {
            const DispatchPlan p = plan_pyramid(t, s, levels, o);
            ASSERT_EQ(p.backends.size(), static_cast<std::size_t>(levels));
            Size dims = s;
            for (int l = 0; l < levels; ++l) {
                EXPECT_EQ(p.backends[l], brute_argmin(t, dims, Workload::Total, o)) << to_string(s) << " level " << l;
                dims = {(dims.width + 1) / 2, (dims.height + 1) / 2};
            }
        }
    }
}

TEST(PlanPyramid, ReferenceExamples) {
    const CostTable& t = dispatch_table();
    // 44x36 sits just under the forward crossover, so the time-optimal forward plan drops off the engine after level 1
    const DispatchPlan p = plan_pyramid(t, {88, 72}, 3, Objective::MinTime, Workload::Forward);
    EXPECT_EQ(p.backends, (std::vector<BackendId>{BackendId::Accel, BackendId::Vector, BackendId::Vector}));
    EXPECT_THROW(plan_pyramid(t, {8, 8}, 4, Objective::MinTime), std::invalid_argument);
    for (int levels = 1; levels <= 3; ++levels)
        for (BackendId b : plan_pyramid(t, {32, 24}, levels, Objective::MinTime).backends)
            EXPECT_EQ(b, BackendId::Vector);
    // single available backend
    CostTable only;
    for (int w : {8, 128})
        for (int h : {8, 128}) only.insert(BackendId::Scalar, {w, h}, Workload::Total, {1.0, 1.0, Provenance::Modeled, true});
    for (BackendId b : plan_pyramid(only, {88, 72}, 3, Objective::MinEnergy).backends) EXPECT_EQ(b, BackendId::Scalar);
    const DispatchPlan whole =
        plan_pyramid(t, {88, 72}, 3, Objective::MinTime, Workload::Total, Granularity::WholeTransform);
    EXPECT_EQ(whole.backends, (std::vector<BackendId>(3, BackendId::Accel)));
}

TEST(PlanPyramid, SwitchesAtMostOnce) {
    const CostTable& t = dispatch_table();
    for (int side = 8; side <= 128; side += 5)
        for (Objective o : {Objective::MinTime, Objective::MinEnergy}) {
            const auto b = plan_pyramid(t, {side, side}, std::min(4, max_levels(side, side)), o).backends;
            int switches = 0;
            for (std::size_t i = 1; i < b.size(); ++i) switches += b[i] != b[i - 1];
            EXPECT_LE(switches, 1) << side;
            // Accel only ever on the larger, earlier levels
            for (std::size_t i = 1; i < b.size(); ++i)
                if (b[i] == BackendId::Accel) {
                    EXPECT_EQ(b[i - 1], BackendId::Accel);
                }
        }
}

TEST(PlanPyramid, ThresholdMonotoneOverSweep) {
    const CostTable t = paper_table(3);
    for (auto [w, o] : {std::pair{Workload::Forward, Objective::MinTime}, std::pair{Workload::Total, Objective::MinEnergy}}) {
        bool accel_seen = false;
        for (Size s : t.sweep()) {
            const bool accel = select_backend(t, s, w, o) == BackendId::Accel;
            if (accel_seen) {
                EXPECT_TRUE(accel) << to_string(s);
            }
            accel_seen = accel_seen || accel;
        }
        EXPECT_TRUE(accel_seen);
    }
}

TEST(PlanPyramid, AnyPlanMatchesScalarOutput) {
    const Frame a = random_frame(64, 48, 1), b = random_frame(64, 48, 2);
    const Frame ref = fuse_frames(a, b, 3, {}, uniform_plan(BackendId::Scalar, {64, 48}, 3));
    for (auto plan : {plan_pyramid(dispatch_table(), {64, 48}, 3, Objective::MinTime),
                      DispatchPlan{Objective::MinTime, {64, 48}, {BackendId::Vector, BackendId::Accel, BackendId::Scalar}},
                      uniform_plan(BackendId::Accel, {64, 48}, 3)})
        EXPECT_LT(max_rel_diff(fuse_frames(a, b, 3, {}, plan), ref), 1e-5);
}

TEST(FindCrossover, AnchorIntervals) {
    const CostTable t = paper_table(3);
    const auto time = find_crossover(t, BackendId::Accel, BackendId::Vector, Workload::Forward, Objective::MinTime);
    ASSERT_TRUE(time);
    EXPECT_EQ(time->first, (Size{35, 35}));
    EXPECT_EQ(time->second, (Size{40, 40}));
    const auto energy = find_crossover(t, BackendId::Accel, BackendId::Vector, Workload::Total, Objective::MinEnergy);
    ASSERT_TRUE(energy);
    EXPECT_EQ(energy->first, (Size{40, 40}));
    EXPECT_EQ(energy->second, (Size{64, 48}));
    EXPECT_FALSE(find_crossover(t, BackendId::Scalar, BackendId::Scalar, Workload::Forward, Objective::MinTime));
    // Vector beats Scalar everywhere: no flip
    EXPECT_FALSE(find_crossover(t, BackendId::Vector, BackendId::Scalar, Workload::Forward, Objective::MinTime));
}
