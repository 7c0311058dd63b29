// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dtfuse Authors

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "dtfuse/bench.hpp"
#include "dtfuse/errors.hpp"
#include "dtfuse/wavelet.hpp"

using namespace dtfuse;

namespace {

enum Exit { kOk = 0, kFailed = 1, kUsage = 2, kParse = 3, kCalibration = 4 };

struct Globals {
    std::string backend = "auto";
    std::string objective = "time";
    int levels = 3;
    std::string rule = "max";
    std::string cost_model;
    std::string config;
    unsigned seed = 1;

    std::optional<BackendId> forced() const {
        if (backend == "auto") return std::nullopt;
        return parse_backend(backend);
    }
    CostModelParams params() const {
        if (cost_model.empty()) return paper_calibrated_params();
        try {
            return load_params(cost_model);
        } catch (const std::invalid_argument& e) {
            throw ParseError(e.what(), 0);
        }
    }
    FusionRule fusion_rule() const {
        FusionRule r;
        if (!config.empty()) {
            std::ifstream in(config);
            if (!in) throw InvalidInput("cannot open " + config);
            std::stringstream ss;
            ss << in.rdbuf();
            r = parse_fusion_config(ss.str(), r);
        }
        r.highpass = parse_highpass_rule(rule);
        return r;
    }
};

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write " + path);
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dtfuse: dual-tree complex wavelet image fusion with backend dispatch"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--backend", g.backend, "scalar|vector|accel|auto")
        ->check(CLI::IsMember({"scalar", "vector", "accel", "auto"}));
    app.add_option("--objective", g.objective, "time|energy")->check(CLI::IsMember({"time", "energy"}));
    app.add_option("--levels", g.levels, "decomposition levels")->check(CLI::PositiveNumber);
    app.add_option("--rule", g.rule, "highpass rule: max|mean")->check(CLI::IsMember({"max", "mean"}));
    app.add_option("--cost-model", g.cost_model, "key = value cost model parameters");
    app.add_option("--config", g.config, "key = value file with fusion.highpass_rule / fusion.lowpass_rule");
    app.add_option("--seed", g.seed, "seed for generated inputs");

    // fuse
    auto* fuse = app.add_subcommand("fuse", "fuse two frame sequences");
    PipelineConfig pc;
    std::string format = "pgm", size_text, records_out;
    fuse->add_option("input_a", pc.input_a, "PGM file, PGM directory or raw-y8 stream")->required();
    fuse->add_option("input_b", pc.input_b)->required();
    fuse->add_option("-o,--out", pc.output, "output directory for fused_NNNN.pgm");
    fuse->add_option("--format", format, "pgm|raw-y8")->check(CLI::IsMember({"pgm", "raw-y8"}));
    fuse->add_option("--size", size_text, "WIDTHxHEIGHT, required for raw-y8");
    fuse->add_option("--loop", pc.loop, "passes over the input, simulating a stream")->check(CLI::PositiveNumber);
    fuse->add_option("--records", records_out, "write per-frame bench records as CSV");

    // bench
    auto* bench = app.add_subcommand("bench", "time the pipeline over a size sweep");
    BenchOptions bo;
    std::string sizes_text = "32x24,35x35,40x40,64x48,88x72", modes_text = "scalar,vector,accel,auto", bench_dir = ".";
    std::string bench_a, bench_b;
    bench->add_option("--sizes", sizes_text, "comma separated WIDTHxHEIGHT list");
    bench->add_option("--modes", modes_text, "comma separated modes");
    bench->add_option("--frames", bo.frames, "frames per size and mode")->check(CLI::PositiveNumber);
    bench->add_option("--out-dir", bench_dir, "directory for bench.csv, shares.csv and plots");
    bench->add_option("--input-a", bench_a, "source sequence A (PGM); default is a generated pair");
    bench->add_option("--input-b", bench_b, "source sequence B (PGM)");

    // calibrate
    auto* cal = app.add_subcommand("calibrate", "build a dispatch cost table");
    std::string source = "paper", cal_sizes = "32x24,35x35,40x40,64x48,88x72", table_out = "-", params_out;
    bool refit = false;
    int table_levels = 0;
    cal->add_option("--source", source, "paper|bench")->check(CLI::IsMember({"paper", "bench"}));
    cal->add_option("--sizes", cal_sizes, "comma separated WIDTHxHEIGHT list");
    cal->add_option("--out", table_out, "cost table CSV ('-' for stdout)");
    cal->add_option("--table-levels", table_levels, "workload depth per entry (default: --levels)");
    cal->add_flag("--refit", refit, "re-run the anchor fit instead of the stored calibration");
    cal->add_option("--params-out", params_out, "write the cost model parameters");

    // transform
    auto* tr = app.add_subcommand("transform", "single forward or inverse transform");
    std::string tr_in, tr_dump, tr_out;
    bool tr_inverse = false;
    tr->add_option("input", tr_in, "PGM frame (forward) or pyramid dump (--inverse)")->required();
    tr->add_flag("--inverse", tr_inverse, "reconstruct a frame from a pyramid dump");
    tr->add_option("--dump", tr_dump, "pyramid dump output (forward)");
    tr->add_option("-o,--out", tr_out, "reconstructed PGM output");

    // verify
    auto* ver = app.add_subcommand("verify", "check backend equivalence against scalar");
    std::string ver_sizes = "32x24,35x35,40x40,64x48,88x72";
    double tol = 1e-5;
    ver->add_option("--sizes", ver_sizes, "comma separated WIDTHxHEIGHT list");
    ver->add_option("--tolerance", tol, "max relative deviation");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        const Objective obj = parse_objective(g.objective);
        if (*fuse) {
            pc.format = parse_frame_format(format);
            if (!size_text.empty()) pc.size = parse_size(size_text);
            pc.levels = g.levels;
            pc.rule = g.fusion_rule();
            pc.backend = g.forced();
            pc.objective = obj;
            pc.cost_model = g.params();
            const FusionRun run = run_fusion(pc);
            std::cerr << "fused " << run.fused.size() << " frames, plan";
            for (BackendId b : run.plan.backends) std::cerr << ' ' << to_string(b);
            std::cerr << '\n';
            if (!records_out.empty()) write_text(records_out, bench_csv(run.records, ""));
        } else if (*bench) {
            bo.sizes = parse_size_list(sizes_text);
            bo.modes.clear();
            std::stringstream ms(modes_text);
            for (std::string m; std::getline(ms, m, ',');)
                if (!m.empty()) bo.modes.push_back(m);
            bo.levels = g.levels;
            bo.rule = g.fusion_rule();
            bo.objective = obj;
            bo.seed = g.seed;
            if (bench_a.empty() != bench_b.empty()) throw UsageError("--input-a and --input-b go together");
            if (!bench_a.empty()) {
                bo.source_a = load_frames(bench_a, FrameFormat::PgmSequence);
                bo.source_b = load_frames(bench_b, FrameFormat::PgmSequence);
            }
            const auto records = run_bench(bo, g.params());
            std::filesystem::create_directories(bench_dir);
            const std::string csv = bench_csv(records);
            write_text((std::filesystem::path(bench_dir) / "bench.csv").string(), csv);
            write_text((std::filesystem::path(bench_dir) / "shares.csv").string(), share_csv(records));
            for (const auto& p : emit_plots(csv, bench_dir)) std::cerr << "wrote " << p.string() << '\n';
            std::cout << csv;
        } else if (*cal) {
            CostModelParams params = g.params();
            if (refit) {
                CalibrationReport rep;
                params = calibrate_to_paper(paper_anchors(), {}, &rep);
                std::cerr << rep.text();
            }
            if (!params_out.empty()) save_params(params, params_out);
            TableOptions to;
            to.levels = table_levels > 0 ? table_levels : g.levels;
            to.seed = g.seed;
            const auto src = source == "paper" ? TableSource::PaperModel : TableSource::Microbenchmark;
            const CostTable table = build_cost_table(src, parse_size_list(cal_sizes), params, to);
            write_text(table_out, table.to_csv());
            for (Workload w : {Workload::Forward, Workload::Total}) {
                const Objective o = w == Workload::Forward ? Objective::MinTime : Objective::MinEnergy;
                if (auto c = find_crossover(table, BackendId::Accel, BackendId::Vector, w, o))
                    std::cerr << "accel/vector " << to_string(w) << ' ' << to_string(o) << " crossover between "
                              << to_string(c->first) << " and " << to_string(c->second) << '\n';
            }
        } else if (*tr) {
            const FilterBank& bank = default_filter_bank();
            const BackendId b = g.forced().value_or(BackendId::Scalar);
            if (tr_inverse) {
                Pyramid p;
                try {
                    p = read_pyramid(tr_in);
                } catch (const std::invalid_argument& e) {
                    throw ParseError(e.what(), 0);
                }
                if (tr_out.empty()) throw UsageError("--inverse needs -o/--out");
                write_pgm(tr_out, dtcwt_inverse(p, bank, b));
            } else {
                const auto frames = load_frames(tr_in, FrameFormat::PgmSequence);
                const Pyramid p = dtcwt_forward(frames.front(), g.levels, bank, b);
                if (!tr_dump.empty()) write_pyramid(p, tr_dump);
                if (!tr_out.empty()) write_pgm(tr_out, dtcwt_inverse(p, bank, b));
                std::cerr << "levels " << p.depth() << ", lowpass " << p.lowpass.width() << "x" << p.lowpass.height()
                          << '\n';
            }
        } else if (*ver) {
            std::vector<std::pair<int, int>> sizes;
            for (Size s : parse_size_list(ver_sizes)) sizes.emplace_back(s.width, s.height);
            bool ok = true;
            for (BackendId cand : capability_report().available) {
                if (cand == BackendId::Scalar) continue;
                const auto rep = verify_equivalence(BackendId::Scalar, cand, sizes, tol, g.seed);
                for (const auto& e : rep.entries)
                    std::cout << to_string(cand) << ' ' << e.width << 'x' << e.height << " max_rel "
                              << e.max_rel_deviation << (e.pass ? " ok" : " FAIL") << '\n';
                ok = ok && rep.pass();
            }
            return ok ? kOk : kFailed;
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kParse;
    } catch (const InvalidInput& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kParse;
    } catch (const CalibrationFailed& e) {
        std::cerr << "calibration failed: " << e.what() << '\n' << e.report();
        return kCalibration;
    } catch (const NotCalibrated& e) {
        std::cerr << "calibration failed: " << e.what() << '\n';
        return kCalibration;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailed;
    }
    return kOk;
}
