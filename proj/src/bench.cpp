// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dtfuse Authors

#include "dtfuse/bench.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

#include "dtfuse/errors.hpp"
#include "dtfuse/wavelet.hpp"

namespace dtfuse {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

constexpr const char* kHeader =
    "mode,width,height,levels,frames,t_forward_s,t_inverse_s,t_fuse_rule_s,t_total_s,power_mw,energy_mj,provenance";

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, sep)) out.push_back(cell);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

void accumulate(BenchRecord& into, const BenchRecord& r) {
    into.t_forward_s += r.t_forward_s;
    into.t_inverse_s += r.t_inverse_s;
    into.t_fuse_rule_s += r.t_fuse_rule_s;
    into.t_total_s += r.t_total_s;
    into.energy_mj += r.energy_mj;
}

}  // namespace

// ---- CSV ----

std::string bench_csv(const std::vector<BenchRecord>& records, const std::string& metadata) {
    std::ostringstream out;
    if (!metadata.empty()) out << "# " << metadata << '\n';
    out << kHeader << '\n' << std::setprecision(17);  // lossless round trip
    for (const auto& r : records)
        out << r.mode << ',' << r.width << ',' << r.height << ',' << r.levels << ',' << r.frames << ','
            << r.t_forward_s << ',' << r.t_inverse_s << ',' << r.t_fuse_rule_s << ',' << r.t_total_s << ','
            << r.power_mw << ',' << r.energy_mj << ',' << to_string(r.provenance) << '\n';
    return out.str();
}

std::vector<BenchRecord> parse_bench_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    bool header = false;
    std::vector<BenchRecord> out;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            if (line != kHeader) throw InvalidInput("bench CSV: unexpected header");
            header = true;
            continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 12) throw InvalidInput("bench CSV line " + std::to_string(lineno) + ": expected 12 fields");
        try {
            BenchRecord r;
            r.mode = f[0];
            r.width = std::stoi(f[1]);
            r.height = std::stoi(f[2]);
            r.levels = std::stoi(f[3]);
            r.frames = std::stoi(f[4]);
            r.t_forward_s = std::stod(f[5]);
            r.t_inverse_s = std::stod(f[6]);
            r.t_fuse_rule_s = std::stod(f[7]);
            r.t_total_s = std::stod(f[8]);
            r.power_mw = std::stod(f[9]);
            r.energy_mj = std::stod(f[10]);
            r.provenance = parse_provenance(f[11]);
            out.push_back(r);
        } catch (const std::invalid_argument& e) {
            throw InvalidInput("bench CSV line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (!header) throw InvalidInput("bench CSV: header missing");
    return out;
}

std::string share_csv(const std::vector<BenchRecord>& records) {
    std::ostringstream out;
    out << "mode,width,height,forward_share,inverse_share,fuse_rule_share,provenance\n" << std::setprecision(6);
    for (const auto& r : records) {
        const double t = r.t_total_s > 0 ? r.t_total_s : 1.0;
        out << r.mode << ',' << r.width << ',' << r.height << ',' << r.t_forward_s / t << ',' << r.t_inverse_s / t
            << ',' << r.t_fuse_rule_s / t << ',' << to_string(r.provenance) << '\n';
    }
    return out.str();
}

// ---- pipeline ----

DispatchPlan plan_for(std::optional<BackendId> backend, Size frame, int levels, Objective o,
                      const CostModelParams& params) {
    if (backend) {
        DispatchPlan p = uniform_plan(*backend, frame, levels);
        p.objective = o;
        return p;
    }
    auto grid = default_dispatch_grid();
    // keep the frame inside the table hull
    const int side = std::max(frame.width, frame.height);
    for (int s = grid.back().width * 2; grid.back().width < side; s *= 2) grid.push_back({s, s});
    const CostTable table = build_cost_table(TableSource::PaperModel, grid, params);
    return plan_pyramid(table, frame, levels, o);
}

Frame fuse_timed(const Frame& a, const Frame& b, int levels, const FusionRule& rule, const DispatchPlan& plan,
                 BenchRecord& timing) {
    if (a.width() != b.width() || a.height() != b.height()) throw InvalidInput("frames differ in size");
    if (static_cast<int>(plan.backends.size()) != levels)
        throw std::invalid_argument("dispatch plan does not cover every level");
    const FilterBank& bank = default_filter_bank();
    const auto t0 = Clock::now();
    const Pyramid pa = dtcwt_forward(a, levels, bank, plan.backends);
    const Pyramid pb = dtcwt_forward(b, levels, bank, plan.backends);
    timing.t_forward_s = seconds_since(t0);
    const auto t1 = Clock::now();
    const Pyramid fused = fuse_pyramids(pa, pb, rule);
    timing.t_fuse_rule_s = seconds_since(t1);
    const auto t2 = Clock::now();
    Frame out = dtcwt_inverse(fused, bank, plan.backends);
    timing.t_inverse_s = seconds_since(t2);
    timing.t_total_s = seconds_since(t0);
    return out;
}

BenchRecord model_record(const DispatchPlan& plan, int levels, const CostModelParams& params) {
    const auto [w, h] = plan.frame;
    BenchRecord r;
    r.width = w;
    r.height = h;
    r.levels = levels;
    r.frames = 1;
    r.provenance = Provenance::Modeled;
    for (int l = 1; l <= levels; ++l) {
        const BackendId b = plan.backends.at(l - 1);
        const double f = 2.0 * predict_level_time(params, b, w, h, levels, l, Workload::Forward);
        const double i = predict_level_time(params, b, w, h, levels, l, Workload::Inverse);
        r.t_forward_s += f;
        r.t_inverse_s += i;
        r.energy_mj += predict_energy(params, b, f + i);
    }
    r.t_fuse_rule_s = predict_fuse_time(params, w, h, levels);
    r.energy_mj += predict_energy(params, BackendId::Scalar, r.t_fuse_rule_s);
    r.t_total_s = r.t_forward_s + r.t_inverse_s + r.t_fuse_rule_s;
    r.power_mw = r.energy_mj / r.t_total_s;
    return r;
}

FusionRun fuse_sequences(const std::vector<Frame>& a, const std::vector<Frame>& b, const PipelineConfig& cfg) {
    if (cfg.levels < 1) throw UsageError("levels must be at least 1");
    if (a.size() != b.size()) throw InvalidInput("input sequences differ in length");
    if (a.empty()) throw InvalidInput("input sequences are empty");
    const Size frame{a.front().width(), a.front().height()};
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].width() != frame.width || a[i].height() != frame.height || b[i].width() != frame.width ||
            b[i].height() != frame.height)
            throw InvalidInput("frame " + std::to_string(i) + " dimensions differ");
    if (cfg.levels > max_levels(frame.width, frame.height))
        throw UsageError("frame " + to_string(frame) + " supports at most " +
                         std::to_string(max_levels(frame.width, frame.height)) + " levels");
    const CostModelParams params = cfg.cost_model.value_or(paper_calibrated_params());
    FusionRun run;
    run.plan = plan_for(cfg.backend, frame, cfg.levels, cfg.objective, params);
    const bool modeled =
        std::find(run.plan.backends.begin(), run.plan.backends.end(), BackendId::Accel) != run.plan.backends.end();
    const std::string mode = cfg.backend ? std::string(to_string(*cfg.backend)) : "auto";
    for (int pass = 0; pass < std::max(cfg.loop, 1); ++pass)
        for (std::size_t i = 0; i < a.size(); ++i) {
            BenchRecord r;
            run.fused.push_back(fuse_timed(a[i], b[i], cfg.levels, cfg.rule, run.plan, r));
            if (modeled) {
                r = model_record(run.plan, cfg.levels, params);
            } else {
                r.power_mw = power_mw(params, BackendId::Scalar);
                r.energy_mj = predict_energy(params, BackendId::Scalar, r.t_total_s);
                r.provenance = Provenance::Measured;
            }
            r.mode = mode;
            r.width = frame.width;
            r.height = frame.height;
            r.levels = cfg.levels;
            r.frames = 1;
            run.records.push_back(r);
        }
    return run;
}

FusionRun run_fusion(const PipelineConfig& cfg) {
    if (cfg.input_a.empty() || cfg.input_b.empty()) throw UsageError("two input paths are required");
    const auto a = load_frames(cfg.input_a, cfg.format, cfg.size.width, cfg.size.height);
    const auto b = load_frames(cfg.input_b, cfg.format, cfg.size.width, cfg.size.height);
    FusionRun run = fuse_sequences(a, b, cfg);
    if (!cfg.output.empty()) {
        std::filesystem::create_directories(cfg.output);
        for (std::size_t i = 0; i < run.fused.size(); ++i) {
            std::ostringstream name;
            name << "fused_" << std::setw(4) << std::setfill('0') << i << ".pgm";
            write_pgm(cfg.output / name.str(), run.fused[i]);
        }
    }
    return run;
}

// ---- bench ----

Frame center_crop(const Frame& f, Size s) {
    if (s.width > f.width() || s.height > f.height())
        throw UsageError("size " + to_string(s) + " exceeds the " + std::to_string(f.width()) + "x" +
                         std::to_string(f.height()) + " source");
    const int x0 = (f.width() - s.width) / 2, y0 = (f.height() - s.height) / 2;
    Frame out(s.width, s.height);
    for (int y = 0; y < s.height; ++y)
        for (int x = 0; x < s.width; ++x) out.at(x, y) = f.at(x0 + x, y0 + y);
    return out;
}

std::pair<Frame, Frame> synthetic_pair(Size s, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    Frame scene(s.width, s.height, 40.0f);
    for (int k = 0; k < 12; ++k) {
        const float cx = u(rng) * s.width, cy = u(rng) * s.height, r = 2.0f + 8.0f * u(rng);
        const float v = 60.0f + 150.0f * u(rng);
        for (int y = 0; y < s.height; ++y)
            for (int x = 0; x < s.width; ++x)
                if ((x - cx) * (x - cx) + (y - cy) * (y - cy) < r * r) scene.at(x, y) = v;
    }
    for (float& v : scene.data()) v = std::clamp(v + 10.0f * (u(rng) - 0.5f), 0.0f, 255.0f);
    // Gaussian blur (sigma 2) restricted to one half, clamped borders
    constexpr int r = 6;
    std::array<float, 2 * r + 1> g{};
    float gsum = 0;
    for (int i = -r; i <= r; ++i) gsum += g[i + r] = std::exp(-float(i * i) / 8.0f);
    for (float& v : g) v /= gsum;
    auto blur_half = [&](bool left) {
        Frame tmp = scene, out = scene;
        for (int y = 0; y < s.height; ++y)
            for (int x = 0; x < s.width; ++x) {
                float acc = 0;
                for (int i = -r; i <= r; ++i) acc += g[i + r] * scene.at(std::clamp(x + i, 0, s.width - 1), y);
                tmp.at(x, y) = acc;
            }
        for (int y = 0; y < s.height; ++y)
            for (int x = 0; x < s.width; ++x) {
                if ((x < s.width / 2) != left) continue;
                float acc = 0;
                for (int i = -r; i <= r; ++i) acc += g[i + r] * tmp.at(x, std::clamp(y + i, 0, s.height - 1));
                out.at(x, y) = acc;
            }
        return out;
    };
    return {blur_half(false), blur_half(true)};
}

std::vector<BenchRecord> run_bench(const BenchOptions& opt, const CostModelParams& params) {
    if (opt.frames < 1) throw UsageError("frames must be at least 1");
    std::vector<Frame> src_a = opt.source_a, src_b = opt.source_b;
    if (src_a.empty()) {
        for (int i = 0; i < opt.frames; ++i) {
            auto [a, b] = synthetic_pair({88, 72}, opt.seed + static_cast<unsigned>(i));
            src_a.push_back(std::move(a));
            src_b.push_back(std::move(b));
        }
    }
    if (src_a.size() != src_b.size()) throw InvalidInput("bench sources differ in length");
    std::vector<BenchRecord> out;
    for (Size s : opt.sizes) {
        std::vector<Frame> a, b;
        for (int i = 0; i < opt.frames; ++i) {
            a.push_back(center_crop(src_a[i % src_a.size()], s));
            b.push_back(center_crop(src_b[i % src_b.size()], s));
        }
        for (const auto& mode : opt.modes) {
            PipelineConfig cfg;
            cfg.levels = std::min(opt.levels, max_levels(s.width, s.height));
            cfg.rule = opt.rule;
            cfg.objective = opt.objective;
            cfg.cost_model = params;
            if (mode != "auto") {
                try {
                    cfg.backend = parse_backend(mode);
                } catch (const std::invalid_argument& e) {
                    throw UsageError(e.what());
                }
            }
            const DispatchPlan plan = plan_for(cfg.backend, s, cfg.levels, cfg.objective, params);
            const bool cpu_only = std::find(plan.backends.begin(), plan.backends.end(), BackendId::Accel) ==
                                  plan.backends.end();
            if (cpu_only) {
                const FusionRun run = fuse_sequences(a, b, cfg);
                BenchRecord total = run.records.front();
                total.t_forward_s = total.t_inverse_s = total.t_fuse_rule_s = total.t_total_s = total.energy_mj = 0;
                for (const auto& r : run.records) accumulate(total, r);
                total.frames = opt.frames;
                total.power_mw = total.energy_mj / total.t_total_s;
                out.push_back(total);
            }
            // modeled row for every mode so the sweep can be compared on one scale
            BenchRecord m = model_record(plan, cfg.levels, params);
            for (double* v : {&m.t_forward_s, &m.t_inverse_s, &m.t_fuse_rule_s, &m.t_total_s, &m.energy_mj})
                *v *= opt.frames;
            m.mode = mode;
            m.frames = opt.frames;
            out.push_back(m);
        }
    }
    return out;
}

// ---- plots ----

namespace {

struct Series {
    std::string mode;
    std::vector<std::pair<double, double>> points;  // pixel count, value
    bool dashed = false;
};

const char* colour(const std::string& mode) {
    if (mode == "scalar") return "#1f77b4";
    if (mode == "vector") return "#2ca02c";
    if (mode == "accel") return "#d62728";
    return "#9467bd";
}

// First adjacent pair of x positions where accel and vector swap order.
std::optional<std::pair<double, double>> crossing(const std::vector<Series>& series) {
    const Series* acc = nullptr;
    const Series* vec = nullptr;
    for (const auto& s : series) {
        if (s.dashed) continue;
        if (s.mode == "accel") acc = &s;
        if (s.mode == "vector") vec = &s;
    }
    if (!acc || !vec || acc->points.size() != vec->points.size()) return std::nullopt;
    for (std::size_t i = 1; i < acc->points.size(); ++i) {
        const bool before = acc->points[i - 1].second < vec->points[i - 1].second;
        const bool after = acc->points[i].second < vec->points[i].second;
        if (before != after) return std::pair{acc->points[i - 1].first, acc->points[i].first};
    }
    return std::nullopt;
}

std::string svg_chart(const std::string& title, const std::string& ylabel, const std::vector<Series>& series,
                      const std::map<double, std::string>& xlabels) {
    constexpr double W = 640, H = 400, L = 80, R = 130, T = 40, B = 60;
    double xmin = INFINITY, xmax = -INFINITY, ymax = 0;
    for (const auto& s : series)
        for (auto [x, y] : s.points) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymax = std::max(ymax, y);
        }
    if (xmax <= xmin) xmax = xmin + 1;
    if (ymax <= 0) ymax = 1;
    auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
    auto py = [&](double y) { return H - B - y / ymax * (H - T - B); };
    std::ostringstream o;
    o << std::fixed << std::setprecision(1);
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
    if (auto c = crossing(series)) {
        o << "<rect class=\"crossover\" x=\"" << px(c->first) << "\" y=\"" << T << "\" width=\""
          << px(c->second) - px(c->first) << "\" height=\"" << H - T - B << "\" fill=\"#ffe9a8\"/>\n";
        o << "<text x=\"" << (px(c->first) + px(c->second)) / 2 << "\" y=\"" << T + 14
          << "\" text-anchor=\"middle\">crossover</text>\n";
    }
    o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
    o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    for (const auto& [x, label] : xlabels)
        o << "<text x=\"" << px(x) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">" << label << "</text>\n";
    o << std::setprecision(4);
    for (int k = 0; k <= 4; ++k)
        o << "<text x=\"" << L - 6 << "\" y=\"" << py(ymax * k / 4) + 4 << "\" text-anchor=\"end\">"
          << ymax * k / 4 << "</text>\n";
    o << std::setprecision(1);
    o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 16 << "\" text-anchor=\"middle\">frame size</text>\n";
    o << "<text transform=\"translate(18," << (T + H - B) / 2 << ") rotate(-90)\" text-anchor=\"middle\">" << ylabel
      << "</text>\n";
    int row = 0;
    for (const auto& s : series) {
        o << "<polyline class=\"series\" data-mode=\"" << s.mode << "\" fill=\"none\" stroke=\"" << colour(s.mode)
          << "\" stroke-width=\"2\"" << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"";
        for (auto [x, y] : s.points) o << px(x) << ',' << py(y) << ' ';
        o << "\"/>\n";
        const double ly = T + 10 + 18 * row++;
        o << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 34 << "\" y2=\"" << ly
          << "\" stroke=\"" << colour(s.mode) << "\" stroke-width=\"2\"" << (s.dashed ? " stroke-dasharray=\"6,4\"" : "")
          << "/>\n";
        o << "<text x=\"" << W - R + 40 << "\" y=\"" << ly + 4 << "\">" << s.mode << (s.dashed ? " total" : "")
          << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace

std::vector<std::filesystem::path> emit_plots(const std::string& csv, const std::filesystem::path& dir) {
    if (csv.find_first_not_of(" \t\r\n") == std::string::npos) throw UsageError("bench CSV is empty");
    auto records = parse_bench_csv(csv);
    if (records.empty()) throw UsageError("bench CSV has no rows to plot");
    // Never put host-measured and modeled times on one axis: plot the modeled
    // rows when every mode has them, else the measured ones.
    std::map<std::string, bool> has_model;
    for (const auto& r : records) has_model[r.mode] = has_model[r.mode] || r.provenance == Provenance::Modeled;
    const bool all_modeled = std::all_of(has_model.begin(), has_model.end(), [](const auto& kv) { return kv.second; });
    const Provenance keep = all_modeled ? Provenance::Modeled : Provenance::Measured;
    std::erase_if(records, [&](const BenchRecord& r) { return r.provenance != keep; });
    std::vector<std::string> modes;
    std::map<double, std::string> xlabels;
    for (const auto& r : records) {
        if (std::find(modes.begin(), modes.end(), r.mode) == modes.end()) modes.push_back(r.mode);
        xlabels[double(r.width) * r.height] = std::to_string(r.width) + "x" + std::to_string(r.height);
    }
    auto collect = [&](double BenchRecord::*field, bool dashed) {
        std::vector<Series> out;
        for (const auto& m : modes) {
            Series s{m, {}, dashed};
            for (const auto& r : records)
                if (r.mode == m) s.points.emplace_back(double(r.width) * r.height, r.*field / r.frames);
            std::sort(s.points.begin(), s.points.end());
            out.push_back(std::move(s));
        }
        return out;
    };
    std::filesystem::create_directories(dir);
    auto inv_total = collect(&BenchRecord::t_inverse_s, false);
    auto totals = collect(&BenchRecord::t_total_s, true);
    inv_total.insert(inv_total.end(), totals.begin(), totals.end());
    const std::vector<std::pair<std::string, std::string>> charts = {
        {"forward.svg", svg_chart("Forward transform time per frame", "seconds",
                                  collect(&BenchRecord::t_forward_s, false), xlabels)},
        {"inverse_total.svg", svg_chart("Inverse (solid) and total (dashed) time per frame", "seconds", inv_total,
                                        xlabels)},
        {"energy.svg", svg_chart("Total energy per frame", "mJ", collect(&BenchRecord::energy_mj, false), xlabels)},
    };
    std::vector<std::filesystem::path> paths;
    for (const auto& [name, body] : charts) {
        const auto p = dir / name;
        std::ofstream(p) << body;
        paths.push_back(p);
    }
    return paths;
}

}  // namespace dtfuse
