// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dtfuse Authors

#include "dtfuse/dispatch.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "dtfuse/errors.hpp"
#include "dtfuse/fusion.hpp"
#include "dtfuse/wavelet.hpp"

namespace dtfuse {

std::string_view to_string(Objective o) { return o == Objective::MinTime ? "min-time" : "min-energy"; }
std::string_view to_string(Provenance p) { return p == Provenance::Measured ? "measured" : "modeled"; }

Objective parse_objective(std::string_view s) {
    if (s == "time" || s == "min-time") return Objective::MinTime;
    if (s == "energy" || s == "min-energy") return Objective::MinEnergy;
    throw std::invalid_argument("unknown objective '" + std::string(s) + "'");
}

Provenance parse_provenance(std::string_view s) {
    if (s == "measured") return Provenance::Measured;
    if (s == "modeled") return Provenance::Modeled;
    throw std::invalid_argument("unknown provenance '" + std::string(s) + "'");
}

Size parse_size(std::string_view s) {
    const auto x = s.find('x');
    Size out;
    if (x == std::string_view::npos) throw UsageError("size token '" + std::string(s) + "' is not WIDTHxHEIGHT");
    auto num = [&](std::string_view t, int& v) {
        const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
        return r.ec == std::errc() && r.ptr == t.data() + t.size() && v >= 1;
    };
    if (!num(s.substr(0, x), out.width) || !num(s.substr(x + 1), out.height))
        throw UsageError("size token '" + std::string(s) + "' is not WIDTHxHEIGHT");
    return out;
}

std::vector<Size> parse_size_list(std::string_view s) {
    std::vector<Size> out;
    while (!s.empty()) {
        const auto c = s.find(',');
        const auto tok = s.substr(0, c);
        if (!tok.empty()) out.push_back(parse_size(tok));
        if (c == std::string_view::npos) break;
        s.remove_prefix(c + 1);
    }
    return out;
}

std::string to_string(Size s) { return std::to_string(s.width) + "x" + std::to_string(s.height); }

// ---- table ----

void CostTable::insert(BackendId b, Size s, Workload w, const CostEntry& e) {
    entries_[{b, s.width, s.height, w}] = e;
}

std::optional<CostEntry> CostTable::exact(BackendId b, Size s, Workload w) const {
    auto it = entries_.find({b, s.width, s.height, w});
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

CostEntry CostTable::query(BackendId b, Size s, Workload w) const {
    if (auto e = exact(b, s, w); e && e->present) return *e;
    std::set<int> ws, hs;
    for (const auto& [k, e] : entries_)
        if (std::get<0>(k) == b && std::get<3>(k) == w && e.present) {
            ws.insert(std::get<1>(k));
            hs.insert(std::get<2>(k));
        }
    auto bracket = [](const std::set<int>& axis, int v, int& lo, int& hi) {
        if (axis.empty() || v < *axis.begin() || v > *axis.rbegin()) return false;
        auto it = axis.lower_bound(v);
        hi = *it;
        lo = (*it == v) ? v : *std::prev(it);
        return true;
    };
    int w0, w1, h0, h1;
    if (!bracket(ws, s.width, w0, w1) || !bracket(hs, s.height, h0, h1))
        throw ExtrapolationRefused("size " + to_string(s) + " lies outside the cost table for " +
                                   std::string(to_string(b)));
    auto corner = [&](int x, int y) {
        auto e = exact(b, {x, y}, w);
        if (!e || !e->present)
            throw ExtrapolationRefused("cost table has no " + std::string(to_string(b)) + " entry at " +
                                       to_string({x, y}));
        return *e;
    };
    const double tx = w1 == w0 ? 0.0 : double(s.width - w0) / double(w1 - w0);
    const double ty = h1 == h0 ? 0.0 : double(s.height - h0) / double(h1 - h0);
    const CostEntry e00 = corner(w0, h0), e10 = corner(w1, h0), e01 = corner(w0, h1), e11 = corner(w1, h1);
    auto lerp2 = [&](double CostEntry::*m) {
        return (1 - tx) * (1 - ty) * e00.*m + tx * (1 - ty) * e10.*m + (1 - tx) * ty * e01.*m + tx * ty * e11.*m;
    };
    CostEntry out;
    out.time_s = lerp2(&CostEntry::time_s);
    out.energy_mj = lerp2(&CostEntry::energy_mj);
    const bool measured = e00.provenance == Provenance::Measured && e10.provenance == Provenance::Measured &&
                          e01.provenance == Provenance::Measured && e11.provenance == Provenance::Measured;
    out.provenance = measured ? Provenance::Measured : Provenance::Modeled;
    return out;
}

double CostTable::cost(BackendId b, Size s, Workload w, Objective o) const {
    const CostEntry e = query(b, s, w);
    return o == Objective::MinTime ? e.time_s : e.energy_mj;
}

std::vector<BackendId> CostTable::backends() const {
    std::vector<BackendId> out;
    for (BackendId b : {BackendId::Accel, BackendId::Vector, BackendId::Scalar})
        for (const auto& [k, e] : entries_)
            if (std::get<0>(k) == b && e.present) {
                out.push_back(b);
                break;
            }
    return out;
}

std::string CostTable::to_csv() const {
    std::ostringstream out;
    out << "backend,width,height,direction,time_s,energy_mj,provenance\n" << std::setprecision(17);
    for (const auto& [k, e] : entries_) {
        out << to_string(std::get<0>(k)) << ',' << std::get<1>(k) << ',' << std::get<2>(k) << ','
            << to_string(std::get<3>(k)) << ',';
        if (e.present)
            out << e.time_s << ',' << e.energy_mj;
        else
            out << ",";
        out << ',' << (e.present ? to_string(e.provenance) : std::string_view("absent")) << '\n';
    }
    // trailing comment so readers that only want the columns can drop it
    if (!sweep_.empty()) {
        out << "# sweep=";
        for (std::size_t i = 0; i < sweep_.size(); ++i) out << (i ? "," : "") << to_string(sweep_[i]);
        out << '\n';
    }
    return out.str();
}

CostTable CostTable::from_csv(const std::string& text) {
    CostTable t;
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    if (line.rfind("backend,width,height,direction", 0) != 0) throw InvalidInput("cost table CSV header missing");
    std::set<Size> seen;
    std::vector<Size> sweep;
    std::optional<std::vector<Size>> stated;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            constexpr std::string_view key = "# sweep=";
            if (line.rfind(key, 0) == 0) {
                try {
                    stated = parse_size_list(line.substr(key.size()));
                } catch (const UsageError& ex) {
                    throw InvalidInput("cost table line " + std::to_string(lineno) + ": " + ex.what());
                }
            }
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (f.size() == 6) f.emplace_back();
        if (f.size() != 7) throw InvalidInput("cost table line " + std::to_string(lineno) + ": expected 7 fields");
        try {
            const BackendId b = parse_backend(f[0]);
            const Size s{std::stoi(f[1]), std::stoi(f[2])};
            const Workload w = parse_workload(f[3]);
            CostEntry e;
            if (f[6] == "absent") {
                e.present = false;
            } else {
                e.time_s = std::stod(f[4]);
                e.energy_mj = std::stod(f[5]);
                e.provenance = parse_provenance(f[6]);
            }
            t.insert(b, s, w, e);
            if (seen.insert(s).second) sweep.push_back(s);
        } catch (const std::invalid_argument& ex) {
            throw InvalidInput("cost table line " + std::to_string(lineno) + ": " + ex.what());
        }
    }
    std::sort(sweep.begin(), sweep.end(), [](Size a, Size b) {
        return std::pair(a.width * a.height, a.width) < std::pair(b.width * b.height, b.width);
    });
    t.set_sweep(stated ? std::move(*stated) : std::move(sweep));
    return t;
}

// ---- building ----

namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Median wall time of `frames` runs of one workload on a CPU backend.
double measure(BackendId b, Size s, int levels, Workload w, int frames, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> u(0.0f, 255.0f);
    auto make = [&] {
        std::vector<float> d(static_cast<std::size_t>(s.width) * s.height);
        for (auto& v : d) v = u(rng);
        return make_frame(s.width, s.height, std::move(d));
    };
    const Frame fa = make(), fb = make();
    const FilterBank& bank = default_filter_bank();
    const Pyramid pa = dtcwt_forward(fa, levels, bank, b);
    const DispatchPlan plan = uniform_plan(b, s, levels);
    std::vector<double> times;
    volatile float sink = 0;
    for (int i = 0; i < std::max(frames, 1); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        switch (w) {
            case Workload::Forward: sink = sink + dtcwt_forward(fa, levels, bank, b).lowpass.data()[0]; break;
            case Workload::Inverse: sink = sink + dtcwt_inverse(pa, bank, b).data()[0]; break;
            case Workload::Total: sink = sink + fuse_frames(fa, fb, levels, FusionRule{}, plan, bank).data()[0]; break;
        }
        times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return median(times);
}

}  // namespace

CostTable build_cost_table(TableSource source, const std::vector<Size>& sizes, const CostModelParams& params,
                           const TableOptions& opt) {
    CostTable t;
    if (sizes.empty()) return t;
    params.require_calibrated();
    std::set<int> ws, hs;
    for (Size s : sizes) {
        ws.insert(s.width);
        hs.insert(s.height);
    }
    const CapabilityReport caps = capability_report();
    for (int w : ws)
        for (int h : hs) {
            const Size s{w, h};
            const int levels = std::min(opt.levels, max_levels(w, h));
            for (BackendId b : opt.backends)
                for (Workload wl : {Workload::Forward, Workload::Inverse, Workload::Total}) {
                    CostEntry e;
                    if (!caps.has(b) || levels < 1) {
                        e.present = false;
                    } else if (source == TableSource::Microbenchmark && b != BackendId::Accel) {
                        e.time_s = measure(b, s, levels, wl, opt.bench_frames, opt.seed);
                        e.energy_mj = predict_energy(params, b, e.time_s);
                        e.provenance = Provenance::Measured;
                    } else {
                        e.time_s = predict_time(params, b, w, h, levels, wl);
                        e.energy_mj = predict_energy(params, b, e.time_s);
                        e.provenance = Provenance::Modeled;
                    }
                    t.insert(b, s, wl, e);
                }
        }
    std::vector<Size> sweep = sizes;
    std::sort(sweep.begin(), sweep.end(), [](Size a, Size b) {
        return std::pair(a.width * a.height, a.width) < std::pair(b.width * b.height, b.width);
    });
    sweep.erase(std::unique(sweep.begin(), sweep.end()), sweep.end());
    t.set_sweep(std::move(sweep));
    return t;
}

// ---- decisions ----

BackendId select_backend(const CostTable& table, Size s, Workload w, Objective o) {
    const auto candidates = table.backends();  // already in tie-break order
    if (candidates.empty()) throw ExtrapolationRefused("cost table is empty");
    std::optional<BackendId> best;
    double best_cost = 0;
    for (BackendId b : candidates) {
        const double c = table.cost(b, s, w, o);
        if (!best || c < best_cost) {
            best = b;
            best_cost = c;
        }
    }
    return *best;
}

DispatchPlan plan_pyramid(const CostTable& table, Size frame, int levels, Objective o, Workload w, Granularity g) {
    if (levels < 1) throw std::invalid_argument("levels must be >= 1");
    if (levels > max_levels(frame.width, frame.height))
        throw std::invalid_argument("too many levels for a " + to_string(frame) + " frame");
    DispatchPlan plan{o, frame, {}};
    Size s = frame;
    for (int l = 1; l <= levels; ++l) {
        if (g == Granularity::WholeTransform && l > 1)
            plan.backends.push_back(plan.backends.front());
        else
            plan.backends.push_back(select_backend(table, s, w, o));
        s = {(s.width + 1) / 2, (s.height + 1) / 2};
    }
    return plan;
}

DispatchPlan uniform_plan(BackendId b, Size frame, int levels) {
    return {Objective::MinTime, frame, std::vector<BackendId>(static_cast<std::size_t>(std::max(levels, 0)), b)};
}

std::optional<std::pair<Size, Size>> find_crossover(const CostTable& table, BackendId a, BackendId b, Workload w,
                                                    Objective o) {
    if (a == b) return std::nullopt;
    std::optional<Size> prev;
    int prev_sign = 0;
    for (Size s : table.sweep()) {
        double ca, cb;
        try {
            ca = table.cost(a, s, w, o);
            cb = table.cost(b, s, w, o);
        } catch (const ExtrapolationRefused&) {
            continue;
        }
        const int sign = ca < cb ? -1 : (ca > cb ? 1 : 0);
        if (sign == 0) continue;
        if (prev && prev_sign != sign) return std::pair{*prev, s};
        prev = s;
        prev_sign = sign;
    }
    return std::nullopt;
}

std::vector<Size> default_dispatch_grid() {
    std::vector<Size> g;
    for (int side : {2, 3, 4, 5, 6, 8, 12, 16, 20, 24, 28, 32, 35, 36, 38, 40, 44, 48, 56, 64, 72, 80, 88, 96, 112, 128})
        g.push_back({side, side});
    return g;
}

}  // namespace dtfuse
