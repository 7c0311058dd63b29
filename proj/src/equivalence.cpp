// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dtfuse Authors

#include <algorithm>
#include <random>

#include "dtfuse/backend.hpp"
#include "dtfuse/wavelet.hpp"

namespace dtfuse {

bool EquivalenceReport::pass() const {
    return std::all_of(entries.begin(), entries.end(), [](const EquivalenceEntry& e) { return e.pass; });
}

double EquivalenceReport::max_rel_deviation() const {
    double m = 0;
    for (const auto& e : entries) m = std::max(m, e.max_rel_deviation);
    return m;
}

EquivalenceReport verify_equivalence(BackendId reference, BackendId candidate,
                                     const std::vector<std::pair<int, int>>& sizes, double tolerance, unsigned seed,
                                     int levels) {
    EquivalenceReport rep;
    rep.reference = reference;
    rep.candidate = candidate;
    rep.tolerance = tolerance;
    const FilterBank& bank = default_filter_bank();
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> u(0.0f, 255.0f);
    for (auto [w, h] : sizes) {
        std::vector<float> px(static_cast<std::size_t>(w) * h);
        for (auto& v : px) v = u(rng);
        const Frame f = make_frame(w, h, std::move(px));
        const int depth = levels > 0 ? levels : std::min(3, max_levels(w, h));
        const Pyramid pr = dtcwt_forward(f, depth, bank, reference);
        const Pyramid pc = dtcwt_forward(f, depth, bank, candidate);
        double dev = max_rel_diff(pc.lowpass, pr.lowpass);
        for (int l = 0; l < depth; ++l)
            for (int k = 0; k < 6; ++k) {
                dev = std::max(dev, max_rel_diff(pc.levels[l].bands[k].re, pr.levels[l].bands[k].re));
                dev = std::max(dev, max_rel_diff(pc.levels[l].bands[k].im, pr.levels[l].bands[k].im));
            }
        // inverse compared on the same input pyramid so forward error is not counted twice
        dev = std::max(dev, max_rel_diff(dtcwt_inverse(pr, bank, candidate), dtcwt_inverse(pr, bank, reference)));
        rep.entries.push_back({w, h, dev, dev < tolerance});
    }
    return rep;
}

}  // namespace dtfuse
