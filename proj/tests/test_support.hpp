// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dtfuse Authors

#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "dtfuse/plane.hpp"
#include "dtfuse/wavelet.hpp"

namespace dtfuse::testing {

inline Frame random_frame(int w, int h, unsigned seed, float lo = 0.0f, float hi = 255.0f) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> u(lo, hi);
    std::vector<float> d(static_cast<std::size_t>(w) * h);
    for (auto& v : d) v = u(rng);
    return make_frame(w, h, std::move(d));
}

inline std::vector<float> random_line(std::size_t n, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    std::vector<float> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

inline Taps random_taps(unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    Taps t{};
    for (auto& x : t) x = u(rng);
    return t;
}

// Plain double-precision stride-2 correlation.
inline std::vector<double> correlate2(const std::vector<float>& x, const Taps& t, std::size_t ow) {
    std::vector<double> out(ow);
    for (std::size_t k = 0; k < ow; ++k) {
        double s = 0;
        for (std::size_t j = 0; j < t.size(); ++j) s += double(t[j]) * double(x[2 * k + j]);
        out[k] = s;
    }
    return out;
}

inline double energy(const Plane& p) {
    double e = 0;
    for (float v : p.data()) e += double(v) * v;
    return e;
}

inline double band_energy(const ComplexSubband& b) { return energy(b.re) + energy(b.im); }

// Squared Sobel gradient magnitude summed over a column range.
inline double tenengrad(const Plane& p, int x0, int x1) {
    double e = 0;
    for (int y = 1; y + 1 < p.height(); ++y)
        for (int x = std::max(1, x0); x < std::min(x1, p.width() - 1); ++x) {
            const double gx = (p.at(x + 1, y - 1) + 2 * p.at(x + 1, y) + p.at(x + 1, y + 1)) -
                              (p.at(x - 1, y - 1) + 2 * p.at(x - 1, y) + p.at(x - 1, y + 1));
            const double gy = (p.at(x - 1, y + 1) + 2 * p.at(x, y + 1) + p.at(x + 1, y + 1)) -
                              (p.at(x - 1, y - 1) + 2 * p.at(x, y - 1) + p.at(x + 1, y - 1));
            e += gx * gx + gy * gy;
        }
    return e;
}

// Disc, rectangle and Gaussian blob inside an 8-pixel zero border of a 64x64
// grid, circularly shifted right by dx and down by dy.
inline Frame shift_test_image(int dx = 0, int dy = 0) {
    constexpr int n = 64;
    Frame base(n, n);
    for (int y = 8; y < n - 8; ++y)
        for (int x = 8; x < n - 8; ++x) {
            double v = 0;
            if ((x - 24) * (x - 24) + (y - 26) * (y - 26) < 100) v = 200;
            if (y >= 38 && y < 52 && x >= 36 && x < 54) v += 120;
            v += 80 * std::exp(-((x - 44) * (x - 44) + (y - 18) * (y - 18)) / 30.0);
            base.at(x, y) = static_cast<float>(v);
        }
    Frame f(n, n);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) f.at((x + dx) % n, (y + dy) % n) = base.at(x, y);
    return f;
}

}  // namespace dtfuse::testing
