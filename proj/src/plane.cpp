// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dtfuse Authors

#include "dtfuse/plane.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dtfuse {

Plane::Plane(int width, int height, float fill) : width_(width), height_(height) {
    if (width < 0 || height < 0) throw std::invalid_argument("plane dimensions must be non-negative");
    data_.assign(static_cast<std::size_t>(width) * height, fill);
}

Plane::Plane(int width, int height, std::vector<float> data)
    : width_(width), height_(height), data_(std::move(data)) {
    if (width < 0 || height < 0) throw std::invalid_argument("plane dimensions must be non-negative");
    if (data_.size() != static_cast<std::size_t>(width) * height)
        throw std::invalid_argument("plane data length does not match width*height");
}

Plane Plane::transposed() const {
    Plane t(height_, width_);
    const float* src = data().data();
    float* dst = t.data().data();
    const std::size_t w = static_cast<std::size_t>(width_), h = static_cast<std::size_t>(height_);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) dst[x * h + y] = src[y * w + x];
    return t;
}

Plane Plane::cropped(int w, int h) const {
    if (w > width_ || h > height_ || w < 0 || h < 0) throw std::invalid_argument("crop window outside plane");
    Plane c(w, h);
    for (int y = 0; y < h; ++y) std::copy_n(row(y).begin(), w, c.row(y).begin());
    return c;
}

Plane Plane::padded_even() const {
    const int w = width_ + (width_ & 1);
    const int h = height_ + (height_ & 1);
    if (w == width_ && h == height_) return *this;
    Plane p(w, h);
    for (int y = 0; y < h; ++y) {
        auto src = row(std::min(y, height_ - 1));
        auto dst = p.row(y);
        std::copy(src.begin(), src.end(), dst.begin());
        if (w != width_) dst[w - 1] = src[width_ - 1];
    }
    return p;
}

Frame make_frame(int width, int height, std::vector<float> data) {
    if (width < 1 || height < 1) throw std::invalid_argument("frame dimensions must be >= 1");
    Frame f(width, height, std::move(data));
    check_frame(f);
    return f;
}

void check_frame(const Frame& f) {
    if (f.width() < 1 || f.height() < 1) throw std::invalid_argument("frame dimensions must be >= 1");
    for (float v : f.data())
        if (!std::isfinite(v)) throw std::invalid_argument("frame contains non-finite samples");
}

double max_abs_diff(const Plane& a, const Plane& b) {
    if (a.width() != b.width() || a.height() != b.height()) throw std::invalid_argument("plane size mismatch");
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(double(a.data()[i]) - double(b.data()[i])));
    return m;
}

double max_rel_diff(const Plane& a, const Plane& b) {
    if (a.width() != b.width() || a.height() != b.height()) throw std::invalid_argument("plane size mismatch");
    double diff = 0, scale = 1.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff = std::max(diff, std::abs(double(a.data()[i]) - double(b.data()[i])));
        scale = std::max(scale, std::abs(double(b.data()[i])));
    }
    return diff / scale;
}

}  // namespace dtfuse
