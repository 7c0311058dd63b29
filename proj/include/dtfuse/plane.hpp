// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dtfuse Authors

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dtfuse {

// Row-major float32 raster.
class Plane {
public:
    Plane() = default;
    Plane(int width, int height, float fill = 0.0f);
    Plane(int width, int height, std::vector<float> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    float& at(int x, int y) noexcept { return data_[static_cast<std::size_t>(y) * width_ + x]; }
    float at(int x, int y) const noexcept { return data_[static_cast<std::size_t>(y) * width_ + x]; }

    std::span<float> row(int y) noexcept {
        return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
    }
    std::span<const float> row(int y) const noexcept {
        return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
    }

    std::span<float> data() noexcept { return data_; }
    std::span<const float> data() const noexcept { return data_; }
    std::vector<float>& storage() noexcept { return data_; }

    Plane transposed() const;
    // Copy of the top-left w x h window; requires w <= width, h <= height.
    Plane cropped(int w, int h) const;
    // Pads odd dimensions to even by repeating the last row/column.
    Plane padded_even() const;

    bool operator==(const Plane&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<float> data_;
};

// A luma frame. Same storage as Plane; make_frame enforces the finite-sample rule.
using Frame = Plane;

Frame make_frame(int width, int height, std::vector<float> data);
void check_frame(const Frame& f);

double max_abs_diff(const Plane& a, const Plane& b);
// Normwise: max |a-b| / max(max |b|, 1). Per-sample ratios are meaningless
// for near-zero highpass samples, whose float error scales with the plane.
double max_rel_diff(const Plane& a, const Plane& b);

}  // namespace dtfuse
