// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dtfuse Authors

#include "dtfuse/fusion.hpp"

#include <sstream>
#include <stdexcept>
#include <string>

namespace dtfuse {

std::string_view to_string(HighpassRule r) { return r == HighpassRule::MaxMagnitude ? "max" : "mean"; }

std::string_view to_string(LowpassRule r) {
    switch (r) {
        case LowpassRule::Mean: return "mean";
        case LowpassRule::SelectA: return "select-a";
        case LowpassRule::SelectB: return "select-b";
    }
    return "mean";
}

HighpassRule parse_highpass_rule(std::string_view s) {
    if (s == "max" || s == "max-magnitude-select") return HighpassRule::MaxMagnitude;
    if (s == "mean") return HighpassRule::Mean;
    throw std::invalid_argument("unknown highpass rule '" + std::string(s) + "'");
}

LowpassRule parse_lowpass_rule(std::string_view s) {
    if (s == "mean") return LowpassRule::Mean;
    if (s == "select-a") return LowpassRule::SelectA;
    if (s == "select-b") return LowpassRule::SelectB;
    throw std::invalid_argument("unknown lowpass rule '" + std::string(s) + "'");
}

namespace {

void fuse_band(const ComplexSubband& a, const ComplexSubband& b, HighpassRule rule, ComplexSubband& out) {
    const std::size_t n = a.re.size();
    auto ar = a.re.data(), ai = a.im.data(), br = b.re.data(), bi = b.im.data();
    auto orr = out.re.data(), oi = out.im.data();
    for (std::size_t i = 0; i < n; ++i) {
        if (rule == HighpassRule::MaxMagnitude) {
            const float ma = ar[i] * ar[i] + ai[i] * ai[i];
            const float mb = br[i] * br[i] + bi[i] * bi[i];
            const bool take_b = mb > ma;
            orr[i] = take_b ? br[i] : ar[i];
            oi[i] = take_b ? bi[i] : ai[i];
        } else {
            orr[i] = 0.5f * (ar[i] + br[i]);
            oi[i] = 0.5f * (ai[i] + bi[i]);
        }
    }
}

}  // namespace

FusionRule parse_fusion_config(const std::string& text, FusionRule base) {
    std::istringstream in(text);
    std::string line;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r\"");
        if (b == std::string::npos) return std::string();
        return s.substr(b, s.find_last_not_of(" \t\r\"") - b + 1);
    };
    while (std::getline(in, line)) {
        line = trim(line.substr(0, line.find('#')));
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
        if (key == "fusion.highpass_rule") base.highpass = parse_highpass_rule(val);
        if (key == "fusion.lowpass_rule") base.lowpass = parse_lowpass_rule(val);
    }
    return base;
}

Pyramid fuse_pyramids(const Pyramid& pa, const Pyramid& pb, const FusionRule& rule) {
    check_pyramid(pa);
    check_pyramid(pb);
    if (!same_shape(pa, pb)) throw std::invalid_argument("pyramids differ in shape");
    Pyramid out = pa;
    for (int l = 0; l < pa.depth(); ++l)
        for (int k = 0; k < 6; ++k)
            fuse_band(pa.levels[l].bands[k], pb.levels[l].bands[k], rule.highpass, out.levels[l].bands[k]);
    switch (rule.lowpass) {
        case LowpassRule::Mean:
            for (std::size_t i = 0; i < out.lowpass.size(); ++i)
                out.lowpass.data()[i] = 0.5f * (pa.lowpass.data()[i] + pb.lowpass.data()[i]);
            break;
        case LowpassRule::SelectA: break;
        case LowpassRule::SelectB: out.lowpass = pb.lowpass; break;
    }
    return out;
}

Frame fuse_frames(const Frame& fa, const Frame& fb, int levels, const FusionRule& rule, const DispatchPlan& plan,
                  const FilterBank& bank) {
    if (fa.width() != fb.width() || fa.height() != fb.height())
        throw std::invalid_argument("frames differ in size");
    if (static_cast<int>(plan.backends.size()) != levels)
        throw std::invalid_argument("dispatch plan does not cover every level");
    const Pyramid pa = dtcwt_forward(fa, levels, bank, plan.backends);
    const Pyramid pb = dtcwt_forward(fb, levels, bank, plan.backends);
    return dtcwt_inverse(fuse_pyramids(pa, pb, rule), bank, plan.backends);
}

}  // namespace dtfuse
