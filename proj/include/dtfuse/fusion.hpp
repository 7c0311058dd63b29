// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dtfuse Authors

#pragma once

#include <string>
#include <string_view>

#include "dtfuse/dispatch.hpp"
#include "dtfuse/filter_bank.hpp"
#include "dtfuse/wavelet.hpp"

namespace dtfuse {

enum class HighpassRule { MaxMagnitude, Mean };
enum class LowpassRule { Mean, SelectA, SelectB };

struct FusionRule {
    HighpassRule highpass = HighpassRule::MaxMagnitude;
    LowpassRule lowpass = LowpassRule::Mean;
};

std::string_view to_string(HighpassRule r);
std::string_view to_string(LowpassRule r);
// "max" or "mean" (also "max-magnitude-select").
HighpassRule parse_highpass_rule(std::string_view s);
// "mean", "select-a", "select-b".
LowpassRule parse_lowpass_rule(std::string_view s);

// Coefficient-wise combination. Max-magnitude ties keep pa.
// Applies fusion.highpass_rule / fusion.lowpass_rule from key = value text on
// top of `base`; other keys are ignored.
FusionRule parse_fusion_config(const std::string& text, FusionRule base = {});

Pyramid fuse_pyramids(const Pyramid& pa, const Pyramid& pb, const FusionRule& rule);

// Forward both frames, fuse, inverse. Level l runs on plan.backends[l-1].
Frame fuse_frames(const Frame& fa, const Frame& fb, int levels, const FusionRule& rule, const DispatchPlan& plan,
                  const FilterBank& bank = default_filter_bank());

}  // namespace dtfuse
