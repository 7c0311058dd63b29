// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dtfuse Authors

#include <gtest/gtest.h>

#include <complex>

#include "dtfuse/bench.hpp"
#include "dtfuse/fusion.hpp"
#include "test_support.hpp"

using namespace dtfuse;
using dtfuse::testing::random_frame;
using dtfuse::testing::tenengrad;

namespace {

const FilterBank& bank() { return default_filter_bank(); }

Pyramid pyr(unsigned seed, int w = 40, int h = 32, int levels = 2) {
    return dtcwt_forward(random_frame(w, h, seed, -50.0f, 50.0f), levels, bank(), BackendId::Scalar);
}

bool same(const Pyramid& a, const Pyramid& b) {
    if (!same_shape(a, b) || !(a.lowpass == b.lowpass)) return false;
    for (int l = 0; l < a.depth(); ++l)
        for (int k = 0; k < 6; ++k)
            if (!(a.levels[l].bands[k].re == b.levels[l].bands[k].re) ||
                !(a.levels[l].bands[k].im == b.levels[l].bands[k].im))
                return false;
    return true;
}

}  // namespace

TEST(FusePyramids, IdempotentForEveryRule) {
    const Pyramid p = pyr(1);
    for (auto hr : {HighpassRule::MaxMagnitude, HighpassRule::Mean})
        for (auto lr : {LowpassRule::Mean, LowpassRule::SelectA, LowpassRule::SelectB})
            EXPECT_TRUE(same(fuse_pyramids(p, p, {hr, lr}), p));
}

TEST(FusePyramids, MaxMagnitudeExample) {
    Pyramid a = pyr(1), b = pyr(2);
    auto& ba = a.levels[0].bands[0];
    auto& bb = b.levels[0].bands[0];
    ba.re.at(0, 0) = 3.0f;
    ba.im.at(0, 0) = 0.0f;
    bb.re.at(0, 0) = 0.0f;
    bb.im.at(0, 0) = -5.0f;
    a.lowpass.at(0, 0) = 100.0f;
    b.lowpass.at(0, 0) = 50.0f;
    const Pyramid f = fuse_pyramids(a, b, {});
    EXPECT_EQ(f.levels[0].bands[0].re.at(0, 0), 0.0f);
    EXPECT_EQ(f.levels[0].bands[0].im.at(0, 0), -5.0f);
    EXPECT_EQ(f.lowpass.at(0, 0), 75.0f);
}

TEST(FusePyramids, SelectionPropertyAndTies) {
    Pyramid a = pyr(3), b = pyr(4);
    // equal magnitude, different phase: A wins
    a.levels[1].bands[2].re.at(1, 1) = 3.0f;
    a.levels[1].bands[2].im.at(1, 1) = 4.0f;
    b.levels[1].bands[2].re.at(1, 1) = -4.0f;
    b.levels[1].bands[2].im.at(1, 1) = 3.0f;
    const Pyramid f = fuse_pyramids(a, b, {});
    for (int l = 0; l < f.depth(); ++l)
        for (int k = 0; k < 6; ++k) {
            const auto &fa = a.levels[l].bands[k], &fb = b.levels[l].bands[k], &ff = f.levels[l].bands[k];
            for (int y = 0; y < ff.height(); ++y)
                for (int x = 0; x < ff.width(); ++x) {
                    const std::complex<float> za(fa.re.at(x, y), fa.im.at(x, y)), zb(fb.re.at(x, y), fb.im.at(x, y)),
                        zf(ff.re.at(x, y), ff.im.at(x, y));
                    ASSERT_TRUE(zf == za || zf == zb);
                    ASSERT_EQ(zf, std::norm(za) >= std::norm(zb) ? za : zb);
                }
        }
    EXPECT_EQ(f.levels[1].bands[2].re.at(1, 1), 3.0f);
}

TEST(FusePyramids, MeanRuleIsSymmetric) {
    const Pyramid a = pyr(5), b = pyr(6);
    EXPECT_TRUE(same(fuse_pyramids(a, b, {HighpassRule::Mean, LowpassRule::Mean}),
                     fuse_pyramids(b, a, {HighpassRule::Mean, LowpassRule::Mean})));
    const Pyramid m = fuse_pyramids(a, b, {HighpassRule::Mean, LowpassRule::SelectB});
    EXPECT_EQ(m.levels[0].bands[4].im.at(2, 3),
              0.5f * (a.levels[0].bands[4].im.at(2, 3) + b.levels[0].bands[4].im.at(2, 3)));
    EXPECT_EQ(m.lowpass, b.lowpass);
}

TEST(FusePyramids, ShapeMismatchThrows) {
    EXPECT_THROW(fuse_pyramids(pyr(1, 40, 32), pyr(1, 40, 30), {}), std::invalid_argument);
    EXPECT_THROW(fuse_pyramids(pyr(1, 40, 32, 2), pyr(1, 40, 32, 3), {}), std::invalid_argument);
}

TEST(FuseFrames, IdempotentWithinRoundTrip) {
    const Frame f = random_frame(88, 72, 7);
    const Frame out = fuse_frames(f, f, 2, {}, uniform_plan(BackendId::Scalar, {88, 72}, 2));
    EXPECT_EQ(out.width(), 88);
    EXPECT_EQ(out.height(), 72);
    EXPECT_LT(max_abs_diff(out, f), 1e-3);
}

TEST(FuseFrames, ComplementaryBlurKeepsSharpHalves) {
    // The sigma-2 blur removes detail down to roughly the level-4 band, so
    // shallower pyramids leave part of it in the averaged lowpass.
    for (unsigned seed = 1; seed <= 6; ++seed) {
        auto [a, b] = synthetic_pair({88, 72}, seed);
        const Frame f = fuse_frames(a, b, 4, {}, uniform_plan(BackendId::Scalar, {88, 72}, 4));
        // stay clear of the seam, where both inputs are half blurred
        const double fl = tenengrad(f, 0, 40), fr = tenengrad(f, 48, 88);
        EXPECT_GE(fl, 0.95 * std::max(tenengrad(a, 0, 40), tenengrad(b, 0, 40))) << seed;
        EXPECT_GE(fr, 0.95 * std::max(tenengrad(a, 48, 88), tenengrad(b, 48, 88))) << seed;
        // the pair really is complementary
        EXPECT_GT(tenengrad(a, 0, 40), 1.5 * tenengrad(b, 0, 40));
        EXPECT_GT(tenengrad(b, 48, 88), 1.5 * tenengrad(a, 48, 88));
    }
}

TEST(FuseFrames, Errors) {
    const Frame a = random_frame(16, 16, 1), b = random_frame(16, 14, 2);
    EXPECT_THROW(fuse_frames(a, b, 1, {}, uniform_plan(BackendId::Scalar, {16, 16}, 1)), std::invalid_argument);
    EXPECT_THROW(fuse_frames(a, a, 2, {}, uniform_plan(BackendId::Scalar, {16, 16}, 1)), std::invalid_argument);
}

TEST(FusionRule, ParseAndConfig) {
    EXPECT_EQ(parse_highpass_rule("max"), HighpassRule::MaxMagnitude);
    EXPECT_EQ(parse_highpass_rule("mean"), HighpassRule::Mean);
    EXPECT_EQ(parse_lowpass_rule("select-b"), LowpassRule::SelectB);
    EXPECT_THROW(parse_highpass_rule("median"), std::invalid_argument);
    const FusionRule r = parse_fusion_config("# rules\nclock_hz = 1\nfusion.highpass_rule = mean\n"
                                             "fusion.lowpass_rule = \"select-a\"\n");
    EXPECT_EQ(r.highpass, HighpassRule::Mean);
    EXPECT_EQ(r.lowpass, LowpassRule::SelectA);
    EXPECT_EQ(parse_fusion_config("").highpass, HighpassRule::MaxMagnitude);
    EXPECT_THROW(parse_fusion_config("fusion.highpass_rule = best"), std::invalid_argument);
}
