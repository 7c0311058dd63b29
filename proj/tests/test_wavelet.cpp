// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dtfuse Authors

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dtfuse/filter_bank.hpp"
#include "dtfuse/wavelet.hpp"
#include "test_support.hpp"

using namespace dtfuse;
using dtfuse::testing::random_frame;
using dtfuse::testing::random_line;

namespace {

const FilterBank& bank() { return default_filter_bank(); }

Taps unit_tap() {
    Taps t{};
    t[0] = 1.0f;
    return t;
}

// Mirror an out-of-range index back into [0, n) by repeated reflection.
std::size_t mirror(long i, long n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * (n - 1) - i;
    }
    return static_cast<std::size_t>(i);
}

// Separable periodic transform in double, straight from the definition.
std::array<std::vector<double>, 4> naive_dwt2(const Plane& p, const FilterPair& r, const FilterPair& c) {
    const int W = p.width(), H = p.height(), w = W / 2, h = H / 2;
    std::array<std::vector<double>, 4> out;
    for (auto& o : out) o.assign(static_cast<std::size_t>(w) * h, 0.0);
    const Taps* rows[2] = {&r.lp, &r.hp};
    const Taps* cols[2] = {&c.lp, &c.hp};
    // out index: 0 LL, 1 LH (row lp, col hp), 2 HL, 3 HH
    for (int rb = 0; rb < 2; ++rb)
        for (int cb = 0; cb < 2; ++cb)
            for (int ky = 0; ky < h; ++ky)
                for (int kx = 0; kx < w; ++kx) {
                    double s = 0;
                    for (int jy = 0; jy < 12; ++jy)
                        for (int jx = 0; jx < 12; ++jx) {
                            const int y = ((2 * ky + jy - 6) % H + H) % H;
                            const int x = ((2 * kx + jx - 6) % W + W) % W;
                            s += double((*cols[cb])[jy]) * double((*rows[rb])[jx]) * p.at(x, y);
                        }
                    out[rb * 2 + cb][static_cast<std::size_t>(ky) * w + kx] = s;
                }
    return out;
}

}  // namespace

TEST(FilterBank, DefaultBankInvariants) {
    EXPECT_NO_THROW(validate_filter_bank(bank()));
    auto sum = [](const Taps& t) {
        double s = 0;
        for (float v : t) s += v;
        return s;
    };
    EXPECT_NEAR(sum(bank().level1_analysis_a.lp), std::numbers::sqrt2, 1e-6);
    EXPECT_NEAR(sum(bank().level1_analysis_b.hp), 0.0, 1e-6);
    EXPECT_NEAR(sum(bank().qshift_analysis_a.lp), std::numbers::sqrt2, 1e-6);
    EXPECT_NEAR(sum(bank().qshift_analysis_a.hp), 0.0, 1e-6);
}

TEST(FilterBank, QshiftTreeBIsReversal) {
    const auto b = bank().qshift_analysis(Tree::B);
    for (std::size_t i = 0; i < kTaps; ++i) {
        EXPECT_EQ(b.lp[i], bank().qshift_analysis_a.lp[11 - i]);
        EXPECT_EQ(b.hp[i], bank().qshift_analysis_a.hp[11 - i]);
    }
}

TEST(FilterBank, TextRoundTrip) {
    const FilterBank b = parse_filter_bank(format_filter_bank(bank()));
    EXPECT_EQ(b.level1_synthesis_b.hp, bank().level1_synthesis_b.hp);
    EXPECT_EQ(b.qshift_analysis_a.lp, bank().qshift_analysis_a.lp);
}

TEST(FilterBank, RejectsBrokenBanks) {
    EXPECT_THROW(parse_filter_bank("qshift.analysis.lp = 1,2,3\n"), std::invalid_argument);
    EXPECT_THROW(parse_filter_bank("nope = 1,0,0,0,0,0,0,0,0,0,0,0\n"), std::invalid_argument);
    // Right length, wrong DC gain.
    EXPECT_THROW(parse_filter_bank("qshift.analysis.lp = 1,0,0,0,0,0,0,0,0,0,0,0\n"), std::invalid_argument);
    // Scaled lowpass keeps nothing reconstructing.
    FilterBank b = bank();
    b.level1_synthesis_a.lp[5] += 0.01f;
    EXPECT_THROW(validate_filter_bank(b), std::invalid_argument);
}

TEST(ExtendSymmetric, Examples) {
    const std::vector<float> a{1, 2, 3};
    EXPECT_EQ(extend_symmetric(a, 2, 1), (std::vector<float>{3, 2, 1, 2, 3, 2}));
    const std::vector<float> one{5};
    EXPECT_EQ(extend_symmetric(one, 0, 0), (std::vector<float>{5}));
    EXPECT_THROW(extend_symmetric(a, 4, 0), std::invalid_argument);
    EXPECT_THROW(extend_symmetric(std::vector<float>{}, 0, 0), std::invalid_argument);
}

TEST(ExtendSymmetric, MatchesIndexMirrorOracle) {
    const auto x = random_line(16, 3);
    const auto e = extend_symmetric(x, 6, 6);
    ASSERT_EQ(e.size(), 28u);
    for (long i = -6; i < 22; ++i) EXPECT_EQ(e[static_cast<std::size_t>(i + 6)], x[mirror(i, 16)]);
}

TEST(AnalysisPair, IdentityTap) {
    const auto x = random_line(40, 1);
    for (BackendId b : kAllBackends) {
        const auto r = analysis_pair(x, unit_tap(), Taps{}, b);
        ASSERT_EQ(r.lo.size(), 14u);
        for (std::size_t k = 0; k < 14; ++k) {
            EXPECT_EQ(r.lo[k], x[2 * k]);
            EXPECT_EQ(r.hi[k], 0.0f);
        }
    }
}

TEST(AnalysisPair, DcGain) {
    const std::vector<float> x(40, 3.0f);
    const auto& f = bank().qshift_analysis_a;
    const auto r = analysis_pair(x, f.lp, f.hp, BackendId::Scalar);
    for (std::size_t k = 0; k < r.lo.size(); ++k) {
        EXPECT_NEAR(r.lo[k], std::numbers::sqrt2 * 3.0, 1e-5);
        EXPECT_NEAR(r.hi[k], 0.0, 1e-5);
    }
}

TEST(AnalysisPair, MatchesDoubleCorrelation) {
    const auto x = random_line(40, 11);
    const auto lp = dtfuse::testing::random_taps(5), hp = dtfuse::testing::random_taps(6);
    const auto ol = dtfuse::testing::correlate2(x, lp, 14), oh = dtfuse::testing::correlate2(x, hp, 14);
    for (BackendId b : kAllBackends) {
        const auto r = analysis_pair(x, lp, hp, b);
        for (std::size_t k = 0; k < 14; ++k) {
            EXPECT_LE(std::abs(r.lo[k] - ol[k]), 1e-5 * (std::abs(ol[k]) + 1));
            EXPECT_LE(std::abs(r.hi[k] - oh[k]), 1e-5 * (std::abs(oh[k]) + 1));
        }
    }
}

TEST(AnalysisPair, RejectsBadLength) {
    const auto x = random_line(41, 1);
    EXPECT_THROW(analysis_pair(x, unit_tap(), unit_tap(), BackendId::Scalar), std::invalid_argument);
    const auto y = random_line(12, 1);
    EXPECT_THROW(analysis_pair(y, unit_tap(), unit_tap(), BackendId::Scalar), std::invalid_argument);
}

TEST(SynthesisPair, ZeroInZeroOut) {
    const std::vector<float> z(10, 0.0f);
    const auto y = synthesis_pair(z, z, bank().level1_synthesis_a.lp, bank().level1_synthesis_a.hp, BackendId::Scalar);
    ASSERT_EQ(y.size(), 32u);
    for (float v : y) EXPECT_EQ(v, 0.0f);
}

TEST(SynthesisPair, ImpulseResponse) {
    const auto& s = bank().level1_synthesis_a;
    std::vector<float> lo(8, 0.0f), hi(8, 0.0f);
    lo[3] = 1.0f;
    for (BackendId b : kAllBackends) {
        const auto y = synthesis_pair(lo, hi, s.lp, s.hp, b);
        for (std::size_t i = 0; i < y.size(); ++i) {
            const float expect = (i >= 6 && i < 18) ? s.lp[i - 6] : 0.0f;
            EXPECT_EQ(y[i], expect) << to_string(b) << " i=" << i;
        }
    }
}

TEST(SynthesisPair, RoundTripInterior) {
    // Non-periodic line: only samples whose full synthesis support saw real
    // analysis output are reconstructed.
    const auto x = random_line(64, 21);
    for (int lvl : {1, 2}) {
        for (Tree t : {Tree::A, Tree::B}) {
            const auto a = bank().analysis(lvl, t);
            const auto s = bank().synthesis(lvl, t);
            const auto r = analysis_pair(x, a.lp, a.hp, BackendId::Scalar);
            const auto y = synthesis_pair(r.lo, r.hi, s.lp, s.hp, BackendId::Scalar);
            for (std::size_t i = 12; i + 12 < x.size(); ++i) EXPECT_NEAR(y[i], x[i], 1e-5) << "i=" << i;
        }
    }
    EXPECT_THROW(synthesis_pair(std::vector<float>(3), std::vector<float>(4), unit_tap(), unit_tap(), BackendId::Scalar),
                 std::invalid_argument);
}

TEST(Dwt2dLevel, ConstantPlane) {
    const Plane p(16, 12, 7.0f);
    const auto s = dwt2d_level(p, bank().qshift_analysis_a, bank().qshift_analysis_a, BackendId::Scalar);
    for (float v : s.LL.data()) EXPECT_NEAR(v, 14.0f, 1e-4);
    for (const Plane* q : {&s.LH, &s.HL, &s.HH})
        for (float v : q->data()) EXPECT_LT(std::abs(v), 1e-5);
}

TEST(Dwt2dLevel, MatchesNaiveSeparableOracle) {
    const Plane p = random_frame(8, 8, 4, -1.0f, 1.0f);
    const auto rb = bank().level1_analysis_a;
    const auto cb = bank().qshift_analysis(Tree::B);
    const auto s = dwt2d_level(p, rb, cb, BackendId::Scalar);
    const auto o = naive_dwt2(p, rb, cb);
    const Plane* got[4] = {&s.LL, &s.LH, &s.HL, &s.HH};
    for (int b = 0; b < 4; ++b)
        for (std::size_t i = 0; i < o[b].size(); ++i) EXPECT_NEAR(got[b]->data()[i], o[b][i], 1e-5);
}

TEST(Dwt2dLevel, FullFrameSize) {
    const Plane p = random_frame(88, 72, 2);
    const auto s = dwt2d_level(p, bank().level1_analysis_a, bank().level1_analysis_a, BackendId::Scalar);
    EXPECT_EQ(s.HH.width(), 44);
    EXPECT_EQ(s.HH.height(), 36);
    EXPECT_THROW(dwt2d_level(Plane(), bank().level1_analysis_a, bank().level1_analysis_a, BackendId::Scalar),
                 std::invalid_argument);
}

TEST(Dwt2dLevel, OddSizeRepeatsLastRowAndColumn) {
    const Plane p = random_frame(7, 5, 9);
    const auto a = dwt2d_level(p, bank().level1_analysis_a, bank().level1_analysis_a, BackendId::Scalar);
    const auto b = dwt2d_level(p.padded_even(), bank().level1_analysis_a, bank().level1_analysis_a, BackendId::Scalar);
    EXPECT_EQ(a.LL, b.LL);
    EXPECT_EQ(a.LL.width(), 4);
    EXPECT_EQ(a.LL.height(), 3);
}

TEST(DtcwtForward, ConstantFrame) {
    const Frame f(32, 24, 10.0f);
    const auto p = dtcwt_forward(f, 1, bank(), BackendId::Scalar);
    ASSERT_EQ(p.depth(), 1);
    for (const auto& b : p.levels[0].bands) {
        for (float v : b.re.data()) EXPECT_LT(std::abs(v), 1e-4);
        for (float v : b.im.data()) EXPECT_LT(std::abs(v), 1e-4);
    }
    for (float v : p.lowpass.data()) EXPECT_NEAR(v, 20.0f, 1e-4);
}

TEST(DtcwtForward, LowpassGainPerLevel) {
    const Frame f(32, 32, 1.5f);
    const auto p = dtcwt_forward(f, 3, bank(), BackendId::Scalar);
    for (float v : p.lowpass.data()) EXPECT_NEAR(v, 12.0f, 1e-4);
}

TEST(DtcwtForward, Shapes) {
    const auto p = dtcwt_forward(random_frame(88, 72, 1), 2, bank(), BackendId::Scalar);
    for (const auto& b : p.levels[0].bands) {
        EXPECT_EQ(b.width(), 44);
        EXPECT_EQ(b.height(), 36);
    }
    for (const auto& b : p.levels[1].bands) {
        EXPECT_EQ(b.width(), 22);
        EXPECT_EQ(b.height(), 18);
    }
    EXPECT_EQ(p.lowpass.width(), 22);
    EXPECT_EQ(p.lowpass.height(), 18);
    for (int k = 0; k < 6; ++k) EXPECT_EQ(p.levels[1].bands[k].orientation, kOrientations[k]);
}

TEST(DtcwtForward, ShapesFollowCeilingForOddSizes) {
    for (auto [w, h] : {std::pair{35, 35}, {33, 17}, {9, 40}}) {
        const int levels = std::min(3, max_levels(w, h));
        const auto p = dtcwt_forward(random_frame(w, h, 2), levels, bank(), BackendId::Scalar);
        int cw = w, ch = h;
        for (int l = 0; l < levels; ++l) {
            cw = (cw + 1) / 2;
            ch = (ch + 1) / 2;
            for (const auto& b : p.levels[l].bands) {
                EXPECT_EQ(b.width(), cw);
                EXPECT_EQ(b.height(), ch);
            }
        }
        EXPECT_NO_THROW(check_pyramid(p));
    }
}

TEST(DtcwtForward, RejectsTooManyLevels) {
    EXPECT_THROW(dtcwt_forward(random_frame(16, 8, 1), 4, bank(), BackendId::Scalar), std::invalid_argument);
    EXPECT_THROW(dtcwt_forward(random_frame(16, 8, 1), 0, bank(), BackendId::Scalar), std::invalid_argument);
    EXPECT_NO_THROW(dtcwt_forward(random_frame(16, 8, 1), 3, bank(), BackendId::Scalar));
}

namespace {

// Plane-wave grating whose wave vector points at `deg` (x right, y down).
Frame grating(int n, double period, double deg) {
    const double th = deg * std::numbers::pi / 180.0;
    const double kx = 2 * std::numbers::pi / period * std::cos(th);
    const double ky = 2 * std::numbers::pi / period * std::sin(th);
    Frame f(n, n);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) f.at(x, y) = static_cast<float>(100 * std::cos(kx * x + ky * y));
    return f;
}

}  // namespace

TEST(DtcwtForward, OrientationSelectivity) {
    // Period 3 and 6 gratings land on levels 2 and 3.
    const std::pair<int, double> cases[] = {{2, 3.0}, {3, 6.0}};
    const std::pair<Orientation, Orientation> opposite[] = {
        {Orientation::P15, Orientation::M15}, {Orientation::P45, Orientation::M45}, {Orientation::P75, Orientation::M75}};
    for (auto [level, period] : cases)
        for (auto [pos, neg] : opposite) {
            for (int sign : {1, -1}) {
                const Orientation want = sign > 0 ? pos : neg;
                const Orientation other = sign > 0 ? neg : pos;
                const auto p = dtcwt_forward(grating(64, period, sign * degrees(pos)), 3, bank(), BackendId::Scalar);
                const double ew = dtfuse::testing::band_energy(p.levels[level - 1][want]);
                const double eo = dtfuse::testing::band_energy(p.levels[level - 1][other]);
                EXPECT_GT(ew, 4 * eo) << "level " << level << " orientation " << to_string(want);
            }
        }
}

TEST(DtcwtForward, Linearity) {
    const Frame f = random_frame(40, 40, 1), g = random_frame(40, 40, 2);
    const float a = 0.7f, b = -1.3f;
    Frame h(40, 40);
    for (std::size_t i = 0; i < h.size(); ++i) h.data()[i] = a * f.data()[i] + b * g.data()[i];
    const auto pf = dtcwt_forward(f, 3, bank(), BackendId::Scalar);
    const auto pg = dtcwt_forward(g, 3, bank(), BackendId::Scalar);
    const auto ph = dtcwt_forward(h, 3, bank(), BackendId::Scalar);
    double worst = 0;
    for (int l = 0; l < 3; ++l)
        for (int k = 0; k < 6; ++k)
            for (auto pl : {&ComplexSubband::re, &ComplexSubband::im}) {
                const auto& x = ph.levels[l].bands[k].*pl;
                const auto& u = pf.levels[l].bands[k].*pl;
                const auto& v = pg.levels[l].bands[k].*pl;
                for (std::size_t i = 0; i < x.size(); ++i) {
                    const double e = a * double(u.data()[i]) + b * double(v.data()[i]);
                    worst = std::max(worst, std::abs(x.data()[i] - e) / (std::abs(e) + 1));
                }
            }
    EXPECT_LT(worst, 1e-4);
}

TEST(DtcwtInverse, RoundTripSizesAndLevels) {
    for (auto [w, h] : {std::pair{32, 24}, {40, 40}, {64, 48}, {88, 72}, {35, 35}})
        for (int levels = 1; levels <= 3; ++levels) {
            const Frame f = random_frame(w, h, static_cast<unsigned>(w * levels));
            const Frame r = dtcwt_inverse(dtcwt_forward(f, levels, bank(), BackendId::Scalar), bank(), BackendId::Scalar);
            EXPECT_LT(max_abs_diff(r, f), 1e-3) << w << "x" << h << " L" << levels;
        }
}

TEST(DtcwtInverse, RoundTripImpulseAndConstant) {
    Frame imp(40, 40);
    imp.at(17, 23) = 255.0f;
    const Frame c(64, 48, 128.0f);
    for (const Frame* f : std::initializer_list<const Frame*>{&imp, &c}) {
        const Frame r = dtcwt_inverse(dtcwt_forward(*f, 3, bank(), BackendId::Scalar), bank(), BackendId::Scalar);
        EXPECT_LT(max_abs_diff(r, *f), 1e-3);
    }
}

TEST(DtcwtInverse, ZeroPyramid) {
    auto p = dtcwt_forward(random_frame(32, 24, 3), 2, bank(), BackendId::Scalar);
    for (auto& lev : p.levels)
        for (auto& b : lev.bands) {
            std::fill(b.re.data().begin(), b.re.data().end(), 0.0f);
            std::fill(b.im.data().begin(), b.im.data().end(), 0.0f);
        }
    std::fill(p.lowpass.data().begin(), p.lowpass.data().end(), 0.0f);
    const Frame r = dtcwt_inverse(p, bank(), BackendId::Scalar);
    for (float v : r.data()) EXPECT_EQ(v, 0.0f);
}

TEST(DtcwtInverse, RejectsMalformedPyramid) {
    auto p = dtcwt_forward(random_frame(32, 24, 3), 2, bank(), BackendId::Scalar);
    p.levels[1].bands[2].im = Plane(3, 3);
    EXPECT_THROW(dtcwt_inverse(p, bank(), BackendId::Scalar), std::invalid_argument);
    Pyramid empty;
    EXPECT_THROW(dtcwt_inverse(empty, bank(), BackendId::Scalar), std::invalid_argument);
}

TEST(DtcwtInverse, PerLevelBackends) {
    const Frame f = random_frame(64, 48, 8);
    const BackendId plan[] = {BackendId::Accel, BackendId::Vector, BackendId::Scalar};
    const auto p = dtcwt_forward(f, 3, bank(), plan);
    const auto ref = dtcwt_forward(f, 3, bank(), BackendId::Scalar);
    EXPECT_LT(max_rel_diff(p.lowpass, ref.lowpass), 1e-5);
    EXPECT_LT(max_abs_diff(dtcwt_inverse(p, bank(), plan), f), 1e-3);
    const BackendId wrong[] = {BackendId::Scalar};
    EXPECT_THROW(dtcwt_forward(f, 3, bank(), wrong), std::invalid_argument);
}

TEST(ShiftInvariance, ComplexBeatsRealTree) {
    using dtfuse::testing::energy;
    const Frame f = dtfuse::testing::shift_test_image(0), g = dtfuse::testing::shift_test_image(1);
    const auto pf = dtcwt_forward(f, 3, bank(), BackendId::Scalar);
    const auto pg = dtcwt_forward(g, 3, bank(), BackendId::Scalar);
    const auto rf = dwt_forward(f, 3, bank(), BackendId::Scalar);
    const auto rg = dwt_forward(g, 3, bank(), BackendId::Scalar);
    double dc = 0, dr = 0;
    int nc = 0, nr = 0;
    for (int l = 0; l < 3; ++l) {
        for (int k = 0; k < 6; ++k) {
            const double a = dtfuse::testing::band_energy(pf.levels[l].bands[k]);
            const double b = dtfuse::testing::band_energy(pg.levels[l].bands[k]);
            dc += std::abs(b - a) / a;
            ++nc;
        }
        for (int k = 0; k < 3; ++k) {
            const double a = energy(rf.levels[l][k]), b = energy(rg.levels[l][k]);
            dr += std::abs(b - a) / a;
            ++nr;
        }
    }
    EXPECT_LT((dc / nc) / (dr / nr), 0.5);
}

TEST(PyramidDump, RoundTripAndLayout) {
    const auto p = dtcwt_forward(random_frame(35, 20, 5), 2, bank(), BackendId::Scalar);
    const auto bytes = dump_pyramid(p);
    ASSERT_GE(bytes.size(), 20u);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "DTCP");
    EXPECT_EQ(bytes[8], 35);
    EXPECT_EQ(bytes[12], 20);
    EXPECT_EQ(bytes[16], 2);
    // 18x10 and 9x5 levels, 12 planes each, plus lowpass.
    EXPECT_EQ(bytes.size(), 20u + 4u * (12 * 180 + 12 * 45 + 45));
    const auto q = load_pyramid(bytes);
    EXPECT_TRUE(same_shape(p, q));
    EXPECT_EQ(q.levels[1].bands[3].im, p.levels[1].bands[3].im);
    EXPECT_EQ(q.lowpass, p.lowpass);
    auto bad = bytes;
    bad.pop_back();
    EXPECT_THROW(load_pyramid(bad), std::invalid_argument);
}
