// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dtfuse Authors

#include "dtfuse/backend.hpp"

#include <algorithm>
#include <stdexcept>

#include "dtfuse/engine.hpp"

#if DTFUSE_ENABLE_SIMD && (defined(__SSE__) || defined(_M_X64))
#include <xmmintrin.h>
#define DTFUSE_LANES_SSE 1
#elif DTFUSE_ENABLE_SIMD && (defined(__ARM_NEON) || defined(__aarch64__))
#include <arm_neon.h>
#define DTFUSE_LANES_NEON 1
#endif

// The scalar mode stands for a CPU without lanes, so keep the compiler from
// vectorizing its kernels behind our back.
#if defined(__clang__)
#define DTFUSE_NO_AUTOVEC
#define DTFUSE_NO_AUTOVEC_LOOP _Pragma("clang loop vectorize(disable) interleave(disable)")
#elif defined(__GNUC__)
#define DTFUSE_NO_AUTOVEC __attribute__((optimize("no-tree-vectorize", "no-tree-slp-vectorize")))
#define DTFUSE_NO_AUTOVEC_LOOP
#else
#define DTFUSE_NO_AUTOVEC
#define DTFUSE_NO_AUTOVEC_LOOP
#endif

namespace dtfuse {

namespace {

void check_analysis(std::span<const float> x, std::span<float> lo, std::span<float> hi) {
    if (lo.size() != hi.size()) throw std::invalid_argument("lo/hi output lengths differ");
    if (lo.empty()) throw std::invalid_argument("outwidth must be >= 1");
    if (x.size() != 2 * lo.size() + kTaps)
        throw std::invalid_argument("analysis line length must be 2*outwidth + 12");
}

void check_synthesis(std::span<const float> lo, std::span<const float> hi, std::span<float> y) {
    if (lo.size() != hi.size()) throw std::invalid_argument("lo/hi coefficient lengths differ");
    if (lo.empty()) throw std::invalid_argument("synthesis needs at least one coefficient");
    if (y.size() != 2 * lo.size() + kTaps)
        throw std::invalid_argument("synthesis output length must be 2*n + 12");
}

// ---- scalar: sequential multiply then add, tap 0 first ----

DTFUSE_NO_AUTOVEC void scalar_analysis(std::span<const float> x, const Taps& lp, const Taps& hp,
                                       std::span<float> lo, std::span<float> hi) {
    DTFUSE_NO_AUTOVEC_LOOP
    for (std::size_t k = 0; k < lo.size(); ++k) {
        const float* w = x.data() + 2 * k;
        float l = lp[0] * w[0];
        float h = hp[0] * w[0];
        for (std::size_t j = 1; j < kTaps; ++j) {
            const float lm = lp[j] * w[j];
            const float hm = hp[j] * w[j];
            l += lm;
            h += hm;
        }
        lo[k] = l;
        hi[k] = h;
    }
}

DTFUSE_NO_AUTOVEC void scalar_synthesis(std::span<const float> lo, std::span<const float> hi, const Taps& lp,
                                        const Taps& hp, std::span<float> y) {
    std::fill(y.begin(), y.end(), 0.0f);
    DTFUSE_NO_AUTOVEC_LOOP
    for (std::size_t k = 0; k < lo.size(); ++k) {
        float* w = y.data() + 2 * k;
        for (std::size_t j = 0; j < kTaps; ++j) {
            const float a = lo[k] * lp[j];
            w[j] += a;
            const float b = hi[k] * hp[j];
            w[j] += b;
        }
    }
}

// ---- vector: three 4-lane groups, (l2+l3)+(l0+l1) reduction ----

#if DTFUSE_LANES_SSE
inline float hsum(__m128 v) {
    alignas(16) float l[4];
    _mm_store_ps(l, v);
    return (l[2] + l[3]) + (l[0] + l[1]);
}

void vector_analysis(std::span<const float> x, const Taps& lp, const Taps& hp, std::span<float> lo,
                     std::span<float> hi) {
    const __m128 l0 = _mm_loadu_ps(lp.data()), l1 = _mm_loadu_ps(lp.data() + 4), l2 = _mm_loadu_ps(lp.data() + 8);
    const __m128 h0 = _mm_loadu_ps(hp.data()), h1 = _mm_loadu_ps(hp.data() + 4), h2 = _mm_loadu_ps(hp.data() + 8);
    auto partial = [&](const float* w, __m128& la, __m128& ha) {
        const __m128 x0 = _mm_loadu_ps(w), x1 = _mm_loadu_ps(w + 4), x2 = _mm_loadu_ps(w + 8);
        la = _mm_add_ps(_mm_add_ps(_mm_mul_ps(l0, x0), _mm_mul_ps(l1, x1)), _mm_mul_ps(l2, x2));
        ha = _mm_add_ps(_mm_add_ps(_mm_mul_ps(h0, x0), _mm_mul_ps(h1, x1)), _mm_mul_ps(h2, x2));
    };
    // Four outputs at a time: transposing the partial sums lets the lane
    // reduction run vertically with the same pairing as hsum.
    std::size_t k = 0;
    for (; k + 4 <= lo.size(); k += 4) {
        const float* w = x.data() + 2 * k;
        __m128 a0, a1, a2, a3, b0, b1, b2, b3;
        partial(w, a0, b0);
        partial(w + 2, a1, b1);
        partial(w + 4, a2, b2);
        partial(w + 6, a3, b3);
        _MM_TRANSPOSE4_PS(a0, a1, a2, a3);
        _MM_TRANSPOSE4_PS(b0, b1, b2, b3);
        _mm_storeu_ps(lo.data() + k, _mm_add_ps(_mm_add_ps(a2, a3), _mm_add_ps(a0, a1)));
        _mm_storeu_ps(hi.data() + k, _mm_add_ps(_mm_add_ps(b2, b3), _mm_add_ps(b0, b1)));
    }
    for (; k < lo.size(); ++k) {
        const float* w = x.data() + 2 * k;
        const __m128 x0 = _mm_loadu_ps(w), x1 = _mm_loadu_ps(w + 4), x2 = _mm_loadu_ps(w + 8);
        __m128 la = _mm_mul_ps(l0, x0);
        __m128 ha = _mm_mul_ps(h0, x0);
        la = _mm_add_ps(la, _mm_mul_ps(l1, x1));
        ha = _mm_add_ps(ha, _mm_mul_ps(h1, x1));
        la = _mm_add_ps(la, _mm_mul_ps(l2, x2));
        ha = _mm_add_ps(ha, _mm_mul_ps(h2, x2));
        lo[k] = hsum(la);
        hi[k] = hsum(ha);
    }
}

// Transposed form: three registers hold the 12 output samples still being
// accumulated; each step emits the two oldest and slides the window by two.
void vector_synthesis(std::span<const float> lo, std::span<const float> hi, const Taps& lp, const Taps& hp,
                      std::span<float> y) {
    const __m128 l0 = _mm_loadu_ps(lp.data()), l1 = _mm_loadu_ps(lp.data() + 4), l2 = _mm_loadu_ps(lp.data() + 8);
    const __m128 h0 = _mm_loadu_ps(hp.data()), h1 = _mm_loadu_ps(hp.data() + 4), h2 = _mm_loadu_ps(hp.data() + 8);
    const __m128 zero = _mm_setzero_ps();
    __m128 r0 = zero, r1 = zero, r2 = zero;
    const std::size_t n = lo.size();
    for (std::size_t i = 0; i < n + 6; ++i) {
        if (i < n) {
            const __m128 a = _mm_set1_ps(lo[i]);
            const __m128 b = _mm_set1_ps(hi[i]);
            r0 = _mm_add_ps(_mm_add_ps(r0, _mm_mul_ps(a, l0)), _mm_mul_ps(b, h0));
            r1 = _mm_add_ps(_mm_add_ps(r1, _mm_mul_ps(a, l1)), _mm_mul_ps(b, h1));
            r2 = _mm_add_ps(_mm_add_ps(r2, _mm_mul_ps(a, l2)), _mm_mul_ps(b, h2));
        }
        alignas(16) float head[4];
        _mm_store_ps(head, r0);
        y[2 * i] = head[0];
        y[2 * i + 1] = head[1];
        r0 = _mm_shuffle_ps(r0, r1, _MM_SHUFFLE(1, 0, 3, 2));
        r1 = _mm_shuffle_ps(r1, r2, _MM_SHUFFLE(1, 0, 3, 2));
        r2 = _mm_shuffle_ps(r2, zero, _MM_SHUFFLE(1, 0, 3, 2));
    }
}

float group_dot(const float* a, const float* b) {
    return hsum(_mm_mul_ps(_mm_loadu_ps(a), _mm_loadu_ps(b)));
}
#elif DTFUSE_LANES_NEON
inline float hsum(float32x4_t v) {
    float32x2_t t = vpadd_f32(vget_high_f32(v), vget_low_f32(v));
    t = vpadd_f32(t, t);
    return vget_lane_f32(t, 0);
}

void vector_analysis(std::span<const float> x, const Taps& lp, const Taps& hp, std::span<float> lo,
                     std::span<float> hi) {
    const float32x4_t l0 = vld1q_f32(lp.data()), l1 = vld1q_f32(lp.data() + 4), l2 = vld1q_f32(lp.data() + 8);
    const float32x4_t h0 = vld1q_f32(hp.data()), h1 = vld1q_f32(hp.data() + 4), h2 = vld1q_f32(hp.data() + 8);
    for (std::size_t k = 0; k < lo.size(); ++k) {
        const float* w = x.data() + 2 * k;
        const float32x4_t x0 = vld1q_f32(w), x1 = vld1q_f32(w + 4), x2 = vld1q_f32(w + 8);
        float32x4_t la = vmulq_f32(l0, x0);
        float32x4_t ha = vmulq_f32(h0, x0);
        la = vaddq_f32(la, vmulq_f32(l1, x1));
        ha = vaddq_f32(ha, vmulq_f32(h1, x1));
        la = vaddq_f32(la, vmulq_f32(l2, x2));
        ha = vaddq_f32(ha, vmulq_f32(h2, x2));
        lo[k] = hsum(la);
        hi[k] = hsum(ha);
    }
}

void vector_synthesis(std::span<const float> lo, std::span<const float> hi, const Taps& lp, const Taps& hp,
                      std::span<float> y) {
    const float32x4_t l0 = vld1q_f32(lp.data()), l1 = vld1q_f32(lp.data() + 4), l2 = vld1q_f32(lp.data() + 8);
    const float32x4_t h0 = vld1q_f32(hp.data()), h1 = vld1q_f32(hp.data() + 4), h2 = vld1q_f32(hp.data() + 8);
    const float32x4_t zero = vdupq_n_f32(0.0f);
    float32x4_t r0 = zero, r1 = zero, r2 = zero;
    const std::size_t n = lo.size();
    for (std::size_t i = 0; i < n + 6; ++i) {
        if (i < n) {
            const float32x4_t a = vdupq_n_f32(lo[i]);
            const float32x4_t b = vdupq_n_f32(hi[i]);
            r0 = vaddq_f32(vaddq_f32(r0, vmulq_f32(a, l0)), vmulq_f32(b, h0));
            r1 = vaddq_f32(vaddq_f32(r1, vmulq_f32(a, l1)), vmulq_f32(b, h1));
            r2 = vaddq_f32(vaddq_f32(r2, vmulq_f32(a, l2)), vmulq_f32(b, h2));
        }
        y[2 * i] = vgetq_lane_f32(r0, 0);
        y[2 * i + 1] = vgetq_lane_f32(r0, 1);
        r0 = vextq_f32(r0, r1, 2);
        r1 = vextq_f32(r1, r2, 2);
        r2 = vextq_f32(r2, zero, 2);
    }
}

float group_dot(const float* a, const float* b) { return hsum(vmulq_f32(vld1q_f32(a), vld1q_f32(b))); }
#else
// No lane ISA: Vector runs the scalar kernels and the capability report says so.
void vector_analysis(std::span<const float> x, const Taps& lp, const Taps& hp, std::span<float> lo,
                     std::span<float> hi) {
    scalar_analysis(x, lp, hp, lo, hi);
}

void vector_synthesis(std::span<const float> lo, std::span<const float> hi, const Taps& lp, const Taps& hp,
                      std::span<float> y) {
    scalar_synthesis(lo, hi, lp, hp, y);
}

float group_dot(const float* a, const float* b) {
    const float p0 = a[0] * b[0], p1 = a[1] * b[1], p2 = a[2] * b[2], p3 = a[3] * b[3];
    return (p2 + p3) + (p0 + p1);
}
#endif

// ---- accel: lines go through a per-thread engine instance ----

EngineState& thread_engine() {
    thread_local EngineState engine;
    return engine;
}

void accel_analysis(std::span<const float> x, const Taps& lp, const Taps& hp, std::span<float> lo,
                    std::span<float> hi) {
    EngineState& e = thread_engine();
    const std::size_t ow = lo.size();
    load_coefficients(e, lp, hp);
    std::copy(x.begin(), x.end(), e.in_buffer.begin());
    forward_line(e, 0, 0, ow);
    for (std::size_t k = 0; k < ow; ++k) {
        hi[k] = e.out_buffer[2 * k];
        lo[k] = e.out_buffer[2 * k + 1];
    }
}

void accel_synthesis(std::span<const float> lo, std::span<const float> hi, const Taps& lp, const Taps& hp,
                     std::span<float> y) {
    EngineState& e = thread_engine();
    const std::size_t n = lo.size();
    load_coefficients(e, lp, hp);
    for (std::size_t k = 0; k < n; ++k) {
        e.in_buffer[2 * k] = hi[k];
        e.in_buffer[2 * k + 1] = lo[k];
    }
    inverse_line(e, 0, 0, n);
    std::copy_n(e.out_buffer.begin(), y.size(), y.begin());
}

}  // namespace

EngineState& accel_engine() { return thread_engine(); }

std::string_view to_string(BackendId id) {
    switch (id) {
        case BackendId::Scalar: return "scalar";
        case BackendId::Vector: return "vector";
        case BackendId::Accel: return "accel";
    }
    return "scalar";
}

BackendId parse_backend(std::string_view s) {
    if (s == "scalar") return BackendId::Scalar;
    if (s == "vector") return BackendId::Vector;
    if (s == "accel") return BackendId::Accel;
    throw std::invalid_argument("unknown backend '" + std::string(s) + "'");
}

void analysis_line(BackendId id, std::span<const float> x, const Taps& lp, const Taps& hp, std::span<float> lo,
                   std::span<float> hi) {
    check_analysis(x, lo, hi);
    switch (id) {
        case BackendId::Scalar: scalar_analysis(x, lp, hp, lo, hi); break;
        case BackendId::Vector: vector_analysis(x, lp, hp, lo, hi); break;
        case BackendId::Accel: accel_analysis(x, lp, hp, lo, hi); break;
    }
}

void synthesis_line(BackendId id, std::span<const float> lo, std::span<const float> hi, const Taps& lp,
                    const Taps& hp, std::span<float> y) {
    check_synthesis(lo, hi, y);
    switch (id) {
        case BackendId::Scalar: scalar_synthesis(lo, hi, lp, hp, y); break;
        case BackendId::Vector: vector_synthesis(lo, hi, lp, hp, y); break;
        case BackendId::Accel: accel_synthesis(lo, hi, lp, hp, y); break;
    }
}

float lane_dot(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) throw std::invalid_argument("lane_dot operands differ in length");
    const std::size_t body = a.size() & ~std::size_t{3};
    float acc = 0.0f;
    for (std::size_t k = 0; k < body; k += 4) acc += group_dot(a.data() + k, b.data() + k);
    for (std::size_t k = body; k < a.size(); ++k) acc += a[k] * b[k];
    return acc;
}

bool CapabilityReport::has(BackendId id) const {
    return std::find(available.begin(), available.end(), id) != available.end();
}

std::string CapabilityReport::modes_csv() const {
    std::string s;
    for (auto id : available) {
        if (!s.empty()) s += ',';
        s += to_string(id);
    }
    return s;
}

CapabilityReport capability_report() {
    CapabilityReport r;
    r.available = {BackendId::Scalar, BackendId::Vector, BackendId::Accel};
    r.lane_width = 4;
#if DTFUSE_LANES_SSE
    r.vector_native = true;
    r.lane_isa = "sse";
#elif DTFUSE_LANES_NEON
    r.vector_native = true;
    r.lane_isa = "neon";
#else
    r.vector_native = false;
    r.lane_isa = "none";
#endif
    return r;
}

}  // namespace dtfuse
