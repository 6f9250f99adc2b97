#include "sustain/simd/kernels.hpp"

#if (defined(__x86_64__) || defined(__i386__)) && (defined(__GNUC__) || defined(__clang__))
#define SUSTAIN_HAS_AVX2_PATH 1
#include <immintrin.h>
#endif

namespace sustain::simd {

#if SUSTAIN_HAS_AVX2_PATH
namespace {

#define SUSTAIN_AVX2 __attribute__((target("avx2")))

SUSTAIN_AVX2 void axpy(double* out, const double* y, double a, const double* x, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
    }
    for (; i < n; ++i) out[i] = y[i] + a * x[i];
}

SUSTAIN_AVX2 void rk4_combine(double* out, const double* y, double h6, const double* k1,
                              const double* k2, const double* k3, const double* k4,
                              std::size_t n) {
    const __m256d two = _mm256_set1_pd(2.0);
    const __m256d vh = _mm256_set1_pd(h6);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d s = _mm256_add_pd(_mm256_loadu_pd(k1 + i), _mm256_mul_pd(two, _mm256_loadu_pd(k2 + i)));
        s = _mm256_add_pd(s, _mm256_mul_pd(two, _mm256_loadu_pd(k3 + i)));
        s = _mm256_add_pd(s, _mm256_loadu_pd(k4 + i));
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(vh, s)));
    }
    for (; i < n; ++i) {
        const double s = ((k1[i] + 2.0 * k2[i]) + 2.0 * k3[i]) + k4[i];
        out[i] = y[i] + h6 * s;
    }
}

SUSTAIN_AVX2 void laplacian(double* out, const double* g, double inv_dx2, std::size_t n) {
    const __m256d two = _mm256_set1_pd(2.0);
    const __m256d scale = _mm256_set1_pd(inv_dx2);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d left = _mm256_loadu_pd(g + i);
        const __m256d mid = _mm256_loadu_pd(g + i + 1);
        const __m256d right = _mm256_loadu_pd(g + i + 2);
        const __m256d d2 = _mm256_add_pd(_mm256_sub_pd(left, _mm256_mul_pd(two, mid)), right);
        _mm256_storeu_pd(out + i, _mm256_mul_pd(d2, scale));
    }
    for (; i < n; ++i) out[i] = ((g[i] - 2.0 * g[i + 1]) + g[i + 2]) * inv_dx2;
}

SUSTAIN_AVX2 void upwind(double* out, const double* g, double coef, std::size_t n) {
    const __m256d vc = _mm256_set1_pd(coef);
    // Forward difference for negative velocity reads one cell further right.
    const std::size_t shift = coef > 0.0 ? 0 : 1;
    const double* base = g + shift;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(base + i + 1), _mm256_loadu_pd(base + i));
        _mm256_storeu_pd(out + i, _mm256_mul_pd(vc, diff));
    }
    for (; i < n; ++i) out[i] = coef * (base[i + 1] - base[i]);
}

SUSTAIN_AVX2 std::size_t clamp_nonnegative(double* v, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t count = 0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d x = _mm256_loadu_pd(v + i);
        const __m256d neg = _mm256_cmp_pd(x, zero, _CMP_LT_OQ);
        count += static_cast<std::size_t>(__builtin_popcount(_mm256_movemask_pd(neg)));
        _mm256_storeu_pd(v + i, _mm256_blendv_pd(x, zero, neg));
    }
    for (; i < n; ++i) {
        if (v[i] < 0.0) {
            v[i] = 0.0;
            ++count;
        }
    }
    return count;
}

#undef SUSTAIN_AVX2

} // namespace

const KernelTable* avx2_kernels() {
    static const bool supported = __builtin_cpu_supports("avx2");
    static const KernelTable table{"avx2", axpy, rk4_combine, laplacian, upwind, clamp_nonnegative};
    return supported ? &table : nullptr;
}

#else

const KernelTable* avx2_kernels() { return nullptr; }

#endif

} // namespace sustain::simd
