#include "sustain/simd/kernels.hpp"

namespace sustain::simd {
namespace {

void axpy(double* out, const double* y, double a, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = y[i] + a * x[i];
}

void rk4_combine(double* out, const double* y, double h6, const double* k1, const double* k2,
                 const double* k3, const double* k4, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double s = ((k1[i] + 2.0 * k2[i]) + 2.0 * k3[i]) + k4[i];
        out[i] = y[i] + h6 * s;
    }
}

void laplacian(double* out, const double* g, double inv_dx2, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = ((g[i] - 2.0 * g[i + 1]) + g[i + 2]) * inv_dx2;
}

void upwind(double* out, const double* g, double coef, std::size_t n) {
    if (coef > 0.0) {
        for (std::size_t i = 0; i < n; ++i) out[i] = coef * (g[i + 1] - g[i]);
    } else {
        for (std::size_t i = 0; i < n; ++i) out[i] = coef * (g[i + 2] - g[i + 1]);
    }
}

std::size_t clamp_nonnegative(double* v, std::size_t n) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (v[i] < 0.0) {
            v[i] = 0.0;
            ++count;
        }
    }
    return count;
}

} // namespace

const KernelTable& scalar_kernels() {
    static const KernelTable table{"scalar", axpy, rk4_combine, laplacian, upwind, clamp_nonnegative};
    return table;
}

} // namespace sustain::simd
