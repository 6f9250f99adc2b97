#pragma once

#include <cstddef>
#include <string_view>

// Elementwise kernels behind every explicit time step and stencil in the
// toolkit. Each instruction set provides the same table; variants evaluate
// identical operation sequences (no FMA contraction) so results are
// bit-for-bit equal whichever one is active.
namespace sustain::simd {

struct KernelTable {
    std::string_view name;

    // out[i] = y[i] + a * x[i]
    void (*axpy)(double* out, const double* y, double a, const double* x, std::size_t n);

    // out[i] = y[i] + h6 * (((k1[i] + 2 k2[i]) + 2 k3[i]) + k4[i])
    void (*rk4_combine)(double* out, const double* y, double h6, const double* k1,
                        const double* k2, const double* k3, const double* k4, std::size_t n);

    // ghosted has n + 2 entries; out[i] = ((g[i] - 2 g[i+1]) + g[i+2]) * inv_dx2
    void (*laplacian)(double* out, const double* ghosted, double inv_dx2, std::size_t n);

    // ghosted has n + 2 entries. coef = v / dx.
    // coef > 0: out[i] = coef * (g[i+1] - g[i]); otherwise coef * (g[i+2] - g[i+1])
    void (*upwind)(double* out, const double* ghosted, double coef, std::size_t n);

    // Replaces negative entries with +0 and returns how many were replaced.
    std::size_t (*clamp_nonnegative)(double* values, std::size_t n);
};

const KernelTable& scalar_kernels();

// nullptr when the binary or the host CPU lacks AVX2.
const KernelTable* avx2_kernels();

// Selected once per process: AVX2 when available unless the environment
// variable SUSTAIN_SIMD is set to "scalar".
const KernelTable& active_kernels();

} // namespace sustain::simd
