#include "doctest.h"

#include "sustain/simd/kernels.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <vector>

using namespace sustain::simd;

namespace {

std::vector<double> random_values(std::mt19937_64& g, std::size_t n, double lo = -10.0, double hi = 10.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = d(g);
    return v;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

// Lengths around the vector width, including the scalar tail paths.
const std::size_t kLengths[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 64, 101, 1000};

} // namespace

TEST_CASE("scalar kernels match their definitions") {
    const auto& k = scalar_kernels();
    const std::vector<double> y{1, 2, 3}, x{4, 5, 6};
    std::vector<double> out(3);
    k.axpy(out.data(), y.data(), 0.5, x.data(), 3);
    CHECK(out == std::vector<double>{3, 4.5, 6});

    const std::vector<double> g{0, 1, 4, 9, 16};
    k.laplacian(out.data(), g.data(), 1.0, 3);
    CHECK(out == std::vector<double>{2, 2, 2});
    k.upwind(out.data(), g.data(), 2.0, 3);
    CHECK(out == std::vector<double>{2, 6, 10});
    k.upwind(out.data(), g.data(), -1.0, 3);
    CHECK(out == std::vector<double>{-3, -5, -7});

    std::vector<double> v{-1, 2, -0.0, -3, 4};
    CHECK(k.clamp_nonnegative(v.data(), v.size()) == 2);
    CHECK(v == std::vector<double>{0, 2, 0, 0, 4});
    CHECK(!std::signbit(v[0]));
}

TEST_CASE("active kernel selection") {
    const auto& active = active_kernels();
    CHECK((active.name == "scalar" || active.name == "avx2"));
    if (avx2_kernels() == nullptr) CHECK(active.name == "scalar");
}

TEST_CASE("AVX2 kernels are bit-identical to the scalar reference") {
    const KernelTable* vec = avx2_kernels();
    if (vec == nullptr) {
        MESSAGE("AVX2 unavailable on this host; equivalence not exercised");
        return;
    }
    const auto& ref = scalar_kernels();
    std::mt19937_64 g(2024);
    for (int round = 0; round < 20; ++round) {
        for (std::size_t n : kLengths) {
            const auto y = random_values(g, n), x = random_values(g, n);
            const auto k1 = random_values(g, n), k2 = random_values(g, n), k3 = random_values(g, n),
                       k4 = random_values(g, n);
            const auto ghosted = random_values(g, n + 2);
            const double a = std::uniform_real_distribution<double>(-3, 3)(g);
            std::vector<double> r(n), v(n);

            ref.axpy(r.data(), y.data(), a, x.data(), n);
            vec->axpy(v.data(), y.data(), a, x.data(), n);
            CHECK(same_bits(r, v));

            ref.rk4_combine(r.data(), y.data(), a, k1.data(), k2.data(), k3.data(), k4.data(), n);
            vec->rk4_combine(v.data(), y.data(), a, k1.data(), k2.data(), k3.data(), k4.data(), n);
            CHECK(same_bits(r, v));

            ref.laplacian(r.data(), ghosted.data(), a * a + 1.0, n);
            vec->laplacian(v.data(), ghosted.data(), a * a + 1.0, n);
            CHECK(same_bits(r, v));

            for (double coef : {a, -a, 0.0}) {
                ref.upwind(r.data(), ghosted.data(), coef, n);
                vec->upwind(v.data(), ghosted.data(), coef, n);
                CHECK(same_bits(r, v));
            }

            auto cr = random_values(g, n, -1.0, 1.0);
            auto cv = cr;
            CHECK(ref.clamp_nonnegative(cr.data(), n) == vec->clamp_nonnegative(cv.data(), n));
            CHECK(same_bits(cr, cv));
        }
    }
}

TEST_CASE("AVX2 kernels propagate special values like the scalar path") {
    const KernelTable* vec = avx2_kernels();
    if (vec == nullptr) return;
    const auto& ref = scalar_kernels();
    const double inf = std::numeric_limits<double>::infinity();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const std::vector<double> y{1e308, -1e308, inf, -inf, 0.0, -0.0, 5e-324, nan, 1.0};
    const std::vector<double> x{1e308, 1e308, 1.0, -1.0, -0.0, -0.0, 5e-324, 1.0, nan};
    std::vector<double> r(y.size()), v(y.size());
    ref.axpy(r.data(), y.data(), 2.0, x.data(), y.size());
    vec->axpy(v.data(), y.data(), 2.0, x.data(), y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (std::isnan(r[i])) {
            CHECK(std::isnan(v[i]));
        } else {
            CHECK(std::memcmp(&r[i], &v[i], sizeof(double)) == 0);
        }
    }
    auto cr = y, cv = y;
    CHECK(ref.clamp_nonnegative(cr.data(), cr.size()) == vec->clamp_nonnegative(cv.data(), cv.size()));
}
