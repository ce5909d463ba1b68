#include "gwsos/kernels.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace gwsos;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

}  // namespace

TEST(Kernels, DispatchReportsIsa) {
    const auto isa = kernels::active_isa();
    EXPECT_TRUE(kernels::isa_available(isa));
    EXPECT_TRUE(kernels::isa_available(kernels::Isa::scalar));
    EXPECT_STREQ(kernels::isa_name(kernels::Isa::scalar), "scalar");
}

TEST(Kernels, Avx2MatchesScalar) {
    if (!kernels::isa_available(kernels::Isa::avx2)) GTEST_SKIP() << "no AVX2 on this CPU";
    std::mt19937 rng(9);
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 9u, 31u, 64u, 1001u}) {
        auto a = random_vec(n, rng), b = random_vec(n, rng);
        const double ds = kernels::scalar::dot(a.data(), b.data(), n);
        const double dv = kernels::avx2::dot(a.data(), b.data(), n);
        EXPECT_NEAR(ds, dv, 1e-12 * (1.0 + std::abs(ds))) << n;

        auto ys = b, yv = b;
        kernels::scalar::axpy(0.37, a.data(), ys.data(), n);
        kernels::avx2::axpy(0.37, a.data(), yv.data(), n);
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(ys[i], yv[i], 1e-15);

        if (n <= 64) {
            auto C = random_vec(n * n, rng);
            const double qs = kernels::scalar::quadratic_form(C.data(), a.data(), n);
            const double qv = kernels::avx2::quadratic_form(C.data(), a.data(), n);
            EXPECT_NEAR(qs, qv, 1e-12 * (1.0 + std::abs(qs)));
        }
    }
}

TEST(Kernels, ForcedScalarPathMatchesDefault) {
    std::mt19937 rng(4);
    auto a = random_vec(257, rng), b = random_vec(257, rng);
    const auto before = kernels::active_isa();
    const double d0 = kernels::dot(a.data(), b.data(), a.size());
    ASSERT_TRUE(kernels::force_isa(kernels::Isa::scalar));
    const double d1 = kernels::dot(a.data(), b.data(), a.size());
    kernels::force_isa(before);
    EXPECT_NEAR(d0, d1, 1e-12);
}
