#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "nqkr/observables.hpp"
#include "nqkr/propagator.hpp"
#include "nqkr/wavefunction.hpp"
#include "oracles.hpp"

using namespace nqkr;

namespace {

ModelParams small(int dim = 8) {
    ModelParams p;
    p.dim = dim;
    return p;
}

WaveFunction random_state(int dim, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> g;
    WaveFunction psi(dim);
    for (auto& a : psi.amps) a = {g(rng), g(rng)};
    return psi;
}

}  // namespace

TEST(ModelParams, RejectsInvalid) {
    ModelParams p;
    EXPECT_NO_THROW(validate(p));
    p.dim = 7;
    EXPECT_THROW(validate(p), ConfigError);
    p.dim = 2;
    EXPECT_THROW(validate(p), ConfigError);
    p = {};
    p.hbar = 0.0;
    EXPECT_THROW(validate(p), ConfigError);
    p = {};
    p.K = std::nan("");
    EXPECT_THROW(validate(p), ConfigError);
    p = {};
    p.sigma = -1.0;
    EXPECT_THROW(validate(p), ConfigError);
}

TEST(GroundState, IsDeltaAtZero) {
    auto psi = ground_state(small(8));
    ASSERT_EQ(psi.dim(), 8);
    for (int n = -4; n <= 3; ++n) {
        EXPECT_EQ(psi.at(n), (n == 0 ? cplx{1.0, 0.0} : cplx{0.0, 0.0})) << n;
    }
    EXPECT_EQ(psi.log_norm, 0.0);
    EXPECT_DOUBLE_EQ(psi.raw_norm(), 1.0);
}

TEST(GroundState, InvariantUnderFreeRotation) {
    ModelParams p = small(16);
    p.K = 0.0;
    p.lambda = 0.0;
    auto psi = ground_state(p);
    auto out = step(psi, build_tables(p));
    EXPECT_NEAR(std::norm(inner(psi, out)), 1.0, 1e-14);
}

TEST(GaussianState, SymmetricAboutPi) {
    ModelParams p = small(256);
    auto psi = gaussian_state(p, std::numbers::pi);
    auto prob = probabilities(psi);
    for (int n = 1; n < 128; ++n) {
        EXPECT_NEAR(prob[p.index_of(n)], prob[p.index_of(-n)], 1e-12) << n;
    }
    EXPECT_NEAR(std::norm(inner(psi, psi)), 1.0, 1e-12);
}

TEST(GaussianState, GridRefinementConverges) {
    // Grid-refinement oracle: doubling the angle grid must not change the
    // momentum amplitudes of a resolved packet.
    for (double theta_c : {0.0, 1.0, std::numbers::pi, 5.5}) {
        auto coarse = gaussian_state(small(256), theta_c);
        auto fine = gaussian_state(small(512), theta_c);
        for (int n = -128; n < 128; ++n) {
            EXPECT_LT(std::abs(coarse.at(n) - fine.at(n)), 1e-8) << theta_c << " " << n;
        }
    }
}

TEST(GaussianState, RejectsNonPositiveSigma) {
    ModelParams p = small(64);
    p.sigma = 0.0;
    EXPECT_THROW(gaussian_state(p, 0.0), ConfigError);
}

TEST(Inner, OrthonormalBasis) {
    const int d = 8;
    for (int m = -4; m < 4; ++m) {
        for (int n = -4; n < 4; ++n) {
            WaveFunction a(d), b(d);
            a.at(m) = 1.0;
            b.at(n) = 1.0;
            EXPECT_EQ(inner(a, b), cplx(m == n ? 1.0 : 0.0, 0.0));
        }
    }
}

TEST(Inner, ConjugateSymmetricAndSesquilinear) {
    auto a = random_state(32, 1), b = random_state(32, 2), c = random_state(32, 3);
    EXPECT_LT(std::abs(inner(a, b) - std::conj(inner(b, a))), 1e-12);
    auto self = inner(a, a);
    EXPECT_NEAR(self.imag(), 0.0, 1e-12);
    EXPECT_NEAR(self.real(), a.raw_norm(), 1e-12);

    const cplx alpha{0.3, -1.2}, beta{-2.0, 0.5};
    WaveFunction mix(32);
    for (int i = 0; i < 32; ++i) mix.amps[i] = alpha * b.amps[i] + beta * c.amps[i];
    cplx lhs = inner(a, mix);
    cplx rhs = alpha * inner(a, b) + beta * inner(a, c);
    EXPECT_LT(std::abs(lhs - rhs), 1e-12 * (1.0 + std::abs(lhs)));
}

TEST(Inner, DimensionMismatch) {
    EXPECT_THROW(inner(WaveFunction(8), WaveFunction(16)), ConfigError);
}

TEST(Probabilities, SumToOneAndScaleInvariant) {
    auto psi = random_state(64, 7);
    auto p = probabilities(psi);
    double s = 0.0;
    for (double v : p) s += v;
    EXPECT_NEAR(s, 1.0, 1e-12);

    WaveFunction scaled = psi;
    for (auto& a : scaled.amps) a *= cplx(-3.0e5, 2.0e5);
    scaled.log_norm = 17.0;
    auto q = probabilities(scaled);
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(p[i], q[i], 1e-14);

    EXPECT_EQ(probabilities(ground_state(small(8)))[4], 1.0);
    EXPECT_THROW(probabilities(WaveFunction(8)), ConfigError);
}

TEST(Probabilities, OneKickMatchesBesselSquares) {
    ModelParams p;
    p.dim = 256;
    p.K = 5.0;
    p.hbar = 1.0;
    p.lambda = 0.0;
    auto psi = step(ground_state(p), build_tables(p));
    auto prob = probabilities(psi);
    for (int n = -40; n <= 40; ++n) {
        double j = std::cyl_bessel_j(std::abs(n), 5.0);
        EXPECT_NEAR(prob[p.index_of(n)], j * j, 1e-13) << n;
    }
}
