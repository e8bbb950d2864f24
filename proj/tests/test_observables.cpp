#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "nqkr/observables.hpp"
#include "nqkr/sweep.hpp"

using namespace nqkr;

namespace {

ModelParams make(double K, double lambda, double hbar, int dim) {
    ModelParams p;
    p.K = K;
    p.lambda = lambda;
    p.hbar = hbar;
    p.dim = dim;
    return p;
}

double window_mean(const TimeSeries& s, int from, int to) {
    double m = 0.0;
    for (int t = from; t <= to; ++t) m += s.values[static_cast<std::size_t>(t - 1)];
    return m / (to - from + 1);
}

}  // namespace

TEST(MeanP2, SimpleStates) {
    auto p = make(5.0, 0.0, 1.0, 8);
    EXPECT_EQ(mean_p2(ground_state(p), p), 0.0);
    WaveFunction psi(8);
    psi.at(-1) = psi.at(0) = psi.at(1) = 1.0;
    EXPECT_NEAR(mean_p2(psi, p), 2.0 / 3.0, 1e-15);
    EXPECT_THROW(mean_p2(WaveFunction(8), p), ConfigError);
    EXPECT_THROW(mean_p2(WaveFunction(16), p), ConfigError);
}

TEST(MeanP2, OneKickBesselIdentity) {
    for (double ratio : {4.0, 20.0, 40.0}) {
        auto p = make(ratio * 0.25, 0.0, 0.25, 512);
        auto psi = step(ground_state(p), build_tables(p));
        EXPECT_NEAR(mean_p2(psi, p), 0.5 * p.K * p.K, 1e-10) << ratio;
    }
}

TEST(MeanP2, InvariantUnderGlobalScale) {
    std::mt19937 rng(11);
    std::normal_distribution<double> g;
    auto p = make(1.0, 0.0, 0.3, 128);
    for (int trial = 0; trial < 20; ++trial) {
        WaveFunction psi(128);
        for (auto& a : psi.amps) a = {g(rng), g(rng)};
        double ref = mean_p2(psi, p);
        cplx c{std::exp(g(rng) * 10.0), g(rng)};
        for (auto& a : psi.amps) a *= c;
        psi.log_norm = g(rng) * 100.0;
        EXPECT_NEAR(mean_p2(psi, p), ref, 1e-12 * ref);
    }
}

TEST(EnergySeries, FreeRotationIsConstant) {
    auto p = make(0.0, 0.0, 0.25, 64);
    WaveFunction psi(64);
    psi.at(3) = 1.0;
    psi.at(-5) = cplx(0.0, 2.0);
    auto s = energy_series(p, psi, 50);
    ASSERT_EQ(s.size(), 50u);
    for (double v : s.values) EXPECT_NEAR(v, s.values.front(), 1e-12);
    EXPECT_THROW(energy_series(p, psi, 0), ConfigError);
}

TEST(EnergySeries, SaturatesUnderLocalization) {
    // D = 8192 keeps the edge population below 1e-12 for this run.
    auto p = make(5.0, 0.0, 0.25, 8192);
    // Growth stops near t = 1300 here, so look well past that.
    auto rec = record_evolution(p, ground_state(p), 2000);
    EXPECT_LT(rec.max_edge_probability, 1e-12);
    double early = window_mean(rec.p2, 1200, 1600);
    double late = window_mean(rec.p2, 1600, 2000);
    EXPECT_LT(std::abs(late - early), 0.05 * early);
    EXPECT_GT(early, 1.3 * window_mean(rec.p2, 200, 400));
}

TEST(EnergySeries, NegativeLambdaSaturatesLower) {
    auto p0 = make(5.0, 0.0, 0.25, 4096);
    auto pn = make(5.0, -0.003, 0.25, 4096);
    auto s0 = energy_series(p0, ground_state(p0), 1000);
    auto sn = energy_series(pn, ground_state(pn), 1000);
    EXPECT_LT(window_mean(sn, 800, 1000), window_mean(s0, 800, 1000));
}

TEST(TimeAveragedP2, Basics) {
    TimeSeries s;
    s.push(1, 1.0);
    s.push(2, 2.0);
    s.push(3, 3.0);
    EXPECT_DOUBLE_EQ(time_averaged_p2(s, 3), 2.0);
    EXPECT_DOUBLE_EQ(time_averaged_p2(s, 1), 1.0);
    EXPECT_THROW(time_averaged_p2(s, 4), ConfigError);
    TimeSeries c;
    for (int t = 1; t <= 10; ++t) c.push(t, 4.5);
    EXPECT_DOUBLE_EQ(time_averaged_p2(c, 10), 4.5);
}

TEST(TimeAveragedP2, DecreasesWithAbsLambdaAtK7) {
    auto value = [](double lambda) {
        return p2_cell(make(7.0, lambda, 0.25, 1024), 1000, 1e-12, 32768).value;
    };
    const double v0 = value(0.0), p2 = value(0.002), p4 = value(0.004);
    EXPECT_GT(v0, p2);
    EXPECT_GT(p2, p4);
    // Negative side is not monotone at small |lambda|: the converged value
    // at -0.002 sits slightly above lambda = 0, and only drops by -0.004.
    double m2 = value(-0.002), m4 = value(-0.004);
    EXPECT_GT(m2, m4);
    EXPECT_GT(v0, m4);
    EXPECT_LT(std::abs(m2 - v0), 0.05 * v0);
    // Asymmetric under lambda -> -lambda.
    EXPECT_GT(m4, p4);
}

TEST(LoschmidtEcho, UnperturbedIsOne) {
    auto p = make(5.0, 0.01, 0.25, 256);
    p.epsilon = 0.0;
    auto echo = loschmidt_echo(p, gaussian_state(p, 1.0), 40);
    ASSERT_EQ(echo.size(), 41u);
    EXPECT_EQ(echo.times.front(), 0.0);
    for (double v : echo.values) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(LoschmidtEcho, StartsAtOneAndStaysBounded) {
    for (double lambda : {0.0, 0.02, -0.02}) {
        auto p = make(5.0, lambda, 0.25, 1024);
        p.epsilon = 0.05;
        auto echo = loschmidt_echo(p, gaussian_state(p, 2.0), 100);
        EXPECT_NEAR(echo.values.front(), 1.0, 1e-14);
        for (double v : echo.values) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
    }
}

TEST(LoschmidtEcho, SymmetricInWhichSideIsPerturbed) {
    auto p = make(5.0, 0.01, 0.25, 512);
    p.epsilon = 0.02;
    auto a = std::make_shared<const KickTable>(build_tables(p, false));
    auto b = std::make_shared<const KickTable>(build_tables(p, true));
    auto init = gaussian_state(p, 0.7);
    auto ab = echo_series(init, a, b, 60);
    auto ba = echo_series(init, b, a, 60);
    for (std::size_t t = 0; t < ab.size(); ++t) EXPECT_NEAR(ab.values[t], ba.values[t], 1e-12);
}

TEST(LoschmidtEcho, LargeNonHermiticityFreezesEcho) {
    // |lambda| / hbar = 0.4 at hbar = 0.25.
    for (double lambda : {0.1, -0.1}) {
        auto p = make(5.0, lambda, 0.25, 1024);
        auto echo = loschmidt_echo(p, gaussian_state(p, 1.3), 50);
        for (double v : echo.values) EXPECT_GT(v, 0.9) << lambda;
    }
}

TEST(AveragedEcho, SinglePacketEqualsSingleEcho) {
    auto p = make(5.0, 0.0, 0.05, 2048);
    p.epsilon = 0.01;
    auto avg = averaged_echo(p, 20, 1);
    auto single = loschmidt_echo(p, gaussian_state(p, 2.0 * std::numbers::pi), 20);
    for (std::size_t t = 0; t < avg.size(); ++t) EXPECT_NEAR(avg.values[t], single.values[t], 1e-14);
}

TEST(AveragedEcho, IdenticalPacketsEqualSingleEcho) {
    auto p = make(5.0, 0.002, 0.05, 2048);
    p.epsilon = 0.01;
    std::vector<double> centers(7, 1.1);
    auto avg = averaged_echo(p, 20, centers);
    auto single = loschmidt_echo(p, gaussian_state(p, 1.1), 20);
    for (std::size_t t = 0; t < avg.size(); ++t) EXPECT_NEAR(avg.values[t], single.values[t], 1e-15);
}

TEST(AveragedEcho, UnperturbedIsOne) {
    auto p = make(5.0, 0.0, 0.05, 2048);
    p.epsilon = 0.0;
    for (double v : averaged_echo(p, 15, 6).values) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(AveragedEcho, ParityShortcutMatchesFullEnsemble) {
    auto p = make(5.0, -0.003, 0.05, 2048);
    p.epsilon = 0.01;
    EchoOptions full;
    full.use_parity = false;
    EchoOptions mirrored;
    mirrored.use_parity = true;
    for (int n : {5, 8}) {
        auto a = averaged_echo(p, 25, n, full);
        auto b = averaged_echo(p, 25, n, mirrored);
        for (std::size_t t = 0; t < a.size(); ++t) EXPECT_NEAR(a.values[t], b.values[t], 1e-12) << n;
    }
}

TEST(AveragedEcho, WorkersDoNotChangeResult) {
    auto p = make(5.0, 0.0, 0.05, 1024);
    p.epsilon = 0.01;
    EchoOptions one, four;
    four.workers = 4;
    auto a = averaged_echo(p, 10, 9, one);
    auto b = averaged_echo(p, 10, 9, four);
    EXPECT_EQ(a.values, b.values);
}

TEST(LyapunovReference, Values) {
    EXPECT_EQ(lyapunov_reference(2.0), 0.0);
    EXPECT_NEAR(lyapunov_reference(5.0), 0.916290731874155, 1e-12);
    EXPECT_NEAR(lyapunov_reference(2.0 * std::numbers::e), 1.0, 1e-15);
}

TEST(LocalizationFit, RecoversExactExponential) {
    auto p = make(5.0, 0.0, 0.25, 1024);
    std::vector<double> dist(1024);
    for (int i = 0; i < 1024; ++i) dist[i] = std::exp(-std::abs(p.momentum_at(i)) / 23.0);
    auto fit = fit_localization_length(dist, p);
    EXPECT_NEAR(localization_length(fit), 23.0, 0.23);
    EXPECT_EQ(fit.points(), 1024u);
}

TEST(LocalizationFit, RecoversGeneratedParameters) {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> xi_dist(2.0, 60.0), amp_dist(-5.0, 0.0);
    for (int trial = 0; trial < 25; ++trial) {
        auto p = make(5.0, 0.0, 0.25, 512);
        double xi = xi_dist(rng), log_amp = amp_dist(rng);
        std::vector<double> dist(512);
        for (int i = 0; i < 512; ++i) dist[i] = std::exp(log_amp - std::abs(p.momentum_at(i)) / xi);
        auto fit = fit_localization_length(dist, p);
        EXPECT_NEAR(localization_length(fit), xi, 0.01 * xi);
        EXPECT_NEAR(fit.intercept, log_amp, 0.01 * std::max(1.0, std::abs(log_amp)));
    }
}

TEST(LocalizationFit, Errors) {
    auto p = make(5.0, 0.0, 0.25, 64);
    std::vector<double> spike(64, 0.0);
    spike[32] = 1.0;
    EXPECT_THROW(fit_localization_length(spike, p), FitError);
    std::vector<double> rising(64);
    for (int i = 0; i < 64; ++i) rising[i] = std::exp(std::abs(p.momentum_at(i)));
    EXPECT_THROW(fit_localization_length(rising, p), FitError);
    EXPECT_THROW(fit_localization_length(std::vector<double>(32, 1.0), p), ConfigError);
}

TEST(LocalizationFit, DynamicalLocalizationLengths) {
    // Truncation-free basis (edge population < 1e-12 after 1000 kicks).
    auto xi = [](double lambda) {
        auto p = make(5.0, lambda, 0.25, 4096);
        auto rec = record_evolution(p, ground_state(p), 1000);
        EXPECT_LT(rec.max_edge_probability, 1e-12);
        return localization_length(fit_localization_length(probabilities(rec.final_state), p));
    };
    double xi0 = xi(0.0), xin = xi(-0.003);
    EXPECT_NEAR(xi0, 23.0, 0.3 * 23.0);
    EXPECT_NEAR(xin, 15.0, 0.3 * 15.0);
    EXPECT_LT(xin, xi0);
}

TEST(DecayFit, SyntheticExponential) {
    TimeSeries s;
    for (int t = 0; t <= 40; ++t) s.push(t, std::exp(-0.9 * t) + 1e-4);
    auto fit = fit_decay_rate(s);
    EXPECT_NEAR(decay_rate(fit), 0.9, 0.045);
    EXPECT_EQ(s.times[fit.window_begin], 1.0);
}

TEST(DecayFit, NonDecayingSeriesIsReported) {
    TimeSeries flat;
    for (int t = 0; t <= 30; ++t) flat.push(t, 1.0);
    EXPECT_THROW(fit_decay_rate(flat), FitError);

    auto p = make(5.0, 0.0, 0.25, 256);
    p.epsilon = 0.0;
    EXPECT_THROW(fit_decay_rate(loschmidt_echo(p, gaussian_state(p, 1.0), 30)), FitError);
}
