#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "nqkr/error.hpp"
#include "nqkr/fft.hpp"
#include "nqkr/params.hpp"

namespace nqkr {

/// State in the truncated momentum basis.
///
/// amps[i] holds psi_n for n = i - dim/2. The physical amplitudes are
/// amps * exp(log_norm); evolution moves overall scale into log_norm so the
/// stored amplitudes stay in floating range.
struct WaveFunction {
    CVector amps;
    double log_norm = 0.0;

    WaveFunction() = default;
    explicit WaveFunction(int dim) : amps(static_cast<std::size_t>(dim), cplx{0.0, 0.0}) {}

    int dim() const { return static_cast<int>(amps.size()); }
    cplx& at(int n) { return amps[static_cast<std::size_t>(n + dim() / 2)]; }
    const cplx& at(int n) const { return amps[static_cast<std::size_t>(n + dim() / 2)]; }

    /// Sum of |psi_n|^2 over the stored amplitudes.
    double raw_norm() const {
        double s = 0.0;
        for (const auto& a : amps) s += std::norm(a);
        return s;
    }

    /// ln of the physical 2-norm ||psi||.
    double log_true_norm() const { return 0.5 * std::log(raw_norm()) + log_norm; }

    /// Rescale the stored amplitudes to unit norm, folding the factor into log_norm.
    void renormalize() {
        double n2 = raw_norm();
        if (!(n2 > 0.0) || !std::isfinite(n2)) throw OverflowError("cannot renormalize state");
        double s = 1.0 / std::sqrt(n2);
        for (auto& a : amps) a *= s;
        log_norm += 0.5 * std::log(n2);
    }
};

/// Normalized copy with log_norm reset; useful before overlaps.
inline WaveFunction normalized(WaveFunction psi) {
    psi.renormalize();
    psi.log_norm = 0.0;
    return psi;
}

/// psi_n = delta_{n,0}: the uniform angle profile 1/sqrt(2 pi).
inline WaveFunction ground_state(const ModelParams& params) {
    validate(params);
    WaveFunction psi(params.dim);
    psi.at(0) = 1.0;
    return psi;
}

/// Wrap an angle difference into (-pi, pi].
inline double wrap_angle(double d) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    d = std::remainder(d, two_pi);
    if (d <= -std::numbers::pi) d += two_pi;
    return d;
}

/// Gaussian packet (sigma/pi)^(1/4) exp(-sigma (theta - theta_c)^2 / 2), sampled
/// on theta_j = 2 pi j / dim at the nearest periodic image of theta_c, moved to
/// the momentum basis and normalized.
inline WaveFunction gaussian_state(const ModelParams& params, double theta_c) {
    validate(params);
    const int d = params.dim;
    const double amp = std::pow(params.sigma / std::numbers::pi, 0.25);
    CVector samples(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
        double theta = 2.0 * std::numbers::pi * j / d;
        double x = wrap_angle(theta - theta_c);
        double v = amp * std::exp(-0.5 * params.sigma * x * x);
        // (-1)^j shifts the FFT output so index i carries n = i - dim/2.
        samples[static_cast<std::size_t>(j)] = (j % 2 == 0) ? v : -v;
    }
    WaveFunction psi(d);
    FftPlans::get(d)->forward(samples, psi.amps);
    double n2 = psi.raw_norm();
    if (!(n2 > 0.0)) throw ConfigError("gaussian packet has zero norm on this grid");
    double s = 1.0 / std::sqrt(n2);
    for (auto& a : psi.amps) a *= s;
    return psi;
}

/// sum_n conj(a_n) b_n over stored amplitudes; log_norm offsets are ignored.
inline cplx inner(const WaveFunction& a, const WaveFunction& b) {
    if (a.dim() != b.dim()) throw ConfigError("inner: dimension mismatch");
    cplx s{0.0, 0.0};
    for (std::size_t i = 0; i < a.amps.size(); ++i) s += std::conj(a.amps[i]) * b.amps[i];
    return s;
}

/// P_n = |psi_n|^2 / N, indexed like amps.
inline std::vector<double> probabilities(const WaveFunction& psi) {
    double n2 = psi.raw_norm();
    if (!(n2 > 0.0)) throw ConfigError("probabilities: zero-norm state");
    std::vector<double> p(psi.amps.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(psi.amps[i]) / n2;
    return p;
}

}  // namespace nqkr
