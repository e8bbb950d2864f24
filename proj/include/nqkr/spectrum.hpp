#pragma once

#include <lapacke.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nqkr/error.hpp"
#include "nqkr/params.hpp"
#include "nqkr/propagator.hpp"
#include "nqkr/wavefunction.hpp"

namespace nqkr {

using Matrix = Eigen::MatrixXcd;

/// Modes with eps_i above this count as growing. It sits at the round-off
/// floor of a unitary spectrum so that lambda = 0 has none.
inline constexpr double growing_mode_threshold = 1e-8;

/// Ties in eps_i closer than this mark the top of the spectrum as degenerate.
inline constexpr double degenerate_gap = 1e-6;

struct QuasiMode {
    double eps_r = 0.0;  // principal value in (-pi, pi]
    double eps_i = 0.0;  // ln |eigenvalue|; -infinity for a zero eigenvalue
    Eigen::VectorXcd state;  // unit 2-norm, indexed like WaveFunction::amps
    double ipr = 0.0;
};

/// Eigenpairs of the truncated Floquet matrix, sorted by eps_i descending.
struct QuasiSpectrum {
    std::vector<QuasiMode> modes;
    int dim = 0;
    std::optional<ModelParams> params;

    std::size_t size() const { return modes.size(); }
};

/// (sum |psi|^2)^2 / sum |psi|^4; scale-invariant, 1 for a single site, D for uniform.
inline double ipr(std::span<const cplx> state) {
    double s2 = 0.0, s4 = 0.0;
    for (const auto& a : state) {
        double w = std::norm(a);
        s2 += w;
        s4 += w * w;
    }
    if (!(s4 > 0.0)) throw ConfigError("ipr: zero state");
    return s2 * s2 / s4;
}

inline double ipr(const Eigen::VectorXcd& state) {
    return ipr(std::span<const cplx>(state.data(), static_cast<std::size_t>(state.size())));
}

/// Column n is one Floquet step applied to the n-th momentum basis state.
inline Matrix build_floquet_matrix(const ModelParams& params) {
    validate(params);
    const int d = params.dim;
    Propagator prop(params, false, RescaleWindow::never());
    Matrix u(d, d);
    WaveFunction e(d);
    for (int col = 0; col < d; ++col) {
        std::fill(e.amps.begin(), e.amps.end(), cplx{0.0, 0.0});
        e.log_norm = 0.0;
        e.amps[static_cast<std::size_t>(col)] = 1.0;
        prop.step(e);
        for (int row = 0; row < d; ++row) u(row, col) = e.amps[static_cast<std::size_t>(row)];
    }
    return u;
}

/// Principal quasienergies from eigenvalue mu = exp(-i (eps_r + i eps_i)).
inline std::pair<double, double> quasienergy_of(cplx mu) {
    if (mu == cplx{0.0, 0.0}) return {0.0, -std::numeric_limits<double>::infinity()};
    double eps_r = -std::arg(mu);
    if (eps_r <= -std::numbers::pi) eps_r += 2.0 * std::numbers::pi;
    return {eps_r, std::log(std::abs(mu))};
}

/// Dense eigendecomposition of a general complex matrix (LAPACK zgeev).
inline QuasiSpectrum diagonalize(const Matrix& matrix) {
    if (matrix.rows() != matrix.cols()) throw ConfigError("diagonalize: matrix must be square");
    const auto n = static_cast<lapack_int>(matrix.rows());
    Matrix a = matrix;
    Eigen::VectorXcd w(n);
    Matrix vr(n, n);
    auto lc = [](cplx* p) { return reinterpret_cast<lapack_complex_double*>(p); };
    lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'V', n, lc(a.data()), n, lc(w.data()),
                                    nullptr, 1, lc(vr.data()), n);
    if (info != 0) {
        throw EigensolverError("zgeev failed with info = " + std::to_string(info));
    }

    QuasiSpectrum spec;
    spec.dim = static_cast<int>(n);
    spec.modes.resize(static_cast<std::size_t>(n));
    for (lapack_int k = 0; k < n; ++k) {
        auto& m = spec.modes[static_cast<std::size_t>(k)];
        std::tie(m.eps_r, m.eps_i) = quasienergy_of(w(k));
        m.state = vr.col(k);
        m.state.normalize();
        m.ipr = ipr(m.state);
    }
    std::stable_sort(spec.modes.begin(), spec.modes.end(),
                     [](const QuasiMode& x, const QuasiMode& y) { return x.eps_i > y.eps_i; });
    return spec;
}

inline QuasiSpectrum quasi_spectrum(const ModelParams& params) {
    QuasiSpectrum spec = diagonalize(build_floquet_matrix(params));
    spec.params = params;
    return spec;
}

/// Largest relative eigen-residual ||U v - mu v|| / ||U||_F over all modes.
inline double max_residual(const Matrix& u, const QuasiSpectrum& spec) {
    const double scale = u.norm();
    double worst = 0.0;
    for (const auto& m : spec.modes) {
        cplx mu = std::exp(cplx{m.eps_i, -m.eps_r});
        worst = std::max(worst, (u * m.state - mu * m.state).norm() / scale);
    }
    return worst;
}

/// Mean IPR over modes with eps_i > growing_mode_threshold.
inline double mean_ipr(const QuasiSpectrum& spec) {
    double s = 0.0;
    std::size_t count = 0;
    for (const auto& m : spec.modes) {
        if (m.eps_i > growing_mode_threshold) {
            s += m.ipr;
            ++count;
        }
    }
    if (count == 0) throw FitError("mean_ipr: no modes with positive eps_i (Hermitian regime)");
    return s / static_cast<double>(count);
}

struct FidelityEntry {
    std::size_t index;  // position in QuasiSpectrum::modes
    double eps_i;
    double fidelity;
};

/// |<psi|phi>|^2 for every mode, with both vectors normalized.
inline double fidelity(const WaveFunction& psi, const QuasiMode& mode) {
    if (psi.dim() != mode.state.size()) throw ConfigError("fidelity: dimension mismatch");
    double n2 = psi.raw_norm();
    if (!(n2 > 0.0)) throw ConfigError("fidelity: zero-norm state");
    cplx s{0.0, 0.0};
    for (int i = 0; i < psi.dim(); ++i) s += std::conj(psi.amps[static_cast<std::size_t>(i)]) * mode.state(i);
    return std::norm(s) / (n2 * mode.state.squaredNorm());
}

inline std::vector<FidelityEntry> fidelity_profile(const WaveFunction& psi, const QuasiSpectrum& spec) {
    if (psi.dim() != spec.dim) throw ConfigError("fidelity_profile: dimension mismatch");
    std::vector<FidelityEntry> out;
    out.reserve(spec.size());
    for (std::size_t k = 0; k < spec.size(); ++k) {
        out.push_back({k, spec.modes[k].eps_i, fidelity(psi, spec.modes[k])});
    }
    return out;
}

inline std::size_t argmax_fidelity(std::span<const FidelityEntry> profile) {
    if (profile.empty()) throw ConfigError("argmax_fidelity: empty profile");
    auto it = std::max_element(profile.begin(), profile.end(),
                               [](const auto& a, const auto& b) { return a.fidelity < b.fidelity; });
    return it->index;
}

struct DominantMode {
    std::size_t index = 0;
    bool degenerate_top = false;  // another mode lies within degenerate_gap of the top eps_i
};

/// Mode with the largest eps_i. Near-ties go to the larger fidelity against
/// `reference` when one is given, otherwise to the lower index.
inline DominantMode dominant_mode(const QuasiSpectrum& spec, const WaveFunction* reference = nullptr) {
    if (spec.modes.empty()) throw ConfigError("dominant_mode: empty spectrum");
    std::size_t best = 0;
    for (std::size_t k = 1; k < spec.size(); ++k) {
        if (spec.modes[k].eps_i > spec.modes[best].eps_i) best = k;
    }
    const double top = spec.modes[best].eps_i;
    std::vector<std::size_t> ties;
    for (std::size_t k = 0; k < spec.size(); ++k) {
        if (top - spec.modes[k].eps_i < degenerate_gap) ties.push_back(k);
    }
    DominantMode result{ties.front(), ties.size() > 1};
    if (result.degenerate_top && reference != nullptr) {
        double best_f = -1.0;
        for (std::size_t k : ties) {
            double f = fidelity(*reference, spec.modes[k]);
            if (f > best_f) {
                best_f = f;
                result.index = k;
            }
        }
    }
    return result;
}

/// Momentum distribution |phi_n|^2 / ||phi||^2 of a mode.
inline std::vector<double> mode_probabilities(const QuasiMode& mode) {
    const double n2 = mode.state.squaredNorm();
    std::vector<double> p(static_cast<std::size_t>(mode.state.size()));
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(mode.state(static_cast<Eigen::Index>(i))) / n2;
    return p;
}

}  // namespace nqkr
