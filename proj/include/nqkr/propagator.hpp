#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <utility>

#include "nqkr/error.hpp"
#include "nqkr/fft.hpp"
#include "nqkr/params.hpp"
#include "nqkr/wavefunction.hpp"

namespace nqkr {

/// Pointwise factors of the Floquet operator
/// U = exp(-i p^2 / 2 hbar) exp(-i (K + i lambda) cos(theta) / hbar).
struct KickTable {
    CVector angle_factor;  // exp(-i (K' + i lambda) cos(theta_j) / hbar) on theta_j = 2 pi j / dim
    CVector free_factor;   // exp(-i hbar n^2 / 2), indexed like WaveFunction::amps

    int dim() const { return static_cast<int>(free_factor.size()); }
};

/// Factors for the unperturbed (K) or perturbed (K + epsilon) kick.
inline KickTable build_tables(const ModelParams& params, bool perturbed = false) {
    validate(params);
    const int d = params.dim;
    const double k = perturbed ? params.K + params.epsilon : params.K;
    KickTable t;
    t.angle_factor.resize(static_cast<std::size_t>(d));
    t.free_factor.resize(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
        double c = std::cos(2.0 * std::numbers::pi * j / d);
        t.angle_factor[static_cast<std::size_t>(j)] =
            std::exp(params.lambda * c / params.hbar) * std::polar(1.0, -k * c / params.hbar);
    }
    for (int i = 0; i < d; ++i) {
        double n = params.n_at(i);
        double phase = std::fmod(0.5 * params.hbar * n * n, 2.0 * std::numbers::pi);
        t.free_factor[static_cast<std::size_t>(i)] = std::polar(1.0, -phase);
    }
    return t;
}

/// Raw-norm window outside which step() rescales the amplitudes.
struct RescaleWindow {
    double low = 1e-6;
    double high = 1e6;

    static RescaleWindow never() {
        return {0.0, std::numeric_limits<double>::infinity()};
    }
};

/// Split-step evaluator for one KickTable. Owns its workspace, shares the
/// table and FFT plans; one instance per evolving state.
class Propagator {
public:
    explicit Propagator(std::shared_ptr<const KickTable> table, RescaleWindow window = {},
                        FftEffort effort = FftEffort::estimate)
        : table_(std::move(table)),
          plans_(FftPlans::get(table_->dim(), effort)),
          work_(static_cast<std::size_t>(table_->dim())),
          window_(window) {}

    Propagator(const ModelParams& params, bool perturbed = false, RescaleWindow window = {},
               FftEffort effort = FftEffort::estimate)
        : Propagator(std::make_shared<const KickTable>(build_tables(params, perturbed)), window,
                     effort) {}

    const KickTable& table() const { return *table_; }
    std::shared_ptr<const KickTable> shared_table() const { return table_; }

    /// One Floquet period: kick in the angle representation, then free rotation.
    void step(WaveFunction& psi) {
        const int d = table_->dim();
        if (psi.dim() != d) throw ConfigError("step: state dimension does not match kick table");
        plans_->backward(psi.amps, work_);
        const auto& kick = table_->angle_factor;
        for (std::size_t j = 0; j < work_.size(); ++j) work_[j] *= kick[j];
        plans_->forward(work_, psi.amps);

        const double inv = 1.0 / d;
        const auto& free = table_->free_factor;
        double n2 = 0.0;
        for (std::size_t i = 0; i < psi.amps.size(); ++i) {
            psi.amps[i] *= free[i] * inv;
            n2 += std::norm(psi.amps[i]);
        }
        if (!std::isfinite(n2) || !(n2 > 0.0)) {
            throw OverflowError("non-finite or vanishing amplitudes after Floquet step");
        }
        if (n2 < window_.low || n2 > window_.high) {
            double s = 1.0 / std::sqrt(n2);
            for (auto& a : psi.amps) a *= s;
            psi.log_norm += 0.5 * std::log(n2);
        }
    }

    /// Apply n_steps periods, calling observer(state, kick) after each kick (kick = 1..n_steps).
    template <class Observer>
    void evolve(WaveFunction& psi, int n_steps, Observer&& observer) {
        if (n_steps < 0) throw ConfigError("evolve: negative step count");
        for (int t = 1; t <= n_steps; ++t) {
            step(psi);
            observer(std::as_const(psi), t);
        }
    }

    void evolve(WaveFunction& psi, int n_steps) {
        evolve(psi, n_steps, [](const WaveFunction&, int) {});
    }

private:
    std::shared_ptr<const KickTable> table_;
    std::shared_ptr<const FftPlans> plans_;
    CVector work_;
    RescaleWindow window_;
};

/// Value-semantics single step.
inline WaveFunction step(WaveFunction psi, const KickTable& tables, RescaleWindow window = {}) {
    Propagator prop(std::make_shared<const KickTable>(tables), window);
    prop.step(psi);
    return psi;
}

using StepObserver = std::function<void(const WaveFunction&, int)>;

/// Value-semantics evolution; observer may be empty.
inline WaveFunction evolve(WaveFunction psi, const KickTable& tables, int n_steps,
                           const StepObserver& observer = {}, RescaleWindow window = {}) {
    Propagator prop(std::make_shared<const KickTable>(tables), window);
    if (observer) {
        prop.evolve(psi, n_steps, observer);
    } else {
        prop.evolve(psi, n_steps);
    }
    return psi;
}

}  // namespace nqkr
