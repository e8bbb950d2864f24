#pragma once

#include <cmath>
#include <string>

#include "nqkr/error.hpp"

namespace nqkr {

/// Physical and numerical parameters of the non-Hermitian kicked rotor.
///
/// The kick potential is (K + i*lambda) cos(theta); momentum eigenvalues are
/// p_n = n * hbar with n in [-dim/2, dim/2 - 1].
struct ModelParams {
    double K = 5.0;
    double lambda = 0.0;
    double hbar = 0.25;
    int dim = 1024;
    double epsilon = 1e-3;  // echo perturbation, applied as K -> K + epsilon
    double sigma = 10.0;    // Gaussian packet width parameter

    bool operator==(const ModelParams&) const = default;

    int n_min() const { return -dim / 2; }
    int n_max() const { return dim / 2 - 1; }

    /// Storage index of momentum index n.
    int index_of(int n) const { return n + dim / 2; }
    /// Momentum index stored at position i.
    int n_at(int i) const { return i - dim / 2; }
    double momentum_at(int i) const { return n_at(i) * hbar; }
};

inline void validate(const ModelParams& p) {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(p.K) || !finite(p.lambda) || !finite(p.hbar) || !finite(p.epsilon) ||
        !finite(p.sigma)) {
        throw ConfigError("model parameters must be finite");
    }
    if (!(p.hbar > 0.0)) throw ConfigError("hbar must be positive");
    if (p.dim < 4 || p.dim % 2 != 0) throw ConfigError("dim must be even and >= 4");
    if (p.epsilon < 0.0) throw ConfigError("epsilon must be non-negative");
    if (!(p.sigma > 0.0)) throw ConfigError("sigma must be positive");
}

inline ModelParams with_dim(ModelParams p, int dim) {
    p.dim = dim;
    return p;
}

}  // namespace nqkr
