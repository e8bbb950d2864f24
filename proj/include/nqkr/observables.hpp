#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

#include "nqkr/error.hpp"
#include "nqkr/fit.hpp"
#include "nqkr/parallel.hpp"
#include "nqkr/params.hpp"
#include "nqkr/propagator.hpp"
#include "nqkr/wavefunction.hpp"

namespace nqkr {

/// Per-kick record of one observable.
struct TimeSeries {
    std::vector<double> times;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    void push(double t, double v) {
        times.push_back(t);
        values.push_back(v);
    }
};

/// <p^2> = sum_n (n hbar)^2 |psi_n|^2 / sum_n |psi_n|^2. The norm division
/// removes any dependence on gain or loss accumulated by the state.
inline double mean_p2(const WaveFunction& psi, const ModelParams& params) {
    if (psi.dim() != params.dim) throw ConfigError("mean_p2: dimension mismatch");
    double num = 0.0, den = 0.0;
    for (int i = 0; i < psi.dim(); ++i) {
        double w = std::norm(psi.amps[static_cast<std::size_t>(i)]);
        double p = params.momentum_at(i);
        num += p * p * w;
        den += w;
    }
    if (!(den > 0.0)) throw ConfigError("mean_p2: zero-norm state");
    return num / den;
}

/// Largest probability on the two outermost momentum indices.
inline double edge_probability(const WaveFunction& psi) {
    double n2 = psi.raw_norm();
    return std::max(std::norm(psi.amps.front()), std::norm(psi.amps.back())) / n2;
}

struct EvolutionRecord {
    TimeSeries p2;
    TimeSeries log_norm;  // ln ||psi(t)|| including extracted scale
    WaveFunction final_state;
    double max_edge_probability = 0.0;
};

/// Evolve init for n_steps kicks recording <p^2>, the log norm and the edge
/// population after every kick.
inline EvolutionRecord record_evolution(const ModelParams& params, WaveFunction init, int n_steps,
                                        RescaleWindow window = {}) {
    validate(params);
    if (init.dim() != params.dim) throw ConfigError("record_evolution: dimension mismatch");
    EvolutionRecord rec;
    rec.max_edge_probability = edge_probability(init);
    Propagator prop(params, false, window);
    prop.evolve(init, n_steps, [&](const WaveFunction& psi, int t) {
        rec.p2.push(t, mean_p2(psi, params));
        rec.log_norm.push(t, psi.log_true_norm());
        rec.max_edge_probability = std::max(rec.max_edge_probability, edge_probability(psi));
    });
    rec.final_state = std::move(init);
    return rec;
}

inline TimeSeries energy_series(const ModelParams& params, const WaveFunction& init, int n_steps) {
    if (n_steps < 1) throw ConfigError("energy_series: need at least one kick");
    return record_evolution(params, init, n_steps).p2;
}

/// Mean of the first n recorded values.
inline double time_averaged_p2(const TimeSeries& series, std::size_t n) {
    if (n == 0 || series.size() < n) throw ConfigError("time_averaged_p2: series too short");
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += series.values[i];
    return s / static_cast<double>(n);
}

// |<a|b>|^2 / (N_a N_b), clamped into [0, 1] against rounding.
inline double normalized_overlap(const WaveFunction& a, const WaveFunction& b) {
    double na = a.raw_norm(), nb = b.raw_norm();
    if (!(na > 0.0) || !(nb > 0.0)) throw ConfigError("echo: zero-norm state");
    return std::clamp(std::norm(inner(a, b)) / (na * nb), 0.0, 1.0);
}

/// Echo between two evolutions of the same initial state under two kick
/// tables. Returns L(t) for t = 0..n_steps with L(0) = 1.
inline TimeSeries echo_series(const WaveFunction& init, std::shared_ptr<const KickTable> first,
                              std::shared_ptr<const KickTable> second, int n_steps,
                              FftEffort effort = FftEffort::estimate) {
    if (n_steps < 0) throw ConfigError("echo: negative step count");
    Propagator pa(std::move(first), {}, effort);
    Propagator pb(std::move(second), {}, effort);
    WaveFunction a = init, b = init;
    TimeSeries out;
    out.push(0, normalized_overlap(a, b));
    for (int t = 1; t <= n_steps; ++t) {
        pa.step(a);
        pb.step(b);
        out.push(t, normalized_overlap(a, b));
    }
    return out;
}

/// Loschmidt echo between evolutions with K and K + epsilon.
inline TimeSeries loschmidt_echo(const ModelParams& params, const WaveFunction& init, int n_steps) {
    validate(params);
    return echo_series(init, std::make_shared<const KickTable>(build_tables(params, false)),
                       std::make_shared<const KickTable>(build_tables(params, true)), n_steps);
}

struct EchoOptions {
    int workers = 1;
    FftEffort effort = FftEffort::estimate;
    // Packets centred at theta and 2 pi - theta have identical echoes (the
    // model is even in theta), so each mirror pair is evolved once.
    bool use_parity = true;
};

/// Ensemble-averaged echo over Gaussian packets at the given centres.
inline TimeSeries averaged_echo(const ModelParams& params, int n_steps,
                                std::span<const double> centers, EchoOptions options = {}) {
    validate(params);
    if (centers.empty()) throw ConfigError("averaged_echo: need at least one packet");
    auto unperturbed = std::make_shared<const KickTable>(build_tables(params, false));
    auto perturbed = std::make_shared<const KickTable>(build_tables(params, true));

    // Map each centre to a representative; identical or mirrored centres share one run.
    constexpr double two_pi = 2.0 * std::numbers::pi;
    auto canonical = [&](double c) {
        double u = std::fmod(c, two_pi);
        if (u < 0.0) u += two_pi;
        if (options.use_parity) u = std::min(u, two_pi - u);
        if (two_pi - u < 1e-12) u = 0.0;
        return u;
    };
    std::vector<double> reps;
    std::vector<std::size_t> slot(centers.size());
    for (std::size_t j = 0; j < centers.size(); ++j) {
        double c = canonical(centers[j]);
        auto it = std::find_if(reps.begin(), reps.end(),
                               [&](double r) { return std::abs(r - c) < 1e-12; });
        slot[j] = static_cast<std::size_t>(it - reps.begin());
        if (it == reps.end()) reps.push_back(c);
    }

    std::vector<TimeSeries> runs(reps.size());
    parallel_for(reps.size(), options.workers, [&](std::size_t r) {
        runs[r] = echo_series(gaussian_state(params, reps[r]), unperturbed, perturbed, n_steps,
                              options.effort);
    });

    TimeSeries mean = runs.front();
    for (std::size_t t = 0; t < mean.size(); ++t) {
        double s = 0.0;
        for (std::size_t j = 0; j < centers.size(); ++j) s += runs[slot[j]].values[t];
        mean.values[t] = s / static_cast<double>(centers.size());
    }
    return mean;
}

/// Packet centres 2 pi j / n for j = 1..n.
inline std::vector<double> packet_centers(int n_packets) {
    if (n_packets < 1) throw ConfigError("averaged_echo: need at least one packet");
    std::vector<double> c(static_cast<std::size_t>(n_packets));
    for (int j = 1; j <= n_packets; ++j) {
        c[static_cast<std::size_t>(j - 1)] = 2.0 * std::numbers::pi * j / n_packets;
    }
    return c;
}

inline TimeSeries averaged_echo(const ModelParams& params, int n_steps, int n_packets,
                                EchoOptions options = {}) {
    auto centers = packet_centers(n_packets);
    return averaged_echo(params, n_steps, centers, options);
}

/// Classical Lyapunov exponent ln(K/2) of the standard map (K > 2).
inline double lyapunov_reference(double K) { return std::log(K / 2.0); }

/// Fit ln P_n = intercept + slope * |n| hbar over points with P_n above
/// 1e-14 * max(P). Window indices refer to the input distribution.
inline FitResult fit_localization_length(std::span<const double> dist, const ModelParams& params) {
    if (static_cast<int>(dist.size()) != params.dim) {
        throw ConfigError("fit_localization_length: distribution size does not match dim");
    }
    const double peak = *std::max_element(dist.begin(), dist.end());
    const double floor = 1e-14 * peak;
    std::vector<double> xs, ys;
    std::size_t first = dist.size(), last = 0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        if (dist[i] > floor && dist[i] > 0.0) {
            xs.push_back(std::abs(params.momentum_at(static_cast<int>(i))));
            ys.push_back(std::log(dist[i]));
            first = std::min(first, i);
            last = i;
        }
    }
    if (xs.size() < 20) throw FitError("localization fit: fewer than 20 usable points");
    FitResult fit = linear_fit(xs, ys);
    fit.window_begin = first;
    fit.window_end = last + 1;
    if (!(fit.slope < 0.0)) throw FitError("localization fit: distribution does not decay");
    return fit;
}

/// xi from a fit of ln P against |p|.
inline double localization_length(const FitResult& fit) { return -1.0 / fit.slope; }

/// Fit ln L against t from t = 1 until L first drops below ten times its
/// saturation level (mean of the last quartile). Throws FitError when the
/// series never decays.
inline FitResult fit_decay_rate(const TimeSeries& series) {
    const std::size_t n = series.size();
    if (n < 4) throw FitError("decay fit: series too short");
    const std::size_t q = std::max<std::size_t>(1, n / 4);
    double sat = 0.0;
    for (std::size_t i = n - q; i < n; ++i) sat += series.values[i];
    sat /= static_cast<double>(q);
    const double cut = 10.0 * sat;

    std::size_t begin = 0;
    while (begin < n && series.times[begin] < 1.0) ++begin;
    std::size_t end = begin;
    while (end < n && series.values[end] >= cut && series.values[end] > 0.0) ++end;
    if (end - begin < 2) throw FitError("decay fit: no decaying window (non-decaying regime)");

    std::vector<double> xs, ys;
    for (std::size_t i = begin; i < end; ++i) {
        xs.push_back(series.times[i]);
        ys.push_back(std::log(series.values[i]));
    }
    FitResult fit = linear_fit(xs, ys);
    fit.window_begin = begin;
    fit.window_end = end;
    if (!(fit.slope < 0.0)) throw FitError("decay fit: series does not decay");
    return fit;
}

/// Decay rate gamma of L ~ exp(-gamma t).
inline double decay_rate(const FitResult& fit) { return -fit.slope; }

}  // namespace nqkr
