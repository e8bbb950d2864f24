#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nqkr/error.hpp"
#include "nqkr/fit.hpp"
#include "nqkr/observables.hpp"
#include "nqkr/parallel.hpp"
#include "nqkr/params.hpp"
#include "nqkr/spectrum.hpp"

namespace nqkr {

enum class SweepObservable { time_averaged_p2, mean_ipr };

inline const char* to_string(SweepObservable o) {
    return o == SweepObservable::time_averaged_p2 ? "time_averaged_p2" : "mean_ipr";
}

enum class CellStatus {
    ok,
    unconverged,       // edge population stayed above tolerance at the largest basis
    failed_hermitian,  // no growing modes, mean IPR undefined
    failed,            // numeric or solver error
};

inline const char* to_string(CellStatus s) {
    switch (s) {
        case CellStatus::ok: return "ok";
        case CellStatus::unconverged: return "unconverged";
        case CellStatus::failed_hermitian: return "failed-hermitian";
        case CellStatus::failed: return "failed";
    }
    return "failed";
}

struct SweepCell {
    double value = std::nan("");
    CellStatus status = CellStatus::failed;
    int dim = 0;  // basis size the value was computed with
};

/// Rectangular (K, lambda) grid; cells are row-major in K.
struct SweepGrid {
    std::vector<double> k_values;
    std::vector<double> lambda_values;
    std::vector<SweepCell> cells;
    SweepObservable observable = SweepObservable::time_averaged_p2;
    ModelParams common;  // hbar, starting dim, epsilon, sigma; K and lambda unused
    int steps = 0;

    const SweepCell& at(std::size_t ik, std::size_t il) const {
        return cells[ik * lambda_values.size() + il];
    }
};

struct SweepSpec {
    std::vector<double> k_values;
    std::vector<double> lambda_values;
    ModelParams common;
    int steps = 1000;
    int workers = 1;
    // sweep_p2 doubles the basis until the edge population stays below this.
    double edge_tolerance = 1e-12;
    int max_dim = 16384;
};

/// n evenly spaced values from lo to hi inclusive.
inline std::vector<double> linspace(double lo, double hi, int n) {
    if (n < 1) throw ConfigError("linspace: need at least one point");
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    return v;
}

namespace detail {

inline void check_axes(const SweepSpec& spec) {
    auto ascending = [](const std::vector<double>& v) {
        for (std::size_t i = 1; i < v.size(); ++i)
            if (!(v[i] > v[i - 1])) return false;
        return !v.empty();
    };
    if (!ascending(spec.k_values) || !ascending(spec.lambda_values)) {
        throw ConfigError("sweep axes must be non-empty and strictly ascending");
    }
}

inline SweepGrid empty_grid(const SweepSpec& spec, SweepObservable obs) {
    check_axes(spec);
    SweepGrid g;
    g.k_values = spec.k_values;
    g.lambda_values = spec.lambda_values;
    g.cells.resize(spec.k_values.size() * spec.lambda_values.size());
    g.observable = obs;
    g.common = spec.common;
    g.steps = spec.steps;
    return g;
}

}  // namespace detail

/// One sweep_p2 cell: time-averaged <p^2> of the ground state over `steps`
/// kicks, doubling the basis until the edge population is negligible.
inline SweepCell p2_cell(ModelParams params, int steps, double edge_tolerance, int max_dim) {
    SweepCell cell;
    for (;;) {
        EvolutionRecord rec = record_evolution(params, ground_state(params), steps);
        cell.value = time_averaged_p2(rec.p2, static_cast<std::size_t>(steps));
        cell.dim = params.dim;
        if (rec.max_edge_probability < edge_tolerance) {
            cell.status = CellStatus::ok;
            return cell;
        }
        if (params.dim * 2 > max_dim) {
            cell.status = CellStatus::unconverged;
            return cell;
        }
        params.dim *= 2;
    }
}

inline SweepGrid sweep_p2(const SweepSpec& spec) {
    if (spec.steps < 1) throw ConfigError("sweep_p2: need at least one kick");
    validate(spec.common);
    SweepGrid grid = detail::empty_grid(spec, SweepObservable::time_averaged_p2);
    const std::size_t nl = spec.lambda_values.size();
    parallel_for(grid.cells.size(), spec.workers, [&](std::size_t c) {
        ModelParams p = spec.common;
        p.K = spec.k_values[c / nl];
        p.lambda = spec.lambda_values[c % nl];
        try {
            grid.cells[c] = p2_cell(p, spec.steps, spec.edge_tolerance, spec.max_dim);
        } catch (const Error&) {
            grid.cells[c] = SweepCell{std::nan(""), CellStatus::failed, p.dim};
        }
    });
    return grid;
}

/// Mean IPR of the growing quasienergy modes per cell, at a fixed basis size.
inline SweepGrid sweep_ipr(const SweepSpec& spec) {
    validate(spec.common);
    SweepGrid grid = detail::empty_grid(spec, SweepObservable::mean_ipr);
    const std::size_t nl = spec.lambda_values.size();
    parallel_for(grid.cells.size(), spec.workers, [&](std::size_t c) {
        ModelParams p = spec.common;
        p.K = spec.k_values[c / nl];
        p.lambda = spec.lambda_values[c % nl];
        SweepCell cell{std::nan(""), CellStatus::failed, p.dim};
        try {
            QuasiSpectrum s = quasi_spectrum(p);
            cell.value = mean_ipr(s);
            cell.status = CellStatus::ok;
        } catch (const FitError&) {
            cell.status = CellStatus::failed_hermitian;
        } catch (const Error&) {
            cell.status = CellStatus::failed;
        }
        grid.cells[c] = cell;
    });
    return grid;
}

enum class Law { quadratic, linear, log };

/// Least squares of y against x^2, x or ln x (with intercept). slope is the
/// law's coefficient.
inline FitResult fit_law(std::span<const double> xs, std::span<const double> ys, Law law) {
    if (xs.size() != ys.size()) throw FitError("fit_law: length mismatch");
    if (xs.size() < 4) throw FitError("fit_law: need at least four points");
    std::vector<double> u(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        switch (law) {
            case Law::quadratic: u[i] = xs[i] * xs[i]; break;
            case Law::linear: u[i] = xs[i]; break;
            case Law::log:
                if (!(xs[i] > 0.0)) throw FitError("fit_law: log law needs positive x");
                u[i] = std::log(xs[i]);
                break;
        }
    }
    return linear_fit(u, ys);
}

}  // namespace nqkr
