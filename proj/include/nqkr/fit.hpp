#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "nqkr/error.hpp"

namespace nqkr {

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    std::size_t window_begin = 0;  // first index used (inclusive)
    std::size_t window_end = 0;    // one past the last index used
    double residual = 0.0;         // root-mean-square deviation of the fit
    double correlation = 0.0;      // Pearson r of the fitted coordinates

    std::size_t points() const { return window_end - window_begin; }
};

// Ordinary least squares y = slope * x + intercept.
inline FitResult linear_fit(std::span<const double> xs, std::span<const double> ys) {
    const std::size_t n = xs.size();
    if (n != ys.size()) throw FitError("linear_fit: length mismatch");
    if (n < 2) throw FitError("linear_fit: need at least two points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = xs[i] - mx, dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0)) throw FitError("linear_fit: abscissae are all equal");
    FitResult r;
    r.slope = sxy / sxx;
    r.intercept = my - r.slope * mx;
    r.window_begin = 0;
    r.window_end = n;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double e = ys[i] - (r.slope * xs[i] + r.intercept);
        ss += e * e;
    }
    r.residual = std::sqrt(ss / n);
    r.correlation = syy > 0.0 ? sxy / std::sqrt(sxx * syy) : 1.0;
    return r;
}

}  // namespace nqkr
