#pragma once

/**
 * @file quadrature.hpp
 * @brief Adaptive Gauss–Kronrod integration and 1-D maximization helpers.
 *
 * Thin wrappers over Boost.Math so the rest of the library talks in terms of
 * an absolute tolerance. Infinite upper limits are mapped by Boost internally.
 */

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>

#include "gfrag/errors.hpp"

namespace gfrag::quad {

inline constexpr double default_abs_tol = 1e-10;

struct Result {
    double value = 0.0;
    double error = 0.0;
};

/// Adaptive G15/K31 integral of f over [a, b]; b may be +inf.
template <class F>
Result integrate(F&& f, double a, double b, double abs_tol = default_abs_tol, unsigned max_depth = 18) {
    if (a == b) return {};
    double err = 0.0;
    double l1 = 0.0;
    // Boost's tolerance is relative to the L1 norm of the integrand; start from
    // the ratio that meets the absolute target and tighten until it is met.
    boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 0, 1.0, &err, &l1);
    double rel = l1 > 0.0 ? std::max(abs_tol / l1, 1e-15) : 1e-9;
    double value = 0.0;
    double prev_err = std::numeric_limits<double>::infinity();
    for (int pass = 0; pass < 4; ++pass) {
        value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, max_depth, rel, &err, &l1);
        if (err <= abs_tol || l1 == 0.0 || err >= 0.5 * prev_err || rel <= 1e-15) break;
        prev_err = err;
        rel = std::max(rel * 1e-2, 1e-15);
    }
    if (!std::isfinite(value)) throw NumericError("quadrature produced a non-finite value");
    return {value, err};
}

template <class F>
double integral(F&& f, double a, double b, double abs_tol = default_abs_tol) {
    return integrate(std::forward<F>(f), a, b, abs_tol).value;
}

/// Maximizer of f on [lo, hi] (Brent, ~1e-12 relative in x).
template <class F>
std::pair<double, double> maximize(F&& f, double lo, double hi) {
    auto neg = [&](double x) { return -f(x); };
    std::uintmax_t iters = 500;
    auto [x, fx] = boost::math::tools::brent_find_minima(neg, lo, hi, 40, iters);
    return {x, -fx};
}

}  // namespace gfrag::quad
