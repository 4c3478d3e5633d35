#pragma once

/**
 * @file grid.hpp
 * @brief Densities sampled on a 1-D size grid and the weighted X_m norm.
 *
 * X_m is L1 with weight (1 + x^m). All integrals over grid data use the
 * composite trapezoid rule on the nodes; values beyond the last node follow
 * the declared tail rule.
 */

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gfrag/errors.hpp"

namespace gfrag {

enum class TailRule {
    zero,         ///< f = 0 beyond the last node
    exponential,  ///< f continued as f_N exp(-k (x - x_N)), k fitted on the last interval
};

/// Weight 1 + x^m, with the convention 0^0 = 1.
inline double xm_weight(double x, double m) { return 1.0 + std::pow(x, m); }

struct GridFunction {
    std::vector<double> nodes;
    std::vector<double> values;
    double m = 2.0;

    GridFunction() = default;
    GridFunction(std::vector<double> x, std::vector<double> v, double weight_exponent = 2.0)
        : nodes(std::move(x)), values(std::move(v)), m(weight_exponent) {
        validate();
    }

    std::size_t size() const { return nodes.size(); }

    void validate() const {
        if (nodes.size() != values.size()) throw InvalidInput("grid function: nodes/values size mismatch");
        for (std::size_t i = 1; i < nodes.size(); ++i)
            if (!(nodes[i] > nodes[i - 1])) throw InvalidInput("grid function: nodes must be strictly increasing");
        if (!nodes.empty() && nodes.front() < 0.0) throw InvalidInput("grid function: nodes must be nonnegative");
    }

    /// Linear interpolation; zero outside [nodes.front(), nodes.back()].
    double operator()(double x) const {
        if (nodes.empty() || x < nodes.front() || x > nodes.back()) return 0.0;
        auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
        if (it == nodes.end()) return values.back();
        const std::size_t j = static_cast<std::size_t>(it - nodes.begin());
        const std::size_t i = j - 1;
        const double t = (x - nodes[i]) / (nodes[j] - nodes[i]);
        return (1.0 - t) * values[i] + t * values[j];
    }

    template <class F>
    static GridFunction sample(std::vector<double> x, F&& f, double weight_exponent = 2.0) {
        std::vector<double> v(x.size());
        std::transform(x.begin(), x.end(), v.begin(), [&](double xi) { return f(xi); });
        return GridFunction(std::move(x), std::move(v), weight_exponent);
    }
};

/// n_cells + 1 equispaced nodes on [0, x_max].
inline std::vector<double> uniform_nodes(double x_max, std::size_t n_cells) {
    if (n_cells < 1 || !(x_max > 0.0)) throw InvalidInput("uniform_nodes: need x_max > 0 and n_cells >= 1");
    std::vector<double> x(n_cells + 1);
    for (std::size_t i = 0; i <= n_cells; ++i) x[i] = x_max * static_cast<double>(i) / static_cast<double>(n_cells);
    return x;
}

/// Cell midpoints of a uniform partition of [0, x_max].
inline std::vector<double> midpoint_nodes(double x_max, std::size_t n_cells) {
    if (n_cells < 1 || !(x_max > 0.0)) throw InvalidInput("midpoint_nodes: need x_max > 0 and n_cells >= 1");
    std::vector<double> x(n_cells);
    const double h = x_max / static_cast<double>(n_cells);
    for (std::size_t i = 0; i < n_cells; ++i) x[i] = (static_cast<double>(i) + 0.5) * h;
    return x;
}

/// Composite trapezoid weights for the given nodes.
inline std::vector<double> trapezoid_weights(std::span<const double> x) {
    std::vector<double> w(x.size(), 0.0);
    for (std::size_t i = 1; i < x.size(); ++i) {
        const double h = x[i] - x[i - 1];
        w[i - 1] += 0.5 * h;
        w[i] += 0.5 * h;
    }
    return w;
}

/// ∫ g f over the grid of f.
template <class G>
double pairing(G&& g, const GridFunction& f) {
    const auto w = trapezoid_weights(f.nodes);
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * g(f.nodes[i]) * f.values[i];
    return s;
}

inline double integrate(const GridFunction& f) {
    return pairing([](double) { return 1.0; }, f);
}

/// ∫ g·f where both are sampled on the same nodes.
inline double pairing(const GridFunction& g, const GridFunction& f) {
    if (g.nodes != f.nodes) throw InvalidInput("pairing: grid functions live on different grids");
    const auto w = trapezoid_weights(f.nodes);
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * g.values[i] * f.values[i];
    return s;
}

namespace detail {

// ∫_X^∞ (1 + x^m) A e^{-k (x - X)} dx
inline double exponential_tail(double X, double A, double k, double m) {
    if (A == 0.0) return 0.0;
    if (!(k > 0.0)) throw Diverges("xm_norm: exponential tail does not decay");
    const double kx = k * X;
    double moment = 0.0;
    if (kx > 700.0) {
        // Γ(m+1, kX) e^{kX}/k^{m+1} ~ X^m/k for large kX
        moment = std::pow(X, m) / k * (1.0 + m / kx);
    } else {
        moment = std::exp(kx) * boost::math::tgamma(m + 1.0, kx) / std::pow(k, m + 1.0);
    }
    return std::abs(A) * (1.0 / k + moment);
}

}  // namespace detail

/// ‖f‖_m = ∫ (1 + x^m)|f(x)| dx by composite trapezoid plus the tail rule.
inline double xm_norm(const GridFunction& f, double m, TailRule tail = TailRule::zero) {
    if (f.size() < 2) throw InvalidInput("xm_norm: grid function needs at least two nodes");
    double s = 0.0;
    for (std::size_t i = 1; i < f.size(); ++i) {
        const double h = f.nodes[i] - f.nodes[i - 1];
        s += 0.5 * h *
             (xm_weight(f.nodes[i - 1], m) * std::abs(f.values[i - 1]) + xm_weight(f.nodes[i], m) * std::abs(f.values[i]));
    }
    if (tail == TailRule::exponential) {
        const std::size_t n = f.size();
        const double fa = std::abs(f.values[n - 2]);
        const double fb = std::abs(f.values[n - 1]);
        if (fb > 0.0) {
            if (!(fa > fb)) throw Diverges("xm_norm: exponential tail does not decay");
            const double k = std::log(fa / fb) / (f.nodes[n - 1] - f.nodes[n - 2]);
            s += detail::exponential_tail(f.nodes[n - 1], fb, k, m);
        }
    }
    return s;
}

inline double xm_norm(const GridFunction& f, TailRule tail = TailRule::zero) { return xm_norm(f, f.m, tail); }

/// Plain L1 norm ∫|f|.
inline double l1_norm(const GridFunction& f) {
    const auto w = trapezoid_weights(f.nodes);
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * std::abs(f.values[i]);
    return s;
}

inline GridFunction operator-(GridFunction a, const GridFunction& b) {
    if (a.nodes != b.nodes) throw InvalidInput("grid functions live on different grids");
    for (std::size_t i = 0; i < a.size(); ++i) a.values[i] -= b.values[i];
    return a;
}

inline GridFunction operator+(GridFunction a, const GridFunction& b) {
    if (a.nodes != b.nodes) throw InvalidInput("grid functions live on different grids");
    for (std::size_t i = 0; i < a.size(); ++i) a.values[i] += b.values[i];
    return a;
}

inline GridFunction operator*(double c, GridFunction a) {
    for (auto& v : a.values) v *= c;
    return a;
}

/// Resample f onto new nodes by linear interpolation (zero outside its support).
inline GridFunction resample(const GridFunction& f, std::vector<double> nodes) {
    std::vector<double> v(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) v[i] = f(nodes[i]);
    return GridFunction(std::move(nodes), std::move(v), f.m);
}

/// Like resample, but holds the end values of f constant outside its node range.
inline GridFunction resample_extended(const GridFunction& f, std::vector<double> nodes) {
    std::vector<double> v(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double x = std::clamp(nodes[i], f.nodes.front(), f.nodes.back());
        v[i] = f(x);
    }
    return GridFunction(std::move(nodes), std::move(v), f.m);
}

}  // namespace gfrag
