#pragma once

/**
 * @file closed_form.hpp
 * @brief Exact solution of the binary model r, a·x, b = 2/y, β = β0 + β1·x.
 *
 * Boundary condition in value form: u(0, t) = β0·M0(t) + β1·M1(t), so that
 * α0 = r·β0 and α1 = r·β1 + a. The solution on x < rt is driven by the
 * extension ψ of the initial datum to negative sizes.
 */

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "gfrag/errors.hpp"
#include "gfrag/grid.hpp"
#include "gfrag/model.hpp"
#include "gfrag/quadrature.hpp"

namespace gfrag::closed_form {

struct BinaryModelParams {
    double r = 1.0;
    double a = 1.0;
    double beta0 = 0.0;
    double beta1 = 0.0;

    double alpha0() const { return r * beta0; }
    double alpha1() const { return r * beta1 + a; }

    void validate() const {
        if (!(r > 0.0)) throw InvalidModel("binary model: r must be positive");
        if (!(a >= 0.0)) throw InvalidModel("binary model: a must be nonnegative");
        if (!(beta0 >= 0.0 && beta1 >= 0.0)) throw InvalidModel("binary model: beta must be nonnegative");
    }
};

/// The family member represented by a general model, if any.
inline std::optional<BinaryModelParams> as_binary_model(const ModelDefinition& model) {
    const auto* rc = std::get_if<Constant>(&model.r);
    if (!rc || !(rc->c > 0.0)) return std::nullopt;
    if (!std::holds_alternative<UniformBinary>(model.kernel)) return std::nullopt;
    double a = 0.0;
    if (const auto* al = std::get_if<Linear>(&model.a)) {
        if (al->c0 != 0.0) return std::nullopt;
        a = al->c1;
    } else {
        return std::nullopt;
    }
    if (!(a > 0.0)) return std::nullopt;
    double b0 = 0.0, b1 = 0.0;
    if (const auto* bc = std::get_if<Constant>(&model.beta)) {
        b0 = bc->c;
    } else if (const auto* bl = std::get_if<Linear>(&model.beta)) {
        b0 = bl->c0;
        b1 = bl->c1;
    } else {
        return std::nullopt;
    }
    // a flux-form weight β corresponds to the value-form weight β / r
    if (model.bc_convention == BoundaryConvention::flux) {
        b0 /= rc->c;
        b1 /= rc->c;
    }
    return BinaryModelParams{rc->c, a, b0, b1};
}

inline ModelDefinition to_model(const BinaryModelParams& p, double m = 2.0) {
    ModelDefinition model;
    model.r = Constant{p.r};
    model.a = Linear{0.0, p.a};
    model.kernel = UniformBinary{};
    model.beta = Linear{p.beta0, p.beta1};
    model.m = m;
    model.bc_convention = BoundaryConvention::value;
    return model;
}

/// (λ+, λ−): roots of s² − α0 s − r α1 = 0.
inline std::pair<double, double> lambda_pm(const BinaryModelParams& p) {
    const double a0 = p.alpha0(), a1 = p.alpha1();
    const double disc = a0 * a0 + 4.0 * p.r * a1;
    if (!(disc > 0.0)) throw DegenerateModel("lambda_pm: discriminant is not positive");
    const double sq = std::sqrt(disc);
    // the smaller root via Vieta avoids cancellation when r α1 is tiny
    const double plus = 0.5 * (a0 + sq);
    const double minus = (plus != 0.0) ? -p.r * a1 / plus : 0.5 * (a0 - sq);
    return {plus, minus};
}

struct MomentState {
    double M0 = 0.0;
    double M1 = 0.0;
};

using Matrix2 = std::array<std::array<double, 2>, 2>;

/// K(t) = exp(t [[α0, α1], [r, 0]]), evolving (M0, M1).
inline Matrix2 moment_propagator(const BinaryModelParams& p, double t) {
    if (!(t >= 0.0)) throw InvalidInput("moment_propagator: t must be nonnegative");
    const auto [lp, lm] = lambda_pm(p);
    if (lp == lm) throw DegenerateModel("moment_propagator: repeated eigenvalue");
    const double ep = std::exp(lp * t), em = std::exp(lm * t);
    const double d = lp - lm;
    const double a0 = p.alpha0(), a1 = p.alpha1(), r = p.r;
    // Sylvester: exp(At) = [e+ (A − λ− I) − e− (A − λ+ I)] / (λ+ − λ−)
    Matrix2 K{};
    K[0][0] = (ep * (a0 - lm) - em * (a0 - lp)) / d;
    K[0][1] = a1 * (ep - em) / d;
    K[1][0] = r * (ep - em) / d;
    K[1][1] = (ep * (-lm) - em * (-lp)) / d;
    return K;
}

inline MomentState propagate(const BinaryModelParams& p, const MomentState& m0, double t) {
    const auto K = moment_propagator(p, t);
    return {K[0][0] * m0.M0 + K[0][1] * m0.M1, K[1][0] * m0.M0 + K[1][1] * m0.M1};
}

// ---------------------------------------------------------------------------
// Forcing F and the boundary extension ψ
// ---------------------------------------------------------------------------

/**
 * F(t) = e^{−art²/2} [β0 M0(t) + β1 M1(t)] − (2at + r a² t³) M0(0) − a² t² M1(0),
 * the right-hand side of the Volterra equation for ψ(−rt).
 */
struct ForcingF {
    BinaryModelParams params;
    MomentState initial;

    double operator()(double t, int order = 0) const {
        const auto& p = params;
        const double a = p.a, r = p.r;
        const auto K = moment_propagator(p, t);
        const MomentState m{K[0][0] * initial.M0 + K[0][1] * initial.M1, K[1][0] * initial.M0 + K[1][1] * initial.M1};
        // derivatives of the moments straight from the ODE
        const MomentState d1{p.alpha0() * m.M0 + p.alpha1() * m.M1, r * m.M0};
        const MomentState d2{p.alpha0() * d1.M0 + p.alpha1() * d1.M1, r * d1.M0};
        const double b = p.beta0 * m.M0 + p.beta1 * m.M1;
        const double b1 = p.beta0 * d1.M0 + p.beta1 * d1.M1;
        const double b2 = p.beta0 * d2.M0 + p.beta1 * d2.M1;
        const double g = std::exp(-0.5 * a * r * t * t);
        const double M0 = initial.M0, M1 = initial.M1;
        switch (order) {
        case 0:
            return g * b - (2.0 * a * t + r * a * a * t * t * t) * M0 - a * a * t * t * M1;
        case 1: {
            const double g1 = -a * r * t * g;
            return g1 * b + g * b1 - (2.0 * a + 3.0 * r * a * a * t * t) * M0 - 2.0 * a * a * t * M1;
        }
        case 2: {
            const double g1 = -a * r * t * g;
            const double g2 = (a * a * r * r * t * t - a * r) * g;
            return g2 * b + 2.0 * g1 * b1 + g * b2 - 6.0 * r * a * a * t * M0 - 2.0 * a * a * M1;
        }
        default:
            throw InvalidInput("forcing_F: order must be 0, 1 or 2");
        }
    }
};

inline double forcing_F(const ForcingF& f, double t, int order) {
    if (!(t >= 0.0)) throw InvalidInput("forcing_F: t must be nonnegative");
    return f(t, order);
}

namespace detail {

inline void require_nonpositive(double xi) {
    if (!(xi <= 0.0)) throw InvalidInput("boundary extension: xi must be nonpositive");
}

inline constexpr double psi_abs_tol = 1e-13;

}  // namespace detail

/**
 * ψ(ξ) for ξ ≤ 0, with c = √(a/r), τ = (σ − ξ)/r, E = e^{aσ(σ−2ξ)/(2r)}:
 *
 *   ψ(ξ) = e^{−aξ²/2r} [ (cosh cξ − 2(a/r)^{1/2} ξ sinh cξ) F(0) − sinh(cξ) F'(0)/√(ar) ]
 *        − √(r/a) ∫_ξ^0 sinh(cσ) E [ (aσ/r)² F(τ) + (2aσ/r²) F'(τ) + F''(τ)/r² ] dσ.
 */
inline double boundary_extension_psi(const ForcingF& f, double xi) {
    detail::require_nonpositive(xi);
    const double a = f.params.a, r = f.params.r;
    if (!(a > 0.0)) throw DegenerateModel("boundary extension requires a > 0");
    const double c = std::sqrt(a / r);
    const double F0 = f(0.0, 0), F1 = f(0.0, 1);
    const double gauss = std::exp(-a * xi * xi / (2.0 * r));
    const double base =
        gauss * ((std::cosh(c * xi) - 2.0 * c * xi * std::sinh(c * xi)) * F0 - std::sinh(c * xi) * F1 / std::sqrt(a * r));
    if (xi == 0.0) return base;
    auto integrand = [&](double s) {
        const double tau = (s - xi) / r;
        const double E = std::exp(a * s * (s - 2.0 * xi) / (2.0 * r));
        const double q = a * s / r;
        return std::sinh(c * s) * E * (q * q * f(tau, 0) + 2.0 * a * s / (r * r) * f(tau, 1) + f(tau, 2) / (r * r));
    };
    return base - std::sqrt(r / a) * quad::integral(integrand, xi, 0.0, detail::psi_abs_tol);
}

/**
 * P(ξ) = −(1/c) ∫_ξ^0 sinh(cσ) E(σ, ξ) F(τ) dσ and its ξ-derivative; P'' = ψ and
 * P(0) = P'(0) = 0, so ∫_ξ^0 ψ = −P'(ξ) and ∫_ξ^0 (s − ξ) ψ(s) ds = P(ξ).
 */
inline std::pair<double, double> psi_antiderivatives(const ForcingF& f, double xi) {
    detail::require_nonpositive(xi);
    if (xi == 0.0) return {0.0, 0.0};
    const double a = f.params.a, r = f.params.r;
    const double c = std::sqrt(a / r);
    auto E = [&](double s) { return std::exp(a * s * (s - 2.0 * xi) / (2.0 * r)); };
    const double P = -quad::integral([&](double s) { return std::sinh(c * s) * E(s) * f((s - xi) / r, 0); }, xi, 0.0,
                                     detail::psi_abs_tol) /
                     c;
    const double inner = quad::integral(
        [&](double s) {
            const double tau = (s - xi) / r;
            return std::sinh(c * s) * E(s) * (-(a * s / r) * f(tau, 0) - f(tau, 1) / r);
        },
        xi, 0.0, detail::psi_abs_tol);
    const double dP = -(-std::sinh(c * xi) * std::exp(-a * xi * xi / (2.0 * r)) * f(0.0, 0) + inner) / c;
    return {P, dP};
}

// ---------------------------------------------------------------------------
// Initial data
// ---------------------------------------------------------------------------

/// An initial density on [0, ∞) together with its upper tail moments.
struct InitialDatum {
    std::function<double(double)> value;
    std::function<double(double)> tail0;  ///< ξ ↦ ∫_ξ^∞ u0
    std::function<double(double)> tail1;  ///< ξ ↦ ∫_ξ^∞ s u0(s) ds

    MomentState moments() const { return {tail0(0.0), tail1(0.0)}; }
};

/// u0(x) = Σ_k c_k x^k e^{−κx}, with exact incomplete moments.
inline InitialDatum poly_exp_datum(std::vector<double> coeffs, double rate) {
    if (!(rate > 0.0)) throw InvalidInput("poly_exp datum: rate must be positive");
    if (coeffs.empty()) throw InvalidInput("poly_exp datum: no coefficients");
    // ∫_ξ^∞ x^n e^{−κx} dx = e^{−κξ} Σ_{j≤n} n!/j! ξ^j / κ^{n−j+1}
    auto upper = [rate](int n, double xi) {
        double sum = 0.0, fact_ratio = 1.0;  // n!/j!
        for (int j = n; j >= 0; --j) {
            sum += fact_ratio * std::pow(xi, j) / std::pow(rate, n - j + 1);
            fact_ratio *= j;
        }
        return std::exp(-rate * xi) * sum;
    };
    InitialDatum d;
    d.value = [coeffs, rate](double x) {
        if (x < 0.0) return 0.0;
        double p = 0.0;
        for (std::size_t k = coeffs.size(); k-- > 0;) p = p * x + coeffs[k];
        return p * std::exp(-rate * x);
    };
    d.tail0 = [coeffs, upper](double xi) {
        xi = std::max(xi, 0.0);
        double s = 0.0;
        for (std::size_t k = 0; k < coeffs.size(); ++k) s += coeffs[k] * upper(static_cast<int>(k), xi);
        return s;
    };
    d.tail1 = [coeffs, upper](double xi) {
        xi = std::max(xi, 0.0);
        double s = 0.0;
        for (std::size_t k = 0; k < coeffs.size(); ++k) s += coeffs[k] * upper(static_cast<int>(k) + 1, xi);
        return s;
    };
    return d;
}

/// Linear interpolant of grid data (zero beyond the last node), with exact prefix moments.
inline InitialDatum grid_datum(const GridFunction& u0) {
    if (u0.size() < 2) throw InvalidInput("grid datum: need at least two nodes");
    const auto& x = u0.nodes;
    const auto& v = u0.values;
    const std::size_t n = x.size();
    // upper tails at the nodes
    auto S0 = std::make_shared<std::vector<double>>(n, 0.0);
    auto S1 = std::make_shared<std::vector<double>>(n, 0.0);
    auto cell = [&](std::size_t i, double lo, double hi, int k) {
        // ∫_lo^hi s^k ℓ(s) ds on cell [x_i, x_{i+1}], ℓ linear
        const double slope = (v[i + 1] - v[i]) / (x[i + 1] - x[i]);
        const double c0 = v[i] - slope * x[i];
        if (k == 0) return c0 * (hi - lo) + 0.5 * slope * (hi * hi - lo * lo);
        return 0.5 * c0 * (hi * hi - lo * lo) + slope * (hi * hi * hi - lo * lo * lo) / 3.0;
    };
    for (std::size_t i = n - 1; i-- > 0;) {
        (*S0)[i] = (*S0)[i + 1] + cell(i, x[i], x[i + 1], 0);
        (*S1)[i] = (*S1)[i + 1] + cell(i, x[i], x[i + 1], 1);
    }
    auto data = std::make_shared<GridFunction>(u0);
    auto tail = [data, S0, S1](int k, double xi) {
        const auto& xs = data->nodes;
        const auto& vs = data->values;
        const auto& S = (k == 0) ? *S0 : *S1;
        xi = std::max(xi, xs.front());
        if (xi >= xs.back()) return 0.0;
        auto it = std::upper_bound(xs.begin(), xs.end(), xi);
        const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
        const double slope = (vs[i + 1] - vs[i]) / (xs[i + 1] - xs[i]);
        const double c0 = vs[i] - slope * xs[i];
        const double hi = xs[i + 1];
        const double part = (k == 0) ? c0 * (hi - xi) + 0.5 * slope * (hi * hi - xi * xi)
                                     : 0.5 * c0 * (hi * hi - xi * xi) + slope * (hi * hi * hi - xi * xi * xi) / 3.0;
        return S[i + 1] + part;
    };
    InitialDatum d;
    d.value = [data](double x) { return (*data)(x); };
    d.tail0 = [tail](double xi) { return tail(0, xi); };
    d.tail1 = [tail](double xi) { return tail(1, xi); };
    return d;
}

/// Arbitrary callable on [0, x_max]; tails by adaptive quadrature.
inline InitialDatum callable_datum(std::function<double(double)> f, double x_max) {
    InitialDatum d;
    d.value = [f, x_max](double x) { return (x < 0.0 || x > x_max) ? 0.0 : f(x); };
    d.tail0 = [f, x_max](double xi) {
        xi = std::max(xi, 0.0);
        return xi >= x_max ? 0.0 : quad::integral(f, xi, x_max, 1e-13);
    };
    d.tail1 = [f, x_max](double xi) {
        xi = std::max(xi, 0.0);
        return xi >= x_max ? 0.0 : quad::integral([&](double s) { return s * f(s); }, xi, x_max, 1e-13);
    };
    return d;
}

// ---------------------------------------------------------------------------
// Explicit solution
// ---------------------------------------------------------------------------

/**
 * u(x, t) = e^{at(rt − 2x)/2} [ ũ(ξ) + at (2 ∫_ξ^∞ ũ + at ∫_ξ^∞ (s − ξ) ũ(s) ds) ],  ξ = x − rt,
 * where ũ is u0 on [0, ∞) and ψ on (−∞, 0).
 */
class ClosedFormSolution {
public:
    ClosedFormSolution(BinaryModelParams params, InitialDatum datum)
        : params_(params), datum_(std::move(datum)) {
        params_.validate();
        if (!(params_.a > 0.0)) throw DegenerateModel("closed form requires a > 0");
        forcing_ = ForcingF{params_, datum_.moments()};
    }

    const BinaryModelParams& params() const { return params_; }
    const InitialDatum& datum() const { return datum_; }
    const ForcingF& forcing() const { return forcing_; }
    MomentState initial_moments() const { return forcing_.initial; }

    double operator()(double x, double t) const {
        if (!(x >= 0.0) || !(t >= 0.0)) throw InvalidInput("evaluate_solution: x and t must be nonnegative");
        const double a = params_.a, r = params_.r;
        const double xi = x - r * t;
        const double pre = std::exp(0.5 * a * t * (r * t - 2.0 * x));
        if (t == 0.0) return datum_.value(x);
        if (xi >= 0.0) {
            const double J0 = datum_.tail0(xi);
            const double J1 = datum_.tail1(xi) - xi * J0;
            return pre * (datum_.value(xi) + a * t * (2.0 * J0 + a * t * J1));
        }
        const auto M = forcing_.initial;
        const auto [P, dP] = psi_antiderivatives(forcing_, xi);
        const double psi = boundary_extension_psi(forcing_, xi);
        const double from_data = a * t * (2.0 + a * r * t * t - a * t * x) * M.M0 + a * a * t * t * M.M1;
        const double from_psi = psi + a * t * (-2.0 * dP + a * t * P);
        return pre * (from_data + from_psi);
    }

    /// Samples u(·, t) on the given nodes.
    GridFunction snapshot(std::vector<double> nodes, double t, double m = 2.0) const {
        std::vector<double> v(nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i) v[i] = (*this)(nodes[i], t);
        return GridFunction(std::move(nodes), std::move(v), m);
    }

    /// ∫_lo^hi x^k u(x, t) dx by adaptive quadrature, split at the characteristic x = rt.
    double moment(int k, double t, double x_hi, double lo = 0.0) const {
        const double kink = params_.r * t;
        auto f = [&](double x) { return std::pow(x, k) * (*this)(x, t); };
        double s = 0.0;
        if (kink > lo && kink < x_hi) {
            s += quad::integral(f, lo, kink, 1e-12);
            s += quad::integral(f, kink, x_hi, 1e-12);
        } else {
            s += quad::integral(f, lo, x_hi, 1e-12);
        }
        return s;
    }

private:
    BinaryModelParams params_;
    InitialDatum datum_;
    ForcingF forcing_;
};

inline double evaluate_solution(const BinaryModelParams& params, const GridFunction& u0, double x, double t) {
    return ClosedFormSolution(params, grid_datum(u0))(x, t);
}

// ---------------------------------------------------------------------------
// Tail bound
// ---------------------------------------------------------------------------

struct TailBound {
    double measured = 0.0;
    double bound = 0.0;
    double constant = 0.0;
};

/// ‖χ_{[rt, ∞)} u(·, t)‖_m.
inline double tail_norm(const ClosedFormSolution& sol, double m, double t, double x_hi) {
    const double lo = sol.params().r * t;
    if (lo >= x_hi) return 0.0;
    return quad::integral([&](double x) { return xm_weight(x, m) * std::abs(sol(x, t)); }, lo, x_hi, 1e-13);
}

/**
 * Measured tail norm at t against c t^{m+1} e^{−art²/2} ‖u0‖_m, with c fixed by
 * equality at the calibration time.
 */
inline TailBound tail_bound_check(const ClosedFormSolution& sol, double m, double t, double calibration_time = 2.0,
                                  double x_hi = 50.0) {
    if (!(m > 1.0)) throw InvalidInput("tail_bound_check: m must exceed 1");
    if (!(t > 0.0) || !(calibration_time > 0.0)) throw InvalidInput("tail_bound_check: times must be positive");
    const auto& p = sol.params();
    const double u0_norm = quad::integral(
        [&](double x) { return xm_weight(x, m) * std::abs(sol.datum().value(x)); }, 0.0, x_hi, 1e-13);
    auto shape = [&](double s) { return std::pow(s, m + 1.0) * std::exp(-0.5 * p.a * p.r * s * s) * u0_norm; };
    TailBound out;
    out.measured = tail_norm(sol, m, t, x_hi);
    if (u0_norm == 0.0) return out;
    out.constant = tail_norm(sol, m, calibration_time, x_hi) / shape(calibration_time);
    out.bound = out.constant * shape(t);
    return out;
}

inline TailBound tail_bound_check(const BinaryModelParams& params, const GridFunction& u0, double m, double t) {
    return tail_bound_check(ClosedFormSolution(params, grid_datum(u0)), m, t, 2.0, u0.nodes.back() + params.r * t);
}

// ---------------------------------------------------------------------------
// Perron eigenpair
// ---------------------------------------------------------------------------

/// v0(x) = κ e^{−(ax+s0)²/(2ar)} ((ax+s0)²/(ar) − 1), κ = (a/λ+) e^{λ+²/(2ar)}, ∫v0 = 1.
struct RightEigenfunction {
    BinaryModelParams params;
    double s0 = 0.0;

    double operator()(double x) const {
        const double a = params.a, r = params.r;
        const double z = a * x + s0;
        // κ e^{−z²/2ar} folded into one exponent
        return (a / s0) * std::exp(-x * (a * x + 2.0 * s0) / (2.0 * r)) * (z * z / (a * r) - 1.0);
    }

    /// ∫_x^∞ v0 = (ax + s0)/s0 · e^{−x(ax + 2 s0)/(2r)}.
    double upper_integral(double x) const {
        const double a = params.a, r = params.r;
        return (a * x + s0) / s0 * std::exp(-x * (a * x + 2.0 * s0) / (2.0 * r));
    }
};

/// w0(x) = σ(α1 x + λ+), σ = 1/(λ+ − λ−).
struct LeftEigenfunction {
    BinaryModelParams params;
    double s0 = 0.0;
    double sigma = 0.0;

    double operator()(double x) const { return sigma * (params.alpha1() * x + s0); }
};

inline RightEigenfunction right_eigenfunction(const BinaryModelParams& p) {
    p.validate();
    if (!(p.a > 0.0)) throw DegenerateModel("right eigenpair requires a > 0");
    return {p, lambda_pm(p).first};
}

inline LeftEigenfunction left_eigenfunction(const BinaryModelParams& p) {
    p.validate();
    if (!(p.a > 0.0)) throw DegenerateModel("left eigenpair requires a > 0");
    const auto [lp, lm] = lambda_pm(p);
    return {p, lp, 1.0 / (lp - lm)};
}

inline std::pair<double, GridFunction> right_eigenpair_cf(const BinaryModelParams& p, std::vector<double> nodes,
                                                          double m = 2.0) {
    const auto v = right_eigenfunction(p);
    return {v.s0, GridFunction::sample(std::move(nodes), v, m)};
}

inline std::pair<double, GridFunction> left_eigenpair_cf(const BinaryModelParams& p, std::vector<double> nodes,
                                                         double m = 2.0) {
    const auto w = left_eigenfunction(p);
    return {w.s0, GridFunction::sample(std::move(nodes), w, m)};
}

/// ⟨w0, u0⟩ from initial moments: λ+M0/(λ+ − λ−) + λ+λ−M1/(r(λ− − λ+)).
inline double projection_coefficient(const BinaryModelParams& p, const MomentState& m0) {
    const auto [lp, lm] = lambda_pm(p);
    return lp * m0.M0 / (lp - lm) + lp * lm * m0.M1 / (p.r * (lm - lp));
}

/// ⟨w0, u0⟩ v0 on the nodes of u0.
inline GridFunction asymptotic_profile(const BinaryModelParams& p, const GridFunction& u0) {
    const auto d = grid_datum(u0);
    const double c = projection_coefficient(p, d.moments());
    const auto v = right_eigenfunction(p);
    return GridFunction::sample(u0.nodes, [&](double x) { return c * v(x); }, u0.m);
}

}  // namespace gfrag::closed_form
