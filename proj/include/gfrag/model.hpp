#pragma once

/**
 * @file model.hpp
 * @brief Growth–fragmentation model coefficients and kernel functionals.
 *
 * A model is the tuple (r, a, b, β) of growth rate, fragmentation rate,
 * daughter distribution and renewal weight, together with the weight
 * exponent m of the state space X_m.
 */

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gfrag/errors.hpp"
#include "gfrag/grid.hpp"
#include "gfrag/quadrature.hpp"
#include "gfrag/support.hpp"

namespace gfrag {

// ---------------------------------------------------------------------------
// Coefficients
// ---------------------------------------------------------------------------

struct Constant {
    double c = 0.0;
};
/// c0 + c1·x
struct Linear {
    double c0 = 0.0;
    double c1 = 0.0;
};
/// c0·(1 + x^p)
struct Power {
    double c0 = 0.0;
    double p = 0.0;
};
/// Piecewise-linear through (nodes, values), held constant outside the node range.
struct Tabulated {
    std::vector<double> nodes;
    std::vector<double> values;
};

using CoefficientSpec = std::variant<Constant, Linear, Power, Tabulated>;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline double evaluate(const CoefficientSpec& spec, double x) {
    return std::visit(overloaded{
                          [](const Constant& s) { return s.c; },
                          [x](const Linear& s) { return s.c0 + s.c1 * x; },
                          [x](const Power& s) { return s.c0 * (1.0 + std::pow(x, s.p)); },
                          [x](const Tabulated& s) {
                              if (x <= s.nodes.front()) return s.values.front();
                              if (x >= s.nodes.back()) return s.values.back();
                              auto it = std::upper_bound(s.nodes.begin(), s.nodes.end(), x);
                              const std::size_t j = static_cast<std::size_t>(it - s.nodes.begin());
                              const double t = (x - s.nodes[j - 1]) / (s.nodes[j] - s.nodes[j - 1]);
                              return (1.0 - t) * s.values[j - 1] + t * s.values[j];
                          },
                      },
                      spec);
}

inline void validate(const CoefficientSpec& spec, const std::string& name) {
    std::visit(overloaded{
                   [&](const Constant& s) {
                       if (!(s.c >= 0.0)) throw InvalidModel(name + ": constant must be nonnegative");
                   },
                   [&](const Linear& s) {
                       if (!(s.c0 >= 0.0 && s.c1 >= 0.0)) throw InvalidModel(name + ": linear coefficients must be nonnegative");
                   },
                   [&](const Power& s) {
                       if (!(s.c0 >= 0.0 && s.p >= 0.0)) throw InvalidModel(name + ": power coefficients must be nonnegative");
                   },
                   [&](const Tabulated& s) {
                       if (s.nodes.empty() || s.nodes.size() != s.values.size())
                           throw InvalidModel(name + ": tabulated nodes/values mismatch");
                       for (std::size_t i = 0; i < s.nodes.size(); ++i) {
                           if (!(s.nodes[i] > 0.0)) throw InvalidModel(name + ": tabulated nodes must be positive");
                           if (i > 0 && !(s.nodes[i] > s.nodes[i - 1]))
                               throw InvalidModel(name + ": tabulated nodes must be strictly increasing");
                           if (!(s.values[i] >= 0.0)) throw InvalidModel(name + ": tabulated values must be nonnegative");
                       }
                   },
               },
               spec);
}

inline CoefficientSpec scaled(const CoefficientSpec& spec, double factor) {
    return std::visit(overloaded{
                          [&](const Constant& s) -> CoefficientSpec { return Constant{s.c * factor}; },
                          [&](const Linear& s) -> CoefficientSpec { return Linear{s.c0 * factor, s.c1 * factor}; },
                          [&](const Power& s) -> CoefficientSpec { return Power{s.c0 * factor, s.p}; },
                          [&](Tabulated s) -> CoefficientSpec {
                              for (auto& v : s.values) v *= factor;
                              return s;
                          },
                      },
                      spec);
}

inline bool is_identically_zero(const CoefficientSpec& spec) {
    return std::visit(overloaded{
                          [](const Constant& s) { return s.c == 0.0; },
                          [](const Linear& s) { return s.c0 == 0.0 && s.c1 == 0.0; },
                          [](const Power& s) { return s.c0 == 0.0; },
                          [](const Tabulated& s) {
                              return std::all_of(s.values.begin(), s.values.end(), [](double v) { return v == 0.0; });
                          },
                      },
                      spec);
}

/// Polynomial growth exponent: spec(x) = O(x^k) and no better.
inline double growth_exponent(const CoefficientSpec& spec) {
    return std::visit(overloaded{
                          [](const Constant&) { return 0.0; },
                          [](const Linear& s) { return s.c1 > 0.0 ? 1.0 : 0.0; },
                          [](const Power& s) { return s.c0 > 0.0 ? s.p : 0.0; },
                          [](const Tabulated&) { return 0.0; },
                      },
                      spec);
}

/// Constants (c, k) with spec(x) <= c·(1 + x^k): r0 for the growth rate, a0 and p for the fragmentation rate.
struct PolynomialBound {
    double constant = 0.0;
    double exponent = 0.0;
};

inline PolynomialBound polynomial_bound(const CoefficientSpec& spec) {
    return std::visit(overloaded{
                          [](const Constant& s) { return PolynomialBound{s.c / 2.0, 0.0}; },
                          [](const Linear& s) {
                              if (s.c1 > 0.0) return PolynomialBound{std::max(s.c0, s.c1), 1.0};
                              return PolynomialBound{s.c0 / 2.0, 0.0};
                          },
                          [](const Power& s) { return PolynomialBound{s.c0, s.p}; },
                          [](const Tabulated& s) {
                              return PolynomialBound{*std::max_element(s.values.begin(), s.values.end()) / 2.0, 0.0};
                          },
                      },
                      spec);
}

/// sup_x r(x)/(1 + x): the constant r0 of the linear growth bound r <= r0(1 + x).
inline double linear_growth_constant(const CoefficientSpec& r) {
    return std::visit(overloaded{
                          [](const Constant& s) { return s.c; },
                          [](const Linear& s) { return std::max(s.c0, s.c1); },
                          [](const Power& s) {
                              if (s.p > 1.0) throw InvalidModel("r grows faster than linearly");
                              if (s.p == 1.0 || s.p == 0.0) return s.c0 * (s.p == 0.0 ? 2.0 : 1.0);
                              // (1 + x^p)/(1 + x) peaks at the root of p x^{p-1}(1+x) = 1 + x^p
                              auto [x, v] = quad::maximize(
                                  [&](double t) { return (1.0 + std::pow(t, s.p)) / (1.0 + t); }, 0.0, 1.0);
                              return s.c0 * std::max(1.0, v);
                          },
                          [](const Tabulated& s) {
                              double best = s.values.front();
                              for (std::size_t i = 0; i < s.nodes.size(); ++i)
                                  best = std::max(best, s.values[i] / (1.0 + s.nodes[i]));
                              return best;
                          },
                      },
                      r);
}

/// sup supp of a coefficient (+inf when it does not vanish at infinity).
inline double support_sup(const CoefficientSpec& spec) {
    if (is_identically_zero(spec)) return 0.0;
    if (const auto* t = std::get_if<Tabulated>(&spec)) {
        if (t->values.back() > 0.0) return infinity;
        for (std::size_t i = t->values.size(); i-- > 0;)
            if (t->values[i] > 0.0) return t->nodes[std::min(i + 1, t->nodes.size() - 1)];
        return 0.0;
    }
    return infinity;
}

// ---------------------------------------------------------------------------
// Fragmentation kernels
// ---------------------------------------------------------------------------

/// b(x, y) = 2/y on x < y.
struct UniformBinary {};
/// b(x, y) = (ν + 2) x^ν / y^{ν+1}, ν > −1.
struct PowerLaw {
    double nu = 0.0;
};
/// Two daughters at ε(y)·y and (1 − ε(y))·y with ε(y) = min(cap, scale·y^{−power}).
struct ShrinkingBinary {
    double eps_cap = 0.5;
    double eps_scale = 1.0;
    double eps_power = 1.0;

    double eps(double y) const { return std::min(eps_cap, eps_scale * std::pow(y, -eps_power)); }
};
/// b(x, y) = h(x/y)/y with h piecewise linear on the ratio grid, zero outside it.
struct TabulatedKernel {
    std::vector<double> ratios;
    std::vector<double> densities;
    double support_floor = 1e-12;

    double density(double s) const {
        if (s < ratios.front() || s > ratios.back()) return 0.0;
        auto it = std::upper_bound(ratios.begin(), ratios.end(), s);
        if (it == ratios.end()) return densities.back();
        const std::size_t j = static_cast<std::size_t>(it - ratios.begin());
        const double t = (s - ratios[j - 1]) / (ratios[j] - ratios[j - 1]);
        return (1.0 - t) * densities[j - 1] + t * densities[j];
    }

    /// ∫_0^1 s^m h(s) ds, exact per segment up to quadrature tolerance.
    double ratio_moment(double m) const {
        double sum = 0.0;
        for (std::size_t k = 1; k < ratios.size(); ++k) {
            const double s0 = ratios[k - 1], s1 = ratios[k];
            const double h0 = densities[k - 1], h1 = densities[k];
            auto f = [&](double s) { return std::pow(s, m) * (h0 + (h1 - h0) * (s - s0) / (s1 - s0)); };
            sum += quad::integral(f, s0, s1, 1e-14);
        }
        return sum;
    }

    /// Smallest ratio at which the density exceeds the support floor.
    double inf_support_ratio() const {
        for (std::size_t k = 0; k < ratios.size(); ++k) {
            if (densities[k] > support_floor) {
                if (k == 0) return ratios[0];
                // linear segment crosses the floor inside (ratios[k-1], ratios[k])
                const double h0 = densities[k - 1], h1 = densities[k];
                const double t = (support_floor - h0) / (h1 - h0);
                return ratios[k - 1] + std::clamp(t, 0.0, 1.0) * (ratios[k] - ratios[k - 1]);
            }
        }
        return 1.0;
    }
};

using KernelSpec = std::variant<UniformBinary, PowerLaw, ShrinkingBinary, TabulatedKernel>;

inline void validate(const KernelSpec& kernel) {
    std::visit(overloaded{
                   [](const UniformBinary&) {},
                   [](const PowerLaw& k) {
                       if (!(k.nu > -1.0)) throw InvalidModel("power-law kernel needs nu > -1");
                   },
                   [](const ShrinkingBinary& k) {
                       if (!(k.eps_cap > 0.0 && k.eps_cap <= 0.5)) throw InvalidModel("shrinking kernel needs 0 < eps_cap <= 1/2");
                       if (!(k.eps_scale > 0.0) || !(k.eps_power >= 0.0))
                           throw InvalidModel("shrinking kernel needs eps_scale > 0 and eps_power >= 0");
                   },
                   [](const TabulatedKernel& k) {
                       if (k.ratios.size() < 2 || k.ratios.size() != k.densities.size())
                           throw InvalidModel("tabulated kernel: ratios/densities mismatch");
                       for (std::size_t i = 0; i < k.ratios.size(); ++i) {
                           if (k.ratios[i] < 0.0 || k.ratios[i] > 1.0)
                               throw InvalidModel("tabulated kernel: ratios must lie in [0, 1]");
                           if (i > 0 && !(k.ratios[i] > k.ratios[i - 1]))
                               throw InvalidModel("tabulated kernel: ratios must be strictly increasing");
                           if (k.densities[i] < 0.0) throw InvalidModel("tabulated kernel: densities must be nonnegative");
                       }
                   },
               },
               kernel);
}

inline bool is_atomic(const KernelSpec& kernel) { return std::holds_alternative<ShrinkingBinary>(kernel); }

/// Pointwise density b(x, y); zero for x > y. Not available for atomic kernels.
inline double kernel_density(const KernelSpec& kernel, double x, double y) {
    if (x > y || y <= 0.0) return 0.0;
    return std::visit(overloaded{
                          [&](const UniformBinary&) { return 2.0 / y; },
                          [&](const PowerLaw& k) { return (k.nu + 2.0) * std::pow(x, k.nu) / std::pow(y, k.nu + 1.0); },
                          [&](const ShrinkingBinary&) -> double {
                              throw InvalidInput("shrinking binary kernel is atomic and has no pointwise density");
                          },
                          [&](const TabulatedKernel& k) { return k.density(x / y) / y; },
                      },
                      kernel);
}

/// Product form b(x, y) = g(x)·h(y) for kernels that admit one.
struct SeparableKernel {
    std::function<double(double)> daughter;  // g
    std::function<double(double)> parent;    // h
};

inline std::optional<SeparableKernel> separable_form(const KernelSpec& kernel) {
    if (std::holds_alternative<UniformBinary>(kernel))
        return SeparableKernel{[](double) { return 2.0; }, [](double y) { return 1.0 / y; }};
    if (const auto* k = std::get_if<PowerLaw>(&kernel)) {
        const double nu = k->nu;
        return SeparableKernel{[nu](double x) { return (nu + 2.0) * std::pow(x, nu); },
                               [nu](double y) { return std::pow(y, -(nu + 1.0)); }};
    }
    return std::nullopt;
}

/// Daughter atoms (position, multiplicity) of an atomic kernel for parent size y.
inline std::vector<std::pair<double, double>> kernel_atoms(const KernelSpec& kernel, double y) {
    const auto* k = std::get_if<ShrinkingBinary>(&kernel);
    if (!k) throw InvalidInput("kernel_atoms: kernel has a density");
    const double e = k->eps(y);
    return {{e * y, 1.0}, {(1.0 - e) * y, 1.0}};
}

/// n_m(y) = ∫_0^y x^m b(x, y) dx.
inline double kernel_moment(const KernelSpec& kernel, double m, double y) {
    if (!(y > 0.0)) throw InvalidInput("kernel_moment: y must be positive");
    return std::visit(overloaded{
                          [&](const UniformBinary&) { return 2.0 * std::pow(y, m) / (m + 1.0); },
                          [&](const PowerLaw& k) { return (k.nu + 2.0) * std::pow(y, m) / (k.nu + m + 1.0); },
                          [&](const ShrinkingBinary& k) {
                              const double e = k.eps(y);
                              return std::pow(e * y, m) + std::pow((1.0 - e) * y, m);
                          },
                          [&](const TabulatedKernel& k) { return std::pow(y, m) * k.ratio_moment(m); },
                      },
                      kernel);
}

/// N_m(y) = y^m − n_m(y).
inline double kernel_defect(const KernelSpec& kernel, double m, double y) {
    return std::pow(y, m) - kernel_moment(kernel, m, y);
}

/// Lower envelope 𝔟(y) = inf supp b(·, y) for y on the fragmenting set.
inline double kernel_lower_envelope(const KernelSpec& kernel, double y) {
    return std::visit(overloaded{
                          [](const UniformBinary&) { return 0.0; },
                          [](const PowerLaw&) { return 0.0; },
                          [y](const ShrinkingBinary& k) { return k.eps(y) * y; },
                          [y](const TabulatedKernel& k) { return k.inf_support_ratio() * y; },
                      },
                      kernel);
}

// ---------------------------------------------------------------------------
// Model definition
// ---------------------------------------------------------------------------

/// Which boundary condition the renewal weight β refers to.
enum class BoundaryConvention {
    flux,   ///< lim_{x→0} r(x)u(x) = ⟨β, u⟩
    value,  ///< u(0) = ⟨β, u⟩, i.e. flux weight r(0)·β
};

struct ModelDefinition {
    CoefficientSpec r = Constant{1.0};
    CoefficientSpec a = Linear{0.0, 1.0};
    KernelSpec kernel = UniformBinary{};
    CoefficientSpec beta = Constant{0.0};
    double m = 2.0;
    BoundaryConvention bc_convention = BoundaryConvention::flux;
    double x_max = 50.0;
    std::optional<SupportModel> support;

    double r_at(double x) const { return evaluate(r, x); }
    double a_at(double x) const { return evaluate(a, x); }
    double beta_at(double x) const { return evaluate(beta, x); }

    /// Renewal weight in the flux convention.
    CoefficientSpec beta_flux() const {
        return bc_convention == BoundaryConvention::value ? scaled(beta, r_at(0.0)) : beta;
    }
    double beta_flux_at(double x) const {
        return bc_convention == BoundaryConvention::value ? r_at(0.0) * beta_at(x) : beta_at(x);
    }

    void validate() const {
        gfrag::validate(r, "r");
        gfrag::validate(a, "a");
        gfrag::validate(beta, "beta");
        gfrag::validate(kernel);
        if (!(m > 1.0)) throw InvalidModel("weight exponent m must exceed 1");
        if (!(x_max > 0.0)) throw InvalidModel("x_max must be positive");
        if (support) support->validate();
    }
};

/// Rejects models whose growth rate is not strictly positive on [0, x_max].
inline void require_positive_growth(const ModelDefinition& model) {
    const int samples = 2000;
    for (int i = 0; i <= samples; ++i) {
        const double x = model.x_max * static_cast<double>(i) / samples;
        const double rx = model.r_at(x);
        if (!(rx > 0.0)) {
            std::ostringstream os;
            os << "growth rate r must be positive; r(" << x << ") = " << rx;
            throw InvalidModel(os.str());
        }
    }
}

// ---------------------------------------------------------------------------
// R and Q
// ---------------------------------------------------------------------------

/// R(x) = ∫_0^x ds/r(s), Q(x) = ∫_0^x a(s)/r(s) ds.
struct RQFunctions {
    std::function<double(double)> R;
    std::function<double(double)> Q;
    double M_Q = infinity;
    bool analytic = false;
};

namespace detail {

inline std::optional<std::pair<std::function<double(double)>, std::function<double(double)>>> analytic_rq(
    const CoefficientSpec& r, const CoefficientSpec& a) {
    using Fn = std::function<double(double)>;
    // q(x) = ∫ a / r for a given primitive L of 1/r
    if (const auto* rc = std::get_if<Constant>(&r)) {
        const double c = rc->c;
        Fn R = [c](double x) { return x / c; };
        if (const auto* ac = std::get_if<Constant>(&a)) {
            const double d = ac->c;
            return std::pair{R, Fn([c, d](double x) { return d * x / c; })};
        }
        if (const auto* al = std::get_if<Linear>(&a)) {
            const double d0 = al->c0, d1 = al->c1;
            return std::pair{R, Fn([c, d0, d1](double x) { return (d0 * x + 0.5 * d1 * x * x) / c; })};
        }
        if (const auto* ap = std::get_if<Power>(&a)) {
            const double d0 = ap->c0, p = ap->p;
            return std::pair{R, Fn([c, d0, p](double x) { return d0 * (x + std::pow(x, p + 1.0) / (p + 1.0)) / c; })};
        }
        return std::nullopt;
    }
    if (const auto* rl = std::get_if<Linear>(&r)) {
        const double c0 = rl->c0, c1 = rl->c1;
        if (c1 == 0.0) return analytic_rq(Constant{c0}, a);
        Fn L = [c0, c1](double x) { return std::log1p(c1 * x / c0) / c1; };
        if (const auto* ac = std::get_if<Constant>(&a)) {
            const double d = ac->c;
            return std::pair{L, Fn([L, d](double x) { return d * L(x); })};
        }
        if (const auto* al = std::get_if<Linear>(&a)) {
            const double d0 = al->c0, d1 = al->c1;
            return std::pair{L, Fn([L, c0, c1, d0, d1](double x) { return d1 / c1 * x + (d0 - d1 * c0 / c1) * L(x); })};
        }
        return std::nullopt;
    }
    return std::nullopt;
}

inline double limit_of_Q(const ModelDefinition& model) {
    if (is_identically_zero(model.a)) return 0.0;
    if (const auto* t = std::get_if<Tabulated>(&model.a); t && t->values.back() == 0.0) {
        const double end = t->nodes.back();
        return quad::integral([&](double s) { return model.a_at(s) / model.r_at(s); }, 0.0, end, 1e-12);
    }
    return infinity;
}

}  // namespace detail

inline RQFunctions compute_RQ(const ModelDefinition& model, double abs_tol = 1e-10) {
    require_positive_growth(model);
    RQFunctions out;
    out.M_Q = detail::limit_of_Q(model);
    if (auto an = detail::analytic_rq(model.r, model.a)) {
        out.R = std::move(an->first);
        out.Q = std::move(an->second);
        out.analytic = true;
        return out;
    }
    auto r = model.r;
    auto a = model.a;
    out.R = [r, abs_tol](double x) {
        return quad::integral([&](double s) { return 1.0 / evaluate(r, s); }, 0.0, x, abs_tol);
    };
    out.Q = [r, a, abs_tol](double x) {
        return quad::integral([&](double s) { return evaluate(a, s) / evaluate(r, s); }, 0.0, x, abs_tol);
    };
    return out;
}

/// R and Q on a sorted node set, cumulatively for non-analytic models.
inline std::pair<std::vector<double>, std::vector<double>> tabulate_RQ(const ModelDefinition& model,
                                                                       const RQFunctions& rq,
                                                                       std::span<const double> nodes) {
    std::vector<double> R(nodes.size()), Q(nodes.size());
    if (rq.analytic) {
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            R[i] = rq.R(nodes[i]);
            Q[i] = rq.Q(nodes[i]);
        }
        return {R, Q};
    }
    double prev = 0.0, accR = 0.0, accQ = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        accR += quad::integral([&](double s) { return 1.0 / model.r_at(s); }, prev, nodes[i], 1e-13);
        accQ += quad::integral([&](double s) { return model.a_at(s) / model.r_at(s); }, prev, nodes[i], 1e-13);
        R[i] = accR;
        Q[i] = accQ;
        prev = nodes[i];
    }
    return {R, Q};
}

// ---------------------------------------------------------------------------
// Dual norm of β
// ---------------------------------------------------------------------------

/// ‖β‖*_m = sup_x β(x)/(1 + x^m).
inline double dual_norm_beta(const CoefficientSpec& beta, double m) {
    if (!(m > 1.0)) throw InvalidInput("dual_norm_beta: m must exceed 1");
    if (is_identically_zero(beta)) return 0.0;
    const double k = growth_exponent(beta);
    if (k > m) throw Diverges("dual_norm_beta: beta grows faster than 1 + x^m");

    if (const auto* l = std::get_if<Linear>(&beta)) {
        const double c0 = l->c0, c1 = l->c1;
        if (c1 == 0.0) return c0;
        double xs = 0.0;
        if (m == 2.0) {
            // c1 − 2 c0 x − c1 x² = 0
            xs = (std::hypot(c0, c1) - c0) / c1;
        } else {
            // stationarity g(x) = c1 − m c0 x^{m−1} − (m−1) c1 x^m is decreasing on (0, ∞)
            auto g = [&](double x) { return c1 - m * c0 * std::pow(x, m - 1.0) - (m - 1.0) * c1 * std::pow(x, m); };
            double lo = 0.0, hi = 1.0;
            while (g(hi) > 0.0) hi *= 2.0;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                (g(mid) > 0.0 ? lo : hi) = mid;
            }
            xs = 0.5 * (lo + hi);
        }
        return std::max(c0, (c0 + c1 * xs) / xm_weight(xs, m));
    }

    auto ratio = [&](double x) { return evaluate(beta, x) / xm_weight(x, m); };
    double limit = 0.0;
    if (const auto* p = std::get_if<Power>(&beta); p && p->p == m) limit = p->c0;

    double x_hi = 1e3;
    if (const auto* t = std::get_if<Tabulated>(&beta)) x_hi = std::max(x_hi, 10.0 * t->nodes.back());
    // coarse scan on a log/linear mix, then Brent around the best sample
    std::vector<double> xs{0.0};
    for (int i = 0; i <= 400; ++i) xs.push_back(1e-4 * std::pow(x_hi / 1e-4, i / 400.0));
    if (const auto* t = std::get_if<Tabulated>(&beta)) xs.insert(xs.end(), t->nodes.begin(), t->nodes.end());
    std::sort(xs.begin(), xs.end());
    std::size_t best = 0;
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (ratio(xs[i]) > ratio(xs[best])) best = i;
    double value = ratio(xs[best]);
    const double lo = best > 0 ? xs[best - 1] : xs[0];
    const double hi = best + 1 < xs.size() ? xs[best + 1] : xs[best];
    if (hi > lo) value = std::max(value, quad::maximize(ratio, lo, hi).second);
    return std::max(value, limit);
}

// ---------------------------------------------------------------------------
// Derived growth constants
// ---------------------------------------------------------------------------

/// ω_{r,m} = 2 m r0.
inline double omega_r(const ModelDefinition& model) { return 2.0 * model.m * linear_growth_constant(model.r); }

/// β_m = ‖β‖*_m of the flux-convention weight.
inline double beta_norm(const ModelDefinition& model) { return dual_norm_beta(model.beta_flux(), model.m); }

/// (b0, l) with n_0(y) <= b0 (1 + y^l) for the built-in kernels.
inline PolynomialBound daughter_count_bound(const KernelSpec& kernel) {
    return std::visit(overloaded{
                          [](const UniformBinary&) { return PolynomialBound{1.0, 0.0}; },
                          [](const PowerLaw& k) { return PolynomialBound{0.5 * (k.nu + 2.0) / (k.nu + 1.0), 0.0}; },
                          [](const ShrinkingBinary&) { return PolynomialBound{1.0, 0.0}; },
                          [](const TabulatedKernel& k) { return PolynomialBound{0.5 * k.ratio_moment(0.0), 0.0}; },
                      },
                      kernel);
}

/// Quasi-contractive growth bound ω_{β,m} = β_m + ω_{r,m} + 4 a0 b0.
inline double omega_beta(const ModelDefinition& model) {
    const auto ab = polynomial_bound(model.a);
    const auto nb = daughter_count_bound(model.kernel);
    return beta_norm(model) + omega_r(model) + 4.0 * ab.constant * nb.constant;
}

// ---------------------------------------------------------------------------
// Assumption validation
// ---------------------------------------------------------------------------

struct AssumptionCheck {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = true;
    std::string detail;
};

struct AssumptionReport {
    std::vector<AssumptionCheck> checks;

    bool pass() const {
        return std::all_of(checks.begin(), checks.end(), [](const AssumptionCheck& c) { return c.pass; });
    }

    const AssumptionCheck* find(const std::string& name) const {
        for (const auto& c : checks)
            if (c.name == name) return &c;
        return nullptr;
    }

    std::string to_text() const {
        std::ostringstream os;
        os.precision(10);
        for (const auto& c : checks) {
            os << c.name << ".value=" << c.value << '\n'
               << c.name << ".threshold=" << c.threshold << '\n'
               << c.name << ".pass=" << (c.pass ? "true" : "false") << '\n';
            if (!c.detail.empty()) os << c.name << ".detail=" << c.detail << '\n';
        }
        os << "overall.pass=" << (pass() ? "true" : "false") << '\n';
        return os.str();
    }
};

struct ValidationOptions {
    double y_horizon = 1e4;
    double liminf_threshold = 1e-3;
    double mass_tolerance = 1e-8;
    bool check_quasi_contractivity = false;
};

inline AssumptionReport validate_assumptions(const ModelDefinition& model, const ValidationOptions& opt = {}) {
    if (!(opt.y_horizon > 0.0)) throw InvalidInput("validate_assumptions: y_horizon must be positive");
    AssumptionReport rep;
    const double m = model.m;

    {
        double rmin = infinity;
        for (int i = 0; i <= 2000; ++i) rmin = std::min(rmin, model.r_at(model.x_max * i / 2000.0));
        rep.checks.push_back({"r_positive", rmin, 0.0, rmin > 0.0, "min of r over [0, x_max]"});
    }
    rep.checks.push_back({"m_exceeds_one", m, 1.0, m > 1.0, ""});

    std::vector<double> ys;
    for (int i = 0; i <= 200; ++i) ys.push_back(1e-3 * std::pow(opt.y_horizon / 1e-3, i / 200.0));
    double mass_res = 0.0;
    for (double y : ys) mass_res = std::max(mass_res, std::abs(kernel_moment(model.kernel, 1.0, y) - y) / y);
    rep.checks.push_back({"mass_conservation", mass_res, opt.mass_tolerance, mass_res <= opt.mass_tolerance,
                          "max |n1(y) - y|/y over sampled y"});

    // n0 <= b0 (1 + y^l): l from the log-log slope over the top decade
    {
        const double y1 = opt.y_horizon / 10.0, y2 = opt.y_horizon;
        const double n1 = kernel_moment(model.kernel, 0.0, y1), n2 = kernel_moment(model.kernel, 0.0, y2);
        double l = std::log(n2 / n1) / std::log(y2 / y1);
        if (!(l > 1e-9)) l = 0.0;
        double b0 = 0.0;
        for (double y : ys) b0 = std::max(b0, kernel_moment(model.kernel, 0.0, y) / xm_weight(y, l));
        const bool ok = std::isfinite(b0) && std::isfinite(l);
        rep.checks.push_back({"daughter_bound_b0", b0, 0.0, ok && b0 > 0.0, "fitted b0 in n0 <= b0(1+y^l)"});
        rep.checks.push_back({"daughter_bound_l", l, 0.0, ok, "fitted l in n0 <= b0(1+y^l)"});
        if (opt.check_quasi_contractivity) {
            const double p = polynomial_bound(model.a).exponent;
            const double need = l + p;
            const bool qc = need <= 1.0 ? m > 1.0 : m >= need;
            rep.checks.push_back({"quasi_contractivity", m, need, qc, "m versus l + p"});
        }
    }

    {
        std::vector<double> top;
        for (int i = 0; i <= 200; ++i) top.push_back(opt.y_horizon / 10.0 * std::pow(10.0, i / 200.0));
        double liminf = infinity, cm = 0.0;
        for (double y : top) {
            const double ym = std::pow(y, m);
            liminf = std::min(liminf, kernel_defect(model.kernel, m, y) / ym);
            cm = std::max(cm, kernel_moment(model.kernel, m, y) / ym);
        }
        rep.checks.push_back({"liminf_defect", liminf, opt.liminf_threshold, liminf > opt.liminf_threshold,
                              "min of N_m(y)/y^m over the top decade of the horizon"});
        rep.checks.push_back({"moment_contraction_cm", cm, 1.0, cm < 1.0, "max of n_m(y)/y^m over the top decade"});
    }
    return rep;
}

}  // namespace gfrag
