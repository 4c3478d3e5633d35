#pragma once

/**
 * @file resolvent.hpp
 * @brief Explicit resolvents of the transport part, the rank-one boundary
 *        correction E_λ, the fragmentation gain B and the Neumann series for
 *        the full generator.
 *
 * Every operator acts on node values of a GridFunction whose first node is
 * x = 0. The transport resolvent uses an exponentially fitted cumulative
 * integral, so e^{λR + Q} is never formed on its own.
 */

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gfrag/errors.hpp"
#include "gfrag/grid.hpp"
#include "gfrag/model.hpp"

namespace gfrag {

// ---------------------------------------------------------------------------
// Fragmentation gain
// ---------------------------------------------------------------------------

/// Quadrature used for the parent integral ∫_x^∞ · dy.
enum class GainRule {
    trapezoid,  ///< composite trapezoid on [x_i, x_N]
    cell,       ///< nodes are midpoints of equal cells: full weight h for j > i, h/2 for j = i
};

/**
 * (Bu)(x_i) = ∫_{x_i}^∞ a(y) b(x_i, y) u(y) dy on a fixed node set.
 *
 * Separable kernels run in O(N) with a running sum from the right; other
 * density kernels and atomic kernels are stored as a sparse matrix.
 */
class FragmentationGain {
public:
    FragmentationGain() = default;

    FragmentationGain(const ModelDefinition& model, std::vector<double> nodes, GainRule rule = GainRule::trapezoid)
        : nodes_(std::move(nodes)) {
        const std::size_t n = nodes_.size();
        if (n < 2) throw InvalidInput("fragmentation gain: need at least two nodes");
        quad_w_ = trapezoid_weights(nodes_);
        self_w_.assign(n, 0.0);
        full_w_.assign(n, 0.0);
        if (rule == GainRule::trapezoid) {
            for (std::size_t i = 0; i + 1 < n; ++i) self_w_[i] = 0.5 * (nodes_[i + 1] - nodes_[i]);
            full_w_ = quad_w_;
        } else {
            const double h = nodes_[1] - nodes_[0];
            for (std::size_t i = 0; i < n; ++i) {
                self_w_[i] = 0.5 * h;
                full_w_[i] = h;
            }
            quad_w_ = full_w_;
        }

        if (is_identically_zero(model.a)) {
            kind_ = Kind::none;
            return;
        }
        // y = 0 carries the limit of a(y)h(y); evaluated half a cell in
        const double y_floor = 0.5 * nodes_[1];
        std::vector<double> a(n);
        for (std::size_t j = 0; j < n; ++j) a[j] = model.a_at(nodes_[j]);

        if (auto sep = separable_form(model.kernel)) {
            kind_ = Kind::separable;
            daughter_.resize(n);
            parent_.resize(n);
            for (std::size_t j = 0; j < n; ++j) {
                const double y = nodes_[j] > 0.0 ? nodes_[j] : y_floor;
                parent_[j] = model.a_at(y) * sep->parent(y);
                double g = sep->daughter(nodes_[j]);
                if (!std::isfinite(g)) g = sep->daughter(y_floor);
                daughter_[j] = g;
            }
            return;
        }

        kind_ = Kind::sparse;
        if (is_atomic(model.kernel)) {
            for (std::size_t j = 0; j < n; ++j) {
                if (nodes_[j] <= 0.0 || a[j] == 0.0) continue;
                const double mass = a[j] * quad_w_[j];
                for (auto [pos, mult] : kernel_atoms(model.kernel, nodes_[j])) deposit(pos, mass * mult, j);
            }
        } else {
            for (std::size_t j = 0; j < n; ++j) {
                if (nodes_[j] <= 0.0 || a[j] == 0.0) continue;
                for (std::size_t i = 0; i <= j; ++i) {
                    const double w = (i == j) ? self_w_[j] : full_w_[j];
                    const double b = kernel_density(model.kernel, nodes_[i], nodes_[j]);
                    if (w * b != 0.0) entries_.push_back({i, j, w * a[j] * b});
                }
            }
        }
    }

    const std::vector<double>& nodes() const { return nodes_; }

    std::vector<double> apply(std::span<const double> u) const {
        check(u.size());
        const std::size_t n = nodes_.size();
        std::vector<double> out(n, 0.0);
        switch (kind_) {
        case Kind::none:
            break;
        case Kind::separable: {
            double tail = 0.0;  // Σ_{j>i} full_w_j a h u
            for (std::size_t k = n; k-- > 0;) {
                const double fk = parent_[k] * u[k];
                out[k] = daughter_[k] * (tail + self_w_[k] * fk);
                tail += full_w_[k] * fk;
            }
            break;
        }
        case Kind::sparse:
            for (const auto& e : entries_) out[e.row] += e.value * u[e.col];
            break;
        }
        return out;
    }

    std::vector<double> apply_transpose(std::span<const double> v) const {
        check(v.size());
        const std::size_t n = nodes_.size();
        std::vector<double> out(n, 0.0);
        switch (kind_) {
        case Kind::none:
            break;
        case Kind::separable: {
            double head = 0.0;  // Σ_{i<j} g_i v_i
            for (std::size_t k = 0; k < n; ++k) {
                const double gv = daughter_[k] * v[k];
                out[k] = parent_[k] * (self_w_[k] * gv + full_w_[k] * head);
                head += gv;
            }
            break;
        }
        case Kind::sparse:
            for (const auto& e : entries_) out[e.col] += e.value * v[e.row];
            break;
        }
        return out;
    }

private:
    enum class Kind { none, separable, sparse };
    struct Entry {
        std::size_t row;
        std::size_t col;
        double value;
    };

    void check(std::size_t size) const {
        if (size != nodes_.size()) throw InvalidInput("fragmentation gain: vector does not match the grid");
    }

    // cloud-in-cell split that keeps both the count and the first moment
    void deposit(double pos, double mass, std::size_t parent) {
        const std::size_t n = nodes_.size();
        if (pos <= nodes_.front()) {
            entries_.push_back({0, parent, mass / quad_w_[0]});
            return;
        }
        if (pos >= nodes_.back()) {
            entries_.push_back({n - 1, parent, mass / quad_w_[n - 1]});
            return;
        }
        auto it = std::upper_bound(nodes_.begin(), nodes_.end(), pos);
        const std::size_t k = static_cast<std::size_t>(it - nodes_.begin()) - 1;
        const double th = (pos - nodes_[k]) / (nodes_[k + 1] - nodes_[k]);
        entries_.push_back({k, parent, mass * (1.0 - th) / quad_w_[k]});
        entries_.push_back({k + 1, parent, mass * th / quad_w_[k + 1]});
    }

    Kind kind_ = Kind::none;
    std::vector<double> nodes_;
    std::vector<double> quad_w_;
    std::vector<double> self_w_;
    std::vector<double> full_w_;
    std::vector<double> daughter_;
    std::vector<double> parent_;
    std::vector<Entry> entries_;
};

inline GridFunction apply_fragmentation_gain(const ModelDefinition& model, const GridFunction& u,
                                             GainRule rule = GainRule::trapezoid) {
    FragmentationGain gain(model, u.nodes, rule);
    return GridFunction(u.nodes, gain.apply(u.values), u.m);
}

// ---------------------------------------------------------------------------
// Resolvent context
// ---------------------------------------------------------------------------

struct ResolventOptions {
    /// Reject λ outside the range in which the X_m norm bounds are proven.
    /// When off, only λ > 0 is required and the explicit formulas are used as is.
    bool enforce_range = true;
};

class ResolventContext {
public:
    ModelDefinition model;
    double lambda = 0.0;
    RQFunctions rq;
    GridFunction e_lambda;
    double beta_pairing = 0.0;  ///< ⟨β, e_λ⟩ under the grid quadrature
    double omega_r = 0.0;
    double omega_beta = 0.0;
    double beta_norm = 0.0;
    ResolventOptions options;

    ResolventContext(ModelDefinition m, double lam, std::vector<double> nodes, ResolventOptions opt = {})
        : model(std::move(m)), lambda(lam), options(opt) {
        model.validate();
        if (nodes.size() < 2) throw InvalidInput("resolvent: grid needs at least two nodes");
        if (nodes.front() != 0.0) throw InvalidInput("resolvent: grid must start at x = 0");
        rq = compute_RQ(model);
        omega_r = gfrag::omega_r(model);
        beta_norm = gfrag::beta_norm(model);
        omega_beta = gfrag::omega_beta(model);
        if (!std::isfinite(lambda)) throw OutOfRange("resolvent: lambda must be finite");
        if (opt.enforce_range && !(lambda > omega_r))
            throw OutOfRange("resolvent: lambda = " + std::to_string(lambda) +
                             " does not exceed omega_r = " + std::to_string(omega_r));
        if (!opt.enforce_range && !(lambda > 0.0)) throw OutOfRange("resolvent: lambda must be positive");

        const std::size_t n = nodes.size();
        auto [R, Q] = tabulate_RQ(model, rq, nodes);
        r_.resize(n);
        phi_.resize(n);
        std::vector<double> e(n);
        for (std::size_t i = 0; i < n; ++i) {
            r_[i] = model.r_at(nodes[i]);
            phi_[i] = lambda * R[i] + Q[i];
            e[i] = std::exp(-phi_[i]) / r_[i];
        }
        decay_.assign(n, 0.0);
        coef_prev_.assign(n, 0.0);
        coef_curr_.assign(n, 0.0);
        for (std::size_t i = 1; i < n; ++i) {
            const double h = nodes[i] - nodes[i - 1];
            const double d = phi_[i] - phi_[i - 1];
            decay_[i] = std::exp(-d);
            auto [A, B] = fitted_weights(d);
            coef_prev_[i] = h * A;
            coef_curr_[i] = h * B;
        }
        const auto w = trapezoid_weights(nodes);
        beta_w_.resize(n);
        for (std::size_t i = 0; i < n; ++i) beta_w_[i] = w[i] * model.beta_flux_at(nodes[i]);
        e_lambda = GridFunction(nodes, std::move(e), model.m);
        beta_pairing = 0.0;
        for (std::size_t i = 0; i < n; ++i) beta_pairing += beta_w_[i] * e_lambda.values[i];
        gain_ = FragmentationGain(model, nodes, GainRule::trapezoid);
    }

    const std::vector<double>& nodes() const { return e_lambda.nodes; }
    const FragmentationGain& gain() const { return gain_; }

    void require_grid(const GridFunction& f) const {
        if (f.nodes != e_lambda.nodes) throw InvalidInput("resolvent: grid function is not on the context grid");
    }

    void require_boundary_range() const {
        if (options.enforce_range && !(lambda > omega_r + beta_norm))
            throw OutOfRange("resolvent: lambda = " + std::to_string(lambda) + " does not exceed omega_r + beta_m = " +
                             std::to_string(omega_r + beta_norm));
        if (!(beta_pairing < 1.0)) throw OutOfRange("resolvent: <beta, e_lambda> >= 1");
    }

    // --- raw vector kernels --------------------------------------------------

    std::vector<double> z0(std::span<const double> f) const {
        const std::size_t n = r_.size();
        std::vector<double> u(n, 0.0);
        double I = 0.0;
        for (std::size_t i = 1; i < n; ++i) {
            I = decay_[i] * I + coef_prev_[i] * f[i - 1] + coef_curr_[i] * f[i];
            u[i] = I / r_[i];
        }
        return u;
    }

    std::vector<double> z0_transpose(std::span<const double> g) const {
        const std::size_t n = r_.size();
        std::vector<double> out(n, 0.0);
        double P = 0.0;
        for (std::size_t i = n; i-- > 1;) {
            P = g[i] / r_[i] + (i + 1 < n ? decay_[i + 1] * P : 0.0);
            out[i] += coef_curr_[i] * P;
            out[i - 1] += coef_prev_[i] * P;
        }
        return out;
    }

    std::vector<double> boundary(std::span<const double> f) const {
        double s = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) s += beta_w_[i] * f[i];
        const double c = s / (1.0 - beta_pairing);
        std::vector<double> out(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) out[i] = c * e_lambda.values[i];
        return out;
    }

    std::vector<double> boundary_transpose(std::span<const double> g) const {
        double s = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) s += e_lambda.values[i] * g[i];
        const double c = s / (1.0 - beta_pairing);
        std::vector<double> out(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) out[i] = c * beta_w_[i];
        return out;
    }

    std::vector<double> zbeta(std::span<const double> f) const {
        auto u = z0(f);
        const auto e = boundary(u);
        for (std::size_t i = 0; i < u.size(); ++i) u[i] += e[i];
        return u;
    }

    std::vector<double> zbeta_transpose(std::span<const double> g) const {
        std::vector<double> h(g.begin(), g.end());
        const auto e = boundary_transpose(g);
        for (std::size_t i = 0; i < h.size(); ++i) h[i] += e[i];
        return z0_transpose(h);
    }

private:
    // ∫_0^1 (1−t) e^{−d(1−t)} dt and ∫_0^1 t e^{−d(1−t)} dt
    static std::pair<double, double> fitted_weights(double d) {
        if (std::abs(d) < 1e-3) {
            const double d2 = d * d;
            return {0.5 - d / 3.0 + d2 / 8.0 - d2 * d / 30.0, 0.5 - d / 6.0 + d2 / 24.0 - d2 * d / 120.0};
        }
        const double em = std::exp(-d);
        return {(1.0 - em * (1.0 + d)) / (d * d), (d - 1.0 + em) / (d * d)};
    }

    std::vector<double> r_;
    std::vector<double> phi_;
    std::vector<double> decay_;
    std::vector<double> coef_prev_;
    std::vector<double> coef_curr_;
    std::vector<double> beta_w_;
    FragmentationGain gain_;
};

// ---------------------------------------------------------------------------
// Operators on grid functions
// ---------------------------------------------------------------------------

/// e^{−λR(x)−Q(x)}/r(x).
inline double e_lambda_fn(const ResolventContext& ctx, double x) {
    if (!(x >= 0.0)) throw InvalidInput("e_lambda_fn: x must be nonnegative");
    return std::exp(-ctx.lambda * ctx.rq.R(x) - ctx.rq.Q(x)) / ctx.model.r_at(x);
}

/// R(λ, Z_0) f.
inline GridFunction apply_resolvent_Z0(const ResolventContext& ctx, const GridFunction& f) {
    ctx.require_grid(f);
    return GridFunction(f.nodes, ctx.z0(f.values), f.m);
}

/// E_λ f = e_λ ⟨β, f⟩ / (1 − ⟨β, e_λ⟩).
inline GridFunction apply_E_lambda(const ResolventContext& ctx, const GridFunction& f) {
    ctx.require_grid(f);
    ctx.require_boundary_range();
    return GridFunction(f.nodes, ctx.boundary(f.values), f.m);
}

/// R(λ, Z_β) f = (I + E_λ) R(λ, Z_0) f.
inline GridFunction apply_resolvent_Zbeta(const ResolventContext& ctx, const GridFunction& f) {
    ctx.require_grid(f);
    ctx.require_boundary_range();
    return GridFunction(f.nodes, ctx.zbeta(f.values), f.m);
}

struct NeumannResult {
    GridFunction u;
    int terms = 0;
    double last_ratio = 0.0;
    bool converged = false;
};

struct NeumannOptions {
    int max_terms = 200;
    int burn_in = 5;
    bool transpose = false;
};

/**
 * R(λ, K) f = Σ_n (R(λ, Z_β) B)^n R(λ, Z_β) f.
 *
 * Summation stops once the X_m norm of a term drops below tol times the norm
 * of the partial sum, or after max_terms terms.
 */
inline NeumannResult neumann_resolvent(const ResolventContext& ctx, std::span<const double> f, double tol,
                                       const NeumannOptions& opt = {}) {
    ctx.require_boundary_range();
    if (!(tol > 0.0)) throw InvalidInput("apply_resolvent_K: tol must be positive");
    const auto& nodes = ctx.nodes();
    const double m = ctx.model.m;
    auto norm = [&](const std::vector<double>& v) { return xm_norm(GridFunction(nodes, v, m), m); };

    auto first = opt.transpose ? ctx.zbeta_transpose(f) : ctx.zbeta(f);
    std::vector<double> sum = first;
    std::vector<double> term = std::move(first);
    double term_norm = norm(term);
    double sum_norm = term_norm;
    NeumannResult res;
    res.terms = 1;
    if (term_norm == 0.0) {
        res.u = GridFunction(nodes, std::move(sum), m);
        res.converged = true;
        return res;
    }
    while (res.terms < opt.max_terms) {
        term = opt.transpose ? ctx.zbeta_transpose(ctx.gain().apply_transpose(term)) : ctx.zbeta(ctx.gain().apply(term));
        const double next_norm = norm(term);
        res.last_ratio = next_norm / term_norm;
        if (next_norm == 0.0) {
            res.converged = true;
            break;
        }
        ++res.terms;
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += term[i];
        sum_norm = norm(sum);
        if (next_norm < tol * sum_norm) {
            res.converged = true;
            break;
        }
        if (res.terms > opt.burn_in && res.last_ratio >= 1.0)
            throw LambdaTooSmall("apply_resolvent_K: Neumann series does not contract at lambda = " +
                                 std::to_string(ctx.lambda));
        term_norm = next_norm;
    }
    res.u = GridFunction(nodes, std::move(sum), m);
    return res;
}

inline GridFunction apply_resolvent_K(const ResolventContext& ctx, const GridFunction& f, double tol) {
    ctx.require_grid(f);
    return neumann_resolvent(ctx, f.values, tol).u;
}

/// Transpose of the discrete R(λ, K) with respect to the plain Euclidean pairing of node values.
inline GridFunction apply_resolvent_K_transpose(const ResolventContext& ctx, const GridFunction& g, double tol) {
    ctx.require_grid(g);
    NeumannOptions opt;
    opt.transpose = true;
    return neumann_resolvent(ctx, g.values, tol, opt).u;
}

/// Fixed-point defect ‖u − R(λ, Z_β)(f + B u)‖_m of a candidate resolvent value u.
inline double resolvent_K_defect(const ResolventContext& ctx, const GridFunction& f, const GridFunction& u) {
    ctx.require_grid(f);
    ctx.require_grid(u);
    auto bu = ctx.gain().apply(u.values);
    for (std::size_t i = 0; i < bu.size(); ++i) bu[i] += f.values[i];
    auto img = ctx.zbeta(bu);
    for (std::size_t i = 0; i < img.size(); ++i) img[i] = u.values[i] - img[i];
    return xm_norm(GridFunction(u.nodes, std::move(img), u.m), ctx.model.m);
}

}  // namespace gfrag
