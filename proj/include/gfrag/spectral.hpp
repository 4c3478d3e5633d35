#pragma once

/**
 * @file spectral.hpp
 * @brief Perron eigenpair by inverse iteration on R(λ, K), the rank-one
 *        eigenprojection, and asynchronous-exponential-growth diagnostics.
 */

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gfrag/closed_form.hpp"
#include "gfrag/errors.hpp"
#include "gfrag/grid.hpp"
#include "gfrag/model.hpp"
#include "gfrag/pde_solver.hpp"
#include "gfrag/resolvent.hpp"

namespace gfrag {

struct Eigenpair {
    double s0 = 0.0;
    GridFunction v;  ///< ∫v = 1
    GridFunction w;  ///< ⟨w, v⟩ = 1
    double residual = 0.0;
    double lambda = 0.0;
    int iterations = 0;
    std::vector<std::string> warnings;
};

struct EigenOptions {
    double x_max = 30.0;
    std::size_t n_cells = 2000;
    int max_iterations = 5000;
    double series_tol = 1e-13;
    double negativity_tol = 1e-8;
};

namespace detail {

inline double grid_integral(const std::vector<double>& w, const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += w[i] * v[i];
    return s;
}

// −(r v)' − a v + B v by second-order differences on the node grid
inline std::vector<double> apply_generator(const ModelDefinition& model, const FragmentationGain& gain,
                                           const GridFunction& v) {
    const auto& x = v.nodes;
    const std::size_t n = x.size();
    std::vector<double> rv(n);
    for (std::size_t i = 0; i < n; ++i) rv[i] = model.r_at(x[i]) * v.values[i];
    auto out = gain.apply(v.values);
    for (std::size_t i = 0; i < n; ++i) {
        double d = 0.0;
        if (i == 0) {
            const double h1 = x[1] - x[0], h2 = x[2] - x[1];
            d = (-(2.0 * h1 + h2) / (h1 * (h1 + h2))) * rv[0] + ((h1 + h2) / (h1 * h2)) * rv[1] -
                (h1 / (h2 * (h1 + h2))) * rv[2];
        } else if (i == n - 1) {
            const double h1 = x[n - 2] - x[n - 3], h2 = x[n - 1] - x[n - 2];
            d = (h2 / (h1 * (h1 + h2))) * rv[n - 3] - ((h1 + h2) / (h1 * h2)) * rv[n - 2] +
                ((2.0 * h2 + h1) / (h2 * (h1 + h2))) * rv[n - 1];
        } else {
            const double hl = x[i] - x[i - 1], hr = x[i + 1] - x[i];
            d = (-hr / (hl * (hl + hr))) * rv[i - 1] + ((hr - hl) / (hl * hr)) * rv[i] + (hl / (hr * (hl + hr))) * rv[i + 1];
        }
        out[i] += -d - model.a_at(x[i]) * v.values[i];
    }
    return out;
}

}  // namespace detail

/// λ used when no shift is given: ω_{r,m} + β_m + 1.
inline double default_lambda_shift(const ModelDefinition& model) { return omega_r(model) + beta_norm(model) + 1.0; }

/// ‖K_h v − s v‖_m / ‖v‖_m with K_h a direct finite-difference discretization.
inline double eigen_residual(const ModelDefinition& model, const GridFunction& v, double s) {
    FragmentationGain gain(model, v.nodes, GainRule::trapezoid);
    auto kv = detail::apply_generator(model, gain, v);
    for (std::size_t i = 0; i < kv.size(); ++i) kv[i] -= s * v.values[i];
    return xm_norm(GridFunction(v.nodes, std::move(kv), model.m), model.m) / xm_norm(v, model.m);
}

/**
 * Inverse iteration v ← R(λ, K) v / ∫R(λ, K) v from v = e^{−x}; then
 * s0 = λ − 1/μ with μ the converged ratio ∫R(λ, K)v / ∫v. The left vector
 * iterates the transposed discrete operator and is mapped back through the
 * quadrature weights so that ⟨w, f⟩ is the discrete dual pairing.
 */
inline Eigenpair perron_eigenpair(const ModelDefinition& model, double lambda_shift, double tol,
                                  const EigenOptions& opt = {}) {
    model.validate();
    if (!(tol > 0.0)) throw InvalidInput("perron_eigenpair: tol must be positive");
    if (is_identically_zero(model.beta) && is_identically_zero(model.a))
        throw ConvergenceError("perron_eigenpair: pure transport has no Perron eigenpair on a truncated domain");
    if (std::isnan(lambda_shift)) lambda_shift = default_lambda_shift(model);

    const auto nodes = uniform_nodes(opt.x_max, opt.n_cells);
    const ResolventContext ctx(model, lambda_shift, nodes);
    const auto qw = trapezoid_weights(nodes);
    const double m = model.m;

    Eigenpair pair;
    pair.lambda = lambda_shift;

    auto iterate = [&](std::vector<double> x, bool transpose, std::vector<double> norm_w, double& mu) {
        NeumannOptions nopt;
        nopt.transpose = transpose;
        double s = detail::grid_integral(norm_w, x);
        for (auto& xi : x) xi /= s;
        mu = 0.0;
        for (int it = 1; it <= opt.max_iterations; ++it) {
            auto res = neumann_resolvent(ctx, x, opt.series_tol, nopt);
            auto y = std::move(res.u.values);
            const double total = detail::grid_integral(norm_w, y);
            if (!(std::abs(total) > 0.0) || !std::isfinite(total))
                throw ConvergenceError("perron_eigenpair: iterate collapsed");
            const double mu_new = total;  // ∫x = 1
            for (auto& yi : y) yi /= total;
            double change = 0.0;
            for (std::size_t i = 0; i < y.size(); ++i) change += std::abs(norm_w[i]) * std::abs(y[i] - x[i]);
            x = std::move(y);
            const bool done = change < tol && std::abs(mu_new - mu) < tol * std::abs(mu_new);
            mu = mu_new;
            if (!transpose) pair.iterations = it;
            if (done) return x;
        }
        throw ConvergenceError("perron_eigenpair: no convergence within " + std::to_string(opt.max_iterations) +
                               " iterations");
    };

    std::vector<double> v0(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) v0[i] = std::exp(-nodes[i]);
    double mu = 0.0;
    auto v = iterate(v0, false, qw, mu);
    if (!(mu > 0.0)) throw ConvergenceError("perron_eigenpair: nonpositive Rayleigh quotient");
    pair.s0 = lambda_shift - 1.0 / mu;

    // left iteration on ℓ = Q w, normalized by Σℓ
    std::vector<double> l0(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) l0[i] = qw[i] * (1.0 + nodes[i]);
    std::vector<double> ones(nodes.size(), 1.0);
    double mu_left = 0.0;
    auto l = iterate(l0, true, ones, mu_left);
    if (std::abs(mu_left - mu) > 1e3 * tol * std::abs(mu) + 1e-8)
        pair.warnings.push_back("left and right Rayleigh quotients differ by " + std::to_string(std::abs(mu_left - mu)));
    std::vector<double> w(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) w[i] = l[i] / qw[i];
    double vw = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) vw += qw[i] * w[i] * v[i];
    for (auto& wi : w) wi /= vw;

    pair.v = GridFunction(nodes, std::move(v), m);
    pair.w = GridFunction(nodes, std::move(w), m);
    const double vmin = *std::min_element(pair.v.values.begin(), pair.v.values.end());
    const double wmin = *std::min_element(pair.w.values.begin(), pair.w.values.end());
    if (vmin < -opt.negativity_tol)
        pair.warnings.push_back("discretization: right eigenvector has negative entries down to " + std::to_string(vmin));
    if (wmin < -opt.negativity_tol)
        pair.warnings.push_back("discretization: left eigenvector has negative entries down to " + std::to_string(wmin));
    pair.residual = eigen_residual(model, pair.v, pair.s0);
    return pair;
}

/// P f = v ⟨w, f⟩, with f resampled onto the eigenpair grid if needed.
inline GridFunction spectral_projection(const Eigenpair& pair, const GridFunction& f) {
    const GridFunction g = (f.nodes == pair.v.nodes) ? f : resample(f, pair.v.nodes);
    const double c = pairing(pair.w, g);
    return c * pair.v;
}

namespace closed_form {

/// The analytic eigenpair sampled on the nodes, in the same container as the numerical one.
inline Eigenpair eigenpair_on_grid(const BinaryModelParams& p, std::vector<double> nodes, double m = 2.0) {
    Eigenpair pair;
    auto [s0, v] = right_eigenpair_cf(p, nodes, m);
    auto [s0w, w] = left_eigenpair_cf(p, std::move(nodes), m);
    pair.s0 = s0;
    pair.v = std::move(v);
    pair.w = std::move(w);
    return pair;
}

}  // namespace closed_form

// ---------------------------------------------------------------------------
// Asynchronous exponential growth
// ---------------------------------------------------------------------------

enum class DeviationNorm {
    l1,  ///< ∫|·|
    xm,  ///< ‖·‖_m with the model exponent
};

struct AEGReport {
    std::vector<double> times;
    std::vector<double> deviations;
    double fitted_rate = 0.0;
    double fitted_constant = 0.0;
    bool decreasing = false;
    bool used_closed_form = false;

    bool pass() const { return decreasing; }
};

struct AEGOptions {
    DeviationNorm norm = DeviationNorm::xm;
    /// Closed-form datum; when absent the grid interpolant of u0 is used.
    std::optional<closed_form::InitialDatum> datum;
    bool force_pde = false;
    std::size_t pde_cells = 0;  ///< 0: one cell per eigenpair grid interval
    TimeScheme pde_scheme = TimeScheme::ssp_rk2;
};

namespace detail {

inline void fit_log_linear(AEGReport& rep) {
    // least squares for log d = log c − ε t over the positive samples
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < rep.times.size(); ++i) {
        if (!(rep.deviations[i] > 0.0)) continue;
        const double x = rep.times[i], y = std::log(rep.deviations[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) return;
    const double den = n * sxx - sx * sx;
    if (den == 0.0) return;
    const double slope = (n * sxy - sx * sy) / den;
    rep.fitted_rate = -slope;
    rep.fitted_constant = std::exp((sy - slope * sx) / n);
}

}  // namespace detail

/**
 * Deviations ‖e^{−s0 t} u(t) − P u0‖ at the requested times. The closed form
 * is used when the model belongs to the binary family, otherwise the finite
 * volume solver on the eigenpair's domain. Passes when the deviations
 * decrease strictly from the second sample on.
 */
inline AEGReport aeg_diagnostics(const ModelDefinition& model, const Eigenpair& pair, const GridFunction& u0,
                                 const std::vector<double>& times, const AEGOptions& opt = {}) {
    if (times.empty()) throw InvalidInput("aeg_diagnostics: no times");
    for (std::size_t i = 0; i < times.size(); ++i)
        if (!(times[i] > 0.0) || (i > 0 && !(times[i] > times[i - 1])))
            throw InvalidInput("aeg_diagnostics: times must be positive and increasing");

    const auto& nodes = pair.v.nodes;
    const GridFunction u0_on_grid = (u0.nodes == nodes) ? u0 : resample(u0, nodes);
    const GridFunction target = spectral_projection(pair, u0_on_grid);
    const double nm = model.m;
    auto norm = [&](const GridFunction& g) { return opt.norm == DeviationNorm::l1 ? l1_norm(g) : xm_norm(g, nm); };

    AEGReport rep;
    rep.times = times;
    const auto binary = closed_form::as_binary_model(model);
    if (binary && !opt.force_pde) {
        rep.used_closed_form = true;
        const closed_form::ClosedFormSolution sol(*binary, opt.datum ? *opt.datum : closed_form::grid_datum(u0));
        for (double t : times) {
            auto u = sol.snapshot(nodes, t, nm);
            const double scale = std::exp(-pair.s0 * t);
            rep.deviations.push_back(norm(scale * u - target));
        }
    } else {
        SolverConfig cfg;
        cfg.x_max = nodes.back();
        cfg.n_cells = opt.pde_cells ? opt.pde_cells : nodes.size() - 1;
        cfg.t_end = times.back();
        cfg.output_times = times;
        cfg.scheme = opt.pde_scheme;
        const auto centers = solver_nodes(cfg);
        const GridFunction start = resample(u0_on_grid, centers);
        const auto states = solve(model, start, cfg);
        for (const auto& s : states) {
            const auto u = resample_extended(s.u, nodes);
            const double scale = std::exp(-pair.s0 * s.t);
            rep.deviations.push_back(norm(scale * u - target));
        }
    }
    rep.decreasing = true;
    for (std::size_t i = 2; i < rep.deviations.size(); ++i)
        if (!(rep.deviations[i] < rep.deviations[i - 1])) rep.decreasing = false;
    detail::fit_log_linear(rep);
    return rep;
}

}  // namespace gfrag
