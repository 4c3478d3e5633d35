#pragma once

/**
 * @file pde_solver.hpp
 * @brief Finite-volume time stepping for ∂t u + ∂x(r u) = −a u + B u with the
 *        renewal inflow r(0)u(0, t) = ⟨β, u⟩.
 *
 * Cells are uniform on [0, x_max] with values at midpoints. Fluxes are first
 * order upwind, the inflow flux is lagged, and the outflow at x_max uses a
 * zero-gradient ghost cell.
 */

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "gfrag/errors.hpp"
#include "gfrag/grid.hpp"
#include "gfrag/model.hpp"
#include "gfrag/resolvent.hpp"

namespace gfrag {

enum class TimeScheme { euler, ssp_rk2 };

struct SolverConfig {
    double x_max = 50.0;
    std::size_t n_cells = 1000;
    double cfl = 0.9;
    double t_end = 1.0;
    std::vector<double> output_times;  ///< empty means {t_end}
    TimeScheme scheme = TimeScheme::ssp_rk2;
    std::optional<double> dt;  ///< fixed step; must respect the stability limit

    void validate() const {
        if (!(x_max > 0.0)) throw ConfigError("solver: x_max must be positive");
        if (n_cells < 16) throw ConfigError("solver: n_cells must be at least 16");
        if (!(cfl > 0.0 && cfl <= 1.0)) throw ConfigError("solver: cfl must lie in (0, 1]");
        if (!(t_end > 0.0)) throw ConfigError("solver: t_end must be positive");
        double prev = 0.0;
        for (double t : output_times) {
            if (!(t >= prev) || t > t_end) throw ConfigError("solver: output_times must be increasing within [0, t_end]");
            prev = t;
        }
        if (dt && !(*dt > 0.0)) throw ConfigError("solver: dt must be positive");
    }
};

struct SolverMoments {
    double M0 = 0.0;
    double M1 = 0.0;
};

struct SolverState {
    double t = 0.0;
    GridFunction u;
    SolverMoments moments;
    std::vector<double> balance_residuals;
};

/// Semi-discrete operator on a fixed cell grid.
class FiniteVolumeOperator {
public:
    FiniteVolumeOperator(const ModelDefinition& model, double x_max, std::size_t n_cells)
        : model_(model), x_max_(x_max), h_(x_max / static_cast<double>(n_cells)) {
        model_.validate();
        require_positive_growth(model_);
        centers_ = midpoint_nodes(x_max, n_cells);
        const std::size_t n = n_cells;
        r_face_.resize(n + 1);
        for (std::size_t k = 0; k <= n; ++k) r_face_[k] = model_.r_at(h_ * static_cast<double>(k));
        a_.resize(n);
        beta_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            a_[i] = model_.a_at(centers_[i]);
            beta_[i] = model_.beta_flux_at(centers_[i]);
        }
        gain_ = FragmentationGain(model_, centers_, GainRule::cell);
        max_r_ = *std::max_element(r_face_.begin(), r_face_.end());
        max_a_ = *std::max_element(a_.begin(), a_.end());
    }

    const std::vector<double>& centers() const { return centers_; }
    double h() const { return h_; }
    double x_max() const { return x_max_; }
    const ModelDefinition& model() const { return model_; }

    /// Largest stable explicit step for the given CFL number.
    double stable_dt(double cfl) const { return cfl / (max_r_ / h_ + max_a_); }

    double inflow(const std::vector<double>& u) const {
        double s = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) s += h_ * beta_[i] * u[i];
        return s;
    }

    std::vector<double> rhs(const std::vector<double>& u) const {
        const std::size_t n = u.size();
        std::vector<double> du = gain_.apply(u);
        double left = inflow(u);
        for (std::size_t i = 0; i < n; ++i) {
            const double right = r_face_[i + 1] * u[i];
            du[i] += -(right - left) / h_ - a_[i] * u[i];
            left = right;
        }
        return du;
    }

private:
    ModelDefinition model_;
    double x_max_;
    double h_;
    std::vector<double> centers_;
    std::vector<double> r_face_;
    std::vector<double> a_;
    std::vector<double> beta_;
    FragmentationGain gain_;
    double max_r_ = 0.0;
    double max_a_ = 0.0;
};

namespace detail {

inline SolverMoments cell_moments(const GridFunction& u, double h) {
    SolverMoments m;
    for (std::size_t i = 0; i < u.size(); ++i) {
        m.M0 += h * u.values[i];
        m.M1 += h * u.nodes[i] * u.values[i];
    }
    return m;
}

// ∫ u (1 + x^m) by the midpoint rule
inline double weighted_mass(const GridFunction& u, double h, double m) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += h * xm_weight(u.nodes[i], m) * u.values[i];
    return s;
}

// (1 + 0^m)⟨β, u⟩ + m ∫ r u x^{m−1} − ∫ (N0 + N_m) a u
inline double balance_rhs(const ModelDefinition& model, const GridFunction& u, double h, double m) {
    double inflow = 0.0, transport = 0.0, frag = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double x = u.nodes[i];
        const double ui = u.values[i];
        inflow += h * model.beta_flux_at(x) * ui;
        if (m != 0.0) transport += h * m * model.r_at(x) * std::pow(x, m - 1.0) * ui;
        const double ax = model.a_at(x);
        if (ax != 0.0)
            frag += h * (kernel_defect(model.kernel, 0.0, x) + kernel_defect(model.kernel, m, x)) * ax * ui;
    }
    return xm_weight(0.0, m) * inflow + transport - frag;
}

}  // namespace detail

inline bool on_grid(const FiniteVolumeOperator& op, const std::vector<double>& nodes) {
    const auto& c = op.centers();
    if (nodes.size() != c.size()) return false;
    for (std::size_t i = 0; i < c.size(); ++i)
        if (std::abs(nodes[i] - c[i]) > 1e-12 * op.x_max()) return false;
    return true;
}

/// Grid on which the solver represents u for the given configuration.
inline std::vector<double> solver_nodes(const SolverConfig& cfg) { return midpoint_nodes(cfg.x_max, cfg.n_cells); }

inline SolverState step(const FiniteVolumeOperator& op, const SolverState& state, double dt, double cfl = 1.0,
                        TimeScheme scheme = TimeScheme::euler) {
    if (!(dt > 0.0)) throw StepSizeError("step: dt must be positive");
    const double limit = op.stable_dt(cfl);
    if (dt > limit * (1.0 + 1e-12))
        throw StepSizeError("step: dt = " + std::to_string(dt) + " exceeds the stability limit " + std::to_string(limit));
    if (!on_grid(op, state.u.nodes)) throw InvalidInput("step: state is not on the solver grid");
    const auto& u = state.u.values;
    std::vector<double> next(u.size());
    const auto k1 = op.rhs(u);
    for (std::size_t i = 0; i < u.size(); ++i) next[i] = u[i] + dt * k1[i];
    if (scheme == TimeScheme::ssp_rk2) {
        const auto k2 = op.rhs(next);
        for (std::size_t i = 0; i < u.size(); ++i) next[i] = 0.5 * u[i] + 0.5 * (next[i] + dt * k2[i]);
    }
    SolverState out;
    out.t = state.t + dt;
    out.u = GridFunction(state.u.nodes, std::move(next), state.u.m);
    out.moments = detail::cell_moments(out.u, op.h());
    return out;
}

inline SolverState step(const ModelDefinition& model, const SolverState& state, double dt) {
    if (state.u.size() < 2) throw InvalidInput("step: state grid too small");
    const double h = state.u.nodes[1] - state.u.nodes[0];
    FiniteVolumeOperator op(model, h * static_cast<double>(state.u.size()), state.u.size());
    return step(op, state, dt);
}

/**
 * Runs to t_end and returns the states at the output times. Each returned
 * state carries the balance residual of its last step for weight exponent m.
 */
inline std::vector<SolverState> solve(const ModelDefinition& model, const GridFunction& u0, const SolverConfig& cfg) {
    cfg.validate();
    FiniteVolumeOperator op(model, cfg.x_max, cfg.n_cells);
    if (!on_grid(op, u0.nodes)) throw InvalidInput("solve: initial data is not on the solver grid");

    std::vector<double> outputs = cfg.output_times.empty() ? std::vector<double>{cfg.t_end} : cfg.output_times;
    const double dt_max = cfg.dt ? *cfg.dt : op.stable_dt(cfg.cfl);
    if (dt_max > op.stable_dt(cfg.cfl) * (1.0 + 1e-12))
        throw StepSizeError("solve: requested dt exceeds the stability limit");

    SolverState state;
    state.t = 0.0;
    state.u = GridFunction(op.centers(), u0.values, u0.m);
    state.moments = detail::cell_moments(state.u, op.h());

    std::vector<SolverState> out;
    const double m = model.m;
    for (double target : outputs) {
        SolverState prev = state;
        double last_dt = 0.0;
        while (state.t < target - 1e-14 * std::max(1.0, target)) {
            // equal substeps so the output time is hit exactly
            const double remaining = target - state.t;
            const auto n_steps = static_cast<std::size_t>(std::ceil(remaining / dt_max - 1e-9));
            const double dt = remaining / static_cast<double>(std::max<std::size_t>(n_steps, 1));
            prev = state;
            state = step(op, state, dt, cfg.cfl, cfg.scheme);
            last_dt = dt;
        }
        state.t = target;
        state.balance_residuals.clear();
        if (last_dt > 0.0) {
            const double dW = (detail::weighted_mass(state.u, op.h(), m) - detail::weighted_mass(prev.u, op.h(), m)) / last_dt;
            state.balance_residuals.push_back(dW - detail::balance_rhs(model, prev.u, op.h(), m));
        }
        out.push_back(state);
    }
    return out;
}

/**
 * Residuals of d/dt ∫u(1 + x^m) = (1 + 0^m)⟨β, u⟩ + m∫ r u x^{m−1} − ∫(N0 + N_m) a u,
 * with the time derivative by central differences over consecutive states.
 */
inline std::vector<double> moment_balance_residual(const ModelDefinition& model, const std::vector<SolverState>& states,
                                                   double m) {
    if (states.size() < 3) throw InvalidInput("moment_balance_residual: need at least three states");
    std::vector<double> out;
    for (std::size_t k = 1; k + 1 < states.size(); ++k) {
        const auto& u = states[k].u;
        if (u.size() < 2) throw InvalidInput("moment_balance_residual: state grid too small");
        const double h = u.nodes[1] - u.nodes[0];
        const double dt = states[k + 1].t - states[k - 1].t;
        if (!(dt > 0.0)) throw InvalidInput("moment_balance_residual: states must be strictly increasing in time");
        const double dW =
            (detail::weighted_mass(states[k + 1].u, h, m) - detail::weighted_mass(states[k - 1].u, h, m)) / dt;
        out.push_back(dW - detail::balance_rhs(model, u, h, m));
    }
    return out;
}

}  // namespace gfrag
