#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "gfrag/closed_form.hpp"
#include "gfrag/pde_solver.hpp"

using namespace gfrag;

namespace {

const closed_form::BinaryModelParams kBinary{1.0, 1.0, 0.5, 0.5};

ModelDefinition advection_model() {
    ModelDefinition m;
    m.r = Constant{1.0};
    m.a = Constant{0.0};
    m.beta = Constant{0.0};
    return m;
}

double bump(double x) { return std::exp(-8.0 * (x - 3.0) * (x - 3.0)); }

SolverConfig config(double x_max, std::size_t n, double t_end, std::vector<double> outputs = {}) {
    SolverConfig c;
    c.x_max = x_max;
    c.n_cells = n;
    c.t_end = t_end;
    c.output_times = std::move(outputs);
    return c;
}

double l1_error(const GridFunction& u, const std::function<double(double)>& exact) {
    const double h = u.nodes[1] - u.nodes[0];
    double e = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) e += h * std::abs(u.values[i] - exact(u.nodes[i]));
    return e;
}

std::vector<ModelDefinition> test_models() {
    std::vector<ModelDefinition> out{closed_form::to_model(kBinary), advection_model()};
    ModelDefinition power;
    power.r = Linear{1.0, 0.1};
    power.a = Constant{1.0};
    power.kernel = PowerLaw{1.0};
    power.beta = Constant{0.5};
    out.push_back(power);
    ModelDefinition shrinking = closed_form::to_model(kBinary);
    shrinking.kernel = ShrinkingBinary{0.5, 1.0, 1.0};
    out.push_back(shrinking);
    ModelDefinition gap;
    gap.a = Tabulated{{2.0, 3.0}, {0.0, 1.0}};
    gap.kernel = TabulatedKernel{{0.5, 1.0}, {8.0 / 3.0, 8.0 / 3.0}};
    gap.beta = Linear{0.5, 0.5};
    out.push_back(gap);
    return out;
}

}  // namespace

TEST(PdeSolver, PureAdvectionTranslatesAtUnitSpeed) {
    std::vector<double> err;
    for (std::size_t n : {500, 1000, 2000, 4000}) {
        const auto cfg = config(10.0, n, 1.0);
        const auto u0 = GridFunction::sample(solver_nodes(cfg), bump);
        const auto out = solve(advection_model(), u0, cfg);
        ASSERT_EQ(out.size(), 1u);
        EXPECT_DOUBLE_EQ(out[0].t, 1.0);
        err.push_back(l1_error(out[0].u, [](double x) { return bump(x - 1.0); }));
    }
    for (std::size_t k = 0; k + 1 < err.size(); ++k) EXPECT_GE(std::log2(err[k] / err[k + 1]), 0.9) << err[k];
}

TEST(PdeSolver, ZeroDataStaysZero) {
    for (const auto& model : test_models()) {
        const auto cfg = config(20.0, 200, 1.0, {0.5, 1.0});
        const GridFunction zero(solver_nodes(cfg), std::vector<double>(200, 0.0));
        for (const auto& s : solve(model, zero, cfg))
            for (double v : s.u.values) EXPECT_EQ(v, 0.0);
    }
}

TEST(PdeSolver, PositivityAtFullCfl) {
    for (const auto& model : test_models()) {
        for (auto scheme : {TimeScheme::euler, TimeScheme::ssp_rk2}) {
            auto cfg = config(20.0, 400, 2.0, {0.5, 1.0, 2.0});
            cfg.cfl = 1.0;
            cfg.scheme = scheme;
            const auto u0 = GridFunction::sample(solver_nodes(cfg), [](double x) { return x < 4.0 ? 1.0 : 0.0; });
            for (const auto& s : solve(model, u0, cfg)) {
                const double top = *std::max_element(s.u.values.begin(), s.u.values.end());
                for (double v : s.u.values) EXPECT_GE(v, -1e-14 * top);
            }
        }
    }
}

TEST(PdeSolver, ConvergesToClosedFormAtFirstOrder) {
    const auto model = closed_form::to_model(kBinary);
    const closed_form::ClosedFormSolution sol(kBinary, closed_form::poly_exp_datum({1.0, 2.5}, 2.0));
    std::vector<double> err;
    for (std::size_t n : {250, 500, 1000, 2000}) {
        const auto cfg = config(20.0, n, 1.0);
        const auto u0 = GridFunction::sample(solver_nodes(cfg), [&](double x) { return sol(x, 0.0); });
        err.push_back(l1_error(solve(model, u0, cfg).back().u, [&](double x) { return sol(x, 1.0); }));
    }
    for (std::size_t k = 0; k + 1 < err.size(); ++k) EXPECT_GE(std::log2(err[k] / err[k + 1]), 0.9) << err[k];
    EXPECT_LT(err.back(), 0.02);
}

TEST(PdeSolver, MomentBalanceResidualIsFirstOrder) {
    const auto model = closed_form::to_model(kBinary);
    const auto datum = closed_form::poly_exp_datum({1.0, 2.5}, 2.0);
    for (double m : {1.0, 2.0}) {
        std::vector<double> res;
        for (std::size_t n : {250, 500, 1000, 2000}) {
            const auto cfg = config(20.0, n, 1.0, {0.98, 0.99, 1.0});
            const auto u0 = GridFunction::sample(solver_nodes(cfg), datum.value);
            res.push_back(std::abs(moment_balance_residual(model, solve(model, u0, cfg), m).at(0)));
        }
        for (std::size_t k = 0; k + 1 < res.size(); ++k) EXPECT_LE(res[k + 1], 0.6 * res[k]) << "m = " << m;
    }
}

TEST(PdeSolver, RecordedBalanceResidualShrinks) {
    const auto model = closed_form::to_model(kBinary);
    const auto datum = closed_form::poly_exp_datum({1.0, 2.5}, 2.0);
    std::vector<double> res;
    for (std::size_t n : {250, 500, 1000, 2000}) {
        const auto cfg = config(20.0, n, 1.0);
        const auto out = solve(model, GridFunction::sample(solver_nodes(cfg), datum.value), cfg);
        ASSERT_EQ(out.back().balance_residuals.size(), 1u);
        res.push_back(std::abs(out.back().balance_residuals[0]));
    }
    for (std::size_t k = 0; k + 1 < res.size(); ++k) EXPECT_LT(res[k + 1], 0.75 * res[k]);
}

TEST(PdeSolver, ZeroWeightBalanceIsTheMomentSystem) {
    const auto model = closed_form::to_model(kBinary);
    const auto x = midpoint_nodes(20.0, 400);
    const auto u = GridFunction::sample(x, [](double s) { return (1.0 + s * s) * std::exp(-s); });
    const auto M = detail::cell_moments(u, 0.05);
    const double expected = 2.0 * (kBinary.alpha0() * M.M0 + kBinary.alpha1() * M.M1);
    EXPECT_NEAR(detail::balance_rhs(model, u, 0.05, 0.0), expected, 1e-12 * expected);
}

TEST(PdeSolver, AdvectionBalanceReducesToTransport) {
    const auto model = advection_model();
    const auto cfg = config(10.0, 1000, 1.0, {0.5, 0.51, 0.52});
    const auto out = solve(model, GridFunction::sample(solver_nodes(cfg), bump), cfg);
    // d/dt ∫u(1 + x) = ∫u while the bump is away from both ends
    const double M0 = out[1].moments.M0;
    const double dW = ((out[2].moments.M0 + out[2].moments.M1) - (out[0].moments.M0 + out[0].moments.M1)) / 0.02;
    EXPECT_NEAR(dW, M0, 1e-10);
    EXPECT_NEAR(moment_balance_residual(model, out, 1.0).at(0), 0.0, 1e-10);
}

TEST(PdeSolver, EigenfunctionDatumIsNearlyInvariant) {
    const auto model = closed_form::to_model(kBinary);
    const auto v = closed_form::right_eigenfunction(kBinary);
    const auto cfg = config(30.0, 3000, 3.0, {0.5, 1.0, 2.0, 3.0});
    const auto u0 = GridFunction::sample(solver_nodes(cfg), [&](double x) { return v(x); });
    std::vector<double> dev;
    for (const auto& s : solve(model, u0, cfg)) {
        const double scale = std::exp(-v.s0 * s.t);
        dev.push_back(l1_error(GridFunction(s.u.nodes,
                                            [&] {
                                                auto w = s.u.values;
                                                for (double& e : w) e *= scale;
                                                return w;
                                            }()),
                               [&](double x) { return v(x); }));
    }
    for (double d : dev) EXPECT_LT(d, 0.02);
    for (std::size_t k = 0; k + 1 < dev.size(); ++k) EXPECT_LE(dev[k + 1], dev[k] * 1.5 + 1e-3);
}

TEST(PdeSolver, FixedStepIsHonoured) {
    const auto model = closed_form::to_model(kBinary);
    auto cfg = config(20.0, 200, 1.0);
    cfg.dt = 0.001;
    const auto u0 = GridFunction::sample(solver_nodes(cfg), bump);
    const auto a = solve(model, u0, cfg).back();
    FiniteVolumeOperator op(model, 20.0, 200);
    SolverState s{0.0, u0, {}, {}};
    for (int i = 0; i < 1000; ++i) s = step(op, s, 0.001, cfg.cfl, cfg.scheme);
    for (std::size_t i = 0; i < a.u.size(); ++i) EXPECT_NEAR(a.u.values[i], s.u.values[i], 1e-12);
}

TEST(PdeSolver, ModelStepMatchesOperatorStep) {
    const auto model = closed_form::to_model(kBinary);
    const auto x = midpoint_nodes(20.0, 200);
    const SolverState s{0.0, GridFunction::sample(x, bump), {}, {}};
    const auto a = step(model, s, 0.01);
    const auto b = step(FiniteVolumeOperator(model, 20.0, 200), s, 0.01);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(a.u.values[i], b.u.values[i], 1e-13);
    EXPECT_DOUBLE_EQ(a.t, 0.01);
}

TEST(PdeSolver, Errors) {
    const auto model = closed_form::to_model(kBinary);
    const auto x = midpoint_nodes(20.0, 200);
    const SolverState s{0.0, GridFunction::sample(x, bump), {}, {}};
    const FiniteVolumeOperator op(model, 20.0, 200);
    EXPECT_THROW(step(op, s, 2.0 * op.stable_dt(1.0)), StepSizeError);
    EXPECT_THROW(step(op, s, 0.0), StepSizeError);
    auto cfg = config(20.0, 200, 1.0);
    cfg.dt = 1.0;
    EXPECT_THROW(solve(model, s.u, cfg), StepSizeError);
    EXPECT_THROW(solve(model, s.u, config(20.0, 15, 1.0)), ConfigError);
    EXPECT_THROW(solve(model, s.u, config(20.0, 100, 1.0)), InvalidInput);
    EXPECT_THROW(solve(model, s.u, config(20.0, 200, 1.0, {0.5, 0.2})), ConfigError);
    cfg = config(20.0, 200, 1.0);
    cfg.cfl = 1.5;
    EXPECT_THROW(solve(model, s.u, cfg), ConfigError);
    EXPECT_THROW(moment_balance_residual(model, {s, s}, 1.0), InvalidInput);
}
