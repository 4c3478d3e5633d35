#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gfrag/model.hpp"

using namespace gfrag;

namespace {

ModelDefinition binary_model() {
    ModelDefinition m;
    m.r = Constant{1.0};
    m.a = Linear{0.0, 1.0};
    m.kernel = UniformBinary{};
    m.beta = Linear{0.5, 0.5};
    m.bc_convention = BoundaryConvention::value;
    return m;
}

// dense-scan oracle for sup β/(1 + x^m)
double scan_dual_norm(const CoefficientSpec& beta, double m, double x_hi) {
    double best = 0.0;
    for (int i = 0; i <= 2000000; ++i) {
        const double x = x_hi * i / 2000000.0;
        best = std::max(best, evaluate(beta, x) / (1.0 + std::pow(x, m)));
    }
    return best;
}

}  // namespace

TEST(Coefficients, Evaluation) {
    EXPECT_DOUBLE_EQ(evaluate(Linear{0.5, 0.5}, 3.0), 2.0);
    EXPECT_DOUBLE_EQ(evaluate(Power{2.0, 3.0}, 2.0), 18.0);
    const Tabulated t{{1.0, 2.0}, {1.0, 3.0}};
    EXPECT_DOUBLE_EQ(evaluate(t, 1.5), 2.0);
    EXPECT_DOUBLE_EQ(evaluate(t, 0.2), 1.0);
    EXPECT_DOUBLE_EQ(evaluate(t, 9.0), 3.0);
}

TEST(Coefficients, Validation) {
    EXPECT_THROW(validate(CoefficientSpec{Linear{-1.0, 0.0}}, "a"), InvalidModel);
    EXPECT_THROW(validate(CoefficientSpec{Tabulated{{1.0, 1.0}, {0.0, 0.0}}}, "a"), InvalidModel);
    EXPECT_THROW(validate(CoefficientSpec{Tabulated{{0.0, 1.0}, {0.0, 0.0}}}, "a"), InvalidModel);
    ModelDefinition m = binary_model();
    m.m = 1.0;
    EXPECT_THROW(m.validate(), InvalidModel);
}

TEST(ComputeRQ, ConstantGrowthLinearFragmentation) {
    ModelDefinition m = binary_model();
    const auto rq = compute_RQ(m);
    EXPECT_NEAR(rq.R(2.0), 2.0, 1e-14);
    EXPECT_NEAR(rq.Q(2.0), 2.0, 1e-14);
}

TEST(ComputeRQ, LinearGrowthNoFragmentation) {
    ModelDefinition m = binary_model();
    m.r = Linear{1.0, 1.0};
    m.a = Constant{0.0};
    const auto rq = compute_RQ(m);
    EXPECT_NEAR(rq.R(std::exp(1.0) - 1.0), 1.0, 1e-12);
}

TEST(ComputeRQ, LinearGrowthLinearFragmentationAgainstQuadrature) {
    ModelDefinition m = binary_model();
    m.r = Linear{1.0, 1.0};
    const auto rq = compute_RQ(m);
    EXPECT_NEAR(rq.Q(1.0), 1.0 - std::log(2.0), 1e-12);
    // same model through the quadrature path
    m.r = Power{1.0, 1.0};
    const auto rq2 = compute_RQ(m);
    EXPECT_NEAR(rq2.Q(1.0), 1.0 - std::log(2.0), 1e-10);
    EXPECT_FALSE(rq2.analytic);
}

TEST(ComputeRQ, RejectsNonPositiveGrowth) {
    ModelDefinition m = binary_model();
    m.r = Linear{0.0, 1.0};
    EXPECT_THROW(compute_RQ(m), InvalidModel);
}

TEST(ComputeRQ, MonotoneOnSampledGrid) {
    ModelDefinition m = binary_model();
    m.r = Tabulated{{0.5, 1.0, 4.0}, {1.0, 0.2, 3.0}};
    m.a = Tabulated{{1.0, 2.0}, {0.0, 2.0}};
    const auto rq = compute_RQ(m);
    const auto x = std::vector<double>{0.0, 0.1, 0.5, 0.9, 1.0, 1.5, 2.0, 3.0, 6.0};
    const auto [R, Q] = tabulate_RQ(m, rq, x);
    EXPECT_EQ(R[0], 0.0);
    EXPECT_EQ(Q[0], 0.0);
    for (std::size_t i = 1; i < x.size(); ++i) {
        EXPECT_GT(R[i], R[i - 1]);
        EXPECT_GE(Q[i], Q[i - 1]);
        EXPECT_NEAR(R[i], rq.R(x[i]), 1e-9);
    }
}

TEST(DualNorm, AffineBetaClosedFormMatchesScan) {
    const CoefficientSpec beta = Linear{0.5, 0.5};
    const double exact = 0.5 * (1.0 + (std::sqrt(2.0) - 1.0)) / (1.0 + std::pow(std::sqrt(2.0) - 1.0, 2));
    EXPECT_NEAR(dual_norm_beta(beta, 2.0), exact, 1e-14);
    EXPECT_NEAR(dual_norm_beta(beta, 2.0), 0.603553, 1e-6);
    EXPECT_NEAR(dual_norm_beta(beta, 2.0), scan_dual_norm(beta, 2.0, 10.0), 1e-9);
    EXPECT_NEAR(dual_norm_beta(beta, 3.0), scan_dual_norm(beta, 3.0, 10.0), 1e-9);
}

TEST(DualNorm, TrivialAndLimitCases) {
    EXPECT_EQ(dual_norm_beta(Constant{0.0}, 2.0), 0.0);
    EXPECT_NEAR(dual_norm_beta(Power{0.0, 2.0}, 2.0), 0.0, 0.0);
    // (1 + x²)/(1 + x²) = 1 everywhere
    EXPECT_NEAR(dual_norm_beta(Power{1.0, 2.0}, 2.0), 1.0, 1e-12);
    EXPECT_THROW(dual_norm_beta(Power{1.0, 3.0}, 2.0), Diverges);
    EXPECT_THROW(dual_norm_beta(Linear{0.5, 0.5}, 1.0), InvalidInput);
}

TEST(DualNorm, TabulatedMatchesScan) {
    const CoefficientSpec beta = Tabulated{{0.5, 1.0, 3.0}, {0.1, 2.0, 0.3}};
    EXPECT_NEAR(dual_norm_beta(beta, 2.0), scan_dual_norm(beta, 2.0, 20.0), 1e-9);
}

TEST(DualNorm, NonincreasingInMWhenBetaVanishesBelowOne) {
    // 1 + x^m increases with m only for x >= 1
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        const CoefficientSpec beta = Tabulated{{1.0, 1.0 + u(rng) + 0.01, 5.0 + u(rng)}, {0.0, u(rng), u(rng)}};
        double prev = infinity;
        for (double m : {1.2, 1.5, 2.0, 3.0, 4.5}) {
            const double v = dual_norm_beta(beta, m);
            EXPECT_LE(v, prev * (1.0 + 1e-9));
            prev = v;
        }
    }
}

TEST(DualNorm, IncreasesInMWhenBetaLivesBelowOne) {
    const CoefficientSpec beta = Tabulated{{0.25, 0.5, 0.75}, {0.0, 1.0, 0.0}};
    EXPECT_NEAR(dual_norm_beta(beta, 2.0), 1.0 / 1.25, 1e-9);
    EXPECT_NEAR(dual_norm_beta(beta, 4.0), 1.0 / 1.0625, 1e-9);
    EXPECT_GT(dual_norm_beta(beta, 4.0), dual_norm_beta(beta, 2.0));
}

TEST(KernelMoment, UniformBinary) {
    const KernelSpec k = UniformBinary{};
    EXPECT_DOUBLE_EQ(kernel_moment(k, 0.0, 7.3), 2.0);
    EXPECT_DOUBLE_EQ(kernel_moment(k, 1.0, 3.0), 3.0);
    EXPECT_DOUBLE_EQ(kernel_moment(k, 2.0, 1.0), 2.0 / 3.0);
    EXPECT_THROW(kernel_moment(k, 1.0, 0.0), InvalidInput);
}

TEST(KernelMoment, AnalyticFormsMatchQuadrature) {
    for (const KernelSpec& k : {KernelSpec{UniformBinary{}}, KernelSpec{PowerLaw{0.0}}, KernelSpec{PowerLaw{1.5}},
                                KernelSpec{PowerLaw{-0.5}}}) {
        for (double m : {0.0, 1.0, 2.0, 2.5}) {
            for (double y : {0.3, 1.0, 4.0}) {
                // x = y t² removes the x^ν singularity at the origin
                const double q = quad::integral(
                    [&](double t) {
                        const double x = y * t * t;
                        return std::pow(x, m) * kernel_density(k, x, y) * 2.0 * y * t;
                    },
                    0.0, 1.0, 1e-13);
                EXPECT_NEAR(kernel_moment(k, m, y), q, 1e-8 * std::max(1.0, q));
            }
        }
    }
}

TEST(KernelDefect, Examples) {
    const KernelSpec k = UniformBinary{};
    EXPECT_NEAR(kernel_defect(k, 2.0, 2.0), 4.0 / 3.0, 1e-14);
    EXPECT_NEAR(kernel_defect(k, 1.0, 5.0), 0.0, 1e-14);
    EXPECT_NEAR(kernel_defect(k, 0.0, 1.0), -1.0, 1e-14);
}

TEST(KernelDefect, SignPatternForConservativeKernels) {
    TabulatedKernel tab;
    tab.ratios = {0.5, 1.0};
    tab.densities = {8.0 / 3.0, 8.0 / 3.0};
    const std::vector<KernelSpec> kernels{UniformBinary{}, PowerLaw{0.0}, PowerLaw{2.0}, ShrinkingBinary{}, tab};
    for (const auto& k : kernels) {
        for (double y = 0.01; y < 1e4; y *= 1.7) {
            EXPECT_NEAR(kernel_moment(k, 1.0, y), y, 1e-9 * y);
            EXPECT_GE(kernel_defect(k, 2.0, y), -1e-9 * y * y);
            EXPECT_GE(kernel_defect(k, 1.5, y), -1e-9 * std::pow(y, 1.5));
            EXPECT_LE(kernel_defect(k, 0.5, y), 1e-9 * std::sqrt(y));
        }
    }
}

TEST(Kernel, ShrinkingBinaryAtoms) {
    const ShrinkingBinary s{0.5, 1.0, 1.0};
    EXPECT_DOUBLE_EQ(s.eps(1.0), 0.5);
    EXPECT_DOUBLE_EQ(s.eps(4.0), 0.25);
    const auto atoms = kernel_atoms(s, 4.0);
    EXPECT_DOUBLE_EQ(atoms[0].first, 1.0);
    EXPECT_DOUBLE_EQ(atoms[1].first, 3.0);
    EXPECT_THROW(kernel_density(s, 1.0, 4.0), InvalidInput);
    EXPECT_NEAR(kernel_moment(s, 2.0, 4.0), 10.0, 1e-14);
}

TEST(ValidateAssumptions, UniformBinaryPassesLiminf) {
    const auto rep = validate_assumptions(binary_model());
    EXPECT_TRUE(rep.pass());
    const auto* lim = rep.find("liminf_defect");
    ASSERT_NE(lim, nullptr);
    EXPECT_NEAR(lim->value, 1.0 / 3.0, 1e-12);
    EXPECT_LT(rep.find("moment_contraction_cm")->value, 1.0);
    EXPECT_LT(rep.find("mass_conservation")->value, 1e-12);
}

TEST(ValidateAssumptions, PowerLawLiminf) {
    ModelDefinition m = binary_model();
    m.kernel = PowerLaw{0.0};
    const auto rep = validate_assumptions(m);
    EXPECT_TRUE(rep.pass());
    EXPECT_NEAR(rep.find("liminf_defect")->value, 1.0 / 3.0, 1e-12);
    m.kernel = PowerLaw{1.0};
    EXPECT_NEAR(validate_assumptions(m).find("liminf_defect")->value, 1.0 / 4.0, 1e-12);
}

TEST(ValidateAssumptions, ShrinkingBinaryFailsLiminf) {
    ModelDefinition m = binary_model();
    m.kernel = ShrinkingBinary{0.5, 1.0, 1.0};
    const auto rep = validate_assumptions(m);
    const auto* lim = rep.find("liminf_defect");
    ASSERT_NE(lim, nullptr);
    EXPECT_LT(lim->value, 1e-3);
    EXPECT_FALSE(lim->pass);
    EXPECT_FALSE(rep.pass());
    // N_2/y² = 2ε(1 − ε) at the horizon
    const double e = 1.0 / 1e4;
    EXPECT_NEAR(lim->value, 2.0 * e * (1.0 - e), 1e-12);
}

TEST(ValidateAssumptions, ReportText) {
    const auto text = validate_assumptions(binary_model()).to_text();
    EXPECT_NE(text.find("liminf_defect.pass=true"), std::string::npos);
    EXPECT_NE(text.find("overall.pass=true"), std::string::npos);
}

TEST(ModelDefinition, ValueConventionScalesBetaByGrowthAtZero) {
    ModelDefinition m = binary_model();
    m.r = Constant{2.0};
    EXPECT_DOUBLE_EQ(m.beta_flux_at(1.0), 2.0);
    m.bc_convention = BoundaryConvention::flux;
    EXPECT_DOUBLE_EQ(m.beta_flux_at(1.0), 1.0);
}

TEST(GrowthBounds, OmegaR) {
    ModelDefinition m = binary_model();
    EXPECT_DOUBLE_EQ(omega_r(m), 4.0);
    m.r = Linear{1.0, 0.25};
    EXPECT_DOUBLE_EQ(omega_r(m), 4.0);
}
