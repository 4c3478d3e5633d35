#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "gfrag/config.hpp"
#include "gfrag/irreducibility.hpp"

using namespace gfrag;

namespace {

std::string model_file(const std::string& name) { return std::string(GFRAG_MODELS_DIR) + "/" + name; }

std::string error_of(const std::string& text) {
    try {
        parse_model_document(text, "doc.json");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

const char* kMinimal = R"({"r": 1, "a": {"type": "linear", "c0": 0, "c1": 1}, "kernel": "uniform_binary"})";

}  // namespace

TEST(Config, SampleModelsLoad) {
    for (const char* name : {"binary_model.json", "binary_model_second_datum.json", "gap_model_beta05.json",
                             "gap_model_linear_beta.json", "power_law.json", "shrinking_binary.json"})
        EXPECT_NO_THROW(load_model_document(model_file(name))) << name;
}

TEST(Config, BinaryModelDocument) {
    const auto doc = load_model_document(model_file("binary_model.json"));
    const auto p = closed_form::as_binary_model(doc.model);
    ASSERT_TRUE(p.has_value());
    EXPECT_EQ(p->beta0, 0.5);
    EXPECT_EQ(p->beta1, 0.5);
    EXPECT_EQ(doc.model.bc_convention, BoundaryConvention::value);
    const auto M = doc.initial.datum().moments();
    EXPECT_NEAR(M.M0, 9.0 / 8.0, 1e-15);
    EXPECT_NEAR(M.M1, 7.0 / 8.0, 1e-15);
    EXPECT_NEAR(doc.initial(1.0), 3.5 * std::exp(-2.0), 1e-15);
    EXPECT_EQ(doc.solver.n_cells.value(), 1000u);
    EXPECT_EQ(doc.solver.scheme.value(), TimeScheme::ssp_rk2);
    EXPECT_EQ(doc.times.size(), 5u);
}

TEST(Config, GapModelDocuments) {
    const auto half = load_model_document(model_file("gap_model_beta05.json"));
    EXPECT_EQ(to_string(decide_irreducibility(derive_support(half.model)).decision), "NOT_IRREDUCIBLE");
    const auto lin = load_model_document(model_file("gap_model_linear_beta.json"));
    EXPECT_EQ(to_string(decide_irreducibility(derive_support(lin.model)).decision), "IRREDUCIBLE");
}

TEST(Config, Defaults) {
    const auto doc = parse_model_document(kMinimal);
    EXPECT_EQ(doc.model.m, 2.0);
    EXPECT_EQ(doc.model.x_max, 50.0);
    EXPECT_TRUE(is_identically_zero(doc.model.beta));
    EXPECT_FALSE(doc.solver.n_cells.has_value());
    EXPECT_FALSE(doc.lambda_shift.has_value());
    EXPECT_TRUE(doc.times.empty());
    EXPECT_EQ(doc.initial.type, "poly_exp");
    // the binary family defaults to the value convention, any other model to flux
    EXPECT_EQ(doc.model.bc_convention, BoundaryConvention::value);
    const auto other = parse_model_document(R"({"r": 1, "a": 1, "kernel": {"type": "power_law", "nu": 1}})");
    EXPECT_EQ(other.model.bc_convention, BoundaryConvention::flux);
}

TEST(Config, SyntaxErrorCarriesLineAndColumn) {
    const std::string msg = error_of("{\n  \"r\": 1.0,\n  \"a\": ,\n  \"kernel\": \"uniform_binary\"\n}");
    EXPECT_NE(msg.find("doc.json:3:"), std::string::npos) << msg;
    EXPECT_NE(msg.find("syntax error"), std::string::npos) << msg;
}

TEST(Config, ErrorsNameTheKeyPath) {
    EXPECT_NE(error_of(R"({"r": 1, "a": 1, "kernel": "uniform_binary", "bogus": 2})").find("doc.json: bogus: unknown key"),
              std::string::npos);
    EXPECT_NE(error_of(R"({"r": 1, "a": 1})").find("kernel: missing key"), std::string::npos);
    EXPECT_NE(error_of(R"({"r": 1, "a": 1, "kernel": "uniform_binary", "solver": {"n_cell": 3}})")
                  .find("solver.n_cell: unknown key"),
              std::string::npos);
    EXPECT_NE(error_of(R"({"r": 1, "a": 1, "kernel": "uniform_binary", "solver": {"scheme": "rk4"}})")
                  .find("solver.scheme"),
              std::string::npos);
    EXPECT_NE(error_of(R"({"r": 1, "a": {"type": "cubic"}, "kernel": "uniform_binary"})").find("a.type"),
              std::string::npos);
    EXPECT_NE(error_of(R"({"r": 1, "a": 1, "kernel": {"type": "triple"}})").find("kernel.type"), std::string::npos);
    EXPECT_NE(error_of(R"({"r": 1, "a": 1, "kernel": "uniform_binary", "m": "two"})").find("m: expected a number"),
              std::string::npos);
    EXPECT_NE(error_of(R"({"r": 1, "a": 1, "kernel": "uniform_binary", "initial": {"type": "poly_exp", "coeffs": [1], "rate": -1}})")
                  .find("initial.rate"),
              std::string::npos);
    EXPECT_NE(error_of(R"({"r": 1, "a": 1, "kernel": "uniform_binary", "support": {"supp_a": [[0, "inf"]], "envelope": [{"lo": 0, "hi": "inf", "value": 0, "bad": 1}], "beta_sup": 0}})")
                  .find("support.envelope[0].bad: unknown key"),
              std::string::npos);
    EXPECT_NE(error_of("[1, 2]").find("top level must be an object"), std::string::npos);
}

TEST(Config, ModelValidationFailuresAreConfigErrors) {
    const std::string msg = error_of(R"({"r": 1, "a": {"type": "linear", "c0": -1, "c1": 0}, "kernel": "uniform_binary"})");
    EXPECT_NE(msg.find("doc.json"), std::string::npos) << msg;
    EXPECT_FALSE(error_of(R"({"r": 1, "a": 1, "kernel": "uniform_binary", "m": 1})").empty());
}

TEST(Config, SupportSection) {
    const auto doc = parse_model_document(R"({"r": 1, "a": 1, "kernel": "uniform_binary",
        "support": {"supp_a": [[2, "inf"]], "envelope": [{"lo": 2, "hi": "inf", "value": 1, "slope": 0.5}],
                    "beta_sup": 0.5, "tail": "envelope_extends"}})");
    ASSERT_TRUE(doc.model.support.has_value());
    EXPECT_DOUBLE_EQ(compute_c_bar(*doc.model.support).c_bar, 1.0);
    const auto floor = parse_model_document(R"({"r": 1, "a": 1, "kernel": "uniform_binary",
        "support": {"supp_a": [[0, "inf"]], "envelope": [{"lo": 0, "hi": 4, "value": 0, "slope": 0.5}],
                    "beta_sup": "inf", "tail": {"constant_floor": 3}}})");
    EXPECT_TRUE(std::holds_alternative<ConstantFloor>(*floor.model.support->tail));
    EXPECT_TRUE(std::isinf(floor.model.support->beta_sup));
    EXPECT_FALSE(error_of(R"({"r": 1, "a": 1, "kernel": "uniform_binary",
        "support": {"supp_a": [[3, 1]], "beta_sup": 0}})").empty());
}

TEST(Config, MissingFile) {
    EXPECT_THROW(load_model_document(model_file("no_such_model.json")), ConfigError);
}
