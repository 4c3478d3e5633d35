#pragma once

/**
 * @file config.hpp
 * @brief JSON model documents.
 *
 * Coefficients are objects tagged by "type" (constant, linear, power,
 * tabulated) or bare numbers for constants. Errors name the offending key
 * path, and syntax errors carry line and column.
 */

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gfrag/closed_form.hpp"
#include "gfrag/errors.hpp"
#include "gfrag/model.hpp"
#include "gfrag/pde_solver.hpp"
#include "gfrag/support.hpp"

namespace gfrag {

/// Initial condition as written in a model document.
struct InitialSpec {
    std::string type = "poly_exp";
    std::vector<double> coeffs{1.0};
    double rate = 1.0;
    std::vector<double> nodes;
    std::vector<double> values;

    closed_form::InitialDatum datum() const {
        if (type == "poly_exp") return closed_form::poly_exp_datum(coeffs, rate);
        return closed_form::grid_datum(GridFunction(nodes, values));
    }
    double operator()(double x) const {
        if (type == "poly_exp") {
            double p = 0.0;
            for (std::size_t k = coeffs.size(); k-- > 0;) p = p * x + coeffs[k];
            return p * std::exp(-rate * x);
        }
        return GridFunction(nodes, values)(x);
    }
};

struct SolverSection {
    std::optional<std::size_t> n_cells;
    std::optional<double> cfl;
    std::optional<double> t_end;
    std::vector<double> output_times;
    std::optional<TimeScheme> scheme;
};

struct ModelDocument {
    ModelDefinition model;
    InitialSpec initial;
    SolverSection solver;
    std::optional<double> lambda_shift;
    std::vector<double> times;
};

namespace detail {

using json = nlohmann::json;

inline std::string join_path(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
}

inline const json& require(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError(join_path(path, key) + ": missing key");
    return *it;
}

inline double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path + ": expected a number");
    return j.get<double>();
}

inline double as_number_or_inf(const json& j, const std::string& path) {
    if (j.is_string() && (j.get<std::string>() == "inf" || j.get<std::string>() == "infinity")) return infinity;
    return as_number(j, path);
}

inline std::vector<double> as_numbers(const json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

inline std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) throw ConfigError(path + ": expected a string");
    return j.get<std::string>();
}

inline double number_or(const json& j, const std::string& key, double dflt, const std::string& path) {
    auto it = j.find(key);
    return it == j.end() ? dflt : as_number(*it, join_path(path, key));
}

inline void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& path) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed) ok = ok || it.key() == k;
        if (!ok) throw ConfigError(join_path(path, it.key()) + ": unknown key");
    }
}

inline CoefficientSpec parse_coefficient(const json& j, const std::string& path) {
    if (j.is_number()) return Constant{j.get<double>()};
    if (!j.is_object()) throw ConfigError(path + ": expected a number or a coefficient object");
    const std::string type = as_string(require(j, "type", path), join_path(path, "type"));
    CoefficientSpec out;
    if (type == "constant") {
        check_keys(j, {"type", "value"}, path);
        out = Constant{as_number(require(j, "value", path), join_path(path, "value"))};
    } else if (type == "linear") {
        check_keys(j, {"type", "c0", "c1"}, path);
        out = Linear{number_or(j, "c0", 0.0, path), number_or(j, "c1", 0.0, path)};
    } else if (type == "power") {
        check_keys(j, {"type", "c0", "p"}, path);
        out = Power{as_number(require(j, "c0", path), join_path(path, "c0")),
                    as_number(require(j, "p", path), join_path(path, "p"))};
    } else if (type == "tabulated") {
        check_keys(j, {"type", "nodes", "values"}, path);
        out = Tabulated{as_numbers(require(j, "nodes", path), join_path(path, "nodes")),
                        as_numbers(require(j, "values", path), join_path(path, "values"))};
    } else {
        throw ConfigError(join_path(path, "type") + ": unknown coefficient type '" + type + "'");
    }
    try {
        validate(out, path);
    } catch (const InvalidModel& e) {
        throw ConfigError(e.what());
    }
    return out;
}

inline KernelSpec parse_kernel(const json& j, const std::string& path) {
    std::string type;
    if (j.is_string()) {
        type = j.get<std::string>();
    } else {
        type = as_string(require(j, "type", path), join_path(path, "type"));
    }
    const json empty = json::object();
    const json& o = j.is_object() ? j : empty;
    KernelSpec out;
    if (type == "uniform_binary") {
        check_keys(o, {"type"}, path);
        out = UniformBinary{};
    } else if (type == "power_law") {
        check_keys(o, {"type", "nu"}, path);
        out = PowerLaw{as_number(require(o, "nu", path), join_path(path, "nu"))};
    } else if (type == "shrinking_binary") {
        check_keys(o, {"type", "eps_cap", "eps_scale", "eps_power"}, path);
        out = ShrinkingBinary{number_or(o, "eps_cap", 0.5, path), number_or(o, "eps_scale", 1.0, path),
                              number_or(o, "eps_power", 1.0, path)};
    } else if (type == "tabulated") {
        check_keys(o, {"type", "ratios", "densities", "support_floor"}, path);
        TabulatedKernel k;
        k.ratios = as_numbers(require(o, "ratios", path), join_path(path, "ratios"));
        k.densities = as_numbers(require(o, "densities", path), join_path(path, "densities"));
        k.support_floor = number_or(o, "support_floor", 1e-12, path);
        out = k;
    } else {
        throw ConfigError(join_path(path, "type") + ": unknown kernel type '" + type + "'");
    }
    try {
        validate(out);
    } catch (const InvalidModel& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return out;
}

inline SupportModel parse_support(const json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
    check_keys(j, {"supp_a", "envelope", "beta_sup", "tail"}, path);
    SupportModel s;
    const auto& sa = require(j, "supp_a", path);
    if (!sa.is_array()) throw ConfigError(join_path(path, "supp_a") + ": expected an array of [lo, hi] pairs");
    std::vector<Interval> iv;
    for (std::size_t i = 0; i < sa.size(); ++i) {
        const std::string p = join_path(path, "supp_a") + "[" + std::to_string(i) + "]";
        if (!sa[i].is_array() || sa[i].size() != 2) throw ConfigError(p + ": expected [lo, hi]");
        iv.push_back({as_number(sa[i][0], p + "[0]"), as_number_or_inf(sa[i][1], p + "[1]")});
    }
    s.supp_a.intervals = iv;
    if (auto it = j.find("envelope"); it != j.end()) {
        if (!it->is_array()) throw ConfigError(join_path(path, "envelope") + ": expected an array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const std::string p = join_path(path, "envelope") + "[" + std::to_string(i) + "]";
            const auto& e = (*it)[i];
            if (!e.is_object()) throw ConfigError(p + ": expected an object");
            check_keys(e, {"lo", "hi", "value", "slope"}, p);
            s.envelope.push_back({as_number(require(e, "lo", p), p + ".lo"), as_number_or_inf(require(e, "hi", p), p + ".hi"),
                                  as_number(require(e, "value", p), p + ".value"), number_or(e, "slope", 0.0, p)});
        }
    }
    s.beta_sup = as_number_or_inf(require(j, "beta_sup", path), join_path(path, "beta_sup"));
    if (auto it = j.find("tail"); it != j.end()) {
        const std::string p = join_path(path, "tail");
        if (it->is_string()) {
            if (it->get<std::string>() != "envelope_extends") throw ConfigError(p + ": unknown tail '" + it->get<std::string>() + "'");
            s.tail = EnvelopeExtends{};
        } else if (it->is_object()) {
            if (it->contains("constant_floor")) {
                s.tail = ConstantFloor{as_number((*it)["constant_floor"], p + ".constant_floor")};
            } else if (it->contains("equals_y_beyond")) {
                s.tail = EqualsYBeyond{as_number((*it)["equals_y_beyond"], p + ".equals_y_beyond")};
            } else {
                throw ConfigError(p + ": expected constant_floor or equals_y_beyond");
            }
        } else {
            throw ConfigError(p + ": expected a string or an object");
        }
    }
    try {
        s.validate();
    } catch (const InvalidInput& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return s;
}

inline InitialSpec parse_initial(const json& j, const std::string& path) {
    InitialSpec s;
    s.type = as_string(require(j, "type", path), join_path(path, "type"));
    if (s.type == "poly_exp") {
        check_keys(j, {"type", "coeffs", "rate"}, path);
        s.coeffs = as_numbers(require(j, "coeffs", path), join_path(path, "coeffs"));
        s.rate = as_number(require(j, "rate", path), join_path(path, "rate"));
        if (s.coeffs.empty()) throw ConfigError(join_path(path, "coeffs") + ": empty");
        if (!(s.rate > 0.0)) throw ConfigError(join_path(path, "rate") + ": must be positive");
    } else if (s.type == "tabulated") {
        check_keys(j, {"type", "nodes", "values"}, path);
        s.nodes = as_numbers(require(j, "nodes", path), join_path(path, "nodes"));
        s.values = as_numbers(require(j, "values", path), join_path(path, "values"));
        try {
            GridFunction(s.nodes, s.values).validate();
        } catch (const InvalidInput& e) {
            throw ConfigError(path + ": " + e.what());
        }
    } else {
        throw ConfigError(join_path(path, "type") + ": unknown initial type '" + s.type + "'");
    }
    return s;
}

inline SolverSection parse_solver(const json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
    check_keys(j, {"n_cells", "cfl", "t_end", "output_times", "scheme"}, path);
    SolverSection s;
    if (auto it = j.find("n_cells"); it != j.end()) {
        if (!it->is_number_unsigned()) throw ConfigError(join_path(path, "n_cells") + ": expected a positive integer");
        s.n_cells = it->get<std::size_t>();
    }
    if (auto it = j.find("cfl"); it != j.end()) s.cfl = as_number(*it, join_path(path, "cfl"));
    if (auto it = j.find("t_end"); it != j.end()) s.t_end = as_number(*it, join_path(path, "t_end"));
    if (auto it = j.find("output_times"); it != j.end()) s.output_times = as_numbers(*it, join_path(path, "output_times"));
    if (auto it = j.find("scheme"); it != j.end()) {
        const auto v = as_string(*it, join_path(path, "scheme"));
        if (v == "euler") s.scheme = TimeScheme::euler;
        else if (v == "ssp_rk2") s.scheme = TimeScheme::ssp_rk2;
        else throw ConfigError(join_path(path, "scheme") + ": expected euler or ssp_rk2");
    }
    return s;
}

inline std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

}  // namespace detail

namespace detail {

inline ModelDocument build_document(const json& j) {
    check_keys(j, {"r", "a", "kernel", "beta", "m", "bc_convention", "x_max", "support", "initial", "solver",
                   "lambda_shift", "times", "description"},
               "");
    ModelDocument doc;
    auto& m = doc.model;
    m.r = parse_coefficient(require(j, "r", ""), "r");
    m.a = parse_coefficient(require(j, "a", ""), "a");
    m.kernel = parse_kernel(require(j, "kernel", ""), "kernel");
    m.beta = j.contains("beta") ? parse_coefficient(j["beta"], "beta") : CoefficientSpec{Constant{0.0}};
    m.m = j.contains("m") ? as_number(j["m"], "m") : 2.0;
    m.x_max = j.contains("x_max") ? as_number(j["x_max"], "x_max") : 50.0;
    if (j.contains("support")) m.support = parse_support(j["support"], "support");
    if (j.contains("bc_convention")) {
        const auto v = as_string(j["bc_convention"], "bc_convention");
        if (v == "flux") m.bc_convention = BoundaryConvention::flux;
        else if (v == "value") m.bc_convention = BoundaryConvention::value;
        else throw ConfigError("bc_convention: expected flux or value");
    } else {
        // the binary family is written in value form, everything else in flux form
        m.bc_convention = BoundaryConvention::value;
        if (!closed_form::as_binary_model(m)) m.bc_convention = BoundaryConvention::flux;
    }
    m.validate();
    if (j.contains("initial")) doc.initial = parse_initial(j["initial"], "initial");
    if (j.contains("solver")) doc.solver = parse_solver(j["solver"], "solver");
    if (j.contains("lambda_shift")) doc.lambda_shift = as_number(j["lambda_shift"], "lambda_shift");
    if (j.contains("times")) doc.times = as_numbers(j["times"], "times");
    return doc;
}

}  // namespace detail

inline ModelDocument parse_model_document(const std::string& text, const std::string& source = "<model>") {
    using detail::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = detail::line_column(text, e.byte > 0 ? e.byte - 1 : 0);
        std::ostringstream os;
        os << source << ":" << line << ":" << col << ": syntax error: " << e.what();
        throw ConfigError(os.str());
    }
    if (!j.is_object()) throw ConfigError(source + ": top level must be an object");
    try {
        return detail::build_document(j);
    } catch (const InvalidInput& e) {
        throw ConfigError(source + ": " + e.what());
    }
}

inline ModelDocument load_model_document(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError(path + ": cannot open model file");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_model_document(ss.str(), path);
}

}  // namespace gfrag
