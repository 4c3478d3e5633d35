// gfrag: command-line driver for the growth-fragmentation library.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gfrag/gfrag.hpp"

namespace fs = std::filesystem;
using namespace gfrag;

namespace {

struct RunConfig {
    std::string command;
    std::string model_path;
    std::optional<double> x_max;
    std::optional<std::size_t> cells;
    std::optional<double> t_end;
    std::string output_dir = ".";
    double tol = 1e-10;
};

std::string out_path(const RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.output_dir);
    return (fs::path(cfg.output_dir) / name).string();
}

std::string time_tag(double t) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", t);
    return buf;
}

std::vector<double> output_times(const ModelDocument& doc, double t_end) {
    std::vector<double> out;
    for (double t : doc.solver.output_times)
        if (t <= t_end) out.push_back(t);
    if (out.empty() || out.back() < t_end) out.push_back(t_end);
    return out;
}

double resolved_t_end(const RunConfig& cfg, const ModelDocument& doc) {
    if (cfg.t_end) return *cfg.t_end;
    if (doc.solver.t_end) return *doc.solver.t_end;
    return 1.0;
}

double resolved_x_max(const RunConfig& cfg, const ModelDocument& doc) { return cfg.x_max ? *cfg.x_max : doc.model.x_max; }

int cmd_validate(const RunConfig&, const ModelDocument& doc) {
    const auto report = validate_assumptions(doc.model);
    std::cout << report.to_text();
    return report.pass() ? 0 : 1;
}

int cmd_solve_closed(const RunConfig& cfg, const ModelDocument& doc) {
    const auto params = closed_form::as_binary_model(doc.model);
    if (!params) throw ConfigError(cfg.model_path + ": solve-closed needs r constant, a linear through 0, uniform binary kernel and affine beta");
    const double x_max = resolved_x_max(cfg, doc);
    const std::size_t cells = cfg.cells ? *cfg.cells : 1000;
    const double t_end = resolved_t_end(cfg, doc);
    const closed_form::ClosedFormSolution sol(*params, doc.initial.datum());
    const double s0 = closed_form::lambda_pm(*params).first;
    const auto nodes = uniform_nodes(x_max, cells);
    const auto times = output_times(doc, t_end);

    Table moments{{"t", "M0", "M1"}, {}};
    for (double t : times) {
        const auto M = closed_form::propagate(*params, sol.initial_moments(), t);
        moments.rows.push_back({t, M.M0, M.M1});
        Table snap{{"x", "u", "u_normalized"}, {}};
        const double scale = std::exp(-s0 * t);
        for (double x : nodes) {
            const double u = sol(x, t);
            snap.rows.push_back({x, u, u * scale});
        }
        emit_csv(snap, out_path(cfg, "snapshot_t" + time_tag(t) + ".csv"));
    }
    emit_csv(moments, out_path(cfg, "moments.csv"));
    std::printf("s0=%.17g\n", s0);
    for (const auto& row : moments.rows) std::printf("t=%.17g M0=%.17g M1=%.17g\n", row[0], row[1], row[2]);
    return 0;
}

int cmd_solve_pde(const RunConfig& cfg, const ModelDocument& doc) {
    SolverConfig sc;
    sc.x_max = resolved_x_max(cfg, doc);
    sc.n_cells = cfg.cells ? *cfg.cells : (doc.solver.n_cells ? *doc.solver.n_cells : 1000);
    sc.cfl = doc.solver.cfl.value_or(0.9);
    sc.t_end = resolved_t_end(cfg, doc);
    sc.output_times = output_times(doc, sc.t_end);
    sc.scheme = doc.solver.scheme.value_or(TimeScheme::ssp_rk2);
    const auto centers = solver_nodes(sc);
    const auto u0 = GridFunction::sample(centers, doc.initial, doc.model.m);
    const auto states = solve(doc.model, u0, sc);

    double s0 = 0.0;
    if (const auto p = closed_form::as_binary_model(doc.model)) {
        s0 = closed_form::lambda_pm(*p).first;
    } else {
        try {
            s0 = perron_eigenpair(doc.model, doc.lambda_shift.value_or(NAN), cfg.tol).s0;
        } catch (const NumericError& e) {
            std::cerr << "warning: no Perron eigenvalue (" << e.what() << "); u_normalized = u\n";
        }
    }
    Table moments{{"t", "M0", "M1"}, {}};
    for (const auto& s : states) {
        moments.rows.push_back({s.t, s.moments.M0, s.moments.M1});
        Table snap{{"x", "u", "u_normalized"}, {}};
        const double scale = std::exp(-s0 * s.t);
        for (std::size_t i = 0; i < s.u.size(); ++i) snap.rows.push_back({s.u.nodes[i], s.u.values[i], s.u.values[i] * scale});
        emit_csv(snap, out_path(cfg, "snapshot_t" + time_tag(s.t) + ".csv"));
        std::printf("t=%.17g M0=%.17g M1=%.17g balance_residual=%.17g\n", s.t, s.moments.M0, s.moments.M1,
                    s.balance_residuals.empty() ? 0.0 : s.balance_residuals.front());
    }
    emit_csv(moments, out_path(cfg, "moments.csv"));
    return 0;
}

EigenOptions eigen_options(const RunConfig& cfg) {
    EigenOptions opt;
    if (cfg.x_max) opt.x_max = *cfg.x_max;
    if (cfg.cells) opt.n_cells = *cfg.cells;
    return opt;
}

int cmd_eigen(const RunConfig& cfg, const ModelDocument& doc) {
    const auto pair = perron_eigenpair(doc.model, doc.lambda_shift.value_or(NAN), cfg.tol, eigen_options(cfg));
    Table t{{"x", "v", "w"}, {}};
    for (std::size_t i = 0; i < pair.v.size(); ++i) t.rows.push_back({pair.v.nodes[i], pair.v.values[i], pair.w.values[i]});
    emit_csv(t, out_path(cfg, "eigenpair.csv"));
    std::printf("s0=%.17g\nresidual=%.17g\nlambda=%.17g\niterations=%d\n", pair.s0, pair.residual, pair.lambda,
                pair.iterations);
    if (const auto p = closed_form::as_binary_model(doc.model))
        std::printf("s0_closed_form=%.17g\n", closed_form::lambda_pm(*p).first);
    for (const auto& w : pair.warnings) std::cerr << "warning: " << w << "\n";
    return 0;
}

int cmd_irreducible(const RunConfig&, const ModelDocument& doc) {
    const SupportModel s = derive_support(doc.model);
    const auto cbar = compute_c_bar(s);
    const auto d = decide_irreducibility(s, cbar);
    std::printf("decision=%s\nc_bar=%s\ncase=%s\nbeta_sup=%s\nreason=%s\n", to_string(d.decision).c_str(),
                format_bound(cbar.c_bar).c_str(),
                cbar.kind == CbarCase::fixed_point ? "fixed_point" : "approached_from_above",
                format_bound(s.beta_sup).c_str(), d.reason.c_str());
    return 0;
}

int cmd_aeg(const RunConfig& cfg, const ModelDocument& doc) {
    std::vector<double> times = doc.times.empty() ? std::vector<double>{0.5, 1.0, 1.5, 2.0, 3.0} : doc.times;
    if (cfg.t_end) {
        std::vector<double> kept;
        for (double t : times)
            if (t <= *cfg.t_end) kept.push_back(t);
        times = kept;
    }
    Eigenpair pair;
    AEGOptions opt;
    opt.norm = DeviationNorm::l1;
    opt.datum = doc.initial.datum();
    const auto eo = eigen_options(cfg);
    const auto nodes = uniform_nodes(eo.x_max, eo.n_cells);
    if (const auto p = closed_form::as_binary_model(doc.model)) {
        pair = closed_form::eigenpair_on_grid(*p, nodes, doc.model.m);
    } else {
        pair = perron_eigenpair(doc.model, doc.lambda_shift.value_or(NAN), cfg.tol, eo);
    }
    const auto u0 = GridFunction::sample(nodes, doc.initial, doc.model.m);
    const auto rep = aeg_diagnostics(doc.model, pair, u0, times, opt);
    Table t{{"t", "deviation"}, {}};
    for (std::size_t i = 0; i < rep.times.size(); ++i) t.rows.push_back({rep.times[i], rep.deviations[i]});
    emit_csv(t, out_path(cfg, "aeg.csv"));
    for (std::size_t i = 0; i < rep.times.size(); ++i) std::printf("t=%.17g deviation=%.17g\n", rep.times[i], rep.deviations[i]);
    std::printf("fitted_rate=%.17g\nfitted_constant=%.17g\ndecreasing=%s\n", rep.fitted_rate, rep.fitted_constant,
                rep.decreasing ? "true" : "false");
    return 0;
}

int run(const RunConfig& cfg) {
    const ModelDocument doc = load_model_document(cfg.model_path);
    if (cfg.command == "validate") return cmd_validate(cfg, doc);
    if (cfg.command == "solve-closed") return cmd_solve_closed(cfg, doc);
    if (cfg.command == "solve-pde") return cmd_solve_pde(cfg, doc);
    if (cfg.command == "eigen") return cmd_eigen(cfg, doc);
    if (cfg.command == "irreducible") return cmd_irreducible(cfg, doc);
    if (cfg.command == "aeg") return cmd_aeg(cfg, doc);
    throw ConfigError("unknown command " + cfg.command);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gfrag: growth-fragmentation equations with renewal boundary conditions"};
    app.require_subcommand(1, 1);
    RunConfig cfg;
    double x_max = 0.0, t_end = 0.0;
    std::size_t cells = 0;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"validate", "check the standing assumptions on the kernel and coefficients"},
        {"solve-closed", "evaluate the closed-form solution of the binary model"},
        {"solve-pde", "run the finite-volume solver"},
        {"eigen", "compute the Perron eigenpair by inverse iteration"},
        {"irreducible", "decide irreducibility from the support description"},
        {"aeg", "asynchronous exponential growth diagnostics"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--model", cfg.model_path, "model document (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--x-max", x_max, "truncation of the size domain")->check(CLI::PositiveNumber);
        sub->add_option("--cells", cells, "number of grid cells")->check(CLI::PositiveNumber);
        sub->add_option("--t-end", t_end, "final time")->check(CLI::PositiveNumber);
        sub->add_option("--out", cfg.output_dir, "output directory");
        sub->add_option("--tol", cfg.tol, "iteration tolerance")->check(CLI::PositiveNumber);
        sub->callback([&cfg, name = name]() { cfg.command = name; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    auto* sub = app.get_subcommands().front();
    if (sub->count("--x-max")) cfg.x_max = x_max;
    if (sub->count("--cells")) cfg.cells = cells;
    if (sub->count("--t-end")) cfg.t_end = t_end;

    try {
        return run(cfg);
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
