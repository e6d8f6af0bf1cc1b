#include "robinshape_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "robinshape/config.hpp"
#include "robinshape/functional.hpp"
#include "robinshape/radial.hpp"
#include "robinshape/shapeopt.hpp"
#include "robinshape/verify.hpp"

namespace robinshape::cli {
namespace {

namespace fs = std::filesystem;

/// Options shared by every subcommand.
struct Common {
    std::string config_path;
    std::string out_dir;
    std::map<std::string, std::string> overrides;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config_path, "key=value config file")->check(CLI::ExistingFile);
    sub->add_option("--out", c.out_dir, "output directory (default: CSV on stdout)");
    for (const auto& key : ExperimentConfig::keys())
        sub->add_option("--" + key, c.overrides[key], fmt::format("override config key '{}'", key));
}

ExperimentConfig resolve(const Common& c, CLI::App* sub, ExperimentConfig base) {
    if (!c.config_path.empty()) base = load_config(c.config_path, base);
    for (const auto& [key, value] : c.overrides)
        if (sub->count("--" + key) > 0) base.set(key, value);
    base.validate();
    return base;
}

/// Writes `text` to out_dir/name, or to `out` when no directory was given.
void emit(const Common& c, const std::string& name, const std::string& text, std::ostream& out) {
    if (c.out_dir.empty()) {
        out << text;
        return;
    }
    fs::create_directories(c.out_dir);
    std::ofstream f(fs::path(c.out_dir) / name, std::ios::binary);
    if (!f) throw std::runtime_error(fmt::format("cannot write {}", (fs::path(c.out_dir) / name).string()));
    f << text;
}

std::ostream& info(const Common& c, std::ostream& out, std::ostream& err) { return c.out_dir.empty() ? err : out; }

RadialEigenvalueQuery eig_query(const ExperimentConfig& cfg, double R, double b) {
    RadialEigenvalueQuery q;
    q.d = cfg.d;
    q.R = R;
    q.b = b;
    q.grad_exp = q.bdry_exp = cfg.q;
    q.denom_exp = cfg.alpha > 0.0 ? cfg.alpha : cfg.q;
    q.mesh_n = cfg.mesh_n;
    if (cfg.method == "shooting") q.method = RadialEigenvalueQuery::Method::Shooting;
    if (cfg.method == "rayleigh") q.method = RadialEigenvalueQuery::Method::RayleighDescent;
    return q;
}

int cmd_eig(const ExperimentConfig& cfg, const std::string& sweep, const Common& c, std::ostream& out) {
    std::string csv = "# robin-shape v1 eig\nR,b,d,grad_exp,bdry_exp,denom_exp,lambda,method,residual\n";
    auto row = [&](double R, double b) {
        const auto q = eig_query(cfg, R, b);
        const auto s = robin_eigenvalue_ball(q);
        csv += fmt::format("{:.17g},{:.17g},{},{},{},{},{:.17g},{},{:.3e}\n", R, b, q.d, q.grad_exp, q.bdry_exp,
                           q.denom_exp, s.lambda, to_string(s.method), s.residual);
    };
    if (sweep == "none") {
        row(cfg.R, cfg.b);
    } else if (sweep == "R") {
        for (int i = 1; i <= cfg.samples; ++i) row(cfg.R * i / cfg.samples, cfg.b);
    } else if (sweep == "b") {
        for (int i = 1; i <= cfg.samples; ++i) row(cfg.R, cfg.b * i / cfg.samples);
    } else {
        // Pairs of rows whose lambdas obey lambda(tR, b) = t^-q lambda(R, b t^(q-1)).
        for (double t : {0.5, 2.0, 3.0}) {
            row(t * cfg.R, cfg.b);
            row(cfg.R, cfg.b * std::pow(t, cfg.q - 1.0));
        }
    }
    emit(c, "eig.csv", csv, out);
    return Ok;
}

int cmd_radial(const ExperimentConfig& cfg, const Common& c, std::ostream& out, std::ostream& err) {
    const auto sol = robin_poisson_ball(cfg.d, cfg.R, cfg.f, cfg.beta, cfg.samples);
    std::string csv = "# robin-shape v1 radial\nr,u\n";
    for (std::size_t i = 0; i < sol.r.size(); ++i) csv += fmt::format("{:.17g},{:.17g}\n", sol.r[i], sol.u[i]);
    emit(c, "radial.csv", csv, out);
    info(c, out, err) << fmt::format("energy = {:.17g}\n", sol.lambda);
    return Ok;
}

std::string cells_csv(const std::string& command, const ShapeMask& mask, const SbvField& field) {
    const Grid& g = field.grid();
    std::string csv = fmt::format("# robin-shape v1 {}\ni,j,x,y,u\n", command);
    for (CellId cell : mask.cells()) {
        const auto [i, j] = g.coords(cell);
        const Point x = g.center(cell);
        csv += fmt::format("{},{},{:.17g},{:.17g},{:.17g}\n", i, j, x.x, x.y, field.value(cell));
    }
    return csv;
}

std::string field_text(const SbvField& field, const ShapeMask& mask) {
    std::ostringstream os;
    write_field(os, field, mask);
    return os.str();
}

int cmd_solve(const ExperimentConfig& cfg, const Common& c, std::ostream& out, std::ostream& err) {
    const IntegrandModel model = make_model(cfg);
    const Grid grid = make_grid(cfg);
    const ShapeMask mask = make_init_mask(cfg, grid);
    const SolveResult res = solve_inner(model, mask, make_solver(cfg));
    emit(c, "solve.csv", cells_csv("solve", mask, res.field), out);
    if (!c.out_dir.empty()) emit(c, "field.txt", field_text(res.field, mask), out);
    info(c, out, err) << fmt::format("energy = {:.17g}\niterations = {}\nresidual = {:.3e}\n", res.energy,
                                     res.iterations, res.residual);
    return Ok;
}

int cmd_optimize(const ExperimentConfig& cfg, const Common& c, std::ostream& out, std::ostream& err) {
    const IntegrandModel model = make_model(cfg);
    const Grid grid = make_grid(cfg);
    const ShapeMask init = make_init_mask(cfg, grid);
    OptimizeResult res = [&] {
        try {
            return optimize_shape(model, init, make_schedule(cfg), make_solver(cfg));
        } catch (const OptimizationAborted& e) {
            emit(c, "trace.csv", e.trace.to_csv(), out);
            throw;
        }
    }();
    emit(c, "trace.csv", res.trace.to_csv(), out);
    if (!c.out_dir.empty()) {
        emit(c, "mask.txt", field_text(SbvField(grid), res.mask), out);
        emit(c, "field.txt", field_text(res.field, res.mask), out);
        emit(c, "diagnostics.txt", res.diag.to_text(), out);
    }
    info(c, out, err) << res.diag.to_text();
    return Ok;
}

int cmd_verify(const ExperimentConfig& cfg, const Common& c, std::ostream& out, std::ostream& err) {
    SuiteOptions opt;
    opt.seed = cfg.seed;
    opt.trials = cfg.trials;
    opt.out_dir = c.out_dir;
    const SuiteResult res = run_suite(cfg.suite, opt);
    emit(c, fmt::format("verify_{}.csv", cfg.suite), res.csv, out);
    auto& log = info(c, out, err);
    for (const auto& line : res.report) log << line << '\n';
    for (const auto& f : res.failure_files) log << "failing instance written to " << f << '\n';
    log << fmt::format("suite {}: {}\n", res.suite, res.passed ? "PASS" : "FAIL");
    return res.passed ? Ok : PropertyFailure;
}

int cmd_figure1(const ExperimentConfig& cfg, const Common& c, std::ostream& out) {
    std::string csv = "# robin-shape v1 figure1\np,q_threshold,p_upper_line\n";
    for (int i = 0; i <= cfg.p_steps; ++i) {
        const double p = cfg.p_min + (cfg.p_max - cfg.p_min) * i / cfg.p_steps;
        csv += fmt::format("{:.17g},{:.17g},{:.17g}\n", p, exponent_threshold(p, cfg.d), p);
    }
    emit(c, "figure1.csv", csv, out);
    return Ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"robin-shape: Robin free-boundary shape optimisation on a grid"};
    app.require_subcommand(1);

    Common c_eig, c_radial, c_solve, c_opt, c_verify, c_fig;
    std::string sweep = "none";
    auto* eig = app.add_subcommand("eig", "first Robin eigenvalue of a ball");
    add_common(eig, c_eig);
    eig->add_option("--sweep", sweep, "none | R | b | scaling")
        ->check(CLI::IsMember({"none", "R", "b", "scaling"}));
    auto* radial = app.add_subcommand("radial", "closed-form Robin torsion profile of a ball");
    add_common(radial, c_radial);
    auto* solve = app.add_subcommand("solve", "inner Robin problem on a fixed shape");
    add_common(solve, c_solve);
    auto* optimize = app.add_subcommand("optimize", "anneal the shape functional");
    add_common(optimize, c_opt);
    auto* verify = app.add_subcommand("verify", "run a property suite");
    add_common(verify, c_verify);
    std::string suite_pos;
    verify->add_option("suite_name", suite_pos, "poincare | reduction | scaling | ball-minimality");
    auto* figure1 = app.add_subcommand("figure1", "admissible exponent range");
    add_common(figure1, c_fig);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, e2;
        const int code = app.exit(e, o, e2);
        out << o.str();
        err << e2.str();
        return code == 0 ? Ok : Usage;
    }

    try {
        if (*eig) return cmd_eig(resolve(c_eig, eig, {}), sweep, c_eig, out);
        if (*radial) return cmd_radial(resolve(c_radial, radial, {}), c_radial, out, err);
        if (*solve) return cmd_solve(resolve(c_solve, solve, {}), c_solve, out, err);
        if (*optimize) return cmd_optimize(resolve(c_opt, optimize, {}), c_opt, out, err);
        if (*verify) {
            ExperimentConfig cfg = resolve(c_verify, verify, {});
            if (!suite_pos.empty()) cfg.set("suite", suite_pos);
            return cmd_verify(cfg, c_verify, out, err);
        }
        ExperimentConfig fig_base;
        fig_base.d = 2;
        return cmd_figure1(resolve(c_fig, figure1, fig_base), c_fig, out);
    } catch (const NumericalFailure& e) {
        err << fmt::format("numerical failure: {} (residual {:.3e})\n", e.what(), e.residual());
        return Numerical;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return Usage;
    } catch (const InvariantViolation& e) {
        err << "invariant violation: " << e.what() << '\n';
        return Numerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return Numerical;
    }
}

}  // namespace robinshape::cli
