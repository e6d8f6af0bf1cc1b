// One line per criterion: "[PASS] Cn ..." or "[FAIL] Cn ...". With arguments,
// only the listed criterion numbers run; exit status is nonzero if any fails.
#include <fmt/core.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "robinshape/functional.hpp"
#include "robinshape/model.hpp"
#include "robinshape/pdesolve.hpp"
#include "robinshape/radial.hpp"
#include "robinshape/shapeopt.hpp"
#include "robinshape/verify.hpp"
#include "robinshape_cli/commands.hpp"
#include "support/oracles.hpp"

using namespace robinshape;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
    std::vector<std::string> info;
};

struct Criterion {
    int id;
    std::string title;
    double time_limit;  // seconds; 0 = none
    std::function<Outcome()> run;
};

std::string run_cli(std::vector<std::string> args, int* code = nullptr) {
    std::ostringstream out, err;
    const int rc = cli::run(args, out, err);
    if (code) *code = rc;
    if (rc != 0) throw std::runtime_error(fmt::format("CLI exited with {}: {}", rc, err.str()));
    return out.str();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("missing output " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<double>> csv_rows(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || !(std::isdigit(line[0]) || line[0] == '-')) continue;
        std::vector<double> row;
        std::istringstream fields(line);
        std::string cell;
        while (std::getline(fields, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

const char* mark(bool ok) { return ok ? "ok" : "VIOLATED"; }

Outcome c1_figure1() {
    const auto curve = csv_rows(run_cli({"figure1"}));
    bool below = !curve.empty();
    double worst = -INFINITY;
    for (const auto& r : curve) {
        if (r[0] <= 1.05) continue;
        below = below && r[1] < r[0];
        worst = std::max(worst, r[1] - r[0]);
    }
    const auto pts = csv_rows(run_cli({"figure1", "--p_min", "2", "--p_max", "3", "--p_steps", "1"}));
    const double q2 = pts.at(0)[1], q3 = pts.at(1)[1];
    const bool ok2 = std::abs(q2 - 1.57735) <= 1e-4, ok3 = std::abs(q3 - 2.34891) <= 1e-4;
    return {ok2 && ok3 && below,
            fmt::format("q(2)={:.6f} [{}], q(3)={:.6f} [{}], max(q-p) on {} samples={:.4f} [{}]", q2, mark(ok2), q3,
                        mark(ok3), curve.size(), worst, mark(below))};
}

Outcome c2_alpha() {
    const auto c = iter_constants(2, 2);
    const auto o = oracle::iter_constants(2, 2);
    const bool ok = std::abs(c.alpha_iter - 5.46410) <= 1e-5 && std::abs(c.theta - 1.36603) <= 1e-5 &&
                    std::abs(c.alpha_iter - o.alpha_iter) <= 1e-12;
    double min_theta = INFINITY;
    for (int d = 2; d <= 3; ++d)
        for (int k = 1; k <= 79; ++k) min_theta = std::min(min_theta, iter_constants(1.05 + 0.05 * k, d).theta);
    const bool sweep = min_theta > 1.0;
    return {ok && sweep, fmt::format("alpha={:.6f} theta={:.6f} [{}], min theta over p in (1.05,5], d in {{2,3}}: {:.6f} [{}]",
                                     c.alpha_iter, c.theta, mark(ok), min_theta, mark(sweep))};
}

Outcome c3_eigen() {
    RadialEigenvalueQuery q;
    q.d = 1;
    const double l1 = robin_eigenvalue_ball(q).lambda;
    q.d = 2;
    const double l2 = robin_eigenvalue_ball(q).lambda;
    const double o1 = oracle::robin_interval_lambda(2, 1), o2 = oracle::robin_disc_lambda(1, 1);
    const bool ok1 = std::abs(l1 - 0.740174) <= 1e-4 && std::abs(l1 - o1) <= 1e-4;
    const bool ok2 = std::abs(l2 - 1.577) <= 2e-3 && std::abs(l2 - o2) <= 2e-3;
    return {ok1 && ok2, fmt::format("interval {:.7f} (root {:.7f}) [{}], disc {:.6f} (root {:.6f}) [{}]", l1, o1, mark(ok1),
                                    l2, o2, mark(ok2))};
}

Outcome from_suite(const SuiteResult& r) {
    Outcome o{r.passed, fmt::format("suite {} metric {:.6g}", r.suite, r.metric), r.report};
    return o;
}

Outcome c4_scaling() { return from_suite(run_scaling_suite({})); }

Outcome c5_poincare() {
    SuiteOptions opt;
    opt.trials = 1000;
    return from_suite(run_poincare_suite(opt));
}

double slab_error(int n) {
    IntegrandModel m;
    m.f = ScalarField::constant(1.0);
    const Grid g = Grid::box(1, n, 1.0);
    const auto res = solve_inner(m, ShapeMask::full(g));
    double err = 0.0;
    for (CellId c = 0; c < g.cell_count(); ++c)
        err = std::max(err, std::abs(res.field.value(c) - oracle::slab_u(1, 1, 1, g.center(c).x)));
    return err;
}

Outcome c6_inner() {
    const double e64 = slab_error(64), e128 = slab_error(128), e256 = slab_error(256);
    const double order = std::log2(e128 / e256);
    const bool slab_ok = e256 <= 1e-3 && order >= 1.0;

    IntegrandModel m;
    m.f = ScalarField::constant(1.0);
    const Grid g = Grid::box(2, 256, 2.5);
    const Point centre{1.25, 1.25};
    const ShapeMask disc = ShapeMask::ball(g, centre, 1.0);
    SolverConfig cfg;
    cfg.weights = BoundaryWeights::Corrected;
    const auto res = solve_inner(m, disc, cfg);
    double err = 0.0, peak = 0.0;
    for (CellId c : disc.cells()) {
        const Point x = g.center(c);
        const double r = std::hypot(x.x - centre.x, x.y - centre.y);
        const double exact = robin_poisson_value(2, 1.0, 1.0, 1.0, r);
        err = std::max(err, std::abs(res.field.value(c) - exact));
        peak = std::max(peak, exact);
    }
    const double rel = err / peak;
    const bool disc_ok = rel <= 0.05;
    return {slab_ok && disc_ok,
            fmt::format("slab max err n=64/128/256: {:.3e}/{:.3e}/{:.3e}, order {:.3f} [{}]; disc rel max err {:.4f} [{}]",
                        e64, e128, e256, order, mark(slab_ok), rel, mark(disc_ok))};
}

Outcome c7_energy() {
    IntegrandModel m;
    m.f = ScalarField::constant(1.0);
    const Grid g1 = Grid::box(1, 256, 1.0);
    const double slab = eval_shape_functional(m, ShapeMask::full(g1)).J;
    const double slab_exact = -7.0 / 24.0;
    const Grid g2 = Grid::box(2, 256, 2.5);
    SolverConfig cfg;
    cfg.weights = BoundaryWeights::Corrected;
    const double disc = eval_shape_functional(m, ShapeMask::ball(g2, {1.25, 1.25}, 1.0), cfg).J;
    const double disc_exact = -5.0 * std::numbers::pi / 16.0;
    const double r1 = std::abs(slab / slab_exact - 1), r2 = std::abs(disc / disc_exact - 1);
    return {r1 <= 0.01 && r2 <= 0.05, fmt::format("slab J={:.6f} vs {:.6f} (rel {:.2e}) [{}], disc J={:.6f} vs {:.6f} (rel {:.2e}) [{}]",
                                                  slab, slab_exact, r1, mark(r1 <= 0.01), disc, disc_exact, r2,
                                                  mark(r2 <= 0.05))};
}

Outcome c8_reduction() {
    SuiteOptions opt;
    opt.trials = 100;
    return from_suite(run_reduction_suite(opt));
}

IntegrandModel bump_model(double c0) {
    IntegrandModel m;
    m.f = ScalarField::box_indicator(3.0, {0.4, -1.0}, {0.6, 1.0});
    m.c0 = c0;
    return m;
}

struct Run9 {
    OptimizeResult opt;
    oracle::IntervalOptimum best;
    int symdiff;
};

Run9 run9(double c0, int n) {
    const IntegrandModel m = bump_model(c0);
    const Grid g = Grid::box(1, n, 1.0);
    std::vector<double> f(g.cell_count());
    for (CellId c = 0; c < g.cell_count(); ++c) f[c] = m.f(g.center(c));
    auto best = oracle::best_interval(f, g.h(), 0.5, 0.5, c0);
    auto opt = optimize_shape(m, ShapeMask::full(g), AnnealSchedule{});
    int diff = 0;
    for (CellId c = 0; c < g.cell_count(); ++c)
        diff += opt.mask.contains(c) != (int(c) >= best.a && int(c) < best.b);
    return {std::move(opt), best, diff};
}

Outcome c9_optimizer() {
    const Run9 r = run9(1.0, 128);
    const bool ok_j = std::abs(r.opt.J - r.best.J) <= 1e-3, ok_s = r.symdiff <= 3;
    return {ok_j && ok_s, fmt::format("annealed J={:.6g} vs enumeration J={:.6g} on cells [{},{}) [{}], symmetric difference {} cells [{}]",
                                      r.opt.J, r.best.J, r.best.a, r.best.b, mark(ok_j), r.symdiff, mark(ok_s))};
}

std::string diag_line(const Diagnostics& d, double bound) {
    return fmt::format("volume={:.4f} ess_inf={:.6g} sup={:.6g} (bound {:.4f}) perimeter={:.4g} bv={:.4g} bound_holds={}",
                       d.volume, d.ess_inf_support, d.sup, bound, d.perimeter, d.bv_norm, d.perimeter_bound_holds);
}

Outcome c10_diagnostics() {
    // Closed-form slab bound f (l^2/8 + l/(2 beta)) with l the domain diameter.
    const double bound = 3.0 * (1.0 / 8.0 + 1.0 / 2.0);
    const Diagnostics d = run9(1.0, 128).opt.diag;
    const bool pos = d.volume > 0.0 && d.ess_inf_support > 0.0;
    const bool sup_ok = std::isfinite(d.sup) && d.sup < bound;
    Outcome o{pos && sup_ok && d.perimeter_bound_holds,
              fmt::format("run 9: {}; ess_inf>0 [{}] sup<bound [{}] perimeter bound [{}]", diag_line(d, bound), mark(pos),
                          mark(sup_ok), mark(d.perimeter_bound_holds))};
    if (!pos) o.info.push_back("run 9 optimum is the empty set, so there is no support on which ess-inf can be positive");
    const Diagnostics c = run9(0.2, 128).opt.diag;
    o.info.push_back(fmt::format("companion c0=0.2 (information only): {}", diag_line(c, bound)));
    return o;
}

Outcome c11_ball() { return from_suite(run_ball_minimality_suite({})); }

Outcome c12_determinism() {
    const fs::path root = fs::temp_directory_path() / "robinshape_acceptance_c12";
    fs::remove_all(root);
    std::vector<std::string> mismatches;
    std::size_t bytes = 0;
    auto twice = [&](const std::string& label, std::vector<std::string> args, const std::vector<std::string>& files) {
        std::vector<std::string> first;
        for (int rep = 0; rep < 2; ++rep) {
            const fs::path dir = root / fmt::format("{}{}", label, rep);
            auto a = args;
            a.push_back("--out");
            a.push_back(dir.string());
            run_cli(a);
            for (std::size_t k = 0; k < files.size(); ++k) {
                const std::string text = slurp(dir / files[k]);
                if (rep == 0) {
                    first.push_back(text);
                    bytes += text.size();
                } else if (text != first[k]) {
                    mismatches.push_back(label + "/" + files[k]);
                }
            }
        }
    };
    twice("poincare", {"verify", "poincare", "--seed", "1", "--trials", "1000"}, {"verify_poincare.csv"});
    twice("optimize",
          {"optimize", "--d", "1", "--n", "128", "--side", "1", "--f", "3", "--f_region", "interval:0.4:0.6", "--c0", "1",
           "--init", "full", "--seed", "1"},
          {"trace.csv", "mask.txt", "field.txt", "diagnostics.txt"});
    fs::remove_all(root);
    return {mismatches.empty(), fmt::format("5 files compared ({} bytes per run), mismatches: {}", bytes,
                                            mismatches.empty() ? std::string("none") : mismatches.front())};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all = {
        {1, "exponent threshold curve", 1, c1_figure1},
        {2, "iteration constants", 1, c2_alpha},
        {3, "Robin eigenvalues vs transcendental roots", 5, c3_eigen},
        {4, "eigenvalue scaling identity and monotonicity", 30, c4_scaling},
        {5, "Poincare inequality suite", 60, c5_poincare},
        {6, "inner solver vs closed form", 60, c6_inner},
        {7, "energy values", 60, c7_energy},
        {8, "reduction inequality", 30, c8_reduction},
        {9, "optimizer vs exhaustive enumeration", 120, c9_optimizer},
        {10, "optimum diagnostics", 0, c10_diagnostics},
        {11, "ball minimality", 120, c11_ball},
        {12, "determinism", 0, c12_determinism},
    };
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::stoi(argv[i]));

    int failures = 0;
    for (const auto& c : all) {
        if (!wanted.empty() && !wanted.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, fmt::format("exception: {}", e.what())};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = c.time_limit <= 0 || secs < c.time_limit;
        const bool pass = o.pass && in_time;
        failures += !pass;
        const std::string timing = c.time_limit > 0 ? fmt::format("{:.2f} s < {} s [{}]", secs, c.time_limit, mark(in_time))
                                                    : fmt::format("{:.2f} s", secs);
        fmt::print("[{}] C{} {}: {}; {}\n", pass ? "PASS" : "FAIL", c.id, c.title, o.detail, timing);
        for (const auto& line : o.info) fmt::print("       {}\n", line);
    }
    return failures == 0 ? 0 : 1;
}
