#include "robinshape/pdesolve.hpp"

#include <algorithm>
#include <functional>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "robinshape/errors.hpp"

namespace robinshape {

void SolverConfig::validate() const {
    if (!(tol > 0.0)) throw std::invalid_argument("SolverConfig: tol must be > 0");
    if (max_iter < 0) throw std::invalid_argument("SolverConfig: max_iter must be >= 0");
    if (eta == 0.0 && mode == SolverMode::NonlinearDescent)
        throw std::invalid_argument("SolverConfig: eta = 0 is only allowed in linear mode");
}

namespace {

/// Unknowns of a fixed-support problem: the cells of Omega, the faces coupling
/// them, and the boundary sides carrying the Robin term.
struct Layout {
    std::vector<CellId> cells;
    std::vector<int> index;  // cell -> unknown, -1 outside Omega
    struct Link {
        int a;
        int b;
    };
    std::vector<Link> links;
    struct Side {
        int unknown;
        double weight;
        Point x;
    };
    std::vector<Side> sides;
};

Layout make_layout(const ShapeMask& mask, BoundaryWeights weights) {
    const Grid& g = mask.grid();
    Layout lay;
    lay.cells = mask.cells();
    lay.index.assign(g.cell_count(), -1);
    for (std::size_t k = 0; k < lay.cells.size(); ++k) lay.index[lay.cells[k]] = static_cast<int>(k);
    for (FaceId f = 0; f < g.face_count(); ++f) {
        if (!mask.interior_face(f)) continue;
        const auto cells = g.face_cells(f);
        lay.links.push_back({lay.index[*cells[0]], lay.index[*cells[1]]});
    }
    for (const auto& side : boundary_faces(mask, weights))
        lay.sides.push_back({lay.index[side.cell], side.weight, g.face_center(side.face)});
    return lay;
}

double power(double x, double e) { return e == 2.0 ? x * x : std::pow(x, e); }

/// Compressed sparse row matrix, symmetric by construction.
struct Csr {
    std::vector<std::size_t> row_start;
    std::vector<int> col;
    std::vector<double> val;
    std::vector<double> diag;

    std::size_t rows() const { return diag.size(); }

    void multiply(const std::vector<double>& x, std::vector<double>& y) const {
        for (std::size_t i = 0; i < rows(); ++i) {
            double acc = 0.0;
            for (std::size_t k = row_start[i]; k < row_start[i + 1]; ++k) acc += val[k] * x[col[k]];
            y[i] = acc;
        }
    }
};

/// Quadratic form  sum_links c_link (u_a - u_b)^2 + sum_sides c_side(x) u^2  as a matrix
/// M with u^T M u equal to the form.
Csr assemble(const Layout& lay, double link_coeff, const std::function<double(const Layout::Side&)>& side_coeff) {
    const std::size_t n = lay.cells.size();
    std::vector<std::vector<std::pair<int, double>>> rows(n);
    std::vector<double> diag(n, 0.0);
    for (const auto& l : lay.links) {
        diag[l.a] += link_coeff;
        diag[l.b] += link_coeff;
        rows[l.a].emplace_back(l.b, -link_coeff);
        rows[l.b].emplace_back(l.a, -link_coeff);
    }
    for (const auto& s : lay.sides) {
        const double c = side_coeff(s);
        if (c < 0.0) throw std::invalid_argument("assemble: negative Robin coefficient gives an indefinite system");
        diag[s.unknown] += c;
    }
    Csr m;
    m.diag = diag;
    m.row_start.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        std::sort(rows[i].begin(), rows[i].end());
        m.row_start[i + 1] = m.row_start[i] + rows[i].size() + 1;
    }
    m.col.reserve(m.row_start[n]);
    m.val.reserve(m.row_start[n]);
    for (std::size_t i = 0; i < n; ++i) {
        bool placed = false;
        for (const auto& [c, v] : rows[i]) {
            if (!placed && c > static_cast<int>(i)) {
                m.col.push_back(static_cast<int>(i));
                m.val.push_back(diag[i]);
                placed = true;
            }
            m.col.push_back(c);
            m.val.push_back(v);
        }
        if (!placed) {
            m.col.push_back(static_cast<int>(i));
            m.val.push_back(diag[i]);
        }
    }
    return m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

struct CgOutcome {
    int iterations = 0;
    double residual = 0.0;
};

/// Conjugate gradients from a zero start; stops at ||r|| <= tol ||b||.
CgOutcome conjugate_gradient(const Csr& A, const std::vector<double>& b, std::vector<double>& x, double tol,
                             int max_iter, bool jacobi) {
    const std::size_t n = b.size();
    x.assign(n, 0.0);
    const double bnorm = std::sqrt(dot(b, b));
    if (bnorm == 0.0) return {0, 0.0};
    std::vector<double> r = b, z(n), p(n), Ap(n);
    auto precondition = [&] {
        for (std::size_t i = 0; i < n; ++i) z[i] = jacobi ? r[i] / A.diag[i] : r[i];
    };
    precondition();
    p = z;
    double rz = dot(r, z);
    double rnorm = bnorm;
    for (int k = 1; k <= max_iter; ++k) {
        A.multiply(p, Ap);
        const double pAp = dot(p, Ap);
        if (!(pAp > 0.0)) throw NumericalFailure("conjugate_gradient: operator not positive definite", rnorm / bnorm);
        const double alpha = rz / pAp;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        rnorm = std::sqrt(dot(r, r));
        if (rnorm <= tol * bnorm) return {k, rnorm / bnorm};
        precondition();
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw NumericalFailure(fmt::format("conjugate_gradient: no convergence in {} iterations (relative residual {:.3e})",
                                       max_iter, rnorm / bnorm),
                           rnorm / bnorm);
}

SbvField make_field(const ShapeMask& mask, const Layout& lay, const std::vector<double>& u) {
    SbvField field(mask.grid());
    for (std::size_t k = 0; k < lay.cells.size(); ++k) field.set_value(lay.cells[k], u[k]);
    const Grid& g = mask.grid();
    for (FaceId f = 0; f < g.face_count(); ++f) {
        const auto cells = g.face_cells(f);
        const bool in0 = cells[0] && mask.contains(*cells[0]);
        const bool in1 = cells[1] && mask.contains(*cells[1]);
        if (in0 != in1 || (in0 && in1 && mask.is_cut(f))) field.set_jump(f);
    }
    // An interior cell may come out exactly zero; keep the support-boundary invariant.
    field.flag_support_boundary();
    return field;
}

/// eta-regularised energy on the unknown vector.
struct NonlinearEnergy {
    const IntegrandModel& model;
    const Layout& lay;
    double h;
    double hd;
    double kappa;
    double eta;
    std::vector<double> source;  // f h^d per unknown
    std::vector<double> side_coeff;

    NonlinearEnergy(const IntegrandModel& m, const Layout& l, const Grid& g, double eta_)
        : model(m), lay(l), h(g.h()), hd(g.cell_volume()), kappa(m.gradient_coefficient()), eta(eta_) {
        source.resize(l.cells.size());
        for (std::size_t k = 0; k < l.cells.size(); ++k) source[k] = m.f(g.center(l.cells[k])) * hd;
        side_coeff.resize(l.sides.size());
        for (std::size_t k = 0; k < l.sides.size(); ++k) side_coeff[k] = m.boundary_coefficient(l.sides[k].x) * l.sides[k].weight;
    }

    double value(const std::vector<double>& u) const {
        const double p = model.p;
        const double q = model.q;
        const double e2 = eta * eta;
        double acc = 0.0;
        for (const auto& l : lay.links) {
            const double t = (u[l.a] - u[l.b]) / h;
            acc += kappa * hd * std::pow(t * t + e2, 0.5 * p);
        }
        for (std::size_t k = 0; k < lay.sides.size(); ++k) {
            const double v = u[lay.sides[k].unknown];
            acc += side_coeff[k] * std::pow(v * v + e2, 0.5 * q);
        }
        for (std::size_t k = 0; k < u.size(); ++k) acc -= source[k] * u[k];
        return acc;
    }

    void gradient(const std::vector<double>& u, std::vector<double>& g) const {
        const double p = model.p;
        const double q = model.q;
        const double e2 = eta * eta;
        g.assign(u.size(), 0.0);
        for (const auto& l : lay.links) {
            const double t = (u[l.a] - u[l.b]) / h;
            const double flux = kappa * hd * p * std::pow(t * t + e2, 0.5 * p - 1.0) * t / h;
            g[l.a] += flux;
            g[l.b] -= flux;
        }
        for (std::size_t k = 0; k < lay.sides.size(); ++k) {
            const int i = lay.sides[k].unknown;
            const double v = u[i];
            g[i] += side_coeff[k] * q * std::pow(v * v + e2, 0.5 * q - 1.0) * v;
        }
        for (std::size_t k = 0; k < u.size(); ++k) g[k] -= source[k];
    }
};

double auto_eta(const IntegrandModel& model, const ShapeMask& mask) {
    const Grid& g = mask.grid();
    double fmax = 0.0;
    for (CellId c : mask.cells()) fmax = std::max(fmax, std::abs(model.f(g.center(c))));
    const double diam = std::pow(std::max(mask.volume(), g.cell_volume()), 1.0 / g.d());
    const double scale = std::pow(fmax * diam / (model.gradient_coefficient() * model.p), 1.0 / (model.p - 1.0));
    return std::max(1e-6 * scale, 1e-12);
}

struct NonlinearOutcome {
    std::vector<double> u;
    int iterations = 0;
    double residual = 0.0;
    std::vector<double> trace;
};

/// Hessian of the regularised energy: a weighted graph Laplacian over the
/// links plus the diagonal Robin curvature. SPD since every Omega has
/// boundary sides (the ghost layer outside D counts as exterior).
Csr hessian(const NonlinearEnergy& E, const std::vector<double>& u) {
    const double p = E.model.p;
    const double q = E.model.q;
    const double e2 = E.eta * E.eta;
    const Layout& lay = E.lay;
    const std::size_t n = lay.cells.size();
    std::vector<std::vector<std::pair<int, double>>> rows(n);
    std::vector<double> diag(n, 0.0);
    for (const auto& l : lay.links) {
        const double t = (u[l.a] - u[l.b]) / E.h;
        const double s = t * t + e2;
        const double w = E.kappa * E.hd / (E.h * E.h) * p * std::pow(s, 0.5 * p - 2.0) * ((p - 1.0) * t * t + e2);
        diag[l.a] += w;
        diag[l.b] += w;
        rows[l.a].emplace_back(l.b, -w);
        rows[l.b].emplace_back(l.a, -w);
    }
    for (std::size_t k = 0; k < lay.sides.size(); ++k) {
        const int i = lay.sides[k].unknown;
        const double v = u[i];
        const double s = v * v + e2;
        diag[i] += E.side_coeff[k] * q * std::pow(s, 0.5 * q - 2.0) * ((q - 1.0) * v * v + e2);
    }
    Csr m;
    m.diag = diag;
    m.row_start.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        std::sort(rows[i].begin(), rows[i].end());
        m.row_start[i + 1] = m.row_start[i] + rows[i].size() + 1;
    }
    for (std::size_t i = 0; i < n; ++i) {
        m.col.push_back(static_cast<int>(i));
        m.val.push_back(diag[i]);
        for (const auto& [c, v] : rows[i]) {
            m.col.push_back(c);
            m.val.push_back(v);
        }
    }
    return m;
}

/// Descent on the regularised energy from u = 0. Directions solve the Newton
/// system H d = -g inexactly by Jacobi-preconditioned CG (steepest descent if
/// that fails); steps are Armijo-backtracked from 1, so the energy decreases
/// monotonically along the iterates.
NonlinearOutcome nonlinear_descent(const NonlinearEnergy& E, double tol, int max_iter, bool record) {
    const std::size_t n = E.lay.cells.size();
    NonlinearOutcome out;
    out.u.assign(n, 0.0);
    const double gscale = std::sqrt(dot(E.source, E.source));
    if (gscale == 0.0) return out;  // f = 0 on Omega: u = 0 is the minimiser

    constexpr double kArmijo = 1e-4;
    std::vector<double>& u = out.u;
    std::vector<double> g, d(n), rhs(n), trial(n);
    E.gradient(u, g);
    double energy = E.value(u);
    if (record) out.trace.push_back(energy);

    for (int it = 1; it <= max_iter; ++it) {
        out.iterations = it;
        const double gnorm = std::sqrt(dot(g, g));
        out.residual = gnorm / gscale;
        if (out.residual <= tol) return out;

        for (std::size_t i = 0; i < n; ++i) rhs[i] = -g[i];
        const double forcing = std::min(0.1, std::sqrt(out.residual));
        try {
            conjugate_gradient(hessian(E, u), rhs, d, forcing, static_cast<int>(10 * n + 100), true);
        } catch (const NumericalFailure&) {
            d = rhs;
        }
        double slope = dot(g, d);
        if (!(slope < 0.0)) {
            d = rhs;
            slope = -gnorm * gnorm;
        }

        double step = 1.0;
        double trial_energy = energy;
        bool accepted = false;
        // Once the predicted decrease is below the rounding level of the
        // energy, Armijo cannot discriminate; take the full Newton step.
        const bool local = -slope <= 1e-13 * std::max(std::abs(energy), 1e-300);
        if (local) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = u[i] + d[i];
            trial_energy = E.value(trial);
            accepted = true;
        }
        for (int halvings = 0; !accepted && halvings < 200; ++halvings, step *= 0.5) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = u[i] + step * d[i];
            trial_energy = E.value(trial);
            if (trial_energy <= energy + kArmijo * step * slope) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (out.residual <= 1e-6) return out;  // stalled at rounding level
            throw NumericalFailure(
                fmt::format("nonlinear_descent: line search failed (relative gradient {:.3e})", out.residual),
                out.residual);
        }
        u.swap(trial);
        energy = trial_energy;
        if (record) out.trace.push_back(energy);
        E.gradient(u, g);
    }
    throw NumericalFailure(fmt::format("nonlinear_descent: no convergence in {} iterations (relative gradient {:.3e})",
                                       max_iter, out.residual),
                           out.residual);
}

std::vector<double> unknowns_from(const Layout& lay, const SbvField& field) {
    std::vector<double> u(lay.cells.size());
    for (std::size_t k = 0; k < lay.cells.size(); ++k) u[k] = field.value(lay.cells[k]);
    return u;
}

}  // namespace

SolveResult solve_inner(const IntegrandModel& model, const ShapeMask& mask, const SolverConfig& config) {
    config.validate();
    if (mask.empty()) throw std::invalid_argument("solve_inner: empty mask");
    const Grid& g = mask.grid();
    const BoundaryWeights weights = config.weights.value_or(default_weights(g.d()));
    const Layout lay = make_layout(mask, weights);
    const std::size_t n = lay.cells.size();

    SolverMode mode = config.mode;
    if (mode == SolverMode::Auto) mode = model.quadratic() ? SolverMode::LinearCG : SolverMode::NonlinearDescent;
    if (mode == SolverMode::LinearCG && !model.quadratic())
        throw std::invalid_argument("solve_inner: linear CG requires p = q = 2");

    SolveResult res{SbvField(g), 0, 0.0, 0.0, SolverMode::LinearCG, 0.0, {}};
    res.mode_used = mode;
    std::vector<double> u;
    if (mode == SolverMode::LinearCG) {
        const double kappa = model.gradient_coefficient();
        // Gradient of k sum (du/h)^2 h^d + sum gamma w u^2 - sum f u h^d is A u - b with
        // A = 2 x (quadratic-form matrix).
        const Csr A = assemble(lay, 2.0 * kappa * std::pow(g.h(), g.d() - 2),
                               [&](const Layout::Side& s) { return 2.0 * model.boundary_coefficient(s.x) * s.weight; });
        std::vector<double> b(n);
        for (std::size_t k = 0; k < n; ++k) b[k] = model.f(g.center(lay.cells[k])) * g.cell_volume();
        const int cap = config.max_iter > 0 ? config.max_iter : static_cast<int>(10 * g.cell_count());
        const CgOutcome cg = conjugate_gradient(A, b, u, config.tol, cap, config.diagonal_preconditioner);
        res.iterations = cg.iterations;
        res.residual = cg.residual;
    } else {
        for (const auto& s : lay.sides)
            if (model.boundary_coefficient(s.x) < 0.0)
                throw std::invalid_argument("solve_inner: negative Robin coefficient");
        const double eta = config.eta >= 0.0 ? config.eta : auto_eta(model, mask);
        res.eta_used = eta;
        const NonlinearEnergy E(model, lay, g, eta);
        const double tol = std::max(config.tol, 1e-8);
        const int cap = config.max_iter > 0 ? config.max_iter : static_cast<int>(200 * g.cell_count());
        NonlinearOutcome nl = nonlinear_descent(E, tol, cap, config.record_trace);
        u = std::move(nl.u);
        res.iterations = nl.iterations;
        res.residual = nl.residual;
        res.energy_trace = std::move(nl.trace);
    }
    res.field = make_field(mask, lay, u);
    res.energy = energy_of(model, mask, res.field, weights);
    return res;
}

double energy_of(const IntegrandModel& model, const ShapeMask& mask, const SbvField& field, BoundaryWeights weights) {
    const Grid& g = mask.grid();
    if (mask.empty()) return 0.0;
    const Layout lay = make_layout(mask, weights);
    const double kappa = model.gradient_coefficient();
    double acc = 0.0;
    for (const auto& l : lay.links) {
        const double t = std::abs(field.value(lay.cells[l.a]) - field.value(lay.cells[l.b])) / g.h();
        acc += kappa * power(t, model.p) * g.cell_volume();
    }
    for (const auto& s : lay.sides) acc += eval_g(model, s.x, field.value(lay.cells[s.unknown])) * s.weight;
    for (CellId c : lay.cells) acc += (model.c0 - model.f(g.center(c)) * field.value(c)) * g.cell_volume();
    return acc;
}

double regularized_energy(const IntegrandModel& model, const ShapeMask& mask, const SbvField& field,
                          BoundaryWeights weights, double eta) {
    const Layout lay = make_layout(mask, weights);
    const NonlinearEnergy E(model, lay, mask.grid(), eta);
    return E.value(unknowns_from(lay, field)) + model.c0 * mask.volume();
}

std::vector<double> regularized_gradient(const IntegrandModel& model, const ShapeMask& mask, const SbvField& field,
                                         BoundaryWeights weights, double eta) {
    const Layout lay = make_layout(mask, weights);
    const NonlinearEnergy E(model, lay, mask.grid(), eta);
    std::vector<double> grad;
    E.gradient(unknowns_from(lay, field), grad);
    return grad;
}

GridEigenResult robin_eigenvalue_grid(const ShapeMask& mask, double b, const SolverConfig& config) {
    config.validate();
    if (mask.empty()) throw std::invalid_argument("robin_eigenvalue_grid: empty mask");
    if (!(b > 0.0)) throw std::invalid_argument("robin_eigenvalue_grid: b must be > 0");
    const Grid& g = mask.grid();
    const BoundaryWeights weights = config.weights.value_or(default_weights(g.d()));
    const Layout lay = make_layout(mask, weights);
    const std::size_t n = lay.cells.size();
    const Csr A = assemble(lay, std::pow(g.h(), g.d() - 2), [&](const Layout::Side& s) { return b * s.weight; });
    const double hd = g.cell_volume();
    const int cg_cap = config.max_iter > 0 ? config.max_iter : static_cast<int>(10 * g.cell_count());

    std::vector<double> u(n, 1.0), rhs(n), v, Au(n);
    double lambda = std::numeric_limits<double>::infinity();
    GridEigenResult res{0.0, SbvField(g), 0};
    constexpr int kMaxPower = 500;
    for (int it = 1; it <= kMaxPower; ++it) {
        for (std::size_t k = 0; k < n; ++k) rhs[k] = hd * u[k];
        conjugate_gradient(A, rhs, v, 1e-12, cg_cap, true);
        const double norm = std::sqrt(hd * dot(v, v));
        for (std::size_t k = 0; k < n; ++k) u[k] = v[k] / norm;
        A.multiply(u, Au);
        const double next = dot(u, Au);  // u^T M u = 1
        res.iterations = it;
        const bool done = std::abs(lambda - next) <= 1e-11 * next;
        lambda = next;
        if (done) break;
        if (it == kMaxPower)
            throw NumericalFailure("robin_eigenvalue_grid: power iteration did not converge", std::abs(lambda - next));
    }
    res.lambda = lambda;
    res.field = make_field(mask, lay, u);
    return res;
}

}  // namespace robinshape
