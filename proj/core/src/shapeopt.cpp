#include "robinshape/shapeopt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include <fmt/format.h>

#include "robinshape/functional.hpp"
#include "robinshape/rng.hpp"

namespace robinshape {

void AnnealSchedule::validate() const {
    if (!(T0 >= 0.0)) throw std::invalid_argument("AnnealSchedule: T0 must be >= 0");
    if (!(cooling > 0.0 && cooling < 1.0)) throw std::invalid_argument("AnnealSchedule: cooling must be in (0, 1)");
    if (sweeps < 0) throw std::invalid_argument("AnnealSchedule: sweeps must be >= 0");
    if (resolve_every < 1) throw std::invalid_argument("AnnealSchedule: resolve_every must be >= 1");
    if (!(teleport_fraction >= 0.0 && teleport_fraction <= 1.0))
        throw std::invalid_argument("AnnealSchedule: teleport_fraction must be in [0, 1]");
}

std::string OptimizationTrace::to_csv() const {
    std::string out = "# robin-shape v1 optimize\nsweep,J,volume,perimeter,ess_inf,sup,accepted_flips,components\n";
    for (const auto& r : records)
        out += fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{},{}\n", r.sweep, r.J, r.volume, r.perimeter,
                           r.ess_inf, r.sup, r.accepted_flips, r.components);
    return out;
}

std::string Diagnostics::to_text() const {
    return fmt::format(
        "J = {:.17g}\nvolume = {:.17g}\nperimeter = {:.17g}\ness_inf_support = {:.17g}\nsup = {:.17g}\n"
        "bv_norm = {:.17g}\ncomponents = {}\nperimeter_bound_holds = {}\n",
        J, volume, perimeter, ess_inf_support, sup, bv_norm, components, perimeter_bound_holds ? "true" : "false");
}

Diagnostics diagnostics(const IntegrandModel&, const ShapeMask& mask, const SbvField& field, double J,
                        BoundaryWeights weights) {
    Diagnostics d;
    d.J = J;
    d.volume = mask.volume();
    d.components = mask.components();
    if (mask.empty()) return d;
    d.ess_inf_support = std::numeric_limits<double>::infinity();
    d.sup = -std::numeric_limits<double>::infinity();
    for (CellId c : mask.cells()) {
        d.ess_inf_support = std::min(d.ess_inf_support, field.value(c));
        d.sup = std::max(d.sup, field.value(c));
    }
    d.perimeter = perimeter(mask, weights);
    d.bv_norm = discrete_bv_norm(field, weights);
    d.perimeter_bound_holds = d.ess_inf_support > 0.0 && d.perimeter <= d.bv_norm / d.ess_inf_support * (1.0 + 1e-12);
    return d;
}

double flip_delta(const IntegrandModel& model, const ShapeMask& mask, const std::vector<double>& frozen, CellId c,
                  double* value) {
    const Grid& g = mask.grid();
    const double hd = g.cell_volume();
    const double w = g.face_measure();
    const double kappa = model.gradient_coefficient();
    const Point xc = g.center(c);
    const bool inside = mask.contains(c);

    struct Nb {
        double u;
        Point x;
    };
    std::vector<Nb> in_nbs;
    std::vector<Point> out_faces;
    for (int axis = 0; axis < g.d(); ++axis)
        for (int side = 0; side < 2; ++side) {
            const FaceId f = g.face_of(c, axis, side);
            const auto nb = g.neighbor(c, axis, side);
            if (nb && mask.contains(*nb) && !mask.is_cut(f))
                in_nbs.push_back({frozen[*nb], g.face_center(f)});
            else
                out_faces.push_back(g.face_center(f));
        }

    double v;
    if (inside) {
        v = frozen[c];
    } else if (in_nbs.empty()) {
        v = 0.0;
    } else if (model.quadratic()) {
        // Minimiser of the local quadratic energy with frozen neighbours.
        const double link = 2.0 * kappa * hd / (g.h() * g.h());
        double num = model.f(xc) * hd;
        double den = 0.0;
        for (const auto& nb : in_nbs) {
            num += link * nb.u;
            den += link;
        }
        for (const auto& x : out_faces) den += 2.0 * model.boundary_coefficient(x) * w;
        v = num / den;
    } else {
        v = 0.0;
        for (const auto& nb : in_nbs) v += nb.u;
        v /= static_cast<double>(in_nbs.size());
    }
    if (value) *value = v;

    double local = (model.c0 - model.f(xc) * v) * hd;
    for (const auto& nb : in_nbs) {
        const double t = std::abs(v - nb.u) / g.h();
        local += kappa * (model.p == 2.0 ? t * t : std::pow(t, model.p)) * hd;
        local -= eval_g(model, nb.x, nb.u) * w;  // neighbour's side becomes interior
    }
    for (const auto& x : out_faces) local += eval_g(model, x, v) * w;
    return inside ? -local : local;
}

namespace {

struct Snapshot {
    double J;
    SbvField field;
};

Snapshot exact(const IntegrandModel& model, const ShapeMask& mask, const SolverConfig& solver) {
    ShapeValue sv = eval_shape_functional(model, mask, solver);
    return {sv.J, std::move(sv.field)};
}

TraceRecord record_of(int sweep, const ShapeMask& mask, const Snapshot& snap, int accepted, BoundaryWeights weights) {
    TraceRecord r;
    r.sweep = sweep;
    r.J = snap.J;
    r.volume = mask.volume();
    r.accepted_flips = accepted;
    r.components = mask.components();
    if (!mask.empty()) {
        r.perimeter = perimeter(mask, weights);
        r.ess_inf = std::numeric_limits<double>::infinity();
        r.sup = -std::numeric_limits<double>::infinity();
        for (CellId c : mask.cells()) {
            r.ess_inf = std::min(r.ess_inf, snap.field.value(c));
            r.sup = std::max(r.sup, snap.field.value(c));
        }
    }
    return r;
}

bool near_boundary(const ShapeMask& mask, CellId c) {
    const Grid& g = mask.grid();
    const bool in = mask.contains(c);
    for (int axis = 0; axis < g.d(); ++axis)
        for (int side = 0; side < 2; ++side) {
            const auto nb = g.neighbor(c, axis, side);
            const bool nb_in = nb && mask.contains(*nb);
            if (nb_in != in) return true;
        }
    return false;
}

bool joins_components(const ShapeMask& mask, const std::vector<int>& labels, CellId c) {
    const Grid& g = mask.grid();
    int seen = -1;
    for (int axis = 0; axis < g.d(); ++axis)
        for (int side = 0; side < 2; ++side) {
            const auto nb = g.neighbor(c, axis, side);
            if (!nb || !mask.contains(*nb) || labels[*nb] < 0) continue;
            if (seen >= 0 && labels[*nb] != seen) return true;
            seen = labels[*nb];
        }
    return false;
}

}  // namespace

OptimizeResult optimize_shape(const IntegrandModel& model, const ShapeMask& init, const AnnealSchedule& sched,
                              const SolverConfig& solver) {
    sched.validate();
    solver.validate();
    const Grid& g = init.grid();
    const BoundaryWeights weights = solver.weights.value_or(default_weights(g.d()));
    CounterRng rng(sched.seed);

    ShapeMask mask = init;
    mask.clear_cuts();
    OptimizationTrace trace;

    auto solve_or_abort = [&](const ShapeMask& m) {
        try {
            return exact(model, m, solver);
        } catch (const NumericalFailure& e) {
            throw OptimizationAborted(e, trace);
        }
    };
    Snapshot current = solve_or_abort(mask);
    trace.records.push_back(record_of(0, mask, current, 0, weights));
    ShapeMask best_mask = mask;
    Snapshot best = current;

    std::vector<double> frozen(current.field.values().begin(), current.field.values().end());
    const std::size_t ncells = g.cell_count();
    const std::size_t teleports =
        static_cast<std::size_t>(std::ceil(sched.teleport_fraction * static_cast<double>(ncells)));

    double T = sched.T0;
    std::vector<CellId> candidates;
    for (int sweep = 1; sweep <= sched.sweeps; ++sweep, T *= sched.cooling) {
        candidates.clear();
        for (CellId c = 0; c < ncells; ++c)
            if (near_boundary(mask, c)) candidates.push_back(c);
        for (std::size_t k = 0; k < teleports; ++k) candidates.push_back(static_cast<CellId>(rng.below(ncells)));
        std::sort(candidates.begin(), candidates.end());
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
        rng.shuffle(candidates);

        const std::vector<int> labels = mask.component_labels();
        int accepted = 0;
        for (CellId c : candidates) {
            double v = 0.0;
            double delta;
            std::optional<Snapshot> merged;
            if (!mask.contains(c) && joins_components(mask, labels, c)) {
                // Frozen values on two different components make the local
                // estimate useless, so merges are scored by exact solves.
                ShapeMask trial = mask;
                trial.set(c, true);
                merged = solve_or_abort(trial);
                delta = merged->J - solve_or_abort(mask).J;
            } else {
                delta = flip_delta(model, mask, frozen, c, &v);
            }
            bool accept;
            if (delta < 0.0)
                accept = true;
            else if (T <= 0.0)
                accept = false;
            else if (delta == 0.0)
                accept = rng.uniform() < 0.5;
            else
                accept = rng.uniform() < std::exp(-delta / T);
            if (!accept) continue;
            const bool was_in = mask.contains(c);
            mask.set(c, !was_in);
            if (merged)
                frozen.assign(merged->field.values().begin(), merged->field.values().end());
            else
                frozen[c] = was_in ? 0.0 : v;
            ++accepted;
        }

        if (sweep % sched.resolve_every == 0 || sweep == sched.sweeps) {
            current = solve_or_abort(mask);
            frozen.assign(current.field.values().begin(), current.field.values().end());
            if (current.J < best.J) {
                best = current;
                best_mask = mask;
            }
        }
        trace.records.push_back(record_of(sweep, mask, current, accepted, weights));
    }

    OptimizeResult res{best_mask, best.field, best.J, std::move(trace), {}};
    res.diag = diagnostics(model, res.mask, res.field, res.J, weights);
    return res;
}

}  // namespace robinshape
