#include "robinshape/functional.hpp"

#include <cmath>
#include <stdexcept>

namespace robinshape {

ShapeValue eval_shape_functional(const IntegrandModel& model, const ShapeMask& mask, const SolverConfig& solver) {
    if (mask.empty()) return {0.0, SbvField(mask.grid())};
    SolveResult res = solve_inner(model, mask, solver);
    return {res.energy, std::move(res.field)};
}

double reduction_check(const IntegrandModel& model, const SbvField& field, const SolverConfig& solver) {
    const BoundaryWeights weights = solver.weights.value_or(default_weights(field.grid().d()));
    const double F = eval_free_discontinuity(model, field, weights);
    const ShapeMask support = ShapeMask::from_support(field);
    const double J = eval_shape_functional(model, support, solver).J;
    return F - J;
}

PoincareTerms poincare_check(const SbvField& field, double b, double p, double alpha, const PoincareOracle& eig) {
    field.validate();
    const Grid& g = field.grid();
    PoincareTerms t;
    double int_alpha = 0.0;
    std::size_t support = 0;
    for (CellId c = 0; c < g.cell_count(); ++c) {
        const double u = field.value(c);
        if (u == 0.0) continue;
        ++support;
        t.lhs += gradient_energy_density(field, c, p) * g.cell_volume();
        int_alpha += std::pow(std::abs(u), alpha) * g.cell_volume();
    }
    if (support == 0) throw std::invalid_argument("poincare_check: empty support");
    for (FaceId f : field.jump_faces()) {
        const auto tr = field.traces(f);
        t.lhs += b * (std::pow(std::abs(tr[0]), p) + std::pow(std::abs(tr[1]), p)) * g.face_measure();
    }
    t.measure = support * g.cell_volume();
    t.rhs = eig(t.measure) * std::pow(int_alpha, p / alpha);
    return t;
}

PoincareOracle radial_poincare_oracle(int d, double b, double p, double alpha, int mesh_n) {
    return [=](double m) {
        RadialEigenvalueQuery q;
        q.d = d;
        q.R = ball_radius(d, m);
        q.b = b;
        q.grad_exp = q.bdry_exp = p;
        q.denom_exp = alpha;
        q.mesh_n = mesh_n;
        return robin_eigenvalue_ball(q).lambda;
    };
}

}  // namespace robinshape
