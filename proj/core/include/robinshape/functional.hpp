#pragma once

#include "robinshape/grid.hpp"
#include "robinshape/model.hpp"
#include "robinshape/pdesolve.hpp"
#include "robinshape/radial.hpp"

namespace robinshape {

struct ShapeValue {
    double J = 0.0;
    SbvField field;
};

/// J(Omega): inner minimisation on Omega, then the fixed-support energy of the
/// minimiser. The empty shape has J = 0 and u = 0.
ShapeValue eval_shape_functional(const IntegrandModel& model, const ShapeMask& mask, const SolverConfig& solver = {});

/// F(u) - J({u != 0}), where the shape inherits the jump faces of u between
/// two support cells as cuts. Nonnegative up to the inner-solver tolerance.
double reduction_check(const IntegrandModel& model, const SbvField& field, const SolverConfig& solver = {});

/// Eigenvalue oracle for the Poincare check: lambda for a ball of measure m.
using PoincareOracle = std::function<double(double m)>;

struct PoincareTerms {
    double lhs = 0.0;
    double rhs = 0.0;
    double measure = 0.0;
    double ratio() const { return lhs / rhs; }
};

/// LHS = sum |grad u|^p h^d + b sum_{J_u} (|u+|^p + |u-|^p) w_F (face-wise
/// gradient), RHS = lambda_{b,alpha}(B_m) (sum |u|^alpha h^d)^{p/alpha} with m
/// the measure of {u != 0}. Throws when the support is empty.
PoincareTerms poincare_check(const SbvField& field, double b, double p, double alpha, const PoincareOracle& eig);

/// Radial oracle for lambda_{b,alpha} of the ball of measure m in dimension d.
PoincareOracle radial_poincare_oracle(int d, double b, double p, double alpha, int mesh_n = 1024);

}  // namespace robinshape
