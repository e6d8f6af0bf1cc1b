#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "robinshape/model.hpp"

namespace robinshape {

enum class RadialMethod { Shooting, RayleighDescent, ClosedForm };

std::string_view to_string(RadialMethod m);

/// First Robin eigenvalue of the d-ball B_R:
///   min  (int |u'|^g r^{d-1} + b R^{d-1} |u(R)|^g) / (int |u|^a r^{d-1})^{g/a}
/// with g = grad_exp = bdry_exp and a = denom_exp (all over the full ball).
struct RadialEigenvalueQuery {
    int d = 1;
    double R = 1.0;
    double b = 1.0;
    double grad_exp = 2.0;
    double bdry_exp = 2.0;
    double denom_exp = 2.0;
    int mesh_n = 2048;

    enum class Method { Auto, Shooting, RayleighDescent };
    Method method = Method::Auto;

    void validate() const;
    bool homogeneous() const { return grad_exp == bdry_exp && bdry_exp == denom_exp; }
};

struct RadialSolution {
    /// Eigenvalue, or energy for closed-form Poisson solutions.
    double lambda = 0.0;
    std::vector<double> r;
    std::vector<double> u;
    RadialMethod method = RadialMethod::ClosedForm;
    double residual = 0.0;
    int iterations = 0;
};

/// Auto dispatch: shooting when all exponents agree, Rayleigh descent otherwise.
RadialSolution robin_eigenvalue_ball(const RadialEigenvalueQuery& q);

/// Shooting on the radial q-Laplacian ODE
///   (r^{d-1} |u'|^{q-2} u')' = -lambda r^{d-1} |u|^{q-2} u,  u(0) = 1, u'(0) = 0
/// with RK4 on a uniform mesh of mesh_n steps and bisection on lambda for the
/// Robin condition |u'|^{q-2} u'(R) + b |u(R)|^{q-2} u(R) = 0.
RadialSolution robin_eigenvalue_shooting(const RadialEigenvalueQuery& q);

/// Minimises the discrete radial Rayleigh quotient by projected descent with
/// Armijo backtracking; three restarts (constant, ramp, random).
RadialSolution robin_eigenvalue_rayleigh(const RadialEigenvalueQuery& q);

/// Discrete radial Rayleigh quotient of nodal values u on the uniform mesh
/// r_i = i R / (u.size() - 1). Shared by the descent and by residual checks.
double radial_rayleigh_quotient(const RadialEigenvalueQuery& q, const std::vector<double>& u);

/// Closed-form solution of -Lap u = f in B_R, beta u + du/dnu = 0 on the sphere.
double robin_poisson_value(int d, double R, double f, double beta, double r);

/// Samples the closed-form solution on `samples` equispaced radii; lambda
/// holds the energy 1/2 int |grad u|^2 - int f u + beta/2 int u^2.
RadialSolution robin_poisson_ball(int d, double R, double f, double beta, int samples = 65);

/// Closed-form J(B_R) for a quadratic model with constant f and beta1,
/// including the volume term c0 |B_R|.
double ball_energy(const IntegrandModel& model, int d, double R);

struct RadiusScan {
    double R_star = 0.0;
    double J_star = 0.0;
};

/// Grid scan of ball_energy over R in [0, R_max] (n_samples + 1 points).
RadiusScan optimal_radius_scan(const IntegrandModel& model, int d, double R_max, int n_samples);

/// Adapter for check_admissible.
BallEigenOracle default_ball_eigen_oracle(int mesh_n = 2048);

}  // namespace robinshape
