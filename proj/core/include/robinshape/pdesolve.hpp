#pragma once

#include <optional>
#include <vector>

#include "robinshape/grid.hpp"
#include "robinshape/model.hpp"

namespace robinshape {

enum class SolverMode { Auto, LinearCG, NonlinearDescent };

struct SolverConfig {
    /// Relative residual (linear) or relative gradient norm (nonlinear).
    double tol = 1e-10;
    /// 0 selects the default cap: 10 n^d for CG, 200 n^d for nonlinear descent.
    int max_iter = 0;
    /// Regularisation floor for |grad u| in the nonlinear mode; negative = auto.
    double eta = -1.0;
    SolverMode mode = SolverMode::Auto;
    bool diagonal_preconditioner = false;
    /// Boundary weighting; unset = default_weights(d).
    std::optional<BoundaryWeights> weights;
    /// Keep the energy after every nonlinear iteration.
    bool record_trace = false;

    void validate() const;
};

struct SolveResult {
    SbvField field;
    int iterations = 0;
    double residual = 0.0;
    /// Unregularised energy of the returned field (energy_of).
    double energy = 0.0;
    SolverMode mode_used = SolverMode::LinearCG;
    double eta_used = 0.0;
    std::vector<double> energy_trace;
};

/// Minimises the fixed-support energy
///   sum_{faces in Omega} k (du/h)^p h^d - sum f u h^d + sum_{dOmega} g(x, u) w_F + c0 |Omega|
/// over fields supported on Omega. The quadratic case goes through CG;
/// otherwise eta-regularised nonlinear conjugate gradients with Armijo
/// backtracking. The result has jump faces exactly on the boundary of Omega.
SolveResult solve_inner(const IntegrandModel& model, const ShapeMask& mask, const SolverConfig& config = {});

/// Fixed-support energy of `field` on `mask` (values outside Omega ignored).
double energy_of(const IntegrandModel& model, const ShapeMask& mask, const SbvField& field, BoundaryWeights weights);

/// eta-regularised energy and its gradient over the cells of Omega (in
/// mask.cells() order). Exposed for gradient checks.
double regularized_energy(const IntegrandModel& model, const ShapeMask& mask, const SbvField& field,
                          BoundaryWeights weights, double eta);
std::vector<double> regularized_gradient(const IntegrandModel& model, const ShapeMask& mask, const SbvField& field,
                                         BoundaryWeights weights, double eta);

struct GridEigenResult {
    double lambda = 0.0;
    SbvField field;
    int iterations = 0;
};

/// First eigenvalue of (sum (du/h)^2 h^d + b sum u^2 w_F) / (sum u^2 h^d) on
/// Omega by inverse power iteration with CG inner solves.
GridEigenResult robin_eigenvalue_grid(const ShapeMask& mask, double b, const SolverConfig& config = {});

}  // namespace robinshape
