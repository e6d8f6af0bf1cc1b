#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "robinshape/errors.hpp"
#include "robinshape/grid.hpp"
#include "robinshape/model.hpp"
#include "robinshape/pdesolve.hpp"

namespace robinshape {

struct AnnealSchedule {
    double T0 = 1e-3;
    double cooling = 0.95;
    int sweeps = 200;
    /// Full inner re-solve every this many sweeps; flips in between use
    /// frozen-u energy deltas.
    int resolve_every = 1;
    std::uint64_t seed = 1;
    /// Fraction of all cells drawn as random (non-local) candidates per sweep.
    double teleport_fraction = 0.01;

    void validate() const;
};

struct TraceRecord {
    int sweep = 0;
    double J = 0.0;
    double volume = 0.0;
    double perimeter = 0.0;
    double ess_inf = 0.0;
    double sup = 0.0;
    int accepted_flips = 0;
    int components = 0;
};

struct OptimizationTrace {
    std::vector<TraceRecord> records;

    /// "# robin-shape v1 optimize" comment, header row, one row per record.
    std::string to_csv() const;
};

struct Diagnostics {
    double ess_inf_support = 0.0;
    double sup = 0.0;
    double volume = 0.0;
    double perimeter = 0.0;
    double J = 0.0;
    double bv_norm = 0.0;
    int components = 0;
    /// perimeter <= bv_norm / ess_inf_support (vacuous for the empty shape).
    bool perimeter_bound_holds = true;

    std::string to_text() const;
};

/// Diagnostics of the inner minimiser `field` on `mask` with shape value J.
Diagnostics diagnostics(const IntegrandModel& model, const ShapeMask& mask, const SbvField& field, double J,
                        BoundaryWeights weights);

struct OptimizeResult {
    ShapeMask mask;
    SbvField field;
    double J = 0.0;
    OptimizationTrace trace;
    Diagnostics diag;
};

/// Raised when an inner solve fails mid-run; carries the trace so far.
class OptimizationAborted : public NumericalFailure {
public:
    OptimizationAborted(const NumericalFailure& cause, OptimizationTrace partial)
        : NumericalFailure(cause.what(), cause.residual()), trace(std::move(partial)) {}
    OptimizationTrace trace;
};

/// Cell-flip simulated annealing on J(Omega). Candidates per sweep are the
/// cells adjacent to the boundary of Omega plus a few random cells, visited in
/// seeded-random order. The returned shape is the best exactly re-solved
/// snapshot (the initial shape included). Deterministic given the seed.
OptimizeResult optimize_shape(const IntegrandModel& model, const ShapeMask& init, const AnnealSchedule& sched,
                              const SolverConfig& solver = {});

/// Frozen-u estimate of the change of J when cell c is toggled; `value`
/// receives the value the cell would carry after an insertion.
double flip_delta(const IntegrandModel& model, const ShapeMask& mask, const std::vector<double>& frozen, CellId c,
                  double* value = nullptr);

}  // namespace robinshape
