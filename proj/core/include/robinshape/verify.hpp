#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "robinshape/grid.hpp"

namespace robinshape {

/// Runs fn(0) .. fn(count - 1) on a small worker pool. Callers write results
/// into slots indexed by task, so output order never depends on scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn, unsigned threads = 0);

struct SuiteOptions {
    std::uint64_t seed = 1;
    /// 0 selects the suite default (1000 Poincare fields, 100 reduction trials).
    int trials = 0;
    /// Directory receiving failing instances; empty disables serialization.
    std::string out_dir;
    unsigned threads = 0;
};

struct SuiteResult {
    std::string suite;
    bool passed = false;
    /// Headline number of the suite (min ratio, min gap, max error, margin).
    double metric = 0.0;
    /// Human-readable report, one check per line.
    std::vector<std::string> report;
    /// "# robin-shape v1 verify" CSV with one row per sampled instance.
    std::string csv;
    std::vector<std::string> failure_files;
};

/// Random SBV fields on a 1D grid versus lambda_{b,alpha} of the interval with
/// the same support measure; plus the sampled eigenfunction as equality case.
SuiteResult run_poincare_suite(const SuiteOptions& opt);
/// F(u) - J({u != 0}) over random fields and models.
SuiteResult run_reduction_suite(const SuiteOptions& opt);
/// Scaling identity, radius and b monotonicity of the radial eigenvalue.
SuiteResult run_scaling_suite(const SuiteOptions& opt);
/// lambda(unit-area disc) < lambda(unit-area square) on the grid at two resolutions.
SuiteResult run_ball_minimality_suite(const SuiteOptions& opt);
/// Dispatch by name: poincare, reduction, scaling, ball-minimality.
SuiteResult run_suite(const std::string& name, const SuiteOptions& opt);

/// The random field generator behind the Poincare and reduction suites:
/// one to three support intervals (boxes in d = 2), smooth values of random
/// sign plus noise, and a few interior jumps. Support boundary always flagged.
SbvField random_sbv_field(const Grid& grid, std::uint64_t seed, std::uint64_t stream);

}  // namespace robinshape
