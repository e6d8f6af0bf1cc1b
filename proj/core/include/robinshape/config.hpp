#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "robinshape/grid.hpp"
#include "robinshape/model.hpp"
#include "robinshape/pdesolve.hpp"
#include "robinshape/radial.hpp"
#include "robinshape/shapeopt.hpp"

namespace robinshape {

/// Flat parameter set shared by every CLI command. Each field has a config
/// key of the same name; see ExperimentConfig::keys().
struct ExperimentConfig {
    // model
    double p = 2.0;
    double q = 2.0;
    double L = 1.0;
    double c0 = 0.0;
    double f = 1.0;
    /// Support of the source: all | interval:a:b | box:x0:y0:x1:y1 | disc:cx:cy:r
    std::string f_region = "all";
    double beta = 1.0;
    double beta2 = -1.0;  // negative = equal to beta
    double C_j = 0.0;
    double M0 = 1.0;
    double eps0 = 1.0;
    std::string normalization = "energy";  // energy | unscaled

    // grid
    int d = 1;
    int n = 128;
    double side = 1.0;
    /// Initial shape: full | empty | interval:a:b | box:x0:y0:x1:y1 | disc:cx:cy:r
    std::string init = "full";

    // solver
    double tol = 1e-10;
    int max_iter = 0;
    double eta = -1.0;
    std::string weights = "auto";  // auto | corrected | uncorrected

    // annealing
    double T0 = 1e-3;
    double cooling = 0.95;
    int sweeps = 200;
    int resolve_every = 1;
    double teleport_fraction = 0.01;
    std::uint64_t seed = 1;

    // radial / eigenvalue
    double R = 1.0;
    double b = 1.0;
    /// Denominator exponent of the Rayleigh quotient; negative = equal to q.
    double alpha = -1.0;
    int mesh_n = 2048;
    std::string method = "auto";  // auto | shooting | rayleigh
    int samples = 11;

    // figure1
    double p_min = 1.05;
    double p_max = 5.0;
    int p_steps = 79;

    // verify
    std::string suite = "poincare";
    int trials = 0;  // 0 = suite default

    /// Sets one key from its textual value. Throws std::invalid_argument on an
    /// unknown key, a malformed value or an out-of-range number.
    void set(const std::string& key, const std::string& value);
    /// Re-checks every cross-field constraint.
    void validate() const;

    static const std::vector<std::string>& keys();
};

/// Parses "key = value" lines; '#' starts a comment. Later keys override
/// earlier ones. Errors name the offending line.
ExperimentConfig parse_config(std::istream& is, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});

IntegrandModel make_model(const ExperimentConfig& cfg);
Grid make_grid(const ExperimentConfig& cfg);
ShapeMask make_init_mask(const ExperimentConfig& cfg, const Grid& grid);
SolverConfig make_solver(const ExperimentConfig& cfg);
AnnealSchedule make_schedule(const ExperimentConfig& cfg);

}  // namespace robinshape
