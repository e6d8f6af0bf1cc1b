#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace robinshape {

/// A point of the box D. Only the first `d` coordinates are meaningful.
struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Scalar field over D: either a constant or a samplable callable.
class ScalarField {
public:
    ScalarField() = default;
    static ScalarField constant(double value);
    /// Indicator-weighted field: `value` on [lo, hi] along x (and y when d=2),
    /// zero elsewhere. Counts as a built-in field.
    static ScalarField box_indicator(double value, Point lo, Point hi);
    /// Arbitrary user callable; assumptions relying on measurability or
    /// semicontinuity become not-checkable.
    static ScalarField callable(std::function<double(Point)> fn);

    double operator()(Point x) const;
    std::optional<double> constant_value() const { return constant_; }
    bool builtin() const { return builtin_; }

private:
    std::optional<double> constant_ = 0.0;
    std::function<double(Point)> fn_;
    bool builtin_ = true;
};

/// Which scaling of the model integrands is used.
///  - Unscaled:   j = L|z|^p - f s + c0,      g = beta1 |s|^q
///  - EnergyForm: j = (L/2)|z|^p - f s + c0,  g = (beta1/2) |s|^q
/// EnergyForm with p = q = 2, L = 1 is exactly the Robin energy
/// 1/2 int |grad u|^2 - int f u + beta/2 int_{dOmega} u^2.
enum class Normalization { Unscaled, EnergyForm };

struct IntegrandModel {
    double p = 2.0;
    double q = 2.0;
    double L = 1.0;
    double c0 = 0.0;
    ScalarField f = ScalarField::constant(0.0);
    /// Offset of the zero-order lower bound j(x,s,0) >= -|f||s|^q - a(x).
    /// Unset means "use the smallest admissible a", which always exists.
    std::optional<ScalarField> a;
    ScalarField beta1 = ScalarField::constant(1.0);
    ScalarField beta2 = ScalarField::constant(1.0);
    double C_j = 0.0;
    double M0 = 1.0;
    double eps0 = 1.0;
    Normalization normalization = Normalization::EnergyForm;

    /// Throws std::invalid_argument when scalar parameters are out of range.
    /// Field-valued invariants (beta1 > 0, beta2 >= beta1) are checked on
    /// `samples` when given.
    void validate(std::span<const Point> samples = {}) const;

    /// Coefficient multiplying |z|^p in j (L or L/2).
    double gradient_coefficient() const;
    /// Factor multiplying beta1 in g (1 or 1/2).
    double boundary_scale() const;
    /// Coefficient multiplying |s|^q in g at x.
    double boundary_coefficient(Point x) const { return boundary_scale() * beta1(x); }
    bool quadratic() const { return p == 2.0 && q == 2.0; }
};

/// Bulk energy density j(x, s, z); z holds d gradient components.
double eval_j(const IntegrandModel& model, Point x, double s, std::span<const double> z);
/// Surface energy density g(x, s).
double eval_g(const IntegrandModel& model, Point x, double s);

/// Lower admissibility threshold on q for the given p and dimension.
/// d = 1 degenerates and returns 1.
double exponent_threshold(double p, double d);

struct IterConstants {
    double alpha_iter;
    double theta;
};

/// Exponents of the De Giorgi-type iteration used to bound u from below.
IterConstants iter_constants(double p, double d);

enum class CheckStatus { Pass, Fail, NotCheckable };

std::string_view to_string(CheckStatus s);

struct AssumptionEntry {
    std::string id;
    CheckStatus status = CheckStatus::NotCheckable;
    std::string detail;
    /// Numbers behind the verdict, e.g. {"f_inf", 0.4}, {"bound", 0.4265}.
    std::vector<std::pair<std::string, double>> measured;

    std::optional<double> value(std::string_view key) const;
};

struct AssumptionReport {
    std::vector<AssumptionEntry> entries;

    const AssumptionEntry& at(std::string_view id) const;
    bool ok() const;
    std::string to_text() const;
};

/// lambda(R, d, b, q): first Robin eigenvalue of the d-ball of radius R with
/// all three exponents equal to q. Throws on failure.
using BallEigenOracle = std::function<double(double R, int d, double b, double q)>;

double ball_volume(int d, double R);
double ball_radius(int d, double volume);

/// Evaluates every assumption j1..j5, g1..g4. Fields are sampled on
/// `samples` (typically the grid cell centres).
AssumptionReport check_admissible(const IntegrandModel& model, double domain_volume, int d,
                                  const BallEigenOracle& eig, std::span<const Point> samples);

}  // namespace robinshape
