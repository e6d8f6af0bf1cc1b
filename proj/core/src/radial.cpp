#include "robinshape/radial.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

#include "robinshape/errors.hpp"
#include "robinshape/rng.hpp"

namespace robinshape {

std::string_view to_string(RadialMethod m) {
    switch (m) {
        case RadialMethod::Shooting: return "shooting";
        case RadialMethod::RayleighDescent: return "rayleigh-descent";
        case RadialMethod::ClosedForm: return "closed-form";
    }
    return "?";
}

void RadialEigenvalueQuery::validate() const {
    auto fail = [](const std::string& m) { throw std::invalid_argument("RadialEigenvalueQuery: " + m); };
    if (d < 1) fail("d must be >= 1");
    if (!(R > 0.0) || !std::isfinite(R)) fail("R must be > 0");
    if (!(b > 0.0) || !std::isfinite(b)) fail("b must be > 0");
    if (!(grad_exp > 1.0) || !(bdry_exp > 1.0) || !(denom_exp > 1.0)) fail("exponents must be > 1");
    if (grad_exp != bdry_exp) fail("gradient and boundary exponents must agree (quotient is not scale invariant otherwise)");
    if (mesh_n < 64) fail("mesh_n must be >= 64");
}

namespace {

/// |S^{d-1}|; for d = 1 the "sphere" is the two endpoints.
double sphere_measure(int d) {
    const double dd = d;
    return 2.0 * std::pow(std::numbers::pi, 0.5 * dd) / std::tgamma(0.5 * dd);
}

double signed_pow(double x, double e) {
    if (x == 0.0) return 0.0;
    return std::copysign(std::pow(std::abs(x), e), x);
}

struct ShootResult {
    bool past_first = false;  // lambda above the first eigenvalue
    double mismatch = 0.0;    // Robin residual at r = R
};

class Shooter {
public:
    Shooter(const RadialEigenvalueQuery& q) : q_(q), h_(q.R / q.mesh_n) {}

    // (u, phi) with phi = |u'|^{q-2} u'.
    std::array<double, 2> rhs(double r, double u, double phi, double lambda) const {
        const double e = q_.grad_exp;
        const double du = e == 2.0 ? phi : signed_pow(phi, 1.0 / (e - 1.0));
        const double src = lambda * (e == 2.0 ? u : signed_pow(u, e - 1.0));
        double dphi;
        if (r == 0.0)
            dphi = -src / q_.d;  // limit of -(d-1)/r phi - src with phi ~ -src r / d
        else
            dphi = -(q_.d - 1) / r * phi - src;
        return {du, dphi};
    }

    ShootResult shoot(double lambda, std::vector<double>* profile = nullptr) const {
        double u = 1.0;
        double phi = 0.0;
        if (profile) {
            profile->assign(q_.mesh_n + 1, 0.0);
            (*profile)[0] = u;
        }
        for (int i = 0; i < q_.mesh_n; ++i) {
            const double r = i * h_;
            const auto k1 = rhs(r, u, phi, lambda);
            const auto k2 = rhs(r + 0.5 * h_, u + 0.5 * h_ * k1[0], phi + 0.5 * h_ * k1[1], lambda);
            const auto k3 = rhs(r + 0.5 * h_, u + 0.5 * h_ * k2[0], phi + 0.5 * h_ * k2[1], lambda);
            const auto k4 = rhs(r + h_, u + h_ * k3[0], phi + h_ * k3[1], lambda);
            u += h_ / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
            phi += h_ / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
            if (profile) (*profile)[i + 1] = u;
            if (u <= 0.0) return {true, -1.0};
        }
        const double e = q_.grad_exp;
        const double mismatch = phi + q_.b * (e == 2.0 ? u : signed_pow(u, e - 1.0));
        return {mismatch < 0.0, mismatch};
    }

private:
    const RadialEigenvalueQuery& q_;
    double h_;
};

/// Radial mesh weights for the discrete Rayleigh quotient.
struct RadialMesh {
    double h = 0.0;
    double omega = 0.0;
    std::vector<double> face_w;  // mean of r^{d-1} over [r_i, r_{i+1}]
    std::vector<double> node_w;  // int of r^{d-1} over the node's dual cell

    RadialMesh(int d, double R, int n) : h(R / n), omega(sphere_measure(d)), face_w(n), node_w(n + 1) {
        const double dd = d;
        auto F = [dd](double r) { return std::pow(r, dd) / dd; };
        for (int i = 0; i < n; ++i) face_w[i] = (F((i + 1) * h) - F(i * h)) / h;
        for (int i = 0; i <= n; ++i) {
            const double lo = std::max(0.0, (i - 0.5) * h);
            const double hi = std::min(R, (i + 0.5) * h);
            node_w[i] = F(hi) - F(lo);
        }
    }
};

struct QuotientParts {
    double num = 0.0;
    double den = 0.0;  // int |u|^a (not raised)
};

QuotientParts quotient_parts(const RadialEigenvalueQuery& q, const RadialMesh& mesh, const std::vector<double>& u) {
    const int n = static_cast<int>(u.size()) - 1;
    const double g = q.grad_exp;
    const double a = q.denom_exp;
    QuotientParts parts;
    for (int i = 0; i < n; ++i) {
        const double t = std::abs(u[i + 1] - u[i]) / mesh.h;
        parts.num += mesh.face_w[i] * (g == 2.0 ? t * t : std::pow(t, g)) * mesh.h;
    }
    const double ub = std::abs(u[n]);
    parts.num += q.b * std::pow(q.R, q.d - 1) * (g == 2.0 ? ub * ub : std::pow(ub, g));
    for (int i = 0; i <= n; ++i) {
        const double ui = std::abs(u[i]);
        parts.den += mesh.node_w[i] * (a == 2.0 ? ui * ui : std::pow(ui, a));
    }
    parts.num *= mesh.omega;
    parts.den *= mesh.omega;
    return parts;
}

double quotient_value(const RadialEigenvalueQuery& q, const QuotientParts& parts) {
    return parts.num / std::pow(parts.den, q.grad_exp / q.denom_exp);
}

void normalize(const RadialEigenvalueQuery& q, const RadialMesh& mesh, std::vector<double>& u) {
    const double den = quotient_parts(q, mesh, u).den;
    const double s = std::pow(den, -1.0 / q.denom_exp);
    double sum = 0.0;
    for (double& v : u) {
        v *= s;
        sum += v;
    }
    if (sum < 0.0)
        for (double& v : u) v = -v;
}

/// Solves a symmetric tridiagonal system in place (Thomas algorithm).
void solve_tridiagonal(std::vector<double> diag, std::vector<double> off, std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double w = off[i - 1] / diag[i - 1];
        diag[i] -= w * off[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - off[i] * rhs[i + 1]) / diag[i];
}

struct DescentResult {
    double lambda = std::numeric_limits<double>::infinity();
    std::vector<double> u;
    int iterations = 0;
    double last_change = 0.0;
    bool converged = false;
};

DescentResult rayleigh_descent(const RadialEigenvalueQuery& q, const RadialMesh& mesh, std::vector<double> u) {
    constexpr int kMaxIter = 100000;
    constexpr double kTol = 1e-10;
    constexpr double kArmijo = 1e-4;
    const int n = q.mesh_n;
    const double g = q.grad_exp;
    const double a = q.denom_exp;
    const double boundary_w = q.b * std::pow(q.R, q.d - 1);

    normalize(q, mesh, u);
    DescentResult res;
    double Q = quotient_value(q, quotient_parts(q, mesh, u));
    std::vector<double> grad(n + 1), diag(n + 1), off(n), dir(n + 1), trial(n + 1);

    for (int it = 1; it <= kMaxIter; ++it) {
        res.iterations = it;
        // u is normalised so that den = 1 and Q = num.
        double tmax = 0.0;
        for (int i = 0; i < n; ++i) tmax = std::max(tmax, std::abs(u[i + 1] - u[i]) / mesh.h);
        const double tau = 1e-8 * std::max(tmax, 1.0 / q.R);

        std::fill(grad.begin(), grad.end(), 0.0);
        std::fill(diag.begin(), diag.end(), 0.0);
        for (int i = 0; i < n; ++i) {
            const double t = (u[i + 1] - u[i]) / mesh.h;
            const double flux = mesh.omega * mesh.face_w[i] * g * signed_pow(t, g - 1.0);
            grad[i + 1] += flux;
            grad[i] -= flux;
            const double k = mesh.omega * mesh.face_w[i] * g * (g - 1.0) * std::pow(t * t + tau * tau, 0.5 * (g - 2.0)) / mesh.h;
            diag[i] += k;
            diag[i + 1] += k;
            off[i] = -k;
        }
        grad[n] += mesh.omega * boundary_w * g * signed_pow(u[n], g - 1.0);
        const double ub = std::abs(u[n]);
        diag[n] += mesh.omega * boundary_w * g * (g - 1.0) * std::pow(ub * ub + tau * tau * q.R * q.R, 0.5 * (g - 2.0));
        const double scale = g / a * Q;
        for (int i = 0; i <= n; ++i) grad[i] -= scale * mesh.omega * mesh.node_w[i] * a * signed_pow(u[i], a - 1.0);

        for (int i = 0; i <= n; ++i) dir[i] = -grad[i];
        solve_tridiagonal(diag, off, dir);
        double slope = 0.0;
        for (int i = 0; i <= n; ++i) slope += grad[i] * dir[i];
        if (!(slope < 0.0)) {
            res.converged = true;
            break;
        }

        double step = 1.0;
        double Qnew = Q;
        bool accepted = false;
        while (step > 1e-20) {
            for (int i = 0; i <= n; ++i) trial[i] = u[i] + step * dir[i];
            const auto parts = quotient_parts(q, mesh, trial);
            Qnew = parts.den > 0.0 ? quotient_value(q, parts) : std::numeric_limits<double>::infinity();
            if (Qnew <= Q + kArmijo * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            res.converged = true;  // no representable decrease left
            break;
        }
        u.swap(trial);
        normalize(q, mesh, u);
        const double change = (Q - Qnew) / Q;
        res.last_change = change;
        Q = Qnew;
        if (change < kTol) {
            res.converged = true;
            break;
        }
    }
    res.lambda = Q;
    res.u = std::move(u);
    return res;
}

}  // namespace

double radial_rayleigh_quotient(const RadialEigenvalueQuery& q, const std::vector<double>& u) {
    if (u.size() < 2) throw std::invalid_argument("radial_rayleigh_quotient: need at least two nodes");
    const RadialMesh mesh(q.d, q.R, static_cast<int>(u.size()) - 1);
    return quotient_value(q, quotient_parts(q, mesh, u));
}

RadialSolution robin_eigenvalue_shooting(const RadialEigenvalueQuery& q) {
    q.validate();
    if (!q.homogeneous()) throw std::invalid_argument("robin_eigenvalue_shooting: exponents must all agree");
    const Shooter shooter(q);

    double lo = 1e-8;
    double hi = 4.0 * std::pow(std::numbers::pi / q.R, 2.0);
    if (shooter.shoot(lo).past_first)
        throw NumericalFailure("robin_eigenvalue_shooting: lower bracket already past first eigenvalue", lo);
    int grow = 0;
    while (!shooter.shoot(hi).past_first) {
        hi *= 2.0;
        if (++grow > 200) throw NumericalFailure("robin_eigenvalue_shooting: could not bracket eigenvalue", hi);
    }
    int iters = 0;
    while (hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi && iters < 400) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (shooter.shoot(mid).past_first ? hi : lo) = mid;
        ++iters;
    }

    RadialSolution sol;
    sol.method = RadialMethod::Shooting;
    sol.lambda = 0.5 * (lo + hi);
    sol.iterations = iters;
    shooter.shoot(lo, &sol.u);
    sol.r.resize(sol.u.size());
    for (std::size_t i = 0; i < sol.r.size(); ++i) sol.r[i] = q.R * static_cast<double>(i) / q.mesh_n;
    const double rq = radial_rayleigh_quotient(q, sol.u);
    sol.residual = std::abs(rq - sol.lambda) / sol.lambda;
    return sol;
}

RadialSolution robin_eigenvalue_rayleigh(const RadialEigenvalueQuery& q) {
    q.validate();
    const RadialMesh mesh(q.d, q.R, q.mesh_n);
    const int n = q.mesh_n;

    std::vector<std::vector<double>> starts(3, std::vector<double>(n + 1));
    CounterRng rng(0x5EEDULL, static_cast<std::uint64_t>(n));
    for (int i = 0; i <= n; ++i) {
        const double r = static_cast<double>(i) / n;
        starts[0][i] = 1.0;
        starts[1][i] = 1.0 - 0.5 * r;
        starts[2][i] = rng.uniform(0.5, 1.5);
    }

    DescentResult best;
    int best_index = -1;
    double worst_change = 0.0;
    for (int k = 0; k < 3; ++k) {
        DescentResult r = rayleigh_descent(q, mesh, starts[k]);
        if (!r.converged) {
            worst_change = std::max(worst_change, r.last_change);
            continue;
        }
        if (best_index < 0 || r.lambda < best.lambda) {
            best = std::move(r);
            best_index = k;
        }
    }
    if (best_index < 0)
        throw NumericalFailure("robin_eigenvalue_rayleigh: no restart converged", worst_change);

    RadialSolution sol;
    sol.method = RadialMethod::RayleighDescent;
    sol.lambda = best.lambda;
    sol.iterations = best.iterations;
    sol.residual = best.last_change;
    const double u0 = best.u[0] != 0.0 ? best.u[0] : 1.0;
    sol.u.resize(n + 1);
    sol.r.resize(n + 1);
    for (int i = 0; i <= n; ++i) {
        sol.u[i] = best.u[i] / u0;
        sol.r[i] = q.R * static_cast<double>(i) / n;
    }
    return sol;
}

RadialSolution robin_eigenvalue_ball(const RadialEigenvalueQuery& q) {
    using M = RadialEigenvalueQuery::Method;
    switch (q.method) {
        case M::Shooting: return robin_eigenvalue_shooting(q);
        case M::RayleighDescent: return robin_eigenvalue_rayleigh(q);
        case M::Auto: break;
    }
    return q.homogeneous() ? robin_eigenvalue_shooting(q) : robin_eigenvalue_rayleigh(q);
}

double robin_poisson_value(int d, double R, double f, double beta, double r) {
    return f * (R * R - r * r) / (2.0 * d) + f * R / (d * beta);
}

RadialSolution robin_poisson_ball(int d, double R, double f, double beta, int samples) {
    if (d < 1 || !(R >= 0.0) || !(beta > 0.0) || samples < 2)
        throw std::invalid_argument("robin_poisson_ball: need d >= 1, R >= 0, beta > 0, samples >= 2");
    RadialSolution sol;
    sol.method = RadialMethod::ClosedForm;
    sol.r.resize(samples);
    sol.u.resize(samples);
    for (int i = 0; i < samples; ++i) {
        const double r = R * i / (samples - 1);
        sol.r[i] = r;
        sol.u[i] = robin_poisson_value(d, R, f, beta, r);
    }
    IntegrandModel m;
    m.normalization = Normalization::EnergyForm;
    m.f = ScalarField::constant(f);
    m.beta1 = m.beta2 = ScalarField::constant(beta);
    sol.lambda = ball_energy(m, d, R);
    return sol;
}

double ball_energy(const IntegrandModel& model, int d, double R) {
    if (!model.quadratic()) throw std::invalid_argument("ball_energy: requires p = q = 2");
    const auto fc = model.f.constant_value();
    const auto bc = model.beta1.constant_value();
    if (!fc || !bc) throw std::invalid_argument("ball_energy: requires constant f and beta1");
    if (R <= 0.0) return 0.0;
    const double kappa = model.gradient_coefficient();
    const double gamma = model.boundary_scale() * *bc;
    const double f = *fc;
    const double dd = d;
    // u = f/(2 kappa) [ (R^2 - r^2)/(2d) + (kappa/gamma) R/d ]
    const double int_u = f / (2.0 * kappa) * sphere_measure(d) *
                         (std::pow(R, dd + 2.0) / (dd * dd * (dd + 2.0)) + kappa / gamma * std::pow(R, dd + 1.0) / (dd * dd));
    return -0.5 * f * int_u + model.c0 * ball_volume(d, R);
}

RadiusScan optimal_radius_scan(const IntegrandModel& model, int d, double R_max, int n_samples) {
    if (!(R_max >= 0.0) || n_samples < 1) throw std::invalid_argument("optimal_radius_scan: need R_max >= 0, n_samples >= 1");
    RadiusScan best{0.0, ball_energy(model, d, 0.0)};
    for (int k = 1; k <= n_samples; ++k) {
        const double R = R_max * k / n_samples;
        const double J = ball_energy(model, d, R);
        if (J < best.J_star) best = {R, J};
    }
    return best;
}

BallEigenOracle default_ball_eigen_oracle(int mesh_n) {
    return [mesh_n](double R, int d, double b, double q) {
        RadialEigenvalueQuery query;
        query.d = d;
        query.R = R;
        query.b = b;
        query.grad_exp = query.bdry_exp = query.denom_exp = q;
        query.mesh_n = mesh_n;
        return robin_eigenvalue_ball(query).lambda;
    };
}

}  // namespace robinshape
