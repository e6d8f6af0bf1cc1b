#pragma once

// Independent reference values for the tests. Nothing here calls into the
// library's numerical routines: roots come from bisection on transcendental
// equations, profiles and energies from closed forms or quadrature, shape
// optima from exhaustive enumeration with a hand-rolled tridiagonal solver.

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace oracle {

/// Plain bisection to machine precision; f(lo) and f(hi) must differ in sign.
inline double bisect(const std::function<double(double)>& f, double lo, double hi) {
    double flo = f(lo);
    if (flo * f(hi) > 0.0) throw std::runtime_error("oracle::bisect: no sign change");
    for (int i = 0; i < 200 && hi - lo > 4 * std::numeric_limits<double>::epsilon() * std::abs(hi); ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// First Robin eigenvalue of an interval of length len: k tan(k len/2) = b, lambda = k^2.
inline double robin_interval_lambda(double len, double b) {
    const double half = 0.5 * len;
    const double k = bisect([&](double k) { return k * std::tan(k * half) - b; }, 1e-12,
                            std::numbers::pi / (2.0 * half) * (1.0 - 1e-12));
    return k * k;
}

/// First Robin eigenvalue of the disc of radius R: k J1(kR) = b J0(kR), lambda = k^2.
inline double robin_disc_lambda(double R, double b) {
    constexpr double j01 = 2.404825557695773;  // first zero of J0
    const double k = bisect(
        [&](double k) { return k * std::cyl_bessel_j(1.0, k * R) - b * std::cyl_bessel_j(0.0, k * R); }, 1e-12,
        j01 / R * (1.0 - 1e-12));
    return k * k;
}

/// Admissibility threshold of q, evaluated in long double.
inline double exponent_threshold(long double p, long double d) {
    if (d <= 1) return 1.0;
    const long double dm1p = (d - 1) * p;
    const long double frac = (p - 1) * (p - 1) / dm1p;
    const long double root = std::sqrt(1 + 4 * (p - 1) / dm1p);
    const long double q = p / (2 * p - 1) * (p + frac * 2 / (1 + root));
    return static_cast<double>(std::max<long double>(1, q));
}

struct Iter {
    double alpha_iter, theta;
};
inline Iter iter_constants(long double p, long double d) {
    const long double pp = p / (p - 1);
    const long double a = d * pp / 2 * (1 + std::sqrt(1 + 4 / ((d - 1) * pp)));
    return {static_cast<double>(a), static_cast<double>(a / (d * pp))};
}

/// Slab (0, len): -u'' = f, u' = beta u at 0, -u' = beta u at len.
inline double slab_u(double f, double beta, double len, double x) { return f * x * (len - x) / 2 + f * len / (2 * beta); }
/// Energy 1/2 int u'^2 - int f u + beta/2 (u(0)^2 + u(len)^2) of the slab solution.
inline double slab_energy(double f, double beta, double len) {
    return -f * f * (len * len * len / 24 + len * len / (4 * beta));
}

/// Disc of radius R (d = 2): -Lap u = f, du/dn + beta u = 0.
inline double disc_u(double f, double beta, double R, double r) { return f * (R * R - r * r) / 4 + f * R / (2 * beta); }
/// Energy of the disc solution by composite Simpson quadrature of -1/2 int f u.
inline double disc_energy_quadrature(double f, double beta, double R, int m = 2000) {
    const double h = R / m;
    double acc = 0.0;
    for (int i = 0; i <= m; ++i) {
        const double r = i * h;
        const double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += w * f * disc_u(f, beta, R, r) * 2 * std::numbers::pi * r;
    }
    return -0.5 * acc * h / 3;
}

/// Thomas algorithm for a symmetric tridiagonal system (diag, off) x = rhs.
inline std::vector<double> thomas(std::vector<double> diag, std::vector<double> off, std::vector<double> rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double m = off[i - 1] / diag[i - 1];
        diag[i] -= m * off[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    std::vector<double> x(n);
    x[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = (rhs[i] - off[i] * x[i + 1]) / diag[i];
    return x;
}

/// Discrete 1D quadratic energy on cells [a, b) of a grid with spacing h:
///   sum k ((u_{i+1}-u_i)/h)^2 h - sum f_i u_i h + gamma (u_a^2 + u_{b-1}^2) + c0 (b - a) h,
/// minimised exactly. k and gamma are the effective gradient and boundary
/// coefficients (1/2 and beta/2 in energy form).
inline double interval_energy(const std::vector<double>& f, double h, double k, double gamma, double c0, int a, int b) {
    if (b <= a) return 0.0;
    const int m = b - a;
    std::vector<double> diag(m, 0.0), off(m > 1 ? m - 1 : 0, 0.0), rhs(m);
    const double link = 2 * k / h;  // d/du of k (du/h)^2 h
    for (int i = 0; i + 1 < m; ++i) {
        diag[i] += link;
        diag[i + 1] += link;
        off[i] = -link;
    }
    diag[0] += 2 * gamma;
    diag[m - 1] += 2 * gamma;
    for (int i = 0; i < m; ++i) rhs[i] = f[a + i] * h;
    const auto u = thomas(diag, off, rhs);
    double fu = 0.0;
    for (int i = 0; i < m; ++i) fu += f[a + i] * u[i] * h;
    return -0.5 * fu + c0 * m * h;
}

struct IntervalOptimum {
    int a = 0, b = 0;  // cells [a, b); a == b means empty
    double J = 0.0;
};

/// Exhaustive enumeration over all sub-intervals (O(n^2) tridiagonal solves).
inline IntervalOptimum best_interval(const std::vector<double>& f, double h, double k, double gamma, double c0) {
    IntervalOptimum best;
    const int n = static_cast<int>(f.size());
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b <= n; ++b) {
            const double J = interval_energy(f, h, k, gamma, c0, a, b);
            if (J < best.J) best = {a, b, J};
        }
    return best;
}

}  // namespace oracle

namespace oracle {

/// First Robin eigenvalue of (-R, R) for the one-dimensional q-Laplacian,
/// all exponents q. From the first integral (q-1)|u'|^q + lambda |u|^q = lambda
/// (u(0) = 1) and the Robin condition |u'| = b^{1/(q-1)} u at R:
///   R = ((q-1)/lambda)^{1/q} int_{u_R}^1 (1 - u^q)^{-1/q} du,
///   u_R^q = lambda / (lambda + (q-1) b^{q/(q-1)}).
/// The integral uses 1 - u = s^k, k = q/(q-1), which removes the endpoint
/// singularity; composite Simpson in s.
inline double robin_interval_lambda_q(double R, double b, double q, int m = 20000) {
    const double k = q / (q - 1.0);
    auto radius = [&](double lambda) {
        const double uR = std::pow(lambda / (lambda + (q - 1.0) * std::pow(b, k)), 1.0 / q);
        const double smax = std::pow(1.0 - uR, 1.0 / k);
        const double h = smax / m;
        double acc = 0.0;
        for (int i = 0; i <= m; ++i) {
            const double s = i * h;
            double g;
            if (i == 0) {
                g = k * std::pow(q, -1.0 / q);  // limit s -> 0
            } else {
                const double w = std::pow(s, k);
                const double one_minus_uq = -std::expm1(q * std::log1p(-w));
                g = std::pow(one_minus_uq, -1.0 / q) * k * std::pow(s, k - 1.0);
            }
            acc += (i == 0 || i == m ? 1.0 : (i % 2 ? 4.0 : 2.0)) * g;
        }
        return std::pow((q - 1.0) / lambda, 1.0 / q) * acc * h / 3.0;
    };
    // radius(lambda) decreases in lambda.
    double hi = 1.0;
    while (radius(hi) > R) hi *= 2.0;
    double lo = hi / 2.0;
    while (radius(lo) < R) lo /= 2.0;
    return bisect([&](double l) { return radius(l) - R; }, lo, hi);
}

}  // namespace oracle

namespace oracle {

/// Energy-form slab (0, len) for the p-Laplacian with q = 2 Robin term:
/// -(p/2 |u'|^{p-2} u')' = f, (p/2)|u'|^{p-2}u' = beta u at 0 (symmetric at len).
/// The flux is linear, phi = 2 f (len/2 - x) / p, and integrates to
///   u = f len/(2 beta) + (2f/p)^{1/(p-1)} (p-1)/p [(len/2)^{p/(p-1)} - |len/2 - x|^{p/(p-1)}].
inline double plaplace_slab_u(double p, double f, double beta, double len, double x) {
    const double e = p / (p - 1.0);
    return f * len / (2 * beta) +
           std::pow(2 * f / p, 1.0 / (p - 1.0)) / e * (std::pow(len / 2, e) - std::pow(std::abs(len / 2 - x), e));
}

}  // namespace oracle
