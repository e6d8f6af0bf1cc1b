#include "robinshape/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

namespace robinshape {

ScalarField ScalarField::constant(double value) {
    ScalarField s;
    s.constant_ = value;
    return s;
}

ScalarField ScalarField::box_indicator(double value, Point lo, Point hi) {
    ScalarField s;
    s.constant_.reset();
    s.fn_ = [=](Point x) {
        const bool inside = x.x >= lo.x && x.x <= hi.x && x.y >= lo.y && x.y <= hi.y;
        return inside ? value : 0.0;
    };
    return s;
}

ScalarField ScalarField::callable(std::function<double(Point)> fn) {
    if (!fn) throw std::invalid_argument("ScalarField::callable: empty function");
    ScalarField s;
    s.constant_.reset();
    s.fn_ = std::move(fn);
    s.builtin_ = false;
    return s;
}

double ScalarField::operator()(Point x) const {
    if (constant_) return *constant_;
    return fn_(x);
}

void IntegrandModel::validate(std::span<const Point> samples) const {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("IntegrandModel: " + msg); };
    if (!std::isfinite(p) || p <= 1.0) fail(fmt::format("p must be > 1 (got {})", p));
    if (!std::isfinite(q) || q <= 1.0 || q > p) fail(fmt::format("q must satisfy 1 < q <= p (got q={}, p={})", q, p));
    if (!std::isfinite(L) || L <= 0.0) fail(fmt::format("L must be > 0 (got {})", L));
    if (!std::isfinite(c0) || c0 < 0.0) fail(fmt::format("c0 must be >= 0 (got {})", c0));
    if (!(M0 > 0.0) || !(eps0 > 0.0) || !(C_j >= 0.0)) fail("M0, eps0 must be > 0 and C_j >= 0");
    for (const Point& x : samples) {
        const double b1 = beta1(x);
        const double b2 = beta2(x);
        if (!(b1 > 0.0)) fail(fmt::format("beta1 must be positive (got {} at ({}, {}))", b1, x.x, x.y));
        if (!(b2 >= b1)) fail(fmt::format("beta2 must dominate beta1 (got {} < {} at ({}, {}))", b2, b1, x.x, x.y));
        if (!std::isfinite(f(x))) fail("f is not finite");
    }
    if (samples.empty()) {
        const Point origin{};
        if (!(beta1(origin) > 0.0)) fail("beta1 must be positive");
    }
}

double IntegrandModel::gradient_coefficient() const {
    return normalization == Normalization::EnergyForm ? 0.5 * L : L;
}

double IntegrandModel::boundary_scale() const {
    return normalization == Normalization::EnergyForm ? 0.5 : 1.0;
}

double eval_j(const IntegrandModel& model, Point x, double s, std::span<const double> z) {
    double z2 = 0.0;
    for (double zi : z) {
        if (!std::isfinite(zi)) throw std::invalid_argument("eval_j: non-finite gradient");
        z2 += zi * zi;
    }
    if (!std::isfinite(s)) throw std::invalid_argument("eval_j: non-finite state");
    const double grad_term = model.p == 2.0 ? z2 : std::pow(z2, 0.5 * model.p);
    return model.gradient_coefficient() * grad_term - model.f(x) * s + model.c0;
}

double eval_g(const IntegrandModel& model, Point x, double s) {
    if (!std::isfinite(s)) throw std::invalid_argument("eval_g: non-finite state");
    if (s == 0.0) return 0.0;
    const double a = std::abs(s);
    const double pw = model.q == 2.0 ? a * a : std::pow(a, model.q);
    return model.boundary_coefficient(x) * pw;
}

double exponent_threshold(double p, double d) {
    if (!(p > 1.0)) throw std::invalid_argument("exponent_threshold: p must be > 1");
    if (d <= 1.0) return 1.0;
    const double dm1p = (d - 1.0) * p;
    const double root = std::sqrt(1.0 + 4.0 * (p - 1.0) / dm1p);
    const double inner = p + (p - 1.0) * (p - 1.0) / dm1p * 2.0 / (1.0 + root);
    return std::max(1.0, p / (2.0 * p - 1.0) * inner);
}

IterConstants iter_constants(double p, double d) {
    if (!(p > 1.0)) throw std::invalid_argument("iter_constants: p must be > 1");
    if (!(d >= 2.0)) throw std::invalid_argument("iter_constants: d must be >= 2");
    const double pc = p / (p - 1.0);
    const double s = 1.0 + std::sqrt(1.0 + 4.0 / ((d - 1.0) * pc));
    const double alpha = 0.5 * d * pc * s;
    return {alpha, alpha / (d * pc)};
}

std::string_view to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::Pass: return "pass";
        case CheckStatus::Fail: return "fail";
        case CheckStatus::NotCheckable: return "not-checkable";
    }
    return "?";
}

std::optional<double> AssumptionEntry::value(std::string_view key) const {
    for (const auto& [k, v] : measured)
        if (k == key) return v;
    return std::nullopt;
}

const AssumptionEntry& AssumptionReport::at(std::string_view id) const {
    for (const auto& e : entries)
        if (e.id == id) return e;
    throw std::out_of_range(fmt::format("AssumptionReport: no entry '{}'", id));
}

bool AssumptionReport::ok() const {
    return std::none_of(entries.begin(), entries.end(),
                        [](const AssumptionEntry& e) { return e.status == CheckStatus::Fail; });
}

std::string AssumptionReport::to_text() const {
    std::string out;
    for (const auto& e : entries) {
        out += fmt::format("{}: {} ({})", e.id, to_string(e.status), e.detail);
        for (const auto& [k, v] : e.measured) out += fmt::format(" {}={:.9g}", k, v);
        out += '\n';
    }
    return out;
}

double ball_volume(int d, double R) {
    const double dd = d;
    return std::pow(std::numbers::pi, 0.5 * dd) / std::tgamma(0.5 * dd + 1.0) * std::pow(R, dd);
}

double ball_radius(int d, double volume) {
    const double dd = d;
    const double unit = std::pow(std::numbers::pi, 0.5 * dd) / std::tgamma(0.5 * dd + 1.0);
    return std::pow(volume / unit, 1.0 / dd);
}

namespace {

struct FieldStats {
    double f_sup = 0.0;      // sup |f|
    double f_pos_sup = 0.0;  // sup f^+
    double f_min = std::numeric_limits<double>::infinity();
    double beta1_min = std::numeric_limits<double>::infinity();
    double beta_gap_min = std::numeric_limits<double>::infinity();  // min(beta2 - beta1)
    double a_slack_min = std::numeric_limits<double>::infinity();   // min(a - a_required)
};

FieldStats sample_fields(const IntegrandModel& m, std::span<const Point> samples) {
    FieldStats st;
    // (q-1) q^{-q/(q-1)} = sup_t (t - t^q) over t >= 0
    const double kq = (m.q - 1.0) * std::pow(m.q, -m.q / (m.q - 1.0));
    for (const Point& x : samples) {
        const double fx = m.f(x);
        const double b1 = m.beta1(x);
        st.f_sup = std::max(st.f_sup, std::abs(fx));
        st.f_pos_sup = std::max(st.f_pos_sup, fx);
        st.f_min = std::min(st.f_min, fx);
        st.beta1_min = std::min(st.beta1_min, b1);
        st.beta_gap_min = std::min(st.beta_gap_min, m.beta2(x) - b1);
        if (m.a) {
            const double required = std::abs(fx) * kq - m.c0;
            st.a_slack_min = std::min(st.a_slack_min, (*m.a)(x) - required);
        }
    }
    return st;
}

}  // namespace

AssumptionReport check_admissible(const IntegrandModel& model, double domain_volume, int d,
                                  const BallEigenOracle& eig, std::span<const Point> samples) {
    if (samples.empty()) throw std::invalid_argument("check_admissible: need at least one sample point");
    AssumptionReport rep;
    const FieldStats st = sample_fields(model, samples);
    const bool builtin = model.f.builtin() && model.beta1.builtin() && model.beta2.builtin() &&
                         (!model.a || model.a->builtin());

    auto add = [&rep](std::string id, CheckStatus s, std::string detail,
                      std::vector<std::pair<std::string, double>> measured = {}) {
        rep.entries.push_back({std::move(id), s, std::move(detail), std::move(measured)});
    };

    add("j1", builtin ? CheckStatus::Pass : CheckStatus::NotCheckable,
        builtin ? "pass by construction: convex in z, continuous in (s, z)"
                : "user-supplied field; measurability not checkable");

    add("j2", model.c0 >= 0.0 ? CheckStatus::Pass : CheckStatus::Fail, "j(x,0,0) = c0 >= 0",
        {{"c0", model.c0}});

    // j3: growth of the gradient term, zero-order bound and smallness of f.
    {
        std::vector<std::pair<std::string, double>> measured;
        std::string detail;
        bool pass = model.p > 1.0 && model.L > 0.0 && model.q > 1.0 && model.q <= model.p;
        if (!pass) detail += "exponent/coefficient range violated; ";
        if (model.a) {
            measured.emplace_back("a_slack_min", st.a_slack_min);
            if (st.a_slack_min < 0.0) {
                pass = false;
                detail += "a(x) below |f|(q-1)q^{-q/(q-1)} - c0; ";
            }
        } else {
            detail += "a chosen minimal; ";
        }
        const double L_eff = model.gradient_coefficient();
        const double b = model.boundary_scale() * st.beta1_min / L_eff;
        const double R = ball_radius(d, domain_volume);
        measured.emplace_back("f_inf", st.f_sup);
        CheckStatus status = CheckStatus::Pass;
        try {
            const double lambda = eig(R, d, b, model.q);
            const double bound = L_eff / (2.0 * model.q) * lambda;
            measured.emplace_back("bound", bound);
            measured.emplace_back("lambda", lambda);
            if (st.f_sup > bound) {
                pass = false;
                detail += fmt::format("||f||_inf = {:.6g} exceeds (L/2q) lambda = {:.6g}; ", st.f_sup, bound);
            } else {
                detail += fmt::format("||f||_inf = {:.6g} <= (L/2q) lambda = {:.6g}; ", st.f_sup, bound);
            }
        } catch (const std::exception& e) {
            status = CheckStatus::NotCheckable;
            detail += fmt::format("eigenvalue oracle failed: {}; ", e.what());
        }
        if (status != CheckStatus::NotCheckable) status = pass ? CheckStatus::Pass : CheckStatus::Fail;
        add("j3", status, detail, std::move(measured));
    }

    // j4: monotonicity in s near 0 (needs f >= 0) and the exponent threshold.
    {
        const double qmin = exponent_threshold(model.p, d);
        std::string detail;
        bool pass = true;
        if (st.f_min < 0.0) {
            pass = false;
            detail += "f changes sign: monotonicity not satisfied; ";
        }
        if (!(model.q > qmin)) {
            pass = false;
            detail += fmt::format("q = {:.6g} not above threshold {:.6g}; ", model.q, qmin);
        } else {
            detail += fmt::format("q = {:.6g} > threshold {:.6g}; ", model.q, qmin);
        }
        if (d == 1) detail += "d = 1 is a testing convenience (threshold taken as 1); ";
        add("j4", pass ? CheckStatus::Pass : CheckStatus::Fail, detail,
            {{"f_min", st.f_min}, {"q", model.q}, {"q_min", qmin}});
    }

    // j5: the gradient bound is an equality by construction; large-state growth
    // j(x,s,0) - j(x,t,0) = -f (s - t) >= -C_j s^q for s >= t > M0 iff C_j >= sup f^+ M0^{1-q}.
    {
        const double needed = st.f_pos_sup * std::pow(model.M0, 1.0 - model.q);
        const bool pass = model.C_j >= needed;
        add("j5", pass ? CheckStatus::Pass : CheckStatus::Fail,
            pass ? "gradient part equality by construction; growth constant sufficient"
                 : "C_j below sup f^+ M0^{1-q}",
            {{"C_j", model.C_j}, {"C_j_required", needed}});
    }

    add("g1", model.beta1.builtin() ? CheckStatus::Pass : CheckStatus::NotCheckable,
        model.beta1.builtin() ? "pass by construction: g continuous in s"
                              : "user-supplied beta1; measurability not checkable");
    add("g2", CheckStatus::Pass, "pass by construction: g(x,0) = 0");
    add("g3", st.beta1_min > 0.0 ? CheckStatus::Pass : CheckStatus::Fail, "min beta1 over samples",
        {{"beta1_min", st.beta1_min}});
    add("g4", st.beta_gap_min >= 0.0 ? CheckStatus::Pass : CheckStatus::Fail, "min (beta2 - beta1) over samples",
        {{"beta_gap_min", st.beta_gap_min}});
    return rep;
}

}  // namespace robinshape
