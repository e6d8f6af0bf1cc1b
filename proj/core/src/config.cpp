#include "robinshape/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace robinshape {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double x;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument(fmt::format("{}: '{}' is not a number", key, v));
    }
    if (pos != v.size() || !std::isfinite(x)) throw std::invalid_argument(fmt::format("{}: '{}' is not a number", key, v));
    return x;
}

long long parse_int(const std::string& key, const std::string& v) {
    long long x = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw std::invalid_argument(fmt::format("{}: '{}' is not an integer", key, v));
    return x;
}

void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw std::invalid_argument(fmt::format("{}: {}", key, what));
}

std::vector<double> region_numbers(const std::string& text, std::string& kind) {
    std::vector<double> nums;
    std::stringstream ss(text);
    std::string tok;
    std::getline(ss, kind, ':');
    while (std::getline(ss, tok, ':')) nums.push_back(parse_double("region", tok));
    return nums;
}

void check_region(const std::string& key, const std::string& text, bool allow_empty) {
    std::string kind;
    const auto nums = region_numbers(text, kind);
    if (kind == "all" || (allow_empty && (kind == "full" || kind == "empty"))) {
        require(nums.empty(), key, "takes no arguments");
        return;
    }
    if (kind == "interval") {
        require(nums.size() == 2 && nums[0] <= nums[1], key, "expected interval:a:b with a <= b");
    } else if (kind == "box") {
        require(nums.size() == 4 && nums[0] <= nums[2] && nums[1] <= nums[3], key, "expected box:x0:y0:x1:y1");
    } else if (kind == "disc") {
        require(nums.size() == 3 && nums[2] > 0.0, key, "expected disc:cx:cy:r with r > 0");
    } else {
        throw std::invalid_argument(fmt::format("{}: unknown region '{}'", key, text));
    }
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

Setter real(double ExperimentConfig::*m, double lo, double hi, bool lo_open = false) {
    return [=](ExperimentConfig& c, const std::string& k, const std::string& v) {
        const double x = parse_double(k, v);
        const bool ok_lo = lo_open ? x > lo : x >= lo;
        require(ok_lo && x <= hi, k, fmt::format("{} out of range {}{}, {}]", x, lo_open ? "(" : "[", lo, hi));
        c.*m = x;
    };
}

Setter integer(int ExperimentConfig::*m, long long lo, long long hi) {
    return [=](ExperimentConfig& c, const std::string& k, const std::string& v) {
        const long long x = parse_int(k, v);
        require(x >= lo && x <= hi, k, fmt::format("{} out of range [{}, {}]", x, lo, hi));
        c.*m = static_cast<int>(x);
    };
}

Setter choice(std::string ExperimentConfig::*m, std::vector<std::string> options) {
    return [=](ExperimentConfig& c, const std::string& k, const std::string& v) {
        for (const auto& o : options)
            if (o == v) {
                c.*m = v;
                return;
            }
        throw std::invalid_argument(fmt::format("{}: '{}' is not one of {}", k, v, fmt::join(options, ", ")));
    };
}

Setter region(std::string ExperimentConfig::*m, bool allow_empty) {
    return [=](ExperimentConfig& c, const std::string& k, const std::string& v) {
        check_region(k, v, allow_empty);
        c.*m = v;
    };
}

const std::map<std::string, Setter>& setters() {
    constexpr double inf = std::numeric_limits<double>::infinity();
    static const std::map<std::string, Setter> table = {
        {"p", real(&ExperimentConfig::p, 1.0, 64.0, true)},
        {"q", real(&ExperimentConfig::q, 1.0, 64.0, true)},
        {"L", real(&ExperimentConfig::L, 0.0, inf, true)},
        {"c0", real(&ExperimentConfig::c0, 0.0, inf)},
        {"f", real(&ExperimentConfig::f, -inf, inf)},
        {"f_region", region(&ExperimentConfig::f_region, false)},
        {"beta", real(&ExperimentConfig::beta, 0.0, inf, true)},
        {"beta2", real(&ExperimentConfig::beta2, -1.0, inf)},
        {"C_j", real(&ExperimentConfig::C_j, 0.0, inf)},
        {"M0", real(&ExperimentConfig::M0, 0.0, inf, true)},
        {"eps0", real(&ExperimentConfig::eps0, 0.0, inf, true)},
        {"normalization", choice(&ExperimentConfig::normalization, {"energy", "unscaled"})},
        {"d", integer(&ExperimentConfig::d, 1, 2)},
        {"n", integer(&ExperimentConfig::n, 4, 4096)},
        {"side", real(&ExperimentConfig::side, 0.0, inf, true)},
        {"init", region(&ExperimentConfig::init, true)},
        {"tol", real(&ExperimentConfig::tol, 0.0, 1.0, true)},
        {"max_iter", integer(&ExperimentConfig::max_iter, 0, std::numeric_limits<int>::max())},
        {"eta", real(&ExperimentConfig::eta, -1.0, inf)},
        {"weights", choice(&ExperimentConfig::weights, {"auto", "corrected", "uncorrected"})},
        {"T0", real(&ExperimentConfig::T0, 0.0, inf)},
        {"cooling", real(&ExperimentConfig::cooling, 0.0, 1.0, true)},
        {"sweeps", integer(&ExperimentConfig::sweeps, 0, 10'000'000)},
        {"resolve_every", integer(&ExperimentConfig::resolve_every, 1, 10'000'000)},
        {"teleport_fraction", real(&ExperimentConfig::teleport_fraction, 0.0, 1.0)},
        {"seed",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             std::uint64_t x = 0;
             const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
             require(ec == std::errc() && ptr == v.data() + v.size(), k, "expected an unsigned 64-bit integer");
             c.seed = x;
         }},
        {"R", real(&ExperimentConfig::R, 0.0, inf, true)},
        {"b", real(&ExperimentConfig::b, 0.0, inf, true)},
        {"alpha", real(&ExperimentConfig::alpha, -1.0, 64.0)},
        {"mesh_n", integer(&ExperimentConfig::mesh_n, 64, 1'000'000)},
        {"method", choice(&ExperimentConfig::method, {"auto", "shooting", "rayleigh"})},
        {"samples", integer(&ExperimentConfig::samples, 2, 1'000'000)},
        {"p_min", real(&ExperimentConfig::p_min, 1.0, 64.0, true)},
        {"p_max", real(&ExperimentConfig::p_max, 1.0, 64.0, true)},
        {"p_steps", integer(&ExperimentConfig::p_steps, 1, 1'000'000)},
        {"suite", choice(&ExperimentConfig::suite, {"poincare", "reduction", "scaling", "ball-minimality"})},
        {"trials", integer(&ExperimentConfig::trials, 0, 10'000'000)},
    };
    return table;
}

ScalarField region_field(const std::string& text, double value) {
    std::string kind;
    const auto a = region_numbers(text, kind);
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (kind == "all") return ScalarField::constant(value);
    if (kind == "interval") return ScalarField::box_indicator(value, {a[0], -inf}, {a[1], inf});
    if (kind == "box") return ScalarField::box_indicator(value, {a[0], a[1]}, {a[2], a[3]});
    const double cx = a[0], cy = a[1], r2 = a[2] * a[2];
    return ScalarField::callable([=](Point x) {
        const double dx = x.x - cx, dy = x.y - cy;
        return dx * dx + dy * dy <= r2 ? value : 0.0;
    });
}

}  // namespace

const std::vector<std::string>& ExperimentConfig::keys() {
    static const std::vector<std::string> k = [] {
        std::vector<std::string> out;
        for (const auto& [name, _] : setters()) out.push_back(name);
        return out;
    }();
    return k;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
    const auto it = setters().find(key);
    if (it == setters().end()) throw std::invalid_argument(fmt::format("unknown config key '{}'", key));
    it->second(*this, key, trim(value));
}

void ExperimentConfig::validate() const {
    if (q > p) throw std::invalid_argument(fmt::format("q must be <= p (got q={}, p={})", q, p));
    if (beta2 >= 0.0 && beta2 < beta) throw std::invalid_argument("beta2 must be >= beta");
    if (alpha >= 0.0 && alpha <= 1.0) throw std::invalid_argument("alpha must be > 1 (or negative for alpha = q)");
    if (p_min > p_max) throw std::invalid_argument("p_min must be <= p_max");
    if (cooling >= 1.0) throw std::invalid_argument("cooling must be < 1");
}

ExperimentConfig parse_config(std::istream& is, ExperimentConfig base) {
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(fmt::format("config line {}: expected key = value", lineno));
        try {
            base.set(trim(line.substr(0, eq)), line.substr(eq + 1));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(fmt::format("config line {}: {}", lineno, e.what()));
        }
    }
    base.validate();
    return base;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument(fmt::format("cannot open config file '{}'", path));
    return parse_config(in, std::move(base));
}

IntegrandModel make_model(const ExperimentConfig& cfg) {
    IntegrandModel m;
    m.p = cfg.p;
    m.q = cfg.q;
    m.L = cfg.L;
    m.c0 = cfg.c0;
    m.f = region_field(cfg.f_region, cfg.f);
    m.beta1 = ScalarField::constant(cfg.beta);
    m.beta2 = ScalarField::constant(cfg.beta2 >= 0.0 ? cfg.beta2 : cfg.beta);
    m.C_j = cfg.C_j;
    m.M0 = cfg.M0;
    m.eps0 = cfg.eps0;
    m.normalization = cfg.normalization == "unscaled" ? Normalization::Unscaled : Normalization::EnergyForm;
    m.validate();
    return m;
}

Grid make_grid(const ExperimentConfig& cfg) { return Grid::box(cfg.d, cfg.n, cfg.side); }

ShapeMask make_init_mask(const ExperimentConfig& cfg, const Grid& grid) {
    std::string kind;
    const auto a = region_numbers(cfg.init, kind);
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (kind == "full" || kind == "all") return ShapeMask::full(grid);
    if (kind == "empty") return ShapeMask(grid);
    if (kind == "interval") return ShapeMask::box(grid, {a[0], -inf}, {a[1], inf});
    if (kind == "box") return ShapeMask::box(grid, {a[0], a[1]}, {a[2], a[3]});
    return ShapeMask::ball(grid, {a[0], a[1]}, a[2]);
}

SolverConfig make_solver(const ExperimentConfig& cfg) {
    SolverConfig s;
    s.tol = cfg.tol;
    s.max_iter = cfg.max_iter;
    s.eta = cfg.eta;
    if (cfg.weights == "corrected") s.weights = BoundaryWeights::Corrected;
    if (cfg.weights == "uncorrected") s.weights = BoundaryWeights::Uncorrected;
    return s;
}

AnnealSchedule make_schedule(const ExperimentConfig& cfg) {
    AnnealSchedule s;
    s.T0 = cfg.T0;
    s.cooling = cfg.cooling;
    s.sweeps = cfg.sweeps;
    s.resolve_every = cfg.resolve_every;
    s.seed = cfg.seed;
    s.teleport_fraction = cfg.teleport_fraction;
    return s;
}

}  // namespace robinshape
