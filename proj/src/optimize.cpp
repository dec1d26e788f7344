#include "serfsim/optimize.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>

#include "serfsim/noise.hpp"

namespace serf::opt {

void OptimizeSpec::validate() const
{
    auto check_grid = [](const std::vector<double>& g, const char* name) {
        for (std::size_t k = 0; k < g.size(); ++k) {
            if (!(g[k] > 0.0) || !std::isfinite(g[k]))
                throw std::invalid_argument(std::string(name) + " grid values must be positive");
            if (k > 0 && !(g[k] > g[k - 1]))
                throw std::invalid_argument(std::string(name) + " grid must be strictly ascending");
        }
    };
    check_grid(n_K_grid, "n_K");
    check_grid(n_H_grid, "n_H");
    for (const Bounds& b : {Gamma_p, B_perp})
        if (!(b.lo > 0.0) || !(b.hi > b.lo) || !std::isfinite(b.hi))
            throw std::invalid_argument("optimizer bounds must be positive and ordered");
    if (!(rel_tol > 0.0))
        throw std::invalid_argument("rel_tol must be positive");
    if (restarts < 1 || max_evaluations < 3 * restarts)
        throw std::invalid_argument("need at least one restart and 3 evaluations per restart");
    base.validate();
}

std::vector<double> log_grid(double lo, double hi, int points)
{
    if (points < 0 || !(lo > 0.0) || !(hi >= lo))
        throw std::invalid_argument("invalid log grid");
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    std::vector<double> g;
    for (int k = 0; k < points; ++k) {
        const double f = points == 1 ? 0.0 : static_cast<double>(k) / (points - 1);
        g.push_back(std::pow(10.0, a + f * (b - a)));
    }
    if (points > 0)
        g.front() = lo;
    if (points > 1)
        g.back() = hi;
    return g;
}

dual::DualSpeciesParams cell_params(const OptimizeSpec& spec, double n_K, double n_H, double Gamma_p, double B_perp)
{
    dual::DualSpeciesParams p = spec.base;
    p.n_K = n_K;
    p.n_H = n_H;
    p.pump_input = dual::PumpInput::Gamma_p;
    p.pump = Gamma_p;
    p.B_perp = B_perp;
    p.omega_drive = 0.0;
    return p;
}

namespace {

using Point = std::array<double, 2>;  // log10 Gamma_p, log10 B_perp

class Objective {
public:
    Objective(const OptimizeSpec& spec, double n_K, double n_H, Point lo, Point hi)
        : spec_(spec), n_K_(n_K), n_H_(n_H), lo_(lo), hi_(hi)
    {
    }

    Point clamp(Point x) const
    {
        for (int d = 0; d < 2; ++d)
            x[d] = std::clamp(x[d], lo_[d], hi_[d]);
        return x;
    }

    double operator()(const Point& raw)
    {
        const Point x = clamp(raw);
        ++evaluations;
        double value = std::numeric_limits<double>::infinity();
        try {
            const double B = std::pow(10.0, x[1]);
            dual::DualSpeciesParams p = cell_params(spec_, n_K_, n_H_, std::pow(10.0, x[0]), B);
            const double limit = dual::drive_limit(p);
            p.B_perp = std::min(B, limit);
            value = std::log(dual::sensitivity(p).delta_B_norm);
        } catch (const dual::InfeasibleParameters&) {
        } catch (const dual::NumericalFailure&) {
        }
        if (!std::isfinite(value))
            value = std::numeric_limits<double>::infinity();
        best = std::min(best, value);
        best_history.push_back(best);
        if (value < best_value_at) {
            best_value_at = value;
            best_point = x;
        }
        return value;
    }

    int evaluations = 0;
    double best = std::numeric_limits<double>::infinity();
    double best_value_at = std::numeric_limits<double>::infinity();
    Point best_point{0.0, 0.0};
    std::vector<double> best_history;

private:
    const OptimizeSpec& spec_;
    double n_K_, n_H_;
    Point lo_, hi_;
};

// Nelder-Mead on a projected box; stops at the budget or when the simplex
// has collapsed.
void nelder_mead(Objective& f, Point start, double step, int budget)
{
    std::array<Point, 3> s{start, start, start};
    s[1][0] += step;
    s[2][1] += step;
    for (auto& v : s)
        v = f.clamp(v);
    // A clamped start can coincide with a neighbour; push inward instead
    for (int d = 0; d < 2; ++d)
        if (s[d + 1] == s[0])
            s[d + 1][d] -= step;
    std::array<double, 3> fv{};
    int used = 0;
    for (int k = 0; k < 3; ++k) {
        fv[static_cast<std::size_t>(k)] = f(s[static_cast<std::size_t>(k)]);
        ++used;
    }

    auto eval = [&](const Point& p) {
        ++used;
        return f(p);
    };
    while (used < budget) {
        std::array<int, 3> idx{0, 1, 2};
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[static_cast<std::size_t>(a)] < fv[static_cast<std::size_t>(b)]; });
        const Point best = s[static_cast<std::size_t>(idx[0])];
        const Point mid = s[static_cast<std::size_t>(idx[1])];
        const Point worst = s[static_cast<std::size_t>(idx[2])];
        const double f_best = fv[static_cast<std::size_t>(idx[0])];
        const double f_mid = fv[static_cast<std::size_t>(idx[1])];
        const double f_worst = fv[static_cast<std::size_t>(idx[2])];

        double diameter = 0;
        for (const Point& v : s)
            diameter = std::max({diameter, std::abs(v[0] - best[0]), std::abs(v[1] - best[1])});
        if (std::isfinite(f_worst) && std::abs(f_worst - f_best) < 1e-10 && diameter < 1e-7)
            break;

        const Point c{0.5 * (best[0] + mid[0]), 0.5 * (best[1] + mid[1])};
        auto along = [&](double t) { return f.clamp(Point{c[0] + t * (worst[0] - c[0]), c[1] + t * (worst[1] - c[1])}); };

        const Point xr = along(-1.0);
        const double fr = eval(xr);
        Point replace = worst;
        double f_replace = f_worst;
        if (fr < f_best) {
            const Point xe = along(-2.0);
            const double fe = used < budget ? eval(xe) : std::numeric_limits<double>::infinity();
            if (fe < fr) {
                replace = xe;
                f_replace = fe;
            } else {
                replace = xr;
                f_replace = fr;
            }
        } else if (fr < f_mid) {
            replace = xr;
            f_replace = fr;
        } else {
            const bool outside = fr < f_worst;
            const Point xc = along(outside ? -0.5 : 0.5);
            const double fc = used < budget ? eval(xc) : std::numeric_limits<double>::infinity();
            if (fc < (outside ? fr : f_worst)) {
                replace = xc;
                f_replace = fc;
            } else {
                // shrink toward the best vertex
                for (int k = 1; k < 3 && used < budget; ++k) {
                    const std::size_t i = static_cast<std::size_t>(idx[static_cast<std::size_t>(k)]);
                    s[i] = Point{0.5 * (s[i][0] + best[0]), 0.5 * (s[i][1] + best[1])};
                    fv[i] = eval(s[i]);
                }
                continue;
            }
        }
        const std::size_t w = static_cast<std::size_t>(idx[2]);
        s[w] = replace;
        fv[w] = f_replace;
    }
}

} // namespace

PointResult optimize_point(double n_K, double n_H, const OptimizeSpec& spec)
{
    spec.validate();
    PointResult out;
    out.n_K = n_K;
    out.n_H = n_H;

    double B_hi = spec.B_perp.hi;
    try {
        B_hi = std::min(B_hi, dual::drive_limit(cell_params(spec, n_K, n_H, spec.Gamma_p.lo, spec.B_perp.lo)));
    } catch (const dual::InfeasibleParameters& e) {
        out.note = e.what();
        return out;
    }
    if (!(B_hi > spec.B_perp.lo)) {
        out.note = "drive bounds are empty under the linearity limit";
        return out;
    }
    const Point lo{std::log10(spec.Gamma_p.lo), std::log10(spec.B_perp.lo)};
    const Point hi{std::log10(spec.Gamma_p.hi), std::log10(B_hi)};
    Objective f(spec, n_K, n_H, lo, hi);

    // Start lattice: four pump levels times two drive levels
    std::vector<Point> starts;
    const int pump_levels = (spec.restarts + 1) / 2;
    for (int i = 0; i < pump_levels; ++i)
        for (int j = 0; j < 2 && static_cast<int>(starts.size()) < spec.restarts; ++j) {
            const double u = lo[0] + (hi[0] - lo[0]) * (i + 0.5) / pump_levels;
            const double v = j == 0 ? hi[1] : std::max(lo[1], hi[1] - 1.0);
            starts.push_back({u, v});
        }
    const int per_start = spec.max_evaluations / spec.restarts;
    for (const Point& s : starts)
        nelder_mead(f, s, 0.5, per_start);

    out.evaluations = f.evaluations;
    if (!std::isfinite(f.best)) {
        out.note = "no feasible start";
        return out;
    }
    out.feasible = true;
    out.Gamma_p = std::pow(10.0, f.best_point[0]);
    out.B_perp = std::min(std::pow(10.0, f.best_point[1]), B_hi);  // exact bound, no round-trip ulp
    out.delta_B = std::exp(f.best);

    const auto& h = f.best_history;
    if (h.size() > 20) {
        const double before = h[h.size() - 21];
        out.converged = std::isfinite(before) && std::abs(std::exp(before - f.best) - 1.0) < spec.rel_tol;
    }
    if (!out.converged)
        out.note = "objective still moving over the final 20 evaluations";
    return out;
}

namespace {

SensitivityMap empty_map(const OptimizeSpec& spec)
{
    spec.validate();
    SensitivityMap map;
    map.n_K = spec.n_K_grid;
    map.n_H = spec.n_H_grid;
    map.cells.resize(map.n_K.size() * map.n_H.size());
    return map;
}

void finish(SensitivityMap& map)
{
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < map.cells.size(); ++k)
        if (map.cells[k].feasible && map.cells[k].delta_B < best) {
            best = map.cells[k].delta_B;
            map.argmin = k;
            map.any_feasible = true;
        }
}

} // namespace

SensitivityMap sensitivity_map(const OptimizeSpec& spec)
{
    SensitivityMap map = empty_map(spec);
    const std::size_t nH = map.n_H.size();
    const long n = static_cast<long>(map.cells.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (long k = 0; k < n; ++k) {
        try {
            const std::size_t i = static_cast<std::size_t>(k);
            map.cells[i] = optimize_point(map.n_K[i / nH], map.n_H[i % nH], spec);
        } catch (...) {
#pragma omp critical
            if (!failure)
                failure = std::current_exception();
        }
    }
    if (failure)
        std::rethrow_exception(failure);
    finish(map);
    return map;
}

SensitivityMap sensitivity_map_serial(const OptimizeSpec& spec)
{
    SensitivityMap map = empty_map(spec);
    const std::size_t nH = map.n_H.size();
    for (std::size_t i = 0; i < map.cells.size(); ++i)
        map.cells[i] = optimize_point(map.n_K[i / nH], map.n_H[i % nH], spec);
    finish(map);
    return map;
}

double drive_nonlinearity(const dual::DualSpeciesParams& p)
{
    const dual::Rates r = dual::derive_rates(p);
    dual::DualSpeciesParams half = p;
    half.B_perp = 0.5 * p.B_perp;
    const cplx full_k = dual::lockin_response(p, {r.omega_H}).front().amplitude;
    const cplx half_k = dual::lockin_response(half, {r.omega_H}).front().amplitude;
    return std::abs(full_k) / (2.0 * std::abs(half_k)) - 1.0;
}

int monotonicity_violations(const SensitivityMap& map, double rel_tol)
{
    int count = 0;
    for (std::size_t i = 0; i < map.n_K.size(); ++i)
        for (std::size_t j = 1; j < map.n_H.size(); ++j) {
            const PointResult& a = map.at(i, j - 1);
            const PointResult& b = map.at(i, j);
            if (a.feasible && b.feasible && b.delta_B > a.delta_B * (1.0 + rel_tol))
                ++count;
        }
    return count;
}

} // namespace serf::opt
