#include "serfsim/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>

#include <omp.h>

#include "serfsim/meanfield.hpp"
#include "serfsim/noise.hpp"
#include "serfsim/optimize.hpp"
#include "serfsim/output.hpp"
#include "serfsim/pair_collision.hpp"

#ifndef SERFSIM_VERSION
#define SERFSIM_VERSION "dev"
#endif

namespace serf::cli {

using config::ConfigError;
using config::ConfigReader;
using config::Dimension;
using nlohmann::json;
using output::number;

namespace {

std::string spin_label(int two_i) { return std::to_string(two_i) + "/2"; }

json rates_json(const dual::Rates& r)
{
    return {{"Gamma_HK", r.Gamma_HK}, {"Gamma_KH", r.Gamma_KH}, {"Gamma_K", r.Gamma_K},
            {"Gamma_H", r.Gamma_H},   {"Gamma_p", r.Gamma_p},   {"R_p", r.R_p},
            {"R_sd_H", r.R_sd_H},     {"q_K", r.q_K},           {"P_Kz", r.P_Kz},
            {"omega_H", r.omega_H},   {"omega_K", r.omega_K},   {"omega_drive", r.omega_drive}};
}

struct Context {
    std::string command;
    ConfigReader reader;
    GlobalOptions global;
    std::uint64_t seed = 1;
    std::vector<std::string> warnings;
    json derived = json::object();
    json summary = json::object();

    /// Closes the schema phase: leftover keys are errors from here on.
    void start() { reader.finish(); }
};

// ---------------------------------------------------------------------------

void fig2ab(Context& ctx, output::RunOutput& out)
{
    auto& r = ctx.reader;
    meanfield::MeanFieldParams base;
    const std::vector<int> spins = r.spins("spins", {1, 3});
    base.R_se = r.quantity("R_se", Dimension::rate, 1e6);
    base.T1 = r.quantity("T1", Dimension::time, 10e-3);
    base.gamma_e = r.quantity("gamma_e", Dimension::gyromagnetic, dual::default_gamma_e);
    const double ratio_min = r.quantity("ratio_min", Dimension::none, 1e-3);
    const double ratio_max = r.quantity("ratio_max", Dimension::none, 1e3);
    const int points = static_cast<int>(r.integer("points", 60, 0, 100000));
    const double marker = r.quantity("marker_B", Dimension::field, 50e-6);
    if (!(ratio_min > 0 && ratio_max >= ratio_min))
        throw ConfigError("ratio_min/ratio_max must be positive and ordered");
    base.validate();
    ctx.start();

    output::CsvTable csv({"B_T", "I", "gamma_e_B_over_R_se", "Gamma_per_s", "omega_rad_per_s", "gamma_eff_over_gamma_e",
                          "mode_overlap", "degenerate", "geomagnetic_marker"});
    std::vector<output::Series> gamma_series, ratio_series;
    for (int two_i : spins) {
        meanfield::MeanFieldParams p = base;
        p.spin = NuclearSpin(two_i);
        std::vector<double> grid = meanfield::field_grid_for_ratio(p, ratio_min, ratio_max, points);
        std::vector<char> is_marker(grid.size(), 0);
        if (!grid.empty()) {
            const auto pos = std::lower_bound(grid.begin(), grid.end(), marker);
            is_marker.insert(is_marker.begin() + (pos - grid.begin()), 1);
            grid.insert(pos, marker);
        }
        const auto res = meanfield::sweep_field(p, grid);
        output::Series g{"I=" + spin_label(two_i), {}, {}}, q{"I=" + spin_label(two_i), {}, {}};
        for (std::size_t k = 0; k < res.size(); ++k) {
            const auto& m = res[k];
            csv.add_row({number(m.B_z), spin_label(two_i), number(p.gamma_e * m.B_z / p.R_se), number(m.Gamma),
                         number(m.omega), number(m.gamma_eff / p.gamma_e), number(m.mode_overlap),
                         m.degenerate ? "1" : "0", is_marker[k] ? "1" : "0"});
            if (!is_marker[k]) {
                g.x.push_back(m.B_z);
                g.y.push_back(m.Gamma);
                q.x.push_back(m.B_z);
                q.y.push_back(m.gamma_eff / p.gamma_e);
            }
        }
        gamma_series.push_back(g);
        ratio_series.push_back(q);
    }
    out.write("fig2ab.csv", csv.str());
    if (ctx.global.plot) {
        out.write("fig2a.svg", output::line_plot_svg({"Transverse decoherence rate", "B (T)", "Gamma (1/s)", true, true, marker},
                                                     gamma_series));
        out.write("fig2b.svg", output::line_plot_svg({"Effective gyromagnetic ratio", "B (T)", "gamma_eff / gamma_e", true,
                                                      false, marker},
                                                     ratio_series));
    }
    ctx.summary["geomagnetic_marker_T"] = marker;
}

// ---------------------------------------------------------------------------

void fig2c(Context& ctx, output::RunOutput& out)
{
    auto& r = ctx.reader;
    const std::vector<int> spins = r.spins("spins", {1, 3});
    const std::vector<double> P_grid = r.quantity_list("P_grid", Dimension::none, {0.2, 0.5, 0.9});
    const int phi_points = static_cast<int>(r.integer("phi_points", 64, 0, 100000));
    const double angle = r.quantity("precession_angle", Dimension::angle, std::numbers::pi / 2);
    for (double P : P_grid)
        if (!(P > 0 && P < 1))
            throw ConfigError("P_grid values must lie in (0, 1)");
    ctx.start();

    output::CsvTable csv({"I", "P", "phi_rad", "epsilon_upper", "epsilon_lower"});
    std::vector<output::Series> series;
    for (int two_i : spins) {
        const AtomBasis basis = build_basis(NuclearSpin(two_i));
        const OperatorSet ops = spin_operators(basis);
        const PairOperatorSet pair = pair_operators(basis, basis);
        for (double P : P_grid) {
            const DensityMatrix rho = collision::differentially_precessed_state(ops, P, angle);
            output::Series s{"I=" + spin_label(two_i) + " P=" + number(P), {}, {}};
            for (int k = 0; k < phi_points; ++k) {
                const double phi = two_pi * k / phi_points;
                const collision::SpinTransfer e = collision::epsilon_plus(pair, rho, rho, phi);
                csv.add_row({spin_label(two_i), number(P), number(phi), number(e.upper), number(e.lower)});
                s.x.push_back(phi);
                s.y.push_back(e.upper);
            }
            series.push_back(s);
        }
    }
    out.write("fig2c.csv", csv.str());
    if (ctx.global.plot)
        out.write("fig2c.svg", output::line_plot_svg({"Spin transfer per collision (upper manifold)", "phi (rad)",
                                                      "epsilon_+", false, false, std::nullopt},
                                                     series));
    ctx.summary["initial_state"] = "spin-temperature state along x, manifolds precessed by +/- precession_angle about z";
}

// ---------------------------------------------------------------------------

void fig2d(Context& ctx, output::RunOutput& out)
{
    auto& r = ctx.reader;
    const std::vector<int> spins = r.spins("spins", {1, 3});
    const std::vector<double> P_grid =
        r.quantity_list("P_grid", Dimension::none, {0, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99});
    collision::McConfig base;
    base.R_se = r.quantity("R_se", Dimension::rate, 1e6);
    base.gamma_e = r.quantity("gamma_e", Dimension::gyromagnetic, dual::default_gamma_e);
    const double ratio = r.quantity("field_ratio", Dimension::none, 0.05);
    base.n_trajectories = static_cast<int>(r.integer("n_trajectories", 200, 1, 1000000));
    base.samples = static_cast<int>(r.integer("samples", 1501, 16, 10000000));
    base.tip_angle = r.quantity("tip_angle", Dimension::angle, 0.05);
    const double periods = r.quantity("periods", Dimension::none, 6);
    const std::string mode = r.choice("phi_mode", {"averaged", "stochastic"}, "averaged");
    const std::uint64_t seed = r.unsigned64("seed", 1);
    base.seed = ctx.global.seed.value_or(seed);
    base.phi_mode = mode == "averaged" ? collision::PhaseMode::averaged : collision::PhaseMode::stochastic;
    if (!(ratio > 0) || !(periods > 0))
        throw ConfigError("field_ratio and periods must be positive");
    base.B_z = ratio * base.R_se / base.gamma_e;
    for (double P : P_grid)
        if (!(P >= 0 && P <= 0.99))
            throw ConfigError("P_grid values must lie in [0, 0.99]");
    ctx.start();

    output::CsvTable csv({"I", "P", "q", "gamma_fit_rad_per_s_T", "Gamma_fit_per_s", "omega_rad_per_s", "residual",
                          "periods_fitted", "flagged", "mode"});
    std::vector<output::Series> series;
    json notes = json::array();
    for (int two_i : spins) {
        const NuclearSpin spin(two_i);
        collision::McConfig c = base;
        c.spin = spin;
        // long enough for `periods` cycles at the low-polarization slowing-down
        const double I = spin.value();
        const double q0 = 1.0 + 4.0 * I * (I + 1.0) / 3.0;
        c.duration = 3.0 / c.R_se + periods * two_pi / (c.gamma_e * c.B_z / q0);
        const auto res = collision::slowing_down_curve(spin, P_grid, c);
        output::Series s{"I=" + spin_label(two_i), {}, {}};
        for (const auto& x : res) {
            csv.add_row({spin_label(two_i), number(x.P), number(x.q), number(x.gamma_fitted), number(x.Gamma_fitted),
                         number(x.omega), number(x.fit_residual), number(x.periods_fitted), x.flagged ? "1" : "0", mode});
            s.x.push_back(x.P);
            s.y.push_back(x.q);
            if (x.flagged)
                notes.push_back({{"I", spin_label(two_i)}, {"P", x.P}, {"note", x.note}});
        }
        series.push_back(s);
    }
    out.write("fig2d.csv", csv.str());
    if (ctx.global.plot)
        out.write("fig2d.svg", output::line_plot_svg({"Slowing-down factor", "P", "q", false, false, std::nullopt}, series));
    ctx.summary["flagged"] = notes;
    ctx.summary["B_z_T"] = base.B_z;
    ctx.summary["seed"] = base.seed;
}

// ---------------------------------------------------------------------------

void fig3b(Context& ctx, output::RunOutput& out)
{
    auto& r = ctx.reader;
    const dual::DualSpeciesParams p = read_dual_params(r, {"omega_drive"}, ctx.warnings);
    const std::string label = r.choice("label", {"star", "cross", "custom"}, "custom");
    const double lo = r.quantity("omega_min", Dimension::frequency, 0);
    const double hi = r.quantity("omega_max", Dimension::frequency, 0);
    const int points = static_cast<int>(r.integer("points", 301, 0, 1000000));
    const int resonance_points = static_cast<int>(r.integer("resonance_points", 81, 0, 1000000));
    const double resonance_span = r.quantity("resonance_span", Dimension::none, 20);
    ctx.start();

    const dual::Rates rates = dual::derive_rates(p);
    const double w_lo = lo > 0 ? lo : 0.25 * rates.omega_K;
    const double w_hi = hi > 0 ? hi : 1.5 * rates.omega_H;
    if (!(w_hi > w_lo))
        throw ConfigError("omega_max must exceed omega_min");
    std::vector<double> grid = opt::log_grid(w_lo, w_hi, points);
    // the hydrogen line is far narrower than any log spacing; sample it
    // separately over omega_H +- resonance_span Gamma_H
    for (int k = 0; k < resonance_points; ++k) {
        const double u = resonance_points == 1 ? 0.0 : -1.0 + 2.0 * k / (resonance_points - 1);
        const double w = rates.omega_H + u * resonance_span * rates.Gamma_H;
        if (w > 0)
            grid.push_back(w);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    const auto lockin = dual::lockin_response(p, grid);
    output::CsvTable csv({"omega_rad_per_s", "f_Hz", "method", "re", "im", "abs"});
    output::Series s_lock{"lock-in", {}, {}}, s_eq{"closed form", {}, {}, true};
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const cplx a = lockin[k].amplitude;
        const cplx b = dual::analytic_response(p, grid[k]).amplitude;
        csv.add_row({number(grid[k]), number(grid[k] / two_pi), "ode_lockin", number(a.real()), number(a.imag()),
                     number(std::abs(a))});
        csv.add_row({number(grid[k]), number(grid[k] / two_pi), "analytic_eq4", number(b.real()), number(b.imag()),
                     number(std::abs(b))});
        s_lock.x.push_back(grid[k] / two_pi);
        s_lock.y.push_back(std::abs(a));
        s_eq.x.push_back(grid[k] / two_pi);
        s_eq.y.push_back(std::abs(b));
    }
    out.write("fig3b-" + label + ".csv", csv.str());
    if (ctx.global.plot)
        out.write("fig3b-" + label + ".svg",
                  output::line_plot_svg({"Potassium response (" + label + ")", "f (Hz)", "|<P_K+>|", true, true, std::nullopt},
                                        {s_lock, s_eq}));

    const cplx at_H = dual::lockin_response(p, {rates.omega_H}).front().amplitude;
    const cplx eq_H = dual::analytic_response(p, rates.omega_H).amplitude;
    ctx.derived = rates_json(rates);
    ctx.summary["label"] = label;
    ctx.summary["lockin_over_closed_form_at_omega_H"] = std::abs(at_H) / std::abs(eq_H);
    ctx.summary["drive_over_Gamma_H"] = p.gamma_H() * p.B_perp / rates.Gamma_H;
}

// ---------------------------------------------------------------------------

void fig4(Context& ctx, output::RunOutput& out)
{
    auto& r = ctx.reader;
    opt::OptimizeSpec spec;
    spec.base = read_dual_params(r, {"n_K", "n_H", "Gamma_p", "R_p", "B_perp", "omega_drive"}, ctx.warnings);
    const double nK_lo = r.quantity("n_K_min", Dimension::density, 1e10);
    const double nK_hi = r.quantity("n_K_max", Dimension::density, 1e13);
    const int nK_n = static_cast<int>(r.integer("n_K_points", 24, 1, 10000));
    const double nH_lo = r.quantity("n_H_min", Dimension::density, 1e14);
    const double nH_hi = r.quantity("n_H_max", Dimension::density, 1e18);
    const int nH_n = static_cast<int>(r.integer("n_H_points", 24, 1, 10000));
    spec.Gamma_p.lo = r.quantity("Gamma_p_min", Dimension::rate, spec.Gamma_p.lo);
    spec.Gamma_p.hi = r.quantity("Gamma_p_max", Dimension::rate, spec.Gamma_p.hi);
    spec.B_perp.lo = r.quantity("B_perp_min", Dimension::field, spec.B_perp.lo);
    spec.B_perp.hi = r.quantity("B_perp_max", Dimension::field, spec.B_perp.hi);
    spec.rel_tol = r.quantity("rel_tol", Dimension::none, spec.rel_tol);
    spec.max_evaluations = static_cast<int>(r.integer("max_evaluations", spec.max_evaluations, 3, 1000000));
    spec.restarts = static_cast<int>(r.integer("restarts", spec.restarts, 1, 1000));
    const double star_nK = r.quantity("star_n_K", Dimension::density, 1.2e11);
    const double star_nH = r.quantity("star_n_H", Dimension::density, 2.7e16);
    const bool check_linearity = r.boolean("check_linearity", true);
    if (!(nK_hi >= nK_lo) || !(nH_hi >= nH_lo))
        throw ConfigError("grid bounds must be ordered");
    spec.n_K_grid = opt::log_grid(nK_lo, nK_hi, nK_n);
    spec.n_H_grid = opt::log_grid(nH_lo, nH_hi, nH_n);
    spec.validate();
    ctx.start();

    const opt::SensitivityMap map = opt::sensitivity_map(spec);
    output::CsvTable csv({"n_K_per_cm3", "n_H_per_cm3", "delta_B_aT_sqrt_cm3_per_Hz", "Gamma_p_per_s", "B_perp_T",
                          "evaluations", "converged", "feasible"});
    std::vector<std::vector<double>> values(map.n_H.size(), std::vector<double>(map.n_K.size()));
    int unconverged = 0, infeasible = 0;
    for (std::size_t i = 0; i < map.n_K.size(); ++i)
        for (std::size_t j = 0; j < map.n_H.size(); ++j) {
            const auto& c = map.at(i, j);
            csv.add_row({number(c.n_K), number(c.n_H), c.feasible ? number(c.delta_B) : "nan",
                         c.feasible ? number(c.Gamma_p) : "nan", c.feasible ? number(c.B_perp) : "nan",
                         std::to_string(c.evaluations), c.converged ? "1" : "0", c.feasible ? "1" : "0"});
            values[j][i] = c.feasible ? c.delta_B : std::nan("");
            unconverged += c.feasible && !c.converged;
            infeasible += !c.feasible;
        }
    out.write("fig4.csv", csv.str());
    if (ctx.global.plot)
        out.write("fig4.svg", output::heatmap_svg({"Projected sensitivity (aT sqrt(cm^3/Hz))", "n_K (1/cm^3)",
                                                   "n_H (1/cm^3)", true, true, std::nullopt},
                                                  map.n_K, map.n_H, values, std::make_pair(star_nK, star_nH)));

    json s;
    if (map.any_feasible) {
        const auto& best = map.cells[map.argmin];
        s["argmin"] = {{"n_K", best.n_K},         {"n_H", best.n_H},   {"delta_B", best.delta_B},
                       {"Gamma_p", best.Gamma_p}, {"B_perp", best.B_perp}, {"converged", best.converged}};
    }
    const opt::PointResult star = opt::optimize_point(star_nK, star_nH, spec);
    json star_json = {{"n_K", star.n_K},         {"n_H", star.n_H},       {"feasible", star.feasible},
                      {"delta_B", star.delta_B}, {"Gamma_p", star.Gamma_p}, {"B_perp", star.B_perp},
                      {"converged", star.converged}};
    if (star.feasible && check_linearity) {
        const auto p = opt::cell_params(spec, star.n_K, star.n_H, star.Gamma_p, star.B_perp);
        star_json["drive_nonlinearity"] = opt::drive_nonlinearity(p);
    }
    s["star"] = star_json;
    s["monotonicity_violations"] = opt::monotonicity_violations(map, spec.rel_tol);
    s["unconverged_cells"] = unconverged;
    s["infeasible_cells"] = infeasible;
    ctx.summary = s;
    out.write("fig4-summary.json", s.dump(2) + "\n");
}

// ---------------------------------------------------------------------------

void sensitivity(Context& ctx, output::RunOutput& out)
{
    auto& r = ctx.reader;
    const dual::DualSpeciesParams p = read_dual_params(r, {}, ctx.warnings);
    const bool check_linearity = r.boolean("check_linearity", true);
    ctx.start();

    const dual::SensitivityResult s = dual::sensitivity(p);
    json j = {{"delta_B_T_per_sqrt_Hz", s.delta_B},
              {"delta_B_aT_sqrt_cm3_per_Hz", s.delta_B_norm},
              {"components",
               {{"hydrogen_noise_only", s.delta_B_norm_hydrogen}, {"potassium_noise_only", s.delta_B_norm_potassium}}},
              {"phase_slope_rad_per_T", s.slope},
              {"noise_asd_per_sqrt_Hz", s.noise_asd},
              {"phase_asd_rad_per_sqrt_Hz", s.phase_asd},
              {"chi_rad", s.chi},
              {"amplitude", s.amplitude},
              {"drive_limit_T", dual::drive_limit(p)},
              {"rates", rates_json(s.rates)}};
    if (check_linearity) {
        const double nl = opt::drive_nonlinearity(p);
        j["drive_nonlinearity"] = nl;
        if (std::abs(nl) > 0.02)
            ctx.warnings.push_back("lock-in response departs from linear by more than 2% at this drive");
    }
    ctx.derived = rates_json(s.rates);
    ctx.summary = j;
    out.write("sensitivity.json", j.dump(2) + "\n");
}

using Handler = std::function<void(Context&, output::RunOutput&)>;

const std::vector<std::pair<std::string, Handler>>& handlers()
{
    static const std::vector<std::pair<std::string, Handler>> h{
        {"fig2ab", fig2ab}, {"fig2c", fig2c}, {"fig2d", fig2d},
        {"fig3b", fig3b},   {"fig4", fig4},   {"sensitivity", sensitivity}};
    return h;
}

} // namespace

const std::vector<std::string>& command_names()
{
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& [name, h] : handlers())
            n.push_back(name);
        return n;
    }();
    return names;
}

dual::DualSpeciesParams read_dual_params(ConfigReader& r, const std::vector<std::string>& skip,
                                         std::vector<std::string>& warnings)
{
    auto wanted = [&](const std::string& key) { return std::find(skip.begin(), skip.end(), key) == skip.end(); };
    dual::DualSpeciesParams p;
    p.gamma_e = r.quantity("gamma_e", Dimension::gyromagnetic, p.gamma_e);
    if (wanted("n_K"))
        p.n_K = r.quantity("n_K", Dimension::density, p.n_K);
    if (wanted("n_H"))
        p.n_H = r.quantity("n_H", Dimension::density, p.n_H);
    p.k_HK = r.quantity("k_HK", Dimension::rate_coeff, p.k_HK);
    p.q_H = r.quantity("q_H", Dimension::none, p.q_H);
    p.q_K = r.quantity("q_K", Dimension::none, p.q_K);
    p.q_K_mode = r.choice("q_K_mode", {"fixed", "self_consistent"}, "self_consistent") == "fixed"
                     ? dual::QKMode::fixed
                     : dual::QKMode::self_consistent;
    if (wanted("Gamma_p") && wanted("R_p")) {
        if (r.has("Gamma_p") && r.has("R_p"))
            throw ConfigError("give either Gamma_p or R_p, not both");
        if (r.has("R_p")) {
            p.pump_input = dual::PumpInput::R_p;
            p.pump = r.quantity("R_p", Dimension::rate, 0);
        } else {
            p.pump_input = dual::PumpInput::Gamma_p;
            p.pump = r.quantity("Gamma_p", Dimension::rate, p.pump);
        }
    }
    p.R_sd_K = r.quantity("R_sd_K", Dimension::rate, p.R_sd_K);
    if (!r.has("R_se_K"))
        warnings.push_back("R_se_K not set: potassium self-exchange relaxation taken as 0");
    p.R_se_K = r.quantity("R_se_K", Dimension::rate, p.R_se_K);
    const std::string mode = r.choice("Gamma_H_mode", {"fixed_total", "fixed_sd"}, "fixed_total");
    p.gamma_H_mode = mode == "fixed_total" ? dual::GammaHMode::fixed_total : dual::GammaHMode::fixed_sd;
    if (p.gamma_H_mode == dual::GammaHMode::fixed_total)
        p.Gamma_H = r.quantity("Gamma_H", Dimension::rate, p.Gamma_H);
    else
        p.R_sd_H = r.quantity("R_sd_H", Dimension::rate, p.R_sd_H);
    p.B_z = r.quantity("B_z", Dimension::field, p.B_z);
    if (wanted("B_perp"))
        p.B_perp = r.quantity("B_perp", Dimension::field, p.B_perp);
    if (wanted("omega_drive"))
        p.omega_drive = r.quantity("omega_drive", Dimension::frequency, p.omega_drive);
    p.V = r.quantity("V", Dimension::volume, p.V);
    p.validate();
    return p;
}

int run(const std::string& command, const config::ConfigFile& file, const GlobalOptions& global, std::ostream& err)
{
    const auto it = std::find_if(handlers().begin(), handlers().end(), [&](const auto& h) { return h.first == command; });
    if (it == handlers().end()) {
        err << "unknown command '" << command << "'\n";
        return usage_error;
    }
    if (global.threads > 0)
        omp_set_num_threads(global.threads);

    Context ctx{command, ConfigReader(file), global};
    const auto t0 = std::chrono::steady_clock::now();
    try {
        output::RunOutput out(global.out);
        it->second(ctx, out);
        for (const auto& w : ctx.warnings)
            err << "warning: " << w << "\n";
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        json manifest = {{"tool", "serfsim"},
                         {"version", SERFSIM_VERSION},
                         {"command", command},
                         {"config_source", file.source},
                         {"config", ctx.reader.resolved()},
                         {"derived_rates", ctx.derived},
                         {"summary", ctx.summary},
                         {"warnings", ctx.warnings},
                         {"threads", global.threads > 0 ? global.threads : omp_get_max_threads()},
                         {"wall_time_s", wall}};
        if (global.seed)
            manifest["seed_override"] = *global.seed;
        out.finish(manifest);
        return ok;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const dual::InfeasibleParameters& e) {
        err << "infeasible parameters: " << e.what() << "\n";
        return config_error;
    } catch (const std::invalid_argument& e) {
        // parameter combinations the models reject (drive above the limit, ...)
        err << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << "\n";
        return numerical_failure;
    }
}

} // namespace serf::cli
