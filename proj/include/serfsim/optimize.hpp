#pragma once

// Per-cell optimization of the pumping rate and drive amplitude, and the
// (n_K, n_H) sensitivity map built from it.

#include <cstddef>
#include <string>
#include <vector>

#include "serfsim/dual_species.hpp"

namespace serf::opt {

struct Bounds {
    double lo = 0;
    double hi = 0;
};

struct OptimizeSpec {
    std::vector<double> n_K_grid;  // 1/cm^3, ascending
    std::vector<double> n_H_grid;
    Bounds Gamma_p{1e3, 1e10};  // 1/s
    /// Upper B_perp bound; the linearity limit 2 Gamma_H / gamma_H applies
    /// on top of it.
    Bounds B_perp{1e-14, 1e-6};  // T
    /// Everything except n_K, n_H, the pump and B_perp is taken from here.
    dual::DualSpeciesParams base;
    double rel_tol = 1e-3;
    int max_evaluations = 400;  // per cell, shared by the restarts
    int restarts = 8;

    void validate() const;
};

struct PointResult {
    double n_K = 0;
    double n_H = 0;
    double Gamma_p = 0;
    double B_perp = 0;
    double delta_B = 0;  // aT sqrt(cm^3/Hz)
    int evaluations = 0;
    bool converged = false;
    bool feasible = false;
    std::string note;
};

/// Minimizes log delta_B over (log Gamma_p, log B_perp) with a bounded
/// Nelder-Mead search started from a fixed lattice. Converged means the best
/// value moved by less than rel_tol over the final 20 evaluations.
PointResult optimize_point(double n_K, double n_H, const OptimizeSpec& spec);

struct SensitivityMap {
    std::vector<double> n_K;
    std::vector<double> n_H;
    std::vector<PointResult> cells;  // index i_K * n_H.size() + i_H
    std::size_t argmin = 0;
    bool any_feasible = false;

    const PointResult& at(std::size_t i_K, std::size_t i_H) const { return cells[i_K * n_H.size() + i_H]; }
};

/// Cells run in parallel; the serial variant is the reference and gives the
/// same bits.
SensitivityMap sensitivity_map(const OptimizeSpec& spec);
SensitivityMap sensitivity_map_serial(const OptimizeSpec& spec);

/// Log-spaced points from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, int points);

/// Parameters of a cell at a given (Gamma_p, B_perp).
dual::DualSpeciesParams cell_params(const OptimizeSpec& spec, double n_K, double n_H, double Gamma_p, double B_perp);

/// |k(B_perp)| / (2 |k(B_perp / 2)|) - 1 from the time-domain lock-in at
/// omega_H: the departure from linear response at the chosen drive.
double drive_nonlinearity(const dual::DualSpeciesParams& p);

/// Number of n_H steps (at fixed n_K, both cells feasible) where delta_B
/// rises by more than rel_tol.
int monotonicity_violations(const SensitivityMap& map, double rel_tol);

} // namespace serf::opt
