#pragma once

// Low-polarization mean-field dynamics of a single species: secular Larmor
// precession, spin-exchange collisions and uniform relaxation at 1/T1.

#include <limits>
#include <string>
#include <vector>

#include "serfsim/spin_core.hpp"

namespace serf::meanfield {

struct MeanFieldParams {
    NuclearSpin spin = NuclearSpin::three_halves();
    double R_se = 1e6;   // 1/s
    double T1 = 10e-3;   // s; +infinity disables lifetime relaxation
    double gamma_e = 0;  // rad/(s T)
    double B_z = 0;      // T

    void validate() const;
};

/// Superoperator acting on column-major vec(rho):
///   d rho/dt = -i[H, rho] + R_se (phi(rho) + (4/d) sum_i Tr(S_i rho) S_i - rho)
///            + (1/T1) (Tr(rho) 1/d - rho)
/// with phi(rho) = rho/4 + sum_i S_i rho S_i. Coherences between the two
/// hyperfine manifolds are projected out on both sides.
Matrix liouvillian(const MeanFieldParams& params);

/// Vectorized indices (k + d l) of the intra-manifold coherences rho_{kl}
/// with m_k - m_l = -1. This is the sector read out by <F_+> = Tr(rho F_+).
std::vector<int> plus_coherence_sector(const AtomBasis& basis);

struct RelaxationResult {
    double B_z = 0;
    double Gamma = 0;      // 1/s
    double omega = 0;      // rad/s
    double gamma_eff = 0;  // rad/(s T)
    double mode_overlap = 0;
    /// Runner-up overlap within 5% of the selected mode.
    bool degenerate = false;
};

/// Dominant transverse eigenmode: the eigenpair of the plus-coherence sector
/// with the largest overlap with vec(F_-a), ties broken by smallest Gamma.
RelaxationResult transverse_mode(const MeanFieldParams& params);

/// One transverse_mode per field value. B_grid must be ascending and positive.
/// The parallel and serial variants produce identical output.
std::vector<RelaxationResult> sweep_field(const MeanFieldParams& params, const std::vector<double>& B_grid);
std::vector<RelaxationResult> sweep_field_serial(const MeanFieldParams& params, const std::vector<double>& B_grid);

/// Log-spaced field grid spanning gamma_e B / R_se in [ratio_min, ratio_max].
std::vector<double> field_grid_for_ratio(const MeanFieldParams& params, double ratio_min, double ratio_max,
                                         int points);

/// rho(t) = exp(L t) rho0 on an ascending grid starting at 0. The first entry
/// is rho0 itself.
std::vector<DensityMatrix> evolve(const DensityMatrix& rho0, const MeanFieldParams& params,
                                  const std::vector<double>& t_grid);

} // namespace serf::meanfield
