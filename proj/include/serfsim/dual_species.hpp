#pragma once

// Coupled hydrogen-potassium Bloch equations: rates, deterministic and
// stochastic integration, the pumped steady state and the driven response.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "serfsim/spin_core.hpp"

namespace serf::dual {

/// Parameters that cannot describe a physical operating point (negative
/// back-solved rates, unstable drift). The optimizer treats these as
/// infeasible cells rather than failures.
class InfeasibleParameters : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Integration or convergence failure.
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Slowing-down factor of potassium versus electron polarization, linearly
/// interpolated and clamped at the table ends.
class SlowingDownTable {
public:
    SlowingDownTable(std::vector<double> P, std::vector<double> q);

    double operator()(double P) const;
    const std::vector<double>& P() const { return P_; }
    const std::vector<double>& q() const { return q_; }

    /// I = 3/2 curve from the averaged-mode pair Monte Carlo (200
    /// trajectories, seed 1, gamma_e B = 0.05 R_se), as written by `fig2d`.
    static const SlowingDownTable& potassium();

private:
    std::vector<double> P_;
    std::vector<double> q_;
};

enum class GammaHMode { fixed_total, fixed_sd };
enum class QKMode { fixed, self_consistent };
/// Which pumping symbol the configuration holds: R_p (unslowed) or
/// Gamma_p = R_p / q_K.
enum class PumpInput { R_p, Gamma_p };

inline constexpr double default_gamma_e = two_pi * 28e9;  // rad/(s T), 28 MHz/mT

struct DualSpeciesParams {
    double gamma_e = default_gamma_e;
    double n_K = 1.2e11;  // 1/cm^3
    double n_H = 2.7e16;  // 1/cm^3
    double k_HK = 5.4e-10;  // cm^3/s
    double q_H = 2;
    double q_K = 6;  // used as-is in fixed mode, as the starting guess otherwise
    QKMode q_K_mode = QKMode::self_consistent;
    std::optional<SlowingDownTable> q_K_table;  // empty: SlowingDownTable::potassium()
    PumpInput pump_input = PumpInput::Gamma_p;
    double pump = 1.2e7;  // 1/s, R_p or Gamma_p per pump_input
    double R_sd_K = 0;
    double R_se_K = 0;
    GammaHMode gamma_H_mode = GammaHMode::fixed_total;
    double Gamma_H = 40;  // 1/s, fixed_total mode
    double R_sd_H = 0;    // 1/s, fixed_sd mode
    double B_z = 50e-6;      // T
    double B_perp = 0.35e-9; // T
    double omega_drive = 0;  // rad/s; 0 means omega_H
    double V = 1;  // cm^3

    double gamma_H() const { return gamma_e / 2.0; }
    double gamma_K() const { return gamma_e / 4.0; }
    void validate() const;
};

struct Rates {
    double Gamma_HK = 0;
    double Gamma_KH = 0;
    double Gamma_K = 0;
    double Gamma_H = 0;
    double Gamma_p = 0;
    double R_p = 0;
    double R_sd_H = 0;
    double q_K = 0;
    double P_Kz = 0;  // pumped steady state at B_perp = 0
    double omega_H = 0;
    double omega_K = 0;
    double omega_drive = 0;
};

/// Rates for the current parameters. With a self-consistent q_K the
/// pair (q_K, P_Kz) is iterated to a fixed point of q_K = q(P_Kz).
Rates derive_rates(const DualSpeciesParams& p);

struct PolarizationState {
    Eigen::Vector3d P_H = Eigen::Vector3d::Zero();
    Eigen::Vector3d P_K = Eigen::Vector3d::Zero();
};

struct NoiseOptions {
    bool enabled = false;
    std::uint64_t seed = 1;
    /// Fixed step of the stochastic scheme; 0 selects
    /// min(1/(200 max rate), period/200).
    double dt = 0;
};

/// Solution of the Bloch equations on t_grid (ascending, starting at the
/// time of state0). Noise off: adaptive Dormand-Prince at rtol 1e-9.
/// Noise on: fixed-step exponential Euler-Maruyama.
std::vector<PolarizationState> integrate(const DualSpeciesParams& p, const PolarizationState& state0,
                                         const std::vector<double>& t_grid, const NoiseOptions& noise = {});

/// Closed-form pumped steady state at B_perp = 0.
PolarizationState steady_state(const DualSpeciesParams& p);

enum class ResponseMethod { ode_lockin, analytic_eq4, linear };

struct ResponsePoint {
    double omega = 0;
    cplx amplitude = 0;
    ResponseMethod method = ResponseMethod::linear;
};

struct LockinOptions {
    int samples_per_cycle = 64;
    int max_cycles = 50;
    double tolerance = 1e-6;
};

/// Demodulated <P_Kx + i P_Ky> e^{-i omega t} over one cycle of the periodic
/// steady state, found by shooting on the monodromy of the linear system.
std::vector<ResponsePoint> lockin_response(const DualSpeciesParams& p, const std::vector<double>& omega_grid,
                                           const LockinOptions& options = {});

/// Closed form in the rotating frame:
///   i gamma_K B_perp P_Kz / (Gamma_H (1 - a_K a_H / (Gamma_KH Gamma_HK)))
/// with a_q = Gamma_q - i(omega_q - omega).
ResponsePoint analytic_response(const DualSpeciesParams& p, double omega);

/// First-order response of the full equations at +omega, keeping the direct
/// drive of the potassium spins.
ResponsePoint linear_response(const DualSpeciesParams& p, double omega);

/// Linear drift of the transverse block (P_Hx, P_Hy, P_Kx, P_Ky) at B_perp = 0.
Eigen::Matrix4d transverse_drift(const Rates& r);

/// Largest real part among the eigenvalues of the full 6x6 drift.
double stability_margin(const Rates& r);

std::string to_string(ResponseMethod m);

} // namespace serf::dual
