#pragma once

// Projection noise of the coupled spins and the resulting field sensitivity.
//
// The transverse block x = (P_Hx, P_Hy, P_Kx, P_Ky) is linearized about the
// undriven steady state, dx = A x dt + D dW, with white-noise intensity
// 2 Gamma_q / (n_q V) per component, so an isolated species holds variance
// 1/(n_q V) per component. Spectra are single-sided, per Hz, indexed by
// angular frequency.

#include <vector>

#include <Eigen/Dense>

#include "serfsim/dual_species.hpp"

namespace serf::dual {

struct PsdPoint {
    double omega = 0;      // rad/s
    double total = 0;      // 1/Hz
    double hydrogen = 0;   // part driven by the hydrogen noise
    double potassium = 0;  // part driven by the potassium noise
};

/// Diagonal of D D^T: (sigma_H^2, sigma_H^2, sigma_K^2, sigma_K^2).
Eigen::Vector4d noise_intensities(const DualSpeciesParams& p, const Rates& r);

/// S(omega) of P_Kx with its hydrogen/potassium split. The drive is not
/// part of the linearization and B_perp is ignored.
PsdPoint noise_psd(const DualSpeciesParams& p, double omega);
std::vector<PsdPoint> noise_psd(const DualSpeciesParams& p, const std::vector<double>& omega_grid);

/// Stationary covariance of the transverse block, A S + S A^T + D D^T = 0.
Eigen::Matrix4d stationary_covariance(const DualSpeciesParams& p);

struct Periodogram {
    std::vector<double> omega;  // rad/s
    std::vector<double> psd;    // single-sided, 1/Hz
    double variance = 0;        // sum of psd over the frequency bins
    int segments = 0;
};

/// Welch estimate with Hann windows and 50% overlap.
Periodogram welch_periodogram(const std::vector<double>& x, double dt, int segment_length);

struct SensitivityResult {
    double delta_B = 0;       // T/sqrt(Hz) for the configured volume
    double delta_B_norm = 0;  // aT sqrt(cm^3/Hz)
    double delta_B_norm_hydrogen = 0;   // with only the hydrogen noise
    double delta_B_norm_potassium = 0;  // with only the potassium noise
    double slope = 0;      // |d chi / d B_z|, rad/T
    double noise_asd = 0;  // sqrt(S(omega_H)) of P_Kx, 1/sqrt(Hz)
    double phase_asd = 0;  // rad/sqrt(Hz)
    double chi = 0;        // demodulated phase at B_z, rad
    double amplitude = 0;  // |<P_K+>|
    Rates rates;
};

/// Phase readout at a fixed drive frequency (omega_drive, default omega_H(B_z)): chi = arg <P_K+>,
/// slope from a symmetric difference in B_z (step 1e-3 Gamma_H / gamma_H),
/// phase ASD sqrt(S)/(|<P_K+>| sqrt 2), delta_B = phase ASD / slope.
/// Requires gamma_H B_perp <= 2 Gamma_H.
SensitivityResult sensitivity(const DualSpeciesParams& p);

/// Largest drive the sensitivity model accepts, 2 Gamma_H / gamma_H.
double drive_limit(const DualSpeciesParams& p);

} // namespace serf::dual
