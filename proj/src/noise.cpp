#include "serfsim/noise.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include <fftw3.h>

namespace serf::dual {

Eigen::Vector4d noise_intensities(const DualSpeciesParams& p, const Rates& r)
{
    const double s_H = p.n_H > 0.0 ? 2.0 * r.Gamma_H / (p.n_H * p.V) : 0.0;
    const double s_K = 2.0 * r.Gamma_K / (p.n_K * p.V);
    return {s_H, s_H, s_K, s_K};
}

namespace {

// 2 [C (A - i w)^-1 Q (A + i w)^-T C^T] for C = e_3 (P_Kx)
double single_sided(const Eigen::Matrix4cd& G, const Eigen::Vector4d& q)
{
    double acc = 0;
    for (int j = 0; j < 4; ++j)
        acc += std::norm(G(2, j)) * q(j);
    return 2.0 * acc;
}

PsdPoint psd_point(const Eigen::Matrix4d& A, const Eigen::Vector4d& q, double omega)
{
    const Eigen::Matrix4cd M = A.cast<cplx>() - cplx(0.0, omega) * Eigen::Matrix4cd::Identity();
    const Eigen::Matrix4cd G = M.partialPivLu().inverse();
    PsdPoint out;
    out.omega = omega;
    out.hydrogen = single_sided(G, {q(0), q(1), 0.0, 0.0});
    out.potassium = single_sided(G, {0.0, 0.0, q(2), q(3)});
    out.total = out.hydrogen + out.potassium;
    return out;
}

} // namespace

PsdPoint noise_psd(const DualSpeciesParams& p, double omega)
{
    const Rates r = derive_rates(p);
    return psd_point(transverse_drift(r), noise_intensities(p, r), omega);
}

std::vector<PsdPoint> noise_psd(const DualSpeciesParams& p, const std::vector<double>& omega_grid)
{
    const Rates r = derive_rates(p);
    const Eigen::Matrix4d A = transverse_drift(r);
    const Eigen::Vector4d q = noise_intensities(p, r);
    std::vector<PsdPoint> out;
    out.reserve(omega_grid.size());
    for (double w : omega_grid)
        out.push_back(psd_point(A, q, w));
    return out;
}

Eigen::Matrix4d stationary_covariance(const DualSpeciesParams& p)
{
    const Rates r = derive_rates(p);
    const Eigen::Matrix4d A = transverse_drift(r);
    const Eigen::Matrix4d Q = noise_intensities(p, r).asDiagonal();
    // (I (x) A + A (x) I) vec S = -vec Q
    Eigen::Matrix<double, 16, 16> K = Eigen::Matrix<double, 16, 16>::Zero();
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            K.block<4, 4>(4 * i, 4 * i) += (i == j ? 1.0 : 0.0) * A;
            K.block<4, 4>(4 * i, 4 * j) += A(i, j) * Eigen::Matrix4d::Identity();
        }
    const Eigen::Matrix<double, 16, 1> rhs = -Eigen::Map<const Eigen::Matrix<double, 16, 1>>(Q.data());
    const Eigen::Matrix<double, 16, 1> s = K.fullPivLu().solve(rhs);
    Eigen::Matrix4d S = Eigen::Map<const Eigen::Matrix4d>(s.data());
    return 0.5 * (S + S.transpose());
}

Periodogram welch_periodogram(const std::vector<double>& x, double dt, int segment_length)
{
    if (segment_length < 8 || segment_length % 2 != 0)
        throw std::invalid_argument("segment length must be even and >= 8");
    if (!(dt > 0.0))
        throw std::invalid_argument("sample spacing must be positive");
    const std::size_t L = static_cast<std::size_t>(segment_length);
    if (x.size() < L)
        throw std::invalid_argument("series shorter than one segment");

    std::vector<double> window(L);
    double w2 = 0;
    for (std::size_t k = 0; k < L; ++k) {
        window[k] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(L));
        w2 += window[k] * window[k];
    }

    const std::size_t bins = L / 2 + 1;
    double* in = fftw_alloc_real(L);
    fftw_complex* out = fftw_alloc_complex(bins);
    static std::mutex planner;  // the FFTW planner is not re-entrant
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner);
        plan = fftw_plan_dft_r2c_1d(segment_length, in, out, FFTW_ESTIMATE);
    }

    Periodogram pg;
    pg.psd.assign(bins, 0.0);
    const std::size_t hop = L / 2;
    for (std::size_t start = 0; start + L <= x.size(); start += hop) {
        double mean = 0;
        for (std::size_t k = 0; k < L; ++k)
            mean += x[start + k];
        mean /= static_cast<double>(L);
        for (std::size_t k = 0; k < L; ++k)
            in[k] = (x[start + k] - mean) * window[k];
        fftw_execute(plan);
        for (std::size_t b = 0; b < bins; ++b)
            pg.psd[b] += out[b][0] * out[b][0] + out[b][1] * out[b][1];
        ++pg.segments;
    }
    {
        std::lock_guard<std::mutex> lock(planner);
        fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);

    const double fs = 1.0 / dt;
    const double df = fs / static_cast<double>(L);
    pg.omega.resize(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        const bool edge = b == 0 || b == bins - 1;
        pg.psd[b] *= (edge ? 1.0 : 2.0) / (fs * w2 * pg.segments);
        pg.omega[b] = 2.0 * std::numbers::pi * df * static_cast<double>(b);
        pg.variance += pg.psd[b] * df;
    }
    return pg;
}

double drive_limit(const DualSpeciesParams& p)
{
    return 2.0 * derive_rates(p).Gamma_H / p.gamma_H();
}

namespace {

double wrap(double a)
{
    return std::remainder(a, 2.0 * std::numbers::pi);
}

} // namespace

SensitivityResult sensitivity(const DualSpeciesParams& p)
{
    SensitivityResult out;
    out.rates = derive_rates(p);
    const Rates& r = out.rates;
    if (p.gamma_H() * p.B_perp > 2.0 * r.Gamma_H * (1.0 + 1e-12))
        throw std::invalid_argument("drive outside the linear regime: gamma_H B_perp > 2 Gamma_H");
    if (!(p.B_perp > 0.0))
        throw std::invalid_argument("sensitivity needs a non-zero drive");

    // Drive frequency stays put while B_z is stepped
    DualSpeciesParams fixed = p;
    fixed.omega_drive = r.omega_drive;
    const double omega = r.omega_drive;

    const ResponsePoint centre = linear_response(fixed, omega);
    out.amplitude = std::abs(centre.amplitude);
    out.chi = std::arg(centre.amplitude);

    const double h = 1e-3 * r.Gamma_H / p.gamma_H();
    DualSpeciesParams up = fixed;
    DualSpeciesParams down = fixed;
    up.B_z += h;
    down.B_z -= h;
    const double chi_up = std::arg(linear_response(up, omega).amplitude);
    const double chi_down = std::arg(linear_response(down, omega).amplitude);
    out.slope = std::abs(wrap(chi_up - chi_down)) / (2.0 * h);
    // 1e-3 of the resonant scale gamma_H / Gamma_H: the drive is off resonance
    if (!(out.slope > 1e-3 * p.gamma_H() / r.Gamma_H))
        throw NumericalFailure("phase slope vanishes; the drive is off resonance");

    const PsdPoint S = noise_psd(fixed, omega);
    out.noise_asd = std::sqrt(S.total);
    out.phase_asd = out.noise_asd / (out.amplitude * std::sqrt(2.0));
    out.delta_B = out.phase_asd / out.slope;

    auto normalized = [&](double psd) {
        return std::sqrt(psd) / (out.amplitude * std::sqrt(2.0)) / out.slope * std::sqrt(p.V) * 1e18;
    };
    out.delta_B_norm = normalized(S.total);
    out.delta_B_norm_hydrogen = normalized(S.hydrogen);
    out.delta_B_norm_potassium = normalized(S.potassium);
    return out;
}

} // namespace serf::dual
