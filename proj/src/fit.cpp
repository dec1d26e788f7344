#include "serfsim/fit.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace serf {

LinearFit linear_fit(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("linear_fit needs two equally sized series of length >= 2");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0)
        throw std::invalid_argument("linear_fit: degenerate abscissa");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    return f;
}

namespace {

using cplx = std::complex<double>;

double residual_norm(std::span<const double> t, std::span<const cplx> z, const Eigen::Vector4d& p, double t0)
{
    double s = 0;
    for (std::size_t j = 0; j < t.size(); ++j) {
        const double tau = t[j] - t0;
        const cplx model = cplx(p(0), p(1)) * std::exp(cplx(-p(3), p(2)) * tau);
        s += std::norm(model - z[j]);
    }
    return s;
}

} // namespace

ExponentialFit fit_complex_exponential(std::span<const double> t, std::span<const cplx> z)
{
    if (t.size() != z.size() || t.size() < 4)
        throw std::invalid_argument("fit_complex_exponential needs >= 4 samples");
    const std::size_t n = t.size();
    const double t0 = t.front();

    std::vector<double> tau(n), log_mag(n), phase(n);
    double zz = 0;
    for (std::size_t j = 0; j < n; ++j) {
        tau[j] = t[j] - t0;
        if (std::abs(z[j]) == 0.0)
            throw std::invalid_argument("fit_complex_exponential: series contains exact zeros");
        log_mag[j] = std::log(std::abs(z[j]));
        phase[j] = std::arg(z[j]);
        if (j > 0) {
            double jump = phase[j] - phase[j - 1];
            jump -= 2 * std::numbers::pi * std::round(jump / (2 * std::numbers::pi));
            phase[j] = phase[j - 1] + jump;
        }
        zz += std::norm(z[j]);
    }
    const LinearFit mag = linear_fit(tau, log_mag);
    const LinearFit ph = linear_fit(tau, phase);

    Eigen::Vector4d p;
    const cplx c0 = std::polar(std::exp(mag.intercept), ph.intercept);
    p << c0.real(), c0.imag(), ph.slope, -mag.slope;

    double cost = residual_norm(t, z, p, t0);
    double lambda = 1e-3;
    bool converged = false;
    Eigen::MatrixXd J(2 * n, 4);
    Eigen::VectorXd r(2 * n);
    for (int iter = 0; iter < 200; ++iter) {
        for (std::size_t j = 0; j < n; ++j) {
            const cplx e = std::exp(cplx(-p(3), p(2)) * tau[j]);
            const cplx c(p(0), p(1));
            const cplx res = c * e - z[j];
            const cplx d_re = e;
            const cplx d_im = cplx(0, 1) * e;
            const cplx d_om = cplx(0, tau[j]) * c * e;
            const cplx d_ga = -tau[j] * c * e;
            r(2 * j) = res.real();
            r(2 * j + 1) = res.imag();
            const cplx cols[4] = {d_re, d_im, d_om, d_ga};
            for (int k = 0; k < 4; ++k) {
                J(2 * j, k) = cols[k].real();
                J(2 * j + 1, k) = cols[k].imag();
            }
        }
        const Eigen::Matrix4d JtJ = J.transpose() * J;
        const Eigen::Vector4d g = J.transpose() * r;
        bool improved = false;
        for (int tries = 0; tries < 30 && !improved; ++tries) {
            Eigen::Matrix4d A = JtJ;
            A.diagonal() += lambda * JtJ.diagonal();
            const Eigen::Vector4d step = A.ldlt().solve(-g);
            const Eigen::Vector4d trial = p + step;
            const double trial_cost = residual_norm(t, z, trial, t0);
            if (std::isfinite(trial_cost) && trial_cost <= cost) {
                const double rel = (cost - trial_cost) / std::max(cost, 1e-300);
                p = trial;
                cost = trial_cost;
                lambda = std::max(lambda / 3, 1e-12);
                improved = true;
                if (rel < 1e-14 || step.norm() < 1e-14 * (1 + p.norm()))
                    converged = true;
            } else {
                lambda *= 4;
            }
        }
        if (!improved || converged) {
            converged = true;
            break;
        }
    }

    ExponentialFit fit;
    fit.amplitude = cplx(p(0), p(1));
    fit.omega = p(2);
    fit.Gamma = p(3);
    fit.residual = std::sqrt(cost / zz);
    fit.converged = converged;
    return fit;
}

} // namespace serf
