#pragma once

#include <complex>
#include <span>

namespace serf {

struct LinearFit {
    double slope = 0;
    double intercept = 0;
};

/// Ordinary least squares y = slope x + intercept.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// z(t) ~ amplitude * exp((i omega - Gamma)(t - t[0])).
struct ExponentialFit {
    std::complex<double> amplitude;
    double omega = 0;
    double Gamma = 0;
    /// ||z - model|| / ||z||
    double residual = 0;
    bool converged = false;
};

/// Complex least-squares fit of a single damped rotating exponential.
/// Started from log-amplitude / unwrapped-phase regressions, refined by
/// Levenberg-Marquardt on the full complex residual. Needs at least 4 samples.
ExponentialFit fit_complex_exponential(std::span<const double> t, std::span<const std::complex<double>> z);

} // namespace serf
