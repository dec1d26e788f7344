#include "serfsim/dual_species.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

namespace serf::dual {

namespace odeint = boost::numeric::odeint;

SlowingDownTable::SlowingDownTable(std::vector<double> P, std::vector<double> q) : P_(std::move(P)), q_(std::move(q))
{
    if (P_.empty() || P_.size() != q_.size())
        throw std::invalid_argument("slowing-down table needs matching, non-empty P and q columns");
    for (std::size_t k = 0; k < P_.size(); ++k) {
        if (!(P_[k] >= 0.0 && P_[k] <= 1.0) || !(q_[k] >= 1.0) || !std::isfinite(q_[k]))
            throw std::invalid_argument("slowing-down table entries must have 0 <= P <= 1 and q >= 1");
        if (k > 0 && !(P_[k] > P_[k - 1]))
            throw std::invalid_argument("slowing-down table P column must be strictly increasing");
    }
}

double SlowingDownTable::operator()(double P) const
{
    if (P <= P_.front())
        return q_.front();
    if (P >= P_.back())
        return q_.back();
    const auto it = std::upper_bound(P_.begin(), P_.end(), P);
    const std::size_t hi = static_cast<std::size_t>(it - P_.begin());
    const std::size_t lo = hi - 1;
    const double f = (P - P_[lo]) / (P_[hi] - P_[lo]);
    return q_[lo] + f * (q_[hi] - q_[lo]);
}

const SlowingDownTable& SlowingDownTable::potassium()
{
    static const SlowingDownTable table(
        {0.0, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99},
        {5.998143, 5.988182, 5.958594, 5.844514, 5.668344, 5.447229, 5.199328, 4.940870, 4.684554, 4.439185,
         4.210111, 4.102600, 4.020124});
    return table;
}

void DualSpeciesParams::validate() const
{
    auto nonneg = [](double v, const char* name) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument(std::string(name) + " must be finite and >= 0");
    };
    if (!(gamma_e > 0.0) || !std::isfinite(gamma_e))
        throw std::invalid_argument("gamma_e must be positive");
    if (!(n_K > 0.0) || !std::isfinite(n_K))
        throw std::invalid_argument("n_K must be positive");
    nonneg(n_H, "n_H");
    nonneg(k_HK, "k_HK");
    if (!(q_H >= 1.0) || !(q_K >= 1.0))
        throw std::invalid_argument("slowing-down factors must be >= 1");
    nonneg(pump, "pump rate");
    nonneg(R_sd_K, "R_sd_K");
    nonneg(R_se_K, "R_se_K");
    nonneg(R_sd_H, "R_sd_H");
    if (gamma_H_mode == GammaHMode::fixed_total && !(Gamma_H > 0.0))
        throw std::invalid_argument("Gamma_H must be positive");
    if (!std::isfinite(B_z))
        throw std::invalid_argument("B_z must be finite");
    nonneg(B_perp, "B_perp");
    nonneg(omega_drive, "omega_drive");
    if (!(V > 0.0) || !std::isfinite(V))
        throw std::invalid_argument("V must be positive");
}

namespace {

struct Coupled {
    double Gamma_KH, Gamma_p, R_p, Gamma_K, P_Kz;
};

Coupled coupled_rates(const DualSpeciesParams& p, double Gamma_HK, double Gamma_H, double q_K)
{
    Coupled c{};
    c.Gamma_KH = p.k_HK * p.n_H / q_K;
    c.Gamma_p = p.pump_input == PumpInput::Gamma_p ? p.pump : p.pump / q_K;
    c.R_p = c.Gamma_p * q_K;
    c.Gamma_K = c.Gamma_p + c.Gamma_KH + (p.R_sd_K + p.R_se_K) / q_K;
    const double det = c.Gamma_K * Gamma_H - c.Gamma_KH * Gamma_HK;
    if (!(det > 0.0))
        throw InfeasibleParameters("unstable drift: Gamma_K Gamma_H <= Gamma_KH Gamma_HK");
    c.P_Kz = c.Gamma_p * Gamma_H / det;
    return c;
}

} // namespace

Rates derive_rates(const DualSpeciesParams& p)
{
    p.validate();
    Rates r;
    r.omega_H = p.gamma_H() * p.B_z;
    r.omega_K = p.gamma_K() * p.B_z;
    r.omega_drive = p.omega_drive > 0.0 ? p.omega_drive : r.omega_H;
    r.Gamma_HK = p.k_HK * p.n_K / p.q_H;
    if (p.gamma_H_mode == GammaHMode::fixed_total) {
        r.Gamma_H = p.Gamma_H;
        r.R_sd_H = (p.Gamma_H - r.Gamma_HK) * p.q_H;
        if (r.R_sd_H < 0.0)
            throw InfeasibleParameters("Gamma_H = " + std::to_string(p.Gamma_H) + " /s is below Gamma_HK = " +
                                       std::to_string(r.Gamma_HK) + " /s (negative R_sd_H)");
    } else {
        r.R_sd_H = p.R_sd_H;
        r.Gamma_H = r.Gamma_HK + p.R_sd_H / p.q_H;
        if (!(r.Gamma_H > 0.0))
            throw InfeasibleParameters("Gamma_H vanishes (no K coupling and no H destruction)");
    }

    double q_K = p.q_K;
    if (p.q_K_mode == QKMode::self_consistent) {
        const SlowingDownTable& table = p.q_K_table ? *p.q_K_table : SlowingDownTable::potassium();
        const auto [q_lo_it, q_hi_it] = std::minmax_element(table.q().begin(), table.q().end());
        const double q_lo = *q_lo_it;
        const double q_hi = *q_hi_it;
        auto mismatch = [&](double q) {
            const Coupled c = coupled_rates(p, r.Gamma_HK, r.Gamma_H, q);
            return table(std::clamp(c.P_Kz, 0.0, 1.0)) - q;
        };
        if (q_hi - q_lo < 1e-14) {
            q_K = q_lo;
        } else {
            // mismatch(q_lo) >= 0 >= mismatch(q_hi) since the table maps into [q_lo, q_hi]
            const double f_lo = mismatch(q_lo);
            const double f_hi = mismatch(q_hi);
            if (f_lo <= 0.0) {
                q_K = q_lo;
            } else if (f_hi >= 0.0) {
                q_K = q_hi;
            } else {
                std::uintmax_t iters = 200;
                const auto bracket = boost::math::tools::toms748_solve(
                    mismatch, q_lo, q_hi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(50), iters);
                q_K = 0.5 * (bracket.first + bracket.second);
            }
        }
    }

    const Coupled c = coupled_rates(p, r.Gamma_HK, r.Gamma_H, q_K);
    r.q_K = q_K;
    r.Gamma_KH = c.Gamma_KH;
    r.Gamma_p = c.Gamma_p;
    r.R_p = c.R_p;
    r.Gamma_K = c.Gamma_K;
    r.P_Kz = c.P_Kz;
    return r;
}

Eigen::Matrix4d transverse_drift(const Rates& r)
{
    Eigen::Matrix4d A;
    A << -r.Gamma_H, -r.omega_H, r.Gamma_HK, 0.0,  //
        r.omega_H, -r.Gamma_H, 0.0, r.Gamma_HK,    //
        r.Gamma_KH, 0.0, -r.Gamma_K, -r.omega_K,   //
        0.0, r.Gamma_KH, r.omega_K, -r.Gamma_K;
    return A;
}

namespace {

using Matrix6 = Eigen::Matrix<double, 6, 6>;
using Vector6 = Eigen::Matrix<double, 6, 1>;

Eigen::Matrix3d cross_matrix(const Eigen::Vector3d& v)
{
    Eigen::Matrix3d m;
    m << 0.0, -v.z(), v.y(),  //
        v.z(), 0.0, -v.x(),   //
        -v.y(), v.x(), 0.0;
    return m;
}

// Right-hand side of the Bloch equations, y = (P_H, P_K).
class BlochSystem {
public:
    BlochSystem(const DualSpeciesParams& p, const Rates& r)
        : gH_(p.gamma_H()), gK_(p.gamma_K()), B_z_(p.B_z), B_perp_(p.B_perp), omega_(r.omega_drive), r_(r)
    {
        b_.setZero();
        b_(5) = r.Gamma_p;
    }

    Matrix6 drift(double t) const
    {
        const Eigen::Vector3d B(B_perp_ * std::cos(omega_ * t), 0.0, B_z_);
        const Eigen::Matrix3d id = Eigen::Matrix3d::Identity();
        Matrix6 A;
        A.block<3, 3>(0, 0) = gH_ * cross_matrix(B) - r_.Gamma_H * id;
        A.block<3, 3>(0, 3) = r_.Gamma_HK * id;
        A.block<3, 3>(3, 0) = r_.Gamma_KH * id;
        A.block<3, 3>(3, 3) = gK_ * cross_matrix(B) - r_.Gamma_K * id;
        return A;
    }

    const Vector6& source() const { return b_; }
    double omega() const { return omega_; }

private:
    double gH_, gK_, B_z_, B_perp_, omega_;
    Rates r_;
    Vector6 b_;
};

using State6 = std::array<double, 6>;
using State42 = std::array<double, 42>;

Vector6 to_vec(const State6& s)
{
    return Eigen::Map<const Vector6>(s.data());
}

PolarizationState to_state(const Vector6& y)
{
    PolarizationState s;
    s.P_H = y.head<3>();
    s.P_K = y.tail<3>();
    return s;
}

void check_state(const Vector6& y, double t)
{
    if (!y.allFinite())
        throw NumericalFailure("non-finite polarization at t = " + std::to_string(t) + " s");
    if (y.head<3>().norm() > 1.0 + 1e-9 || y.tail<3>().norm() > 1.0 + 1e-9)
        throw NumericalFailure("polarization norm exceeds 1 at t = " + std::to_string(t) + " s");
}

double max_rate(const DualSpeciesParams& p, const Rates& r)
{
    return std::max({r.Gamma_H, r.Gamma_K, r.Gamma_HK, r.Gamma_KH, std::abs(r.omega_H), std::abs(r.omega_K),
                     p.gamma_H() * p.B_perp, p.B_perp > 0.0 ? r.omega_drive : 0.0});
}

constexpr double abs_tol = 1e-12;
constexpr double rel_tol = 1e-9;

std::vector<PolarizationState> integrate_deterministic(const DualSpeciesParams& p, const Rates& r,
                                                       const PolarizationState& s0, const std::vector<double>& t)
{
    const BlochSystem sys(p, r);
    auto rhs = [&sys](const State6& y, State6& dy, double time) {
        Eigen::Map<Vector6>(dy.data()) = sys.drift(time) * to_vec(y) + sys.source();
    };
    State6 y{};
    Eigen::Map<Vector6>(y.data()) << s0.P_H, s0.P_K;

    std::vector<PolarizationState> out;
    out.reserve(t.size());
    auto observer = [&out](const State6& state, double time) {
        const Vector6 v = to_vec(state);
        check_state(v, time);
        out.push_back(to_state(v));
    };
    const double dt0 = 0.02 / std::max(max_rate(p, r), 1e-300);
    try {
        odeint::integrate_times(odeint::make_dense_output(abs_tol, rel_tol, odeint::runge_kutta_dopri5<State6>()), rhs,
                                y, t.begin(), t.end(), dt0, observer, odeint::max_step_checker(50'000'000));
    } catch (const NumericalFailure&) {
        throw;
    } catch (const std::exception& e) {
        throw NumericalFailure(std::string("deterministic integration failed: ") + e.what());
    }
    return out;
}

// exp of the augmented drift [[A, b], [0, 0]] over one step
struct StepMap {
    Matrix6 Phi;
    Vector6 c;
};

StepMap step_map(const BlochSystem& sys, double t_mid, double h)
{
    Eigen::Matrix<double, 7, 7> M = Eigen::Matrix<double, 7, 7>::Zero();
    M.block<6, 6>(0, 0) = sys.drift(t_mid) * h;
    M.block<6, 1>(0, 6) = sys.source() * h;
    const Eigen::Matrix<double, 7, 7> E = M.exp();
    return {E.block<6, 6>(0, 0), E.block<6, 1>(0, 6)};
}

// Exact one-step covariance of the linear SDE with constant drift
// (Van Loan block exponential), returned as a square-root factor.
Matrix6 exact_noise_factor(const Matrix6& A, const Vector6& diffusion, double h)
{
    Eigen::Matrix<double, 12, 12> M = Eigen::Matrix<double, 12, 12>::Zero();
    M.block<6, 6>(0, 0) = -A * h;
    M.block<6, 6>(0, 6) = Matrix6(diffusion.asDiagonal()) * h;
    M.block<6, 6>(6, 6) = A.transpose() * h;
    const Eigen::Matrix<double, 12, 12> E = M.exp();
    Matrix6 Q = E.block<6, 6>(6, 6).transpose() * E.block<6, 6>(0, 6);
    Q = 0.5 * (Q + Q.transpose()).eval();
    const Eigen::SelfAdjointEigenSolver<Matrix6> eig(Q);
    return eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

std::vector<PolarizationState> integrate_stochastic(const DualSpeciesParams& p, const Rates& r,
                                                    const PolarizationState& s0, const std::vector<double>& t,
                                                    const NoiseOptions& noise)
{
    const BlochSystem sys(p, r);
    const double period = p.B_perp > 0.0 && r.omega_drive > 0.0 ? two_pi / r.omega_drive
                                                               : std::numeric_limits<double>::infinity();
    const double dt_bound = std::min(1.0 / (50.0 * max_rate(p, r)), period / 50.0);
    if (!(noise.dt >= 0.0))
        throw std::invalid_argument("stochastic step must be >= 0 (0 selects the default)");
    if (noise.dt > dt_bound * (1.0 + 1e-12))
        throw std::invalid_argument("stochastic step exceeds min(1/(50 max rate), period/50) = " +
                                    std::to_string(dt_bound) + " s");
    const double dt_max = noise.dt > 0.0 ? noise.dt : 0.25 * dt_bound;
    // Intensities 2 Gamma_q / (n_q V) on each transverse component
    const double s_H = p.n_H > 0.0 ? std::sqrt(2.0 * r.Gamma_H / (p.n_H * p.V)) : 0.0;
    const double s_K = std::sqrt(2.0 * r.Gamma_K / (p.n_K * p.V));

    std::seed_seq seq{static_cast<std::uint32_t>(noise.seed), static_cast<std::uint32_t>(noise.seed >> 32), 0x9e37u};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal;

    Vector6 y;
    y << s0.P_H, s0.P_K;
    std::vector<PolarizationState> out;
    out.reserve(t.size());
    out.push_back(to_state(y));

    const bool time_dependent = p.B_perp > 0.0;
    Vector6 diffusion = Vector6::Zero();
    diffusion << s_H * s_H, s_H * s_H, 0.0, s_K * s_K, s_K * s_K, 0.0;
    StepMap cached{};
    Matrix6 noise_factor = Matrix6::Zero();
    double cached_h = -1.0;
    for (std::size_t k = 1; k < t.size(); ++k) {
        const double span = t[k] - t[k - 1];
        const long n = std::max(1L, static_cast<long>(std::ceil(span / dt_max - 1e-9)));
        const double h = span / static_cast<double>(n);
        const double kick_H = s_H * std::sqrt(h);
        const double kick_K = s_K * std::sqrt(h);
        for (long s = 0; s < n; ++s) {
            const double t0 = t[k - 1] + static_cast<double>(s) * h;
            if (time_dependent) {
                cached = step_map(sys, t0 + 0.5 * h, h);
                y = cached.Phi * y + cached.c;
                y(0) += kick_H * normal(rng);
                y(1) += kick_H * normal(rng);
                y(3) += kick_K * normal(rng);
                y(4) += kick_K * normal(rng);
                continue;
            }
            // grid spacings differ in the last bits; reuse the map unless h really changed
            if (std::abs(h - cached_h) > 1e-9 * h) {
                cached = step_map(sys, 0.0, h);
                noise_factor = exact_noise_factor(sys.drift(0.0), diffusion, h);
                cached_h = h;
            }
            Vector6 xi;
            for (int i = 0; i < 6; ++i)
                xi(i) = normal(rng);
            y = cached.Phi * y + cached.c + noise_factor * xi;
        }
        if (!y.allFinite())
            throw NumericalFailure("non-finite polarization at t = " + std::to_string(t[k]) + " s");
        out.push_back(to_state(y));
    }
    return out;
}

} // namespace

std::vector<PolarizationState> integrate(const DualSpeciesParams& p, const PolarizationState& state0,
                                         const std::vector<double>& t_grid, const NoiseOptions& noise)
{
    const Rates r = derive_rates(p);
    if (t_grid.empty())
        return {};
    if (!std::is_sorted(t_grid.begin(), t_grid.end()) ||
        std::adjacent_find(t_grid.begin(), t_grid.end()) != t_grid.end())
        throw std::invalid_argument("time grid must be strictly ascending");
    if (state0.P_H.norm() > 1.0 || state0.P_K.norm() > 1.0 || !state0.P_H.allFinite() || !state0.P_K.allFinite())
        throw std::invalid_argument("initial polarization vectors must have norm <= 1");
    return noise.enabled ? integrate_stochastic(p, r, state0, t_grid, noise)
                         : integrate_deterministic(p, r, state0, t_grid);
}

PolarizationState steady_state(const DualSpeciesParams& p)
{
    if (p.B_perp != 0.0)
        throw std::invalid_argument("steady_state requires B_perp = 0");
    const Rates r = derive_rates(p);
    if (stability_margin(r) >= 0.0)
        throw InfeasibleParameters("drift is not Hurwitz");
    PolarizationState s;
    s.P_K.z() = r.P_Kz;
    s.P_H.z() = r.Gamma_HK / r.Gamma_H * r.P_Kz;
    return s;
}

double stability_margin(const Rates& r)
{
    Eigen::Matrix<double, 6, 6> A = Eigen::Matrix<double, 6, 6>::Zero();
    const Eigen::Matrix4d T = transverse_drift(r);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            A(i, j) = T(i, j);
            A(i, 3 + j) = T(i, 2 + j);
            A(3 + i, j) = T(2 + i, j);
            A(3 + i, 3 + j) = T(2 + i, 2 + j);
        }
    A(2, 2) = -r.Gamma_H;
    A(2, 5) = r.Gamma_HK;
    A(5, 2) = r.Gamma_KH;
    A(5, 5) = -r.Gamma_K;
    Eigen::EigenSolver<Eigen::Matrix<double, 6, 6>> es(A, false);
    return es.eigenvalues().real().maxCoeff();
}

namespace {

cplx demodulate(const std::vector<cplx>& P_plus, const std::vector<double>& t, double omega)
{
    // Trapezoid over one full period of a periodic integrand: plain mean
    cplx acc = 0;
    for (std::size_t k = 0; k < P_plus.size(); ++k)
        acc += P_plus[k] * std::exp(cplx(0.0, -omega * t[k]));
    return acc / static_cast<double>(P_plus.size());
}

cplx lockin_point(const DualSpeciesParams& p, const Rates& r, const LockinOptions& opt)
{
    const BlochSystem sys(p, r);
    const double omega = r.omega_drive;
    const double T = two_pi / omega;
    const double dt0 = std::min(T / 50.0, 0.02 / max_rate(p, r));

    // Monodromy and particular solution over one period
    auto rhs42 = [&sys](const State42& z, State42& dz, double time) {
        const Eigen::Map<const Eigen::Matrix<double, 6, 7>> Z(z.data());
        Eigen::Map<Eigen::Matrix<double, 6, 7>> dZ(dz.data());
        dZ = sys.drift(time) * Z;
        dZ.col(6) += sys.source();
    };
    State42 z{};
    {
        Eigen::Map<Eigen::Matrix<double, 6, 7>> Z(z.data());
        Z.setZero();
        Z.leftCols<6>().setIdentity();
    }
    odeint::integrate_adaptive(odeint::make_controlled(abs_tol, rel_tol, odeint::runge_kutta_dopri5<State42>()), rhs42,
                               z, 0.0, T, dt0);
    const Eigen::Map<const Eigen::Matrix<double, 6, 7>> Z(z.data());
    Vector6 y0 = (Matrix6::Identity() - Z.leftCols<6>()).partialPivLu().solve(Z.col(6));

    auto rhs6 = [&sys](const State6& y, State6& dy, double time) {
        Eigen::Map<Vector6>(dy.data()) = sys.drift(time) * to_vec(y) + sys.source();
    };
    const int n = opt.samples_per_cycle;
    std::vector<double> times(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k)
        times[static_cast<std::size_t>(k)] = T * k / n;

    // Integrates cycles from the shooting solution until the demodulated
    // amplitude repeats
    cplx previous = std::numeric_limits<double>::quiet_NaN();
    State6 y{};
    Eigen::Map<Vector6>(y.data()) = y0;
    for (int cycle = 0; cycle < opt.max_cycles; ++cycle) {
        std::vector<cplx> samples;
        std::vector<double> sample_t;
        auto observer = [&](const State6& state, double time) {
            if (samples.size() < static_cast<std::size_t>(n)) {
                samples.emplace_back(state[3], state[4]);
                sample_t.push_back(time - cycle * T);
            }
        };
        std::vector<double> shifted(times);
        for (double& s : shifted)
            s += cycle * T;
        odeint::integrate_times(odeint::make_dense_output(abs_tol, rel_tol, odeint::runge_kutta_dopri5<State6>()),
                                rhs6, y, shifted.begin(), shifted.end(), dt0, observer,
                                odeint::max_step_checker(10'000'000));
        check_state(to_vec(y), (cycle + 1) * T);
        const cplx amp = demodulate(samples, sample_t, omega);
        // Far off resonance the amplitude sits below the integrator's own
        // error on |P| ~ P_z, which then bounds the attainable repeatability
        const double floor = 10.0 * (abs_tol + rel_tol * to_vec(y).cwiseAbs().maxCoeff());
        if (cycle > 0 && std::abs(amp - previous) <= opt.tolerance * std::abs(amp) + floor)
            return amp;
        previous = amp;
    }
    throw NumericalFailure("lock-in did not reach a periodic steady state within " + std::to_string(opt.max_cycles) +
                           " cycles");
}

} // namespace

std::vector<ResponsePoint> lockin_response(const DualSpeciesParams& p, const std::vector<double>& omega_grid,
                                           const LockinOptions& options)
{
    if (options.samples_per_cycle < 8 || options.max_cycles < 2)
        throw std::invalid_argument("lock-in needs >= 8 samples per cycle and >= 2 cycles");
    std::vector<ResponsePoint> out(omega_grid.size());
    const long n = static_cast<long>(omega_grid.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (long k = 0; k < n; ++k) {
        try {
            const double omega = omega_grid[static_cast<std::size_t>(k)];
            if (!(omega > 0.0))
                throw std::invalid_argument("lock-in frequencies must be positive");
            DualSpeciesParams q = p;
            q.omega_drive = omega;
            const Rates r = derive_rates(q);
            out[static_cast<std::size_t>(k)] = {omega, p.B_perp > 0.0 ? lockin_point(q, r, options) : cplx(0),
                                                ResponseMethod::ode_lockin};
        } catch (...) {
#pragma omp critical
            if (!failure)
                failure = std::current_exception();
        }
    }
    if (failure)
        std::rethrow_exception(failure);
    return out;
}

ResponsePoint analytic_response(const DualSpeciesParams& p, double omega)
{
    const Rates r = derive_rates(p);
    const cplx a_K(r.Gamma_K, -(r.omega_K - omega));
    const cplx a_H(r.Gamma_H, -(r.omega_H - omega));
    if (p.B_perp == 0.0 || r.Gamma_KH == 0.0 || r.Gamma_HK == 0.0)
        return {omega, cplx(0), ResponseMethod::analytic_eq4};  // limit of a divergent denominator
    const cplx num = cplx(0.0, p.gamma_K() * p.B_perp * r.P_Kz);
    const cplx den = r.Gamma_H * (1.0 - a_K / r.Gamma_KH * a_H / r.Gamma_HK);
    return {omega, num / den, ResponseMethod::analytic_eq4};
}

ResponsePoint linear_response(const DualSpeciesParams& p, double omega)
{
    const Rates r = derive_rates(p);
    // a_H h = Gamma_HK k - i g_H,  a_K k = Gamma_KH h - i g_K
    const cplx a_K(r.Gamma_K, -(r.omega_K - omega));
    const cplx a_H(r.Gamma_H, -(r.omega_H - omega));
    const double P_Hz = r.Gamma_HK / r.Gamma_H * r.P_Kz;
    const double g_H = 0.5 * p.gamma_H() * p.B_perp * P_Hz;
    const double g_K = 0.5 * p.gamma_K() * p.B_perp * r.P_Kz;
    const cplx k = cplx(0.0, -1.0) * (r.Gamma_KH * g_H + a_H * g_K) / (a_K * a_H - r.Gamma_KH * r.Gamma_HK);
    return {omega, k, ResponseMethod::linear};
}

std::string to_string(ResponseMethod m)
{
    switch (m) {
    case ResponseMethod::ode_lockin:
        return "ode_lockin";
    case ResponseMethod::analytic_eq4:
        return "analytic";
    case ResponseMethod::linear:
        return "linear";
    }
    return "unknown";
}

} // namespace serf::dual
