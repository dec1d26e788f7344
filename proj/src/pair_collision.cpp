#include "serfsim/pair_collision.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <random>
#include <stdexcept>

#include "serfsim/fit.hpp"

namespace serf::collision {


double normalize_phase(double phi)
{
    if (!std::isfinite(phi))
        throw std::invalid_argument("scattering phase must be finite");
    double r = std::fmod(phi, two_pi);
    if (r < 0)
        r += two_pi;
    if (r >= two_pi)
        r = 0.0;
    return r;
}

Matrix collision_unitary(const PairOperatorSet& pair, double phi)
{
    return pair.Pi_T + std::exp(cplx(0.0, normalize_phase(phi))) * pair.Pi_S;
}

DensityMatrix apply_collision(const PairOperatorSet& pair, const DensityMatrix& rho_a, const DensityMatrix& rho_b,
                              double phi)
{
    if (rho_a.dim() != pair.atom_a.dim() || rho_b.dim() != pair.atom_b.dim())
        throw std::invalid_argument("state dimensions do not match the pair bases");
    Matrix joint = kron(rho_a.matrix(), rho_b.matrix());
    if (normalize_phase(phi) == 0.0)
        return DensityMatrix(std::move(joint));  // U is the identity
    const Matrix U = collision_unitary(pair, phi);
    Matrix out = U * joint * U.adjoint();
    out = 0.5 * (out + out.adjoint());
    return DensityMatrix(std::move(out));
}

Matrix phase_averaged_collision(const PairOperatorSet& pair, const Matrix& rho_pair)
{
    return pair.Pi_T * rho_pair * pair.Pi_T + pair.Pi_S * rho_pair * pair.Pi_S;
}

SpinTransfer epsilon_plus(const PairOperatorSet& pair, const DensityMatrix& rho_a, const DensityMatrix& rho_b,
                          double phi)
{
    const Matrix Fa = pair.lift_a(pair.atom_a.F_plus_a);
    const Matrix Fb = pair.lift_a(pair.atom_a.F_plus_b);
    const Matrix in = kron(rho_a.matrix(), rho_b.matrix());
    const cplx in_a = (in * Fa).trace();
    const cplx in_b = (in * Fb).trace();
    const cplx denom = in_a + in_b;
    if (std::abs(denom) <= 1e-12)
        throw std::invalid_argument("epsilon_plus: incoming transverse coherence vanishes");

    if (normalize_phase(phi) == 0.0)
        return {};  // U is the identity

    const DensityMatrix out = apply_collision(pair, rho_a, rho_b, phi);
    const cplx out_a = out.expectation(Fa);
    const cplx out_b = out.expectation(Fb);
    return {((out_a - in_a) / denom).real(), ((out_b - in_b) / denom).real()};
}

DensityMatrix differentially_precessed_state(const OperatorSet& ops, double P, double angle)
{
    const DensityMatrix start = spin_temperature_state(ops, P, Vector3::UnitX());
    const Matrix H = ops.Pi_a * ops.Fz * ops.Pi_a - ops.Pi_b * ops.Fz * ops.Pi_b;
    const Matrix U = unitary_propagator(H, angle);
    Matrix rho = U * start.matrix() * U.adjoint();
    rho = 0.5 * (rho + rho.adjoint());
    return DensityMatrix(std::move(rho));
}

// ---------------------------------------------------------------------------

CollisionKernel::CollisionKernel(const OperatorSet& ops)
    : Sx_(ops.Sx), Sy_(ops.Sy), Sz_(ops.Sz), nuclear_dim_(ops.basis.spin().two_i() + 1)
{
    const int d = ops.dim();
    if (d > max_dim)
        throw std::invalid_argument("CollisionKernel supports nuclear spins up to I = 11/2");
    const Matrix& W = ops.coupled_to_product;
    for (int k = 0; k < d; ++k)
        upper_.push_back(ops.basis.level(k).manifold == Manifold::a);
    by_row_.resize(static_cast<std::size_t>(d));
    by_col_.resize(static_cast<std::size_t>(d));
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) {
            const double w = W(r, c).real();
            if (w == 0.0)
                continue;
            Links& row = by_row_[static_cast<std::size_t>(r)];
            Links& col = by_col_[static_cast<std::size_t>(c)];
            if (row.count == 2 || col.count == 2 || W(r, c).imag() != 0.0)
                throw std::logic_error("coupling matrix is not a real two-entry-per-line matrix");
            row.index[row.count] = c;
            row.weight[row.count++] = w;
            col.index[col.count] = r;
            col.weight[col.count++] = w;
        }
}

Vector3 CollisionKernel::electron_spin(const State& rho) const
{
    // Tr(rho S) = sum_kl rho_kl S_lk
    return {rho.cwiseProduct(Sx_.transpose()).sum().real(), rho.cwiseProduct(Sy_.transpose()).sum().real(),
            rho.cwiseProduct(Sz_.transpose()).sum().real()};
}

CollisionKernel::State CollisionKernel::swapped(const State& rho_a, const Vector3& s) const
{
    // W has at most two entries per row and per column, so both basis
    // changes are done entry by entry.
    const int n = nuclear_dim_;
    const int d = 2 * n;

    State nuclear(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            cplx acc = 0;
            for (int e = 0; e < 2; ++e) {
                const Links& ri = by_row_[static_cast<std::size_t>(2 * i + e)];
                const Links& rj = by_row_[static_cast<std::size_t>(2 * j + e)];
                for (int p = 0; p < ri.count; ++p)
                    for (int q = 0; q < rj.count; ++q)
                        acc += ri.weight[p] * rj.weight[q] * rho_a(ri.index[p], rj.index[q]);
            }
            nuclear(i, j) = acc;
        }

    // 1/2 + S.sigma in the (up, down) basis
    cplx electron[2][2];
    electron[0][0] = 0.5 + s.z();
    electron[1][1] = 0.5 - s.z();
    electron[0][1] = cplx(s.x(), -s.y());
    electron[1][0] = cplx(s.x(), s.y());

    State out = State::Zero(d, d);
    for (int l = 0; l < d; ++l)
        for (int k = 0; k < d; ++k) {
            if (upper_[static_cast<std::size_t>(k)] != upper_[static_cast<std::size_t>(l)])
                continue;
            const Links& ck = by_col_[static_cast<std::size_t>(k)];
            const Links& cl = by_col_[static_cast<std::size_t>(l)];
            cplx acc = 0;
            for (int p = 0; p < ck.count; ++p)
                for (int q = 0; q < cl.count; ++q) {
                    const int r = ck.index[p];
                    const int c = cl.index[q];
                    acc += ck.weight[p] * cl.weight[q] * nuclear(r / 2, c / 2) * electron[r % 2][c % 2];
                }
            out(k, l) = acc;
        }
    return out;
}

CollisionKernel::State CollisionKernel::collide_averaged(const State& rho_a, const Vector3& partner_spin) const
{
    return 0.5 * (rho_a + swapped(rho_a, partner_spin));
}

CollisionKernel::State CollisionKernel::collide(const State& rho_a, const Vector3& s, double phi) const
{
    // U = a + b X with a = (1 + e^{i phi})/2, b = (1 - e^{i phi})/2, X = 1/2 + 2 S_a.S_b
    const cplx e = std::exp(cplx(0.0, phi));
    const cplx a = 0.5 * (1.0 + e);
    const cplx b = 0.5 * (1.0 - e);
    const State Ss = s.x() * Sx_ + s.y() * Sy_ + s.z() * Sz_;
    const State x_rho = 0.5 * rho_a + 2.0 * Ss.lazyProduct(rho_a);  // Tr_b(X rho)
    const State rho_x = 0.5 * rho_a + 2.0 * rho_a.lazyProduct(Ss);  // Tr_b(rho X)
    State out = std::norm(a) * rho_a + std::norm(b) * swapped(rho_a, s) + a * std::conj(b) * rho_x +
                b * std::conj(a) * x_rho;
    // the cross terms reach between manifolds; drop those coherences
    for (int l = 0; l < out.cols(); ++l)
        for (int k = 0; k < out.rows(); ++k)
            if (upper_[static_cast<std::size_t>(k)] != upper_[static_cast<std::size_t>(l)])
                out(k, l) = 0.0;
    return out;
}

// ---------------------------------------------------------------------------

void McConfig::validate() const
{
    if (!(P0 >= 0.0 && P0 < 1.0))
        throw std::invalid_argument("McConfig: P0 must satisfy 0 <= P0 < 1");
    if (!(tip_angle > 0.0 && tip_angle <= 0.1))
        throw std::invalid_argument("McConfig: tip_angle must lie in (0, 0.1] rad");
    if (n_trajectories < 1)
        throw std::invalid_argument("McConfig: n_trajectories must be >= 1");
    if (!(R_se >= 0.0) || !std::isfinite(R_se))
        throw std::invalid_argument("McConfig: R_se must be finite and >= 0");
    if (!(duration > 0.0) || !std::isfinite(duration))
        throw std::invalid_argument("McConfig: duration must be positive");
    if (samples < 2)
        throw std::invalid_argument("McConfig: need at least 2 output samples");
    if (!std::isfinite(B_z) || !std::isfinite(gamma_e))
        throw std::invalid_argument("McConfig: B_z and gamma_e must be finite");
}

namespace {

std::vector<std::string> weak_field_warnings(const McConfig& c)
{
    std::vector<std::string> w;
    if (c.R_se > 0 && std::abs(c.gamma_e * c.B_z) > 0.1 * c.R_se)
        w.push_back("gamma_e B_z exceeds 0.1 R_se: outside the weak-field regime");
    return w;
}

std::mt19937_64 trajectory_rng(std::uint64_t seed, std::uint64_t index)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0x5e7fu};
    return std::mt19937_64(seq);
}

std::vector<double> sample_times(const McConfig& c)
{
    std::vector<double> t(static_cast<std::size_t>(c.samples));
    for (int k = 0; k < c.samples; ++k)
        t[static_cast<std::size_t>(k)] = c.duration * k / (c.samples - 1);
    return t;
}

Vector3 tipped_axis(double tip)
{
    // z rotated about x by tip
    return {0.0, -std::sin(tip), std::cos(tip)};
}

// exp(-i H tau) rho exp(+i H tau) for H diagonal in the coupled basis
class DiagonalPrecession {
public:
    DiagonalPrecession(const OperatorSet& ops, double B_z, double gamma_e)
    {
        const Matrix H = manifold_hamiltonian(ops, Vector3(0, 0, B_z), gamma_e);
        energies_ = H.diagonal().real();
        phase_.resize(energies_.size());
    }

    template <class M>
    M apply(const M& rho, double tau) const
    {
        const Eigen::Index d = rho.rows();
        for (Eigen::Index k = 0; k < d; ++k)
            phase_(k) = std::exp(cplx(0.0, -energies_(k) * tau));
        M out(d, d);
        for (Eigen::Index l = 0; l < d; ++l)
            for (Eigen::Index k = 0; k < d; ++k)
                out(k, l) = rho(k, l) * phase_(k) * std::conj(phase_(l));
        return out;
    }

private:
    Eigen::VectorXd energies_;
    mutable CVector phase_;  // scratch; one instance per trajectory
};

struct TrajectoryTrace {
    std::vector<cplx> upper;
    std::vector<cplx> total;
};

// Collision-by-collision driver shared by the fast and dense paths. The
// collide callback maps the current single-atom state to the post-collision,
// decorrelated single-atom state.
template <class M, class Collide>
TrajectoryTrace run_trajectory(const McConfig& c, const OperatorSet& ops, const std::vector<double>& t_out,
                               std::uint64_t index, Collide&& collide)
{
    auto rng = trajectory_rng(c.seed, index);
    std::exponential_distribution<double> interval(c.R_se > 0 ? c.collision_rate() : 1.0);
    std::uniform_real_distribution<double> phase(0.0, two_pi);
    const DiagonalPrecession precession(ops, c.B_z, c.gamma_e);
    // Tr(rho A) = sum(rho .* A^T)
    const M upper_t = ops.F_plus_a.transpose();
    const M total_t = (ops.F_plus_a + ops.F_plus_b).transpose();
    const M mask = project_intra_manifold(ops.basis, Matrix::Ones(ops.dim(), ops.dim()));

    M rho = spin_temperature_state(ops, c.P0, tipped_axis(c.tip_angle)).matrix();
    TrajectoryTrace tr;
    tr.upper.reserve(t_out.size());
    tr.total.reserve(t_out.size());

    double t = 0.0;
    std::size_t s = 0;
    while (s < t_out.size()) {
        const double dt = c.R_se > 0 ? interval(rng) : INFINITY;
        const double t_next = t + dt;
        while (s < t_out.size() && t_out[s] <= t_next) {
            const M r = precession.apply(rho, t_out[s] - t);
            tr.upper.push_back(r.cwiseProduct(upper_t).sum());
            tr.total.push_back(r.cwiseProduct(total_t).sum());
            ++s;
        }
        if (s >= t_out.size())
            break;
        rho = precession.apply(rho, dt);
        const double phi = c.phi_mode == PhaseMode::stochastic ? phase(rng) : 0.0;
        M next = collide(rho, phi);
        rho = (0.5 * (next + next.adjoint())).cwiseProduct(mask);
        t = t_next;
    }
    return tr;
}

McSeries reduce(const McConfig& c, std::vector<double> t_out, const std::vector<TrajectoryTrace>& traces)
{
    McSeries out;
    const std::size_t ns = t_out.size();
    out.t = std::move(t_out);
    out.upper.assign(ns, cplx(0));
    out.total.assign(ns, cplx(0));
    out.upper_stderr.assign(ns, 0.0);
    const double n = static_cast<double>(traces.size());
    for (const auto& tr : traces)
        for (std::size_t j = 0; j < ns; ++j) {
            out.upper[j] += tr.upper[j];
            out.total[j] += tr.total[j];
        }
    for (std::size_t j = 0; j < ns; ++j) {
        out.upper[j] /= n;
        out.total[j] /= n;
    }
    if (traces.size() > 1) {
        for (std::size_t j = 0; j < ns; ++j) {
            double ss = 0;
            for (const auto& tr : traces)
                ss += std::norm(tr.upper[j] - out.upper[j]);
            out.upper_stderr[j] = std::sqrt(ss / (n * (n - 1)));
        }
    }
    out.warnings = weak_field_warnings(c);
    return out;
}

} // namespace

McSeries mc_evolve(const McConfig& config, Execution exec)
{
    config.validate();
    const OperatorSet ops = spin_operators(AtomBasis(config.spin));
    const CollisionKernel kernel(ops);
    const std::vector<double> t_out = sample_times(config);
    std::vector<TrajectoryTrace> traces(static_cast<std::size_t>(config.n_trajectories));

    // Both atoms of a pair start identical and see the same field; the
    // exchange-symmetric collision keeps Tr_a and Tr_b equal, so one state
    // describes the pair.
    using State = CollisionKernel::State;
    auto collide = [&](const State& rho, double phi) -> State {
        const Vector3 s = kernel.electron_spin(rho);
        return config.phi_mode == PhaseMode::averaged ? kernel.collide_averaged(rho, s)
                                                       : kernel.collide(rho, s, phi);
    };

    const long n = config.n_trajectories;
    if (exec == Execution::parallel) {
        std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
        for (long k = 0; k < n; ++k) {
            try {
                traces[static_cast<std::size_t>(k)] =
                    run_trajectory<State>(config, ops, t_out, static_cast<std::uint64_t>(k), collide);
            } catch (...) {
#pragma omp critical
                if (!failure)
                    failure = std::current_exception();
            }
        }
        if (failure)
            std::rethrow_exception(failure);
    } else {
        for (long k = 0; k < n; ++k)
            traces[static_cast<std::size_t>(k)] =
                run_trajectory<State>(config, ops, t_out, static_cast<std::uint64_t>(k), collide);
    }
    return reduce(config, t_out, traces);
}

McSeries mc_evolve_dense(const McConfig& config)
{
    config.validate();
    const AtomBasis basis(config.spin);
    const PairOperatorSet pair = pair_operators(basis, basis);
    const OperatorSet& ops = pair.atom_a;
    const int d = ops.dim();
    const std::vector<double> t_out = sample_times(config);
    std::vector<TrajectoryTrace> traces;
    traces.reserve(static_cast<std::size_t>(config.n_trajectories));

    // The partner is an identical copy of atom a (same initial state, same
    // field), so the joint state before each collision is rho (x) rho. The
    // partner copy is renormalized: Tr(rho)^2 would double any trace error at
    // every collision.
    auto collide = [&](const Matrix& rho, double phi) -> Matrix {
        const Matrix joint = kron(rho, rho / rho.trace());
        Matrix out;
        if (config.phi_mode == PhaseMode::averaged) {
            out = phase_averaged_collision(pair, joint);
        } else {
            const Matrix U = collision_unitary(pair, phi);
            out = U * joint * U.adjoint();
        }
        return partial_trace_b(out, d, d);
    };
    for (int k = 0; k < config.n_trajectories; ++k)
        traces.push_back(run_trajectory<Matrix>(config, ops, t_out, static_cast<std::uint64_t>(k), collide));
    return reduce(config, t_out, traces);
}

SlowingDownResult fit_slowing_down(const McConfig& config, const McSeries& series)
{
    SlowingDownResult r;
    r.P = config.P0;
    const double skip = config.R_se > 0 ? 3.0 / config.R_se : 0.0;
    std::vector<double> t;
    std::vector<cplx> z;
    for (std::size_t j = 0; j < series.t.size(); ++j)
        if (series.t[j] >= skip) {
            t.push_back(series.t[j]);
            z.push_back(series.upper[j]);
        }
    if (t.size() < 8) {
        r.flagged = true;
        r.note = "fit window too short";
        return r;
    }
    const ExponentialFit fit = fit_complex_exponential(t, z);
    r.omega = fit.omega;
    r.Gamma_fitted = fit.Gamma;
    r.fit_residual = fit.residual;
    r.gamma_fitted = fit.omega / config.B_z;
    r.q = config.gamma_e / r.gamma_fitted;
    r.periods_fitted = std::abs(fit.omega) * (t.back() - t.front()) / two_pi;
    if (r.fit_residual >= 0.05) {
        r.flagged = true;
        r.note = "fit residual above 0.05";
    } else if (r.periods_fitted < 5.0) {
        r.flagged = true;
        r.note = "fewer than 5 precession periods in the fit window";
    } else if (!(r.q >= 1.0)) {
        r.flagged = true;
        r.note = "fitted slowing-down factor below 1";
    }
    return r;
}

std::vector<SlowingDownResult> slowing_down_curve(NuclearSpin spin, const std::vector<double>& P_grid,
                                                  const McConfig& base, Execution exec)
{
    std::vector<SlowingDownResult> out;
    for (double P : P_grid) {
        if (!(P >= 0.0 && P <= 0.99))
            throw std::invalid_argument("slowing_down_curve: P must lie in [0, 0.99]");
        McConfig c = base;
        c.spin = spin;
        c.P0 = P > 0.0 ? P : linear_response_polarization;
        SlowingDownResult r = fit_slowing_down(c, mc_evolve(c, exec));
        r.P = P;
        out.push_back(r);
    }
    return out;
}

} // namespace serf::collision
