#pragma once

// Two-atom spin-exchange collisions: the sudden singlet/triplet phase
// unitary, the single-collision spin-transfer metric, and a stochastic
// pair-evolution Monte Carlo for the slowing-down factor q(P).

#include <cstdint>
#include <string>
#include <vector>

#include "serfsim/spin_core.hpp"

namespace serf::collision {

/// Wraps an angle into [0, 2 pi).
double normalize_phase(double phi);

/// U = Pi_T + exp(i phi) Pi_S.
Matrix collision_unitary(const PairOperatorSet& pair, double phi);

/// U (rho_a (x) rho_b) U^dagger on the pair space.
DensityMatrix apply_collision(const PairOperatorSet& pair, const DensityMatrix& rho_a, const DensityMatrix& rho_b,
                              double phi);

/// Uniform-phase average of the collision: Pi_T rho Pi_T + Pi_S rho Pi_S.
Matrix phase_averaged_collision(const PairOperatorSet& pair, const Matrix& rho_pair);

/// Change of the transverse coherence held by each hyperfine manifold of
/// atom a, relative to the atom's total incoming coherence:
///   upper = Re[(<F+_a>_out - <F+_a>_in) / (<F+_a>_in + <F+_b>_in)]
/// and likewise for the lower manifold. Manifold operators are those of the
/// first atom, lifted to the pair space.
struct SpinTransfer {
    double upper = 0;
    double lower = 0;
};

SpinTransfer epsilon_plus(const PairOperatorSet& pair, const DensityMatrix& rho_a, const DensityMatrix& rho_b,
                          double phi);

/// Spin-temperature state along x after the two manifolds have precessed by
/// +angle (upper) and -angle (lower) about z. angle = pi/2 gives
/// rho ~ exp((-1)^F beta m_y) for I = 3/2; for I = 1/2 it stays a
/// spin-temperature state along y.
DensityMatrix differentially_precessed_state(const OperatorSet& ops, double P, double angle);

/// Reduced single-atom collision map for a partner whose electron spin
/// expectation is <S_b>. Works in the |m_I, m_S> product basis, where the
/// electron swap acts as Tr_b(X rho X) = Tr_e(rho_a) (x) rho_e(b).
/// Only intra-manifold coherences of the result are formed; the hyperfine
/// coherences would average out on the hyperfine time scale.
/// Storage is fixed-capacity (no heap traffic), which limits it to 2I <= 11.
class CollisionKernel {
public:
    static constexpr int max_dim = 24;
    using State = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, max_dim, max_dim>;

    explicit CollisionKernel(const OperatorSet& ops);

    /// Tr_b[U (rho_a (x) rho_b) U^dagger] for a fixed phase.
    State collide(const State& rho_a, const Vector3& partner_spin, double phi) const;
    /// Tr_b[Pi_T rho Pi_T + Pi_S rho Pi_S] = (rho_a + Tr_b(X rho X)) / 2.
    State collide_averaged(const State& rho_a, const Vector3& partner_spin) const;

    Vector3 electron_spin(const State& rho) const;

private:
    State swapped(const State& rho_a, const Vector3& partner_spin) const;

    // Non-zero entries of one row or column of the coupling matrix
    struct Links {
        int count = 0;
        int index[2] = {0, 0};
        double weight[2] = {0, 0};
    };

    State Sx_, Sy_, Sz_;
    int nuclear_dim_;
    std::vector<Links> by_row_;  // product index -> coupled indices
    std::vector<Links> by_col_;  // coupled index -> product indices
    std::vector<char> upper_;
};

enum class PhaseMode { stochastic, averaged };
enum class Execution { parallel, serial };

struct McConfig {
    NuclearSpin spin = NuclearSpin::three_halves();
    double P0 = 0.01;
    double tip_angle = 0.05;  // rad, rotation about x applied to the z-oriented STD
    double B_z = 0;           // T
    /// Spin-exchange rate. With uniform phases each collision transfers
    /// <sin^2(phi/2)> = 1/2 of a full swap, so collisions occur at 2 R_se.
    double R_se = 1e6;
    double duration = 0;  // s
    std::uint64_t seed = 1;
    int n_trajectories = 200;
    PhaseMode phi_mode = PhaseMode::averaged;
    int samples = 2001;  // output grid points over [0, duration]
    double gamma_e = 0;  // rad/(s T)

    void validate() const;
    double collision_rate() const { return 2.0 * R_se; }
};

struct McSeries {
    std::vector<double> t;
    /// Ensemble means of Tr(rho F+_a) and Tr(rho F+) (both manifolds).
    std::vector<cplx> upper;
    std::vector<cplx> total;
    /// Standard error of the ensemble mean of the upper series.
    std::vector<double> upper_stderr;
    std::vector<std::string> warnings;
};

/// Ensemble-averaged Monte Carlo. Trajectory k draws from an RNG seeded by
/// (seed, k), so the result does not depend on scheduling.
McSeries mc_evolve(const McConfig& config, Execution exec = Execution::parallel);

/// Reference implementation on the full pair space (serial): dense unitary
/// conjugation followed by Tr_b(rho) (x) Tr_a(rho). Same random draws as
/// mc_evolve.
McSeries mc_evolve_dense(const McConfig& config);

struct SlowingDownResult {
    double P = 0;
    double q = 0;
    double gamma_fitted = 0;  // rad/(s T)
    double Gamma_fitted = 0;  // 1/s
    double omega = 0;         // rad/s
    double fit_residual = 0;
    double periods_fitted = 0;
    bool flagged = false;
    std::string note;
};

/// Fit window starts after 3/R_se; at least 5 precession periods must fit
/// inside, otherwise the point is flagged.
SlowingDownResult fit_slowing_down(const McConfig& config, const McSeries& series);

/// P = 0 is run at the linear-response probe polarization below.
inline constexpr double linear_response_polarization = 1e-4;

std::vector<SlowingDownResult> slowing_down_curve(NuclearSpin spin, const std::vector<double>& P_grid,
                                                  const McConfig& base, Execution exec = Execution::parallel);

} // namespace serf::collision
