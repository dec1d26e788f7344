#pragma once

// Operator algebra and state construction for an alkali-like atom: one
// valence electron (S = 1/2) coupled to a half-integer nuclear spin I.
// Units: hbar = 1, fields in tesla, gyromagnetic ratios in rad/(s T).

#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace serf {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Vector3 = Eigen::Vector3d;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Nuclear spin stored as 2I. Only half-integer I is accepted.
class NuclearSpin {
public:
    explicit NuclearSpin(int two_i);

    static NuclearSpin half() { return NuclearSpin(1); }
    static NuclearSpin three_halves() { return NuclearSpin(3); }

    int two_i() const { return two_i_; }
    double value() const { return 0.5 * two_i_; }
    /// 2I + 1, which is also the slowing-down factor of a stretched state.
    int multiplicity() const { return two_i_ + 1; }

    friend bool operator==(NuclearSpin, NuclearSpin) = default;

private:
    int two_i_;
};

/// Hyperfine manifold label: a is F = I + 1/2, b is F = I - 1/2.
enum class Manifold { a, b };

struct Level {
    int F;
    int m;
    Manifold manifold;

    friend bool operator==(const Level&, const Level&) = default;
};

/// |F, m> levels ordered manifold-major (a first), m descending.
class AtomBasis {
public:
    explicit AtomBasis(NuclearSpin spin);

    NuclearSpin spin() const { return spin_; }
    int dim() const { return static_cast<int>(levels_.size()); }
    int upper_dim() const { return spin_.two_i() + 2; }
    int lower_dim() const { return spin_.two_i(); }
    const std::vector<Level>& levels() const { return levels_; }
    const Level& level(int k) const { return levels_[static_cast<std::size_t>(k)]; }

private:
    NuclearSpin spin_;
    std::vector<Level> levels_;
};

AtomBasis build_basis(NuclearSpin spin);

/// Spin operators in the coupled |F,m> basis.
struct OperatorSet {
    AtomBasis basis;
    Matrix Sx, Sy, Sz;
    Matrix Ix, Iy, Iz;
    Matrix Fx, Fy, Fz;
    Matrix Pi_a, Pi_b;
    /// Pi_a (Fx + i Fy) Pi_a
    Matrix F_plus_a;
    /// Pi_b (Fx + i Fy) Pi_b
    Matrix F_plus_b;
    /// Columns are the coupled states expressed in the |m_I, m_S> product
    /// basis (index 2*i_I + i_S, both m descending).
    Matrix coupled_to_product;

    int dim() const { return basis.dim(); }
    Matrix S_dot(const Vector3& n) const { return n.x() * Sx + n.y() * Sy + n.z() * Sz; }
    Matrix F_dot(const Vector3& n) const { return n.x() * Fx + n.y() * Fy + n.z() * Fz; }
};

OperatorSet spin_operators(const AtomBasis& basis);

/// Angular-momentum matrices (Jx, Jy, Jz) for spin j = two_j / 2, m descending.
struct SpinMatrices {
    Matrix Jx, Jy, Jz;
};
SpinMatrices angular_momentum(int two_j);

/// Tolerances applied when a density matrix is checked.
struct StateTolerance {
    double hermiticity = 1e-12;
    double trace = 1e-12;
    double min_eigenvalue = -1e-10;
};

/// Hermitian, unit-trace, positive semidefinite matrix. The invariants are
/// checked on construction; std::invalid_argument on violation.
class DensityMatrix {
public:
    explicit DensityMatrix(Matrix rho, const StateTolerance& tol = {});

    const Matrix& matrix() const { return rho_; }
    int dim() const { return static_cast<int>(rho_.rows()); }
    cplx expectation(const Matrix& op) const { return (rho_ * op).trace(); }

    static DensityMatrix maximally_mixed(int dim);

private:
    Matrix rho_;
};

/// Checks the density-matrix invariants without constructing one.
bool is_density_matrix(const Matrix& rho, const StateTolerance& tol = {});

/// Inverse spin temperature for electron polarization P: beta = ln((1+P)/(1-P)).
double spin_temperature_beta(double P);

/// rho proportional to exp(beta F.axis). Requires 0 <= P < 1; the electron
/// polarization <2 S.axis> = P is verified before returning.
DensityMatrix spin_temperature_state(const OperatorSet& ops, double P, const Vector3& axis);

/// P -> 1 limit: the pure state |F = I + 1/2, m = F> along axis.
DensityMatrix stretched_state(const OperatorSet& ops, const Vector3& axis);

/// Secular Zeeman Hamiltonian: gamma_e/(2I+1) [Pi_a (F.B) Pi_a - Pi_b (F.B) Pi_b].
/// Blocks between manifolds are exactly zero.
Matrix manifold_hamiltonian(const OperatorSet& ops, const Vector3& B, double gamma_e);

/// Zeroes the coherences between the two hyperfine manifolds.
Matrix project_intra_manifold(const AtomBasis& basis, const Matrix& rho);

/// Two-atom operators on H_a (x) H_b.
struct PairOperatorSet {
    OperatorSet atom_a;
    OperatorSet atom_b;
    Matrix Pi_S;
    Matrix Pi_T;

    int dim() const { return atom_a.dim() * atom_b.dim(); }
    Matrix lift_a(const Matrix& A) const;
    Matrix lift_b(const Matrix& B) const;
};

PairOperatorSet pair_operators(const AtomBasis& basis_a, const AtomBasis& basis_b);

Matrix kron(const Matrix& A, const Matrix& B);
Matrix partial_trace_b(const Matrix& rho, int dim_a, int dim_b);
Matrix partial_trace_a(const Matrix& rho, int dim_a, int dim_b);

/// exp(-i H t) for Hermitian H.
Matrix unitary_propagator(const Matrix& H, double t);

} // namespace serf
