#include "serfsim/spin_core.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

namespace serf {

NuclearSpin::NuclearSpin(int two_i) : two_i_(two_i)
{
    if (two_i < 1 || two_i % 2 == 0)
        throw std::invalid_argument("nuclear spin must be half-integer (2I odd and positive), got 2I = " +
                                    std::to_string(two_i));
}

AtomBasis::AtomBasis(NuclearSpin spin) : spin_(spin)
{
    const int F_a = (spin.two_i() + 1) / 2;
    const int F_b = F_a - 1;
    for (int m = F_a; m >= -F_a; --m)
        levels_.push_back({F_a, m, Manifold::a});
    for (int m = F_b; m >= -F_b; --m)
        levels_.push_back({F_b, m, Manifold::b});
}

AtomBasis build_basis(NuclearSpin spin) { return AtomBasis(spin); }

SpinMatrices angular_momentum(int two_j)
{
    const int n = two_j + 1;
    const double j = 0.5 * two_j;
    Matrix Jz = Matrix::Zero(n, n);
    Matrix Jp = Matrix::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        const double m = j - k;
        Jz(k, k) = m;
        if (k > 0)
            Jp(k - 1, k) = std::sqrt(j * (j + 1) - m * (m + 1));
    }
    const Matrix Jm = Jp.adjoint();
    SpinMatrices out;
    out.Jx = 0.5 * (Jp + Jm);
    out.Jy = cplx(0.0, -0.5) * (Jp - Jm);
    out.Jz = Jz;
    return out;
}

namespace {

// Clebsch-Gordan coupling of I with S = 1/2 (Condon-Shortley phases).
Matrix coupling_matrix(const AtomBasis& basis)
{
    const int two_i = basis.spin().two_i();
    const int d = basis.dim();
    const double norm = 2.0 * (two_i + 1);
    Matrix W = Matrix::Zero(d, d);
    for (int col = 0; col < d; ++col) {
        const Level& lv = basis.level(col);
        const int m = lv.m;
        // m_S = +1/2 partner has m_I = m - 1/2, m_S = -1/2 partner has m_I = m + 1/2
        const int idx_up = (two_i - 2 * m + 1) / 2;
        const int idx_dn = (two_i - 2 * m - 1) / 2;
        const double plus = std::sqrt((two_i + 2 * m + 1) / norm);
        const double minus = std::sqrt((two_i - 2 * m + 1) / norm);
        const double c_up = lv.manifold == Manifold::a ? plus : -minus;
        const double c_dn = lv.manifold == Manifold::a ? minus : plus;
        if (idx_up >= 0 && idx_up <= two_i)
            W(2 * idx_up + 0, col) = c_up;
        if (idx_dn >= 0 && idx_dn <= two_i)
            W(2 * idx_dn + 1, col) = c_dn;
    }
    return W;
}

Matrix manifold_projector(const AtomBasis& basis, Manifold which)
{
    const int d = basis.dim();
    Matrix P = Matrix::Zero(d, d);
    for (int k = 0; k < d; ++k)
        if (basis.level(k).manifold == which)
            P(k, k) = 1.0;
    return P;
}

} // namespace

OperatorSet spin_operators(const AtomBasis& basis)
{
    const int two_i = basis.spin().two_i();
    const SpinMatrices nuc = angular_momentum(two_i);
    const SpinMatrices el = angular_momentum(1);
    const Matrix id_n = Matrix::Identity(two_i + 1, two_i + 1);
    const Matrix id_e = Matrix::Identity(2, 2);

    const Matrix W = coupling_matrix(basis);
    auto to_coupled = [&W](const Matrix& product_op) -> Matrix { return W.adjoint() * product_op * W; };

    OperatorSet ops{basis, {}, {}, {}, {}, {}, {}, {}, {}, {}, {}, {}, {}, {}, W};
    ops.Ix = to_coupled(kron(nuc.Jx, id_e));
    ops.Iy = to_coupled(kron(nuc.Jy, id_e));
    ops.Iz = to_coupled(kron(nuc.Jz, id_e));
    ops.Sx = to_coupled(kron(id_n, el.Jx));
    ops.Sy = to_coupled(kron(id_n, el.Jy));
    ops.Sz = to_coupled(kron(id_n, el.Jz));
    ops.Fx = ops.Sx + ops.Ix;
    ops.Fy = ops.Sy + ops.Iy;
    ops.Fz = ops.Sz + ops.Iz;
    ops.Pi_a = manifold_projector(basis, Manifold::a);
    ops.Pi_b = manifold_projector(basis, Manifold::b);
    const Matrix F_plus = ops.Fx + cplx(0.0, 1.0) * ops.Fy;
    ops.F_plus_a = ops.Pi_a * F_plus * ops.Pi_a;
    ops.F_plus_b = ops.Pi_b * F_plus * ops.Pi_b;
    return ops;
}

bool is_density_matrix(const Matrix& rho, const StateTolerance& tol)
{
    if (rho.rows() != rho.cols() || rho.rows() == 0)
        return false;
    if (!rho.allFinite())
        return false;
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > tol.hermiticity)
        return false;
    if (std::abs(rho.trace() - cplx(1.0, 0.0)) > tol.trace)
        return false;
    const Matrix herm = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= tol.min_eigenvalue;
}

DensityMatrix::DensityMatrix(Matrix rho, const StateTolerance& tol) : rho_(std::move(rho))
{
    if (!is_density_matrix(rho_, tol))
        throw std::invalid_argument("matrix is not a valid density matrix (Hermitian, unit trace, positive)");
}

DensityMatrix DensityMatrix::maximally_mixed(int dim)
{
    return DensityMatrix(Matrix::Identity(dim, dim) / static_cast<double>(dim));
}

double spin_temperature_beta(double P)
{
    if (!(P >= 0.0 && P < 1.0))
        throw std::invalid_argument("spin-temperature polarization must satisfy 0 <= P < 1");
    return std::log((1.0 + P) / (1.0 - P));
}

namespace {

Vector3 unit_axis(const Vector3& axis)
{
    const double n = axis.norm();
    if (!(n > 0.0) || !std::isfinite(n))
        throw std::invalid_argument("axis must be a finite non-zero vector");
    return axis / n;
}

} // namespace

DensityMatrix spin_temperature_state(const OperatorSet& ops, double P, const Vector3& axis)
{
    const double beta = spin_temperature_beta(P);
    const Vector3 n = unit_axis(axis);
    Eigen::SelfAdjointEigenSolver<Matrix> es(ops.F_dot(n));
    const Eigen::VectorXd& lambda = es.eigenvalues();
    const double top = lambda.maxCoeff();
    Eigen::VectorXd w(lambda.size());
    for (Eigen::Index k = 0; k < lambda.size(); ++k)
        w(k) = std::exp(beta * (lambda(k) - top));
    Matrix rho = es.eigenvectors() * (w / w.sum()).cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
    rho = 0.5 * (rho + rho.adjoint());

    const double electron = 2.0 * (rho * ops.S_dot(n)).trace().real();
    if (std::abs(electron - P) > 1e-10)
        throw std::logic_error("spin-temperature state failed its electron-polarization check");
    return DensityMatrix(std::move(rho));
}

DensityMatrix stretched_state(const OperatorSet& ops, const Vector3& axis)
{
    const Vector3 n = unit_axis(axis);
    Eigen::SelfAdjointEigenSolver<Matrix> es(ops.F_dot(n));
    const Eigen::Index top = es.eigenvalues().size() - 1;
    const CVector v = es.eigenvectors().col(top);
    Matrix rho = v * v.adjoint();
    rho = 0.5 * (rho + rho.adjoint());
    return DensityMatrix(std::move(rho));
}

Matrix manifold_hamiltonian(const OperatorSet& ops, const Vector3& B, double gamma_e)
{
    if (!B.allFinite())
        throw std::invalid_argument("magnetic field must be finite");
    const double gamma = gamma_e / ops.basis.spin().multiplicity();
    const Matrix FB = ops.F_dot(B);
    return gamma * (ops.Pi_a * FB * ops.Pi_a - ops.Pi_b * FB * ops.Pi_b);
}

Matrix project_intra_manifold(const AtomBasis& basis, const Matrix& rho)
{
    Matrix out = rho;
    for (int k = 0; k < basis.dim(); ++k)
        for (int l = 0; l < basis.dim(); ++l)
            if (basis.level(k).manifold != basis.level(l).manifold)
                out(k, l) = 0.0;
    return out;
}

Matrix kron(const Matrix& A, const Matrix& B)
{
    Matrix out = Eigen::kroneckerProduct(A, B);
    return out;
}

Matrix PairOperatorSet::lift_a(const Matrix& A) const
{
    return kron(A, Matrix::Identity(atom_b.dim(), atom_b.dim()));
}

Matrix PairOperatorSet::lift_b(const Matrix& B) const
{
    return kron(Matrix::Identity(atom_a.dim(), atom_a.dim()), B);
}

PairOperatorSet pair_operators(const AtomBasis& basis_a, const AtomBasis& basis_b)
{
    PairOperatorSet pair{spin_operators(basis_a), spin_operators(basis_b), {}, {}};
    const int d = pair.dim();
    const Matrix SaSb = pair.lift_a(pair.atom_a.Sx) * pair.lift_b(pair.atom_b.Sx) +
                        pair.lift_a(pair.atom_a.Sy) * pair.lift_b(pair.atom_b.Sy) +
                        pair.lift_a(pair.atom_a.Sz) * pair.lift_b(pair.atom_b.Sz);
    pair.Pi_S = 0.25 * Matrix::Identity(d, d) - SaSb;
    pair.Pi_T = Matrix::Identity(d, d) - pair.Pi_S;
    return pair;
}

Matrix partial_trace_b(const Matrix& rho, int dim_a, int dim_b)
{
    Matrix out = Matrix::Zero(dim_a, dim_a);
    for (int i = 0; i < dim_a; ++i)
        for (int j = 0; j < dim_a; ++j)
            for (int k = 0; k < dim_b; ++k)
                out(i, j) += rho(i * dim_b + k, j * dim_b + k);
    return out;
}

Matrix partial_trace_a(const Matrix& rho, int dim_a, int dim_b)
{
    Matrix out = Matrix::Zero(dim_b, dim_b);
    for (int k = 0; k < dim_b; ++k)
        for (int l = 0; l < dim_b; ++l)
            for (int i = 0; i < dim_a; ++i)
                out(k, l) += rho(i * dim_b + k, i * dim_b + l);
    return out;
}

Matrix unitary_propagator(const Matrix& H, double t)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (H + H.adjoint()));
    CVector phases(es.eigenvalues().size());
    for (Eigen::Index k = 0; k < phases.size(); ++k)
        phases(k) = std::exp(cplx(0.0, -es.eigenvalues()(k) * t));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

} // namespace serf
