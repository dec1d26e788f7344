#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "serfsim/spin_core.hpp"

using namespace serf;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

} // namespace

TEST_SUITE("spin_core") {

TEST_CASE("nuclear spin accepts only half-integer values")
{
    CHECK_THROWS_AS(NuclearSpin(0), std::invalid_argument);
    CHECK_THROWS_AS(NuclearSpin(2), std::invalid_argument);
    CHECK_THROWS_AS(NuclearSpin(-1), std::invalid_argument);
    CHECK(NuclearSpin(3).value() == 1.5);
    CHECK(NuclearSpin(3).multiplicity() == 4);
}

TEST_CASE("basis is manifold-major with m descending")
{
    for (int two_i : {1, 3, 5, 7}) {
        const AtomBasis b(NuclearSpin{two_i});
        CHECK(b.dim() == 2 * (two_i + 1));
        CHECK(b.upper_dim() + b.lower_dim() == b.dim());
        const int Fa = (two_i + 1) / 2;
        for (int k = 0; k < b.upper_dim(); ++k) {
            CHECK(b.level(k).manifold == Manifold::a);
            CHECK(b.level(k).F == Fa);
            CHECK(b.level(k).m == Fa - k);
        }
        for (int k = 0; k < b.lower_dim(); ++k) {
            const Level& l = b.level(b.upper_dim() + k);
            CHECK(l.manifold == Manifold::b);
            CHECK(l.F == Fa - 1);
            CHECK(l.m == Fa - 1 - k);
        }
    }
}

TEST_CASE("angular momentum commutation relations")
{
    for (int two_j : {1, 2, 3, 4}) {
        const SpinMatrices J = angular_momentum(two_j);
        const cplx i{0, 1};
        CHECK(max_abs(commutator(J.Jx, J.Jy) - i * J.Jz) < 1e-12);
        CHECK(max_abs(commutator(J.Jy, J.Jz) - i * J.Jx) < 1e-12);
        const double j = 0.5 * two_j;
        const Matrix J2 = J.Jx * J.Jx + J.Jy * J.Jy + J.Jz * J.Jz;
        CHECK(max_abs(J2 - j * (j + 1) * Matrix::Identity(two_j + 1, two_j + 1)) < 1e-12);
    }
}

TEST_CASE("coupled operators")
{
    for (int two_i : {1, 3, 5}) {
        const OperatorSet ops = spin_operators(AtomBasis(NuclearSpin{two_i}));
        const int d = ops.dim();
        const Matrix id = Matrix::Identity(d, d);
        CHECK(max_abs(ops.Fx - ops.Sx - ops.Ix) < 1e-12);
        CHECK(max_abs(ops.Fz - ops.Sz - ops.Iz) < 1e-12);
        // electron and nuclear spins commute
        CHECK(max_abs(commutator(ops.Sx, ops.Iy)) < 1e-12);
        CHECK(max_abs(commutator(ops.Sx, ops.Sy) - cplx(0, 1) * ops.Sz) < 1e-12);
        CHECK(max_abs(ops.Pi_a + ops.Pi_b - id) < 1e-12);
        CHECK(max_abs(ops.Pi_a * ops.Pi_b) < 1e-12);
        CHECK(std::abs(ops.Pi_a.trace() - cplx(two_i + 2)) < 1e-12);
        // F_z is diagonal with the level labels
        for (int k = 0; k < d; ++k)
            CHECK(std::abs(ops.Fz(k, k) - cplx(ops.basis.level(k).m)) < 1e-12);
        // F^2 = F(F+1) on each manifold
        const Matrix F2 = ops.Fx * ops.Fx + ops.Fy * ops.Fy + ops.Fz * ops.Fz;
        const double Fa = 0.5 * (two_i + 1);
        const double Fb = Fa - 1;
        CHECK(max_abs(F2 - Fa * (Fa + 1) * ops.Pi_a - Fb * (Fb + 1) * ops.Pi_b) < 1e-12);
        // S.I = [F(F+1) - I(I+1) - 3/4] / 2
        const Matrix SI = ops.Sx * ops.Ix + ops.Sy * ops.Iy + ops.Sz * ops.Iz;
        const double I = 0.5 * two_i;
        CHECK(max_abs(SI - 0.5 * I * ops.Pi_a + 0.5 * (I + 1) * ops.Pi_b) < 1e-12);
        CHECK(max_abs(ops.F_plus_a - ops.Pi_a * (ops.Fx + cplx(0, 1) * ops.Fy) * ops.Pi_a) < 1e-12);
        CHECK(max_abs(ops.coupled_to_product.adjoint() * ops.coupled_to_product - id) < 1e-12);
    }
}

TEST_CASE("density matrix invariants are enforced")
{
    Matrix bad = Matrix::Identity(4, 4) * 0.5;
    CHECK_THROWS_AS(DensityMatrix{bad}, std::invalid_argument);
    Matrix nonherm = Matrix::Identity(2, 2) * 0.5;
    nonherm(0, 1) = 0.1;
    CHECK_THROWS_AS(DensityMatrix{nonherm}, std::invalid_argument);
    Matrix negative = Matrix::Zero(2, 2);
    negative(0, 0) = 1.5;
    negative(1, 1) = -0.5;
    CHECK_THROWS_AS(DensityMatrix{negative}, std::invalid_argument);
    CHECK(is_density_matrix(DensityMatrix::maximally_mixed(8).matrix()));
}

TEST_CASE("spin temperature state carries the requested electron polarization")
{
    for (int two_i : {1, 3, 5, 7}) {
        const OperatorSet ops = spin_operators(AtomBasis(NuclearSpin{two_i}));
        for (int k = 0; k <= 9; ++k) {
            const double P = 0.1 * k;
            for (const Vector3& n : {Vector3(0, 0, 1), Vector3(1, 0, 0), Vector3(0, 1, 0)}) {
                const DensityMatrix rho = spin_temperature_state(ops, P, n);
                CHECK(std::abs(rho.expectation(2.0 * ops.S_dot(n)).real() - P) < 1e-10);
            }
        }
    }
}

TEST_CASE("spin temperature populations")
{
    const OperatorSet ops = spin_operators(AtomBasis(NuclearSpin::three_halves()));
    // P = 1/2: e^beta = 3, the stretched level holds 81/160
    const DensityMatrix rho = spin_temperature_state(ops, 0.5, Vector3(0, 0, 1));
    CHECK(std::abs(rho.matrix()(0, 0).real() - 81.0 / 160.0) < 1e-12);
    CHECK(spin_temperature_beta(0.5) == doctest::Approx(std::log(3.0)).epsilon(1e-15));

    for (double P : {0.0, 0.05, 0.3, 0.7, 0.95, 0.999}) {
        const DensityMatrix r = spin_temperature_state(ops, P, Vector3(0, 0, 1));
        const auto& b = ops.basis;
        for (int k = 0; k < b.upper_dim(); ++k)
            for (int l = 0; l < b.lower_dim(); ++l)
                if (b.level(k).m == b.level(b.upper_dim() + l).m)
                    CHECK(std::abs(r.matrix()(k, k) - r.matrix()(b.upper_dim() + l, b.upper_dim() + l)) < 1e-12);
    }

    const DensityMatrix zero = spin_temperature_state(ops, 0.0, Vector3(0, 0, 1));
    CHECK(max_abs(zero.matrix() - DensityMatrix::maximally_mixed(ops.dim()).matrix()) < 1e-15);
    CHECK_THROWS_AS(spin_temperature_state(ops, 1.0, Vector3(0, 0, 1)), std::invalid_argument);
    CHECK_THROWS_AS(spin_temperature_state(ops, -0.1, Vector3(0, 0, 1)), std::invalid_argument);
}

TEST_CASE("rotating a z spin temperature state gives the x state")
{
    for (int two_i : {1, 3, 5}) {
        const OperatorSet ops = spin_operators(AtomBasis(NuclearSpin{two_i}));
        const Matrix R = unitary_propagator(ops.Fy, std::numbers::pi / 2);
        for (double P : {0.1, 0.5, 0.9}) {
            const Matrix z = spin_temperature_state(ops, P, Vector3(0, 0, 1)).matrix();
            const Matrix x = spin_temperature_state(ops, P, Vector3(1, 0, 0)).matrix();
            CHECK(max_abs(R * z * R.adjoint() - x) < 1e-10);
        }
    }
}

TEST_CASE("stretched state")
{
    const OperatorSet ops = spin_operators(AtomBasis(NuclearSpin::three_halves()));
    const DensityMatrix s = stretched_state(ops, Vector3(0, 0, 1));
    CHECK(std::abs(s.matrix()(0, 0) - 1.0) < 1e-12);
    CHECK(std::abs(s.expectation(2.0 * ops.Sz) - 1.0) < 1e-12);
    const DensityMatrix sx = stretched_state(ops, Vector3(1, 0, 0));
    CHECK(std::abs(sx.expectation(ops.Fx) - 2.0) < 1e-12);
    // the P -> 1 limit of the spin temperature state
    const DensityMatrix near = spin_temperature_state(ops, 1 - 1e-9, Vector3(1, 0, 0));
    CHECK(max_abs(near.matrix() - sx.matrix()) < 1e-6);
}

TEST_CASE("manifold hamiltonian")
{
    const double gamma_e = two_pi * 28e9;
    for (int two_i : {1, 3, 5}) {
        const OperatorSet ops = spin_operators(AtomBasis(NuclearSpin{two_i}));
        const Matrix H = manifold_hamiltonian(ops, Vector3(1e-6, -2e-6, 5e-5), gamma_e);
        // exactly block diagonal
        CHECK((ops.Pi_a * H * ops.Pi_b).cwiseAbs().maxCoeff() == 0.0);
        CHECK(commutator(H, ops.Pi_a).cwiseAbs().maxCoeff() == 0.0);
        CHECK(commutator(H, ops.Pi_b).cwiseAbs().maxCoeff() == 0.0);
        CHECK(max_abs(H - H.adjoint()) < 1e-15 * max_abs(H));

        const double B = 5e-5;
        const Matrix Hz = manifold_hamiltonian(ops, Vector3(0, 0, B), gamma_e);
        const double w = gamma_e * B / (two_i + 1);
        for (int k = 0; k < ops.dim(); ++k) {
            const Level& l = ops.basis.level(k);
            const double sign = l.manifold == Manifold::a ? 1.0 : -1.0;
            CHECK(std::abs(Hz(k, k) - sign * w * l.m) < 1e-9 * w);
        }
        CHECK(max_abs(manifold_hamiltonian(ops, Vector3::Zero(), gamma_e)) == 0.0);
    }
}

TEST_CASE("pair operators")
{
    for (int two_i : {1, 3}) {
        const AtomBasis b(NuclearSpin{two_i});
        const PairOperatorSet pair = pair_operators(b, b);
        const int d = pair.dim();
        CHECK(d == 4 * (two_i + 1) * (two_i + 1));
        CHECK(std::abs(pair.Pi_S.trace() - cplx(d / 4.0)) < 1e-12);
        CHECK(max_abs(pair.Pi_S * pair.Pi_T) < 1e-12);
        CHECK(max_abs(pair.Pi_S * pair.Pi_S - pair.Pi_S) < 1e-12);
        CHECK(max_abs(pair.Pi_S + pair.Pi_T - Matrix::Identity(d, d)) < 1e-12);
        // singlet projector does not touch the nuclei
        CHECK(max_abs(commutator(pair.Pi_S, pair.lift_a(pair.atom_a.Ix))) < 1e-12);
        CHECK(max_abs(commutator(pair.Pi_S, pair.lift_a(pair.atom_a.Fz) + pair.lift_b(pair.atom_b.Fz))) < 1e-12);
    }
    const AtomBasis half(NuclearSpin::half());
    CHECK(pair_operators(half, half).dim() == 16);
    const AtomBasis k(NuclearSpin::three_halves());
    CHECK(pair_operators(k, k).dim() == 64);
}

TEST_CASE("partial traces")
{
    const OperatorSet ops = spin_operators(AtomBasis(NuclearSpin::half()));
    const Matrix a = spin_temperature_state(ops, 0.3, Vector3(1, 0, 0)).matrix();
    const Matrix b = spin_temperature_state(ops, 0.6, Vector3(0, 0, 1)).matrix();
    const Matrix ab = kron(a, b);
    CHECK(max_abs(partial_trace_b(ab, 4, 4) - a) < 1e-14);
    CHECK(max_abs(partial_trace_a(ab, 4, 4) - b) < 1e-14);
}

TEST_CASE("project_intra_manifold removes hyperfine coherences only")
{
    const OperatorSet ops = spin_operators(AtomBasis(NuclearSpin::three_halves()));
    const Matrix rho = spin_temperature_state(ops, 0.4, Vector3(1, 0, 0)).matrix();
    const Matrix p = project_intra_manifold(ops.basis, rho);
    CHECK(max_abs(p - ops.Pi_a * rho * ops.Pi_a - ops.Pi_b * rho * ops.Pi_b) < 1e-15);
}

}
