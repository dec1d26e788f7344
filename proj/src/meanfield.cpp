#include "serfsim/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace serf::meanfield {

void MeanFieldParams::validate() const
{
    if (!(R_se >= 0.0) || !std::isfinite(R_se))
        throw std::invalid_argument("R_se must be finite and >= 0");
    if (!(T1 > 0.0))
        throw std::invalid_argument("T1 must be > 0");
    if (!std::isfinite(gamma_e) || !std::isfinite(B_z))
        throw std::invalid_argument("gamma_e and B_z must be finite");
}

namespace {

Matrix vec_column(const Matrix& A)
{
    return A.reshaped(A.size(), 1);
}

// Mask of vectorized entries that couple levels in the same manifold.
Eigen::VectorXd intra_manifold_mask(const AtomBasis& basis)
{
    const int d = basis.dim();
    Eigen::VectorXd mask(d * d);
    for (int l = 0; l < d; ++l)
        for (int k = 0; k < d; ++k)
            mask(k + d * l) = basis.level(k).manifold == basis.level(l).manifold ? 1.0 : 0.0;
    return mask;
}

} // namespace

Matrix liouvillian(const MeanFieldParams& params)
{
    params.validate();
    const AtomBasis basis(params.spin);
    const OperatorSet ops = spin_operators(basis);
    const int d = basis.dim();
    const int n = d * d;
    const Matrix id = Matrix::Identity(d, d);
    const Matrix id_n = Matrix::Identity(n, n);

    const Matrix H = manifold_hamiltonian(ops, Vector3(0, 0, params.B_z), params.gamma_e);
    Matrix L = cplx(0.0, -1.0) * (kron(id, H) - kron(H.transpose(), id));

    if (params.R_se > 0.0) {
        const Matrix* S[3] = {&ops.Sx, &ops.Sy, &ops.Sz};
        Matrix exchange = 0.25 * id_n - id_n;
        for (const Matrix* Si : S) {
            exchange += kron(Si->transpose(), *Si);
            exchange += (4.0 / d) * vec_column(*Si) * vec_column(Si->transpose()).transpose();
        }
        L += params.R_se * exchange;
    }

    if (std::isfinite(params.T1)) {
        const Matrix one = vec_column(id);
        L += (1.0 / params.T1) * ((1.0 / d) * one * one.transpose() - id_n);
    }

    const Eigen::VectorXd mask = intra_manifold_mask(basis);
    return mask.cast<cplx>().asDiagonal() * L * mask.cast<cplx>().asDiagonal();
}

std::vector<int> plus_coherence_sector(const AtomBasis& basis)
{
    const int d = basis.dim();
    std::vector<int> idx;
    for (int l = 0; l < d; ++l)
        for (int k = 0; k < d; ++k) {
            const Level& lk = basis.level(k);
            const Level& ll = basis.level(l);
            if (lk.manifold == ll.manifold && lk.m - ll.m == -1)
                idx.push_back(k + d * l);
        }
    std::sort(idx.begin(), idx.end());
    return idx;
}

RelaxationResult transverse_mode(const MeanFieldParams& params)
{
    if (!(params.B_z > 0.0))
        throw std::invalid_argument("transverse_mode requires B_z > 0");
    const AtomBasis basis(params.spin);
    const OperatorSet ops = spin_operators(basis);
    const Matrix L = liouvillian(params);
    const std::vector<int> sector = plus_coherence_sector(basis);
    const int ns = static_cast<int>(sector.size());

    Matrix Ls(ns, ns);
    for (int r = 0; r < ns; ++r)
        for (int c = 0; c < ns; ++c)
            Ls(r, c) = L(sector[r], sector[c]);

    const Matrix F_minus_a = ops.F_plus_a.adjoint();
    CVector probe(ns);
    for (int r = 0; r < ns; ++r)
        probe(r) = F_minus_a.reshaped()(sector[r]);
    probe.normalize();

    Eigen::ComplexEigenSolver<Matrix> es(Ls);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigen-decomposition of the coherence sector failed");

    struct Candidate {
        double overlap;
        cplx lambda;
    };
    std::vector<Candidate> modes;
    for (int k = 0; k < ns; ++k) {
        const CVector v = es.eigenvectors().col(k).normalized();
        modes.push_back({std::abs(probe.dot(v)), es.eigenvalues()(k)});
    }
    std::sort(modes.begin(), modes.end(), [](const Candidate& x, const Candidate& y) {
        if (std::abs(x.overlap - y.overlap) > 1e-9)
            return x.overlap > y.overlap;
        return -x.lambda.real() < -y.lambda.real();
    });

    RelaxationResult out;
    out.B_z = params.B_z;
    out.Gamma = -modes.front().lambda.real();
    out.omega = modes.front().lambda.imag();
    out.gamma_eff = out.omega / params.B_z;
    out.mode_overlap = modes.front().overlap;
    out.degenerate = modes.size() > 1 && modes[1].overlap > 0.95 * modes.front().overlap;
    return out;
}

namespace {

void check_field_grid(const MeanFieldParams& params, const std::vector<double>& B_grid)
{
    params.validate();
    if (!std::is_sorted(B_grid.begin(), B_grid.end()))
        throw std::invalid_argument("field grid must be sorted ascending");
    if (!B_grid.empty() && !(B_grid.front() > 0.0))
        throw std::invalid_argument("field grid must be positive");
}

} // namespace

std::vector<RelaxationResult> sweep_field(const MeanFieldParams& params, const std::vector<double>& B_grid)
{
    check_field_grid(params, B_grid);
    std::vector<RelaxationResult> out(B_grid.size());
    const long n = static_cast<long>(B_grid.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        try {
            MeanFieldParams p = params;
            p.B_z = B_grid[static_cast<std::size_t>(i)];
            out[static_cast<std::size_t>(i)] = transverse_mode(p);
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

std::vector<RelaxationResult> sweep_field_serial(const MeanFieldParams& params, const std::vector<double>& B_grid)
{
    check_field_grid(params, B_grid);
    std::vector<RelaxationResult> out;
    out.reserve(B_grid.size());
    for (double B : B_grid) {
        MeanFieldParams p = params;
        p.B_z = B;
        out.push_back(transverse_mode(p));
    }
    return out;
}

std::vector<double> field_grid_for_ratio(const MeanFieldParams& params, double ratio_min, double ratio_max,
                                         int points)
{
    if (points < 0 || !(ratio_min > 0.0) || !(ratio_max >= ratio_min))
        throw std::invalid_argument("invalid field-ratio grid");
    if (!(params.R_se > 0.0) || !(params.gamma_e > 0.0))
        throw std::invalid_argument("field-ratio grid needs R_se > 0 and gamma_e > 0");
    std::vector<double> grid;
    const double scale = params.R_se / params.gamma_e;
    for (int k = 0; k < points; ++k) {
        const double f = points == 1 ? 0.0 : static_cast<double>(k) / (points - 1);
        grid.push_back(scale * ratio_min * std::pow(ratio_max / ratio_min, f));
    }
    return grid;
}

std::vector<DensityMatrix> evolve(const DensityMatrix& rho0, const MeanFieldParams& params,
                                  const std::vector<double>& t_grid)
{
    const AtomBasis basis(params.spin);
    const int d = basis.dim();
    if (rho0.dim() != d)
        throw std::invalid_argument("initial state dimension does not match the nuclear spin");
    if (t_grid.empty())
        return {};
    if (t_grid.front() != 0.0 || !std::is_sorted(t_grid.begin(), t_grid.end()))
        throw std::invalid_argument("time grid must be ascending and start at 0");

    const Matrix L = liouvillian(params);
    const StateTolerance loose{1e-9, 1e-9, -1e-9};

    std::vector<DensityMatrix> out;
    out.reserve(t_grid.size());
    out.push_back(rho0);

    CVector v = project_intra_manifold(basis, rho0.matrix()).reshaped();
    double last_dt = -1.0;
    Matrix step;
    for (std::size_t k = 1; k < t_grid.size(); ++k) {
        const double dt = t_grid[k] - t_grid[k - 1];
        if (std::abs(dt - last_dt) > 1e-15 * std::max(1.0, std::abs(dt))) {
            step = (L * dt).exp();
            last_dt = dt;
        }
        v = step * v;
        Matrix rho = v.reshaped(d, d);
        rho = project_intra_manifold(basis, 0.5 * (rho + rho.adjoint()));
        v = rho.reshaped();
        out.emplace_back(rho, loose);
    }
    return out;
}

} // namespace serf::meanfield
