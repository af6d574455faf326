#include "scqa/phase_space.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>

namespace scqa {

Eigen::MatrixXd standard_J(PhaseDim dim) {
    if (dim.modes < 1) throw DimensionMismatch("PhaseDim: need at least one mode");
    const int n = dim.modes;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    J.block(0, n, n, n) = Eigen::MatrixXd::Identity(n, n);
    J.block(n, 0, n, n) = -Eigen::MatrixXd::Identity(n, n);
    return J;
}

double symplectic_check(const Eigen::MatrixXd& L) {
    if (L.rows() != L.cols() || L.rows() % 2 != 0 || L.rows() == 0)
        throw DimensionMismatch("symplectic_check: matrix must be square with even dimension");
    const Eigen::MatrixXd J = standard_J(PhaseDim{static_cast<int>(L.rows()) / 2});
    return (L.transpose() * J * L - J).cwiseAbs().maxCoeff();
}

SymplecticPropagator SymplecticPropagator::identity(PhaseDim dim) {
    return {Eigen::MatrixXd::Identity(dim.vars(), dim.vars()),
            Eigen::VectorXd::Zero(dim.vars()), 0.0};
}

Eigen::MatrixXd symplectic_inverse(const Eigen::MatrixXd& lambda, double tol) {
    const double residual = symplectic_check(lambda);
    if (residual > tol)
        throw SymplecticDrift("symplectic_inverse: residual " + num_str(residual) +
                              " exceeds tolerance " + num_str(tol));
    const Eigen::MatrixXd J = standard_J(PhaseDim{static_cast<int>(lambda.rows()) / 2});
    return J * lambda.transpose() * J.transpose();
}

Eigen::MatrixXd symplectic_inverse(const SymplecticPropagator& P, double tol) {
    return symplectic_inverse(P.lambda, tol);
}

GaussianState::GaussianState(Eigen::VectorXd mean, Eigen::MatrixXd cov, double hbar)
    : mean_(std::move(mean)), cov_(std::move(cov)), hbar_(hbar) {
    if (mean_.size() % 2 != 0 || mean_.size() == 0)
        throw DimensionMismatch("GaussianState: mean must have even, positive length");
    if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size())
        throw DimensionMismatch("GaussianState: covariance shape does not match mean");
    if (hbar_ <= 0.0) throw Error("GaussianState: hbar must be positive");

    const double asym = (cov_ - cov_.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * std::max(1.0, cov_.cwiseAbs().maxCoeff()))
        throw DimensionMismatch("GaussianState: covariance is not symmetric");
    cov_ = ((cov_ + cov_.transpose()) / 2.0).eval();

    // Uncertainty condition: M + (i hbar/2) J^T must be PSD.
    const Eigen::MatrixXd J = standard_J(dim());
    Eigen::MatrixXcd sigma = cov_.cast<std::complex<double>>();
    sigma += std::complex<double>(0.0, 0.5 * hbar_) * J.transpose().cast<std::complex<double>>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sigma, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10)
        throw SingularCovariance("GaussianState: uncertainty condition violated (min eigenvalue " +
                                 num_str(es.eigenvalues().minCoeff()) + ")");
}

double wigner_eval(const GaussianState& state, const Eigen::VectorXd& z) {
    if (z.size() != state.mean().size())
        throw DimensionMismatch("wigner_eval: point has wrong dimension");
    const Eigen::MatrixXd& M = state.cov();
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success || M.determinant() <= 0.0)
        throw SingularCovariance("wigner_eval: covariance is not positive definite");
    const Eigen::VectorXd d = z - state.mean();
    const double quad = d.dot(llt.solve(d));
    const double norm = std::pow(2.0 * M_PI, -0.5 * z.size()) / std::sqrt(M.determinant());
    return norm * std::exp(-0.5 * quad);
}

double evolve_wigner_point(const GaussianState& state0,
                           const SymplecticPropagator& P,
                           const Eigen::VectorXd& z) {
    return wigner_eval(state0, P.lambda * z + P.delta);
}

Eigen::VectorXd mean_evolve(const SymplecticPropagator& P, const Eigen::VectorXd& mean0) {
    return symplectic_inverse(P) * (mean0 - P.delta);
}

Eigen::MatrixXd cov_evolve(const SymplecticPropagator& P, const Eigen::MatrixXd& M0) {
    const Eigen::MatrixXd inv = symplectic_inverse(P);
    Eigen::MatrixXd M = inv * M0 * inv.transpose();
    return ((M + M.transpose()) / 2.0).eval();
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> heisenberg_q(const SymplecticPropagator& P) {
    const Eigen::MatrixXd inv = symplectic_inverse(P);
    return {inv, -inv * P.delta};
}

GaussianState evolve_state(const GaussianState& state0, const SymplecticPropagator& P) {
    return GaussianState(mean_evolve(P, state0.mean()), cov_evolve(P, state0.cov()),
                         state0.hbar());
}

} // namespace scqa
