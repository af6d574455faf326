#ifndef SCQA_PHASE_SPACE_HPP
#define SCQA_PHASE_SPACE_HPP

#include <Eigen/Dense>
#include <utility>

#include "scqa/errors.hpp"

namespace scqa {

// Tolerance against which every Lambda produced by the toolkit is checked.
inline constexpr double kSymplecticTol = 1e-8;

// Number of bosonic modes; the canonical vector is (p_1..p_n, x_1..x_n),
// momenta first, so all 2n x 2n matrices below follow that ordering.
struct PhaseDim {
    int modes = 1;

    int vars() const { return 2 * modes; }
};

// Standard symplectic matrix J = (0 I; -I 0). J^2 = -E, J^T = -J = J^{-1}.
Eigen::MatrixXd standard_J(PhaseDim dim);

// Max-norm residual ||L^T J L - J||_inf. Zero for exactly symplectic L.
double symplectic_check(const Eigen::MatrixXd& L);

// Linear part of a Gaussian-preserving evolution: q_t = Lambda q + Delta.
struct SymplecticPropagator {
    Eigen::MatrixXd lambda;
    Eigen::VectorXd delta;
    double t = 0.0;

    static SymplecticPropagator identity(PhaseDim dim);
};

// Lambda^{-1} = J Lambda^T J^T. Throws SymplecticDrift if the residual of
// Lambda exceeds tol; never falls back to a generic factorization.
Eigen::MatrixXd symplectic_inverse(const Eigen::MatrixXd& lambda,
                                   double tol = kSymplecticTol);
Eigen::MatrixXd symplectic_inverse(const SymplecticPropagator& P,
                                   double tol = kSymplecticTol);

// Gaussian state over n modes: mean <q> and symmetric covariance M.
// Construction enforces M = M^T and the uncertainty condition that the
// Hermitian matrix M + (i hbar/2) J^T is positive semidefinite.
class GaussianState {
public:
    GaussianState(Eigen::VectorXd mean, Eigen::MatrixXd cov, double hbar = 1.0);

    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::MatrixXd& cov() const { return cov_; }
    double hbar() const { return hbar_; }
    PhaseDim dim() const { return PhaseDim{static_cast<int>(mean_.size()) / 2}; }

private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd cov_;
    double hbar_;
};

// Normalized Gaussian Wigner density at phase-space point z.
double wigner_eval(const GaussianState& state, const Eigen::VectorXd& z);

// W(z, t) = W_0(Lambda z + Delta).
double evolve_wigner_point(const GaussianState& state0,
                           const SymplecticPropagator& P,
                           const Eigen::VectorXd& z);

// <q>_t = Lambda^{-1} (<q>_0 - Delta).
Eigen::VectorXd mean_evolve(const SymplecticPropagator& P,
                            const Eigen::VectorXd& mean0);

// M_t = Lambda^{-1} M_0 (Lambda^{-1})^T.
Eigen::MatrixXd cov_evolve(const SymplecticPropagator& P,
                           const Eigen::MatrixXd& M0);

// Heisenberg-picture canonical vector q_H = Lambda^{-1}(q - Delta), returned
// as the affine pair (matrix, offset).
std::pair<Eigen::MatrixXd, Eigen::VectorXd>
heisenberg_q(const SymplecticPropagator& P);

GaussianState evolve_state(const GaussianState& state0,
                           const SymplecticPropagator& P);

} // namespace scqa

#endif
