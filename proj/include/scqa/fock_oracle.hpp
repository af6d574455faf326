#ifndef SCQA_FOCK_ORACLE_HPP
#define SCQA_FOCK_ORACLE_HPP

#include <functional>
#include <vector>

#include "scqa/phase_space.hpp"
#include "scqa/poly_symbol.hpp"

namespace scqa {

// Single-mode operator on the d-dimensional truncated Fock basis.
struct FockOperator {
    int dim = 0;
    Eigen::MatrixXcd mat;
    double hbar = 1.0;
};

struct FockState {
    Eigen::MatrixXcd rho;

    // Hermiticity, unit trace and positivity to 1e-10.
    void validate() const;
};

// Ladder operator a with a|k> = sqrt(k)|k-1>.
Eigen::MatrixXcd ladder_lower(int d);
// Momentum and position quadratures p = i sqrt(hbar/2)(a^dag - a),
// x = sqrt(hbar/2)(a + a^dag), in the (p, x) canonical ordering.
FockOperator momentum_op(int d, double hbar);
FockOperator position_op(int d, double hbar);

// Weyl (fully symmetrized) quantization of a single-mode polynomial symbol:
// monomials are built by the recursion W(z_mu m) = (Q_mu W(m) + W(m) Q_mu)/2,
// extended linearly. Throws UnsupportedDim for more than one mode.
FockOperator weyl_quantize(const PolySymbol& A, int d, double hbar);

// Supported families: coherent (M = hbar/2 E), squeezed vacuum
// (M = hbar/2 diag(e^{2r}, e^{-2r})), thermal (M = nu E, nu >= hbar/2);
// any family may carry a displaced mean. Throws TruncationError when the
// occupation mass beyond d exceeds 1e-10, UnsupportedCovariance otherwise.
FockState gaussian_to_fock(const GaussianState& state, int d);

// rho_t = U rho U^dag with U = exp(-i H t / hbar) by Hermitian
// eigendecomposition. Throws NonHermitian.
FockState oracle_evolve(const FockOperator& H, const FockState& rho, double t);

Complex oracle_expect(const FockOperator& A, const FockState& rho);

// Literal nested-commutator response: builds V(tau_j) = U^dag(tau_j) V U(tau_j),
// folds the commutators left to right, traces against rho0.
Complex oracle_response_S(const FockOperator& H, const FockState& rho0,
                          const FockOperator& V, const std::vector<double>& times);

// Same, built from symbols at dimensions d and 2d; throws TruncationError if
// the doubling changes the value by more than 1e-8. Returns the 2d value.
Complex oracle_response_S_checked(const PolySymbol& H, const GaussianState& state,
                                  const PolySymbol& V, const std::vector<double>& times,
                                  int d);

struct TruncationReport {
    std::vector<int> dims;
    std::vector<Complex> values;
    std::vector<double> diffs; // successive |values[i] - values[i-1]|
    bool converged = false;
    int converged_at = -1; // first d whose increment fell below tolerance
};

TruncationReport truncation_study(const std::function<Complex(int)>& builder,
                                  const std::vector<int>& d_seq, double tol = 1e-8);

} // namespace scqa

#endif
