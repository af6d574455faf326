#ifndef SCQA_WICK_HPP
#define SCQA_WICK_HPP

#include "scqa/phase_space.hpp"
#include "scqa/poly_symbol.hpp"

namespace scqa {

// exp(1/2 grad^T G grad) P evaluated at `point`. G may be complex (it is
// symmetrized internally); the series terminates after degree/2 steps.
// This single engine backs both Gaussian expectations (G = M real) and the
// multi-time response evaluator (G = the Sigma block matrix).
Complex wick_apply(const PolySymbol& P, const Eigen::MatrixXcd& G,
                   const Eigen::VectorXcd& point);

// Gaussian expectation <A> = exp(1/2 grad^T M grad) A(<q>). Exact for
// polynomials; graded symbols are collapsed at the state's hbar first.
Complex wick_expectation(const PolySymbol& A, const GaussianState& state);

// chi(a) = exp(1/2 a^T M a + a^T <q>), the moment-generating characteristic
// function of the state, defined for complex arguments.
Complex char_function(const GaussianState& state, const Eigen::VectorXcd& a);

} // namespace scqa

#endif
