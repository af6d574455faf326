#ifndef SCQA_MOYAL_HPP
#define SCQA_MOYAL_HPP

#include "scqa/poly_symbol.hpp"

namespace scqa {

// Star product f * g of two polynomial symbols over the same 2n variables.
// The bidifferential series terminates for polynomials; at hbar = 0 it
// reduces exactly to the pointwise product.
PolySymbol moyal_product(const PolySymbol& f, const PolySymbol& g, double hbar,
                         int degree_cap = kDefaultDegreeCap);

// Symbol of the commutator [F, G] = f*g - g*f. For f = q_mu this equals
// -i hbar (J grad g)_mu exactly.
PolySymbol commutator_symbol(const PolySymbol& f, const PolySymbol& g, double hbar,
                             int degree_cap = kDefaultDegreeCap);

// Symbol vector of (q - mean) A, one component per canonical variable:
// dz_mu A(z) + (i hbar / 2) (J^T grad A)_mu.
SymbolVector bopp_delta_product(const PolySymbol& A, const Eigen::VectorXd& mean,
                                double hbar);

} // namespace scqa

#endif
