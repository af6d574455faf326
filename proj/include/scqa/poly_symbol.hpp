#ifndef SCQA_POLY_SYMBOL_HPP
#define SCQA_POLY_SYMBOL_HPP

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <vector>

#include "scqa/errors.hpp"
#include "scqa/phase_space.hpp"

namespace scqa {

using Complex = std::complex<double>;

// Exponent tuple (alpha_1, ..., alpha_k) over the phase-space variables.
using MultiIndex = std::vector<int>;

int total_degree(const MultiIndex& alpha);

// Products whose total degree would exceed this are rejected.
inline constexpr int kDefaultDegreeCap = 16;

// Sparse complex-coefficient polynomial in nvars variables. Phase-space
// symbols use nvars = 2n with momenta-first ordering. A symbol may carry an
// optional grading in powers of hbar: grade k stores the coefficient
// sub-polynomial of hbar^k / k!, grade 0 being the classical part.
class PolySymbol {
public:
    using TermMap = std::map<MultiIndex, Complex>;

    PolySymbol() = default;
    explicit PolySymbol(int nvars);

    static PolySymbol constant(int nvars, Complex c);
    static PolySymbol variable(int nvars, int index, Complex coeff = 1.0);
    static PolySymbol monomial(const MultiIndex& alpha, Complex c);

    int nvars() const { return nvars_; }
    bool is_zero() const;
    bool is_graded() const { return !higher_.empty(); }
    int degree() const;

    const TermMap& terms() const { return terms_; }
    const std::map<int, TermMap>& higher_grades() const { return higher_; }

    Complex coeff(const MultiIndex& alpha) const;
    void add_term(const MultiIndex& alpha, Complex c, int grade = 0);

    PolySymbol& operator+=(const PolySymbol& rhs);
    PolySymbol& operator-=(const PolySymbol& rhs);
    PolySymbol& operator*=(Complex c);

    friend PolySymbol operator+(PolySymbol lhs, const PolySymbol& rhs) { return lhs += rhs; }
    friend PolySymbol operator-(PolySymbol lhs, const PolySymbol& rhs) { return lhs -= rhs; }
    friend PolySymbol operator*(Complex c, PolySymbol p) { return p *= c; }
    friend PolySymbol operator*(PolySymbol p, Complex c) { return p *= c; }

    // Pointwise evaluation; defined for ungraded symbols only.
    Complex evaluate(const Eigen::VectorXcd& z) const;
    Complex evaluate(const Eigen::VectorXd& z) const;

    double max_abs_coeff() const;
    bool has_real_coeffs(double tol) const;

    // Largest absolute coefficient difference against another symbol,
    // grade by grade.
    double distance(const PolySymbol& rhs) const;

private:
    void require_ungraded(const char* op) const;

    int nvars_ = 0;
    TermMap terms_;                 // grade 0
    std::map<int, TermMap> higher_; // grades >= 1, absent when ungraded
};

// Polynomial product with the degree cap; graded inputs are rejected.
PolySymbol multiply(const PolySymbol& f, const PolySymbol& g,
                    int degree_cap = kDefaultDegreeCap);

// Formal partial derivative with respect to variable `var`, grade by grade.
PolySymbol derivative(const PolySymbol& f, int var);

using SymbolVector = std::vector<PolySymbol>;
using SymbolMatrix = std::vector<std::vector<PolySymbol>>;

SymbolVector gradient(const PolySymbol& A);
// Exactly symmetric by construction (mixed partials are computed once).
SymbolMatrix hessian(const PolySymbol& A);

// Re-expansion of A around `point`: the returned polynomial in dz satisfies
// A(point + dz) identically.
PolySymbol taylor_shift(const PolySymbol& A, const Eigen::VectorXd& point);

// Collapse the hbar grading at a given hbar: sum_k hbar^k/k! * grade_k.
PolySymbol semiclassical_eval(const PolySymbol& A, double hbar);
PolySymbol classical_part(const PolySymbol& A);

// Embed a symbol in nvars variables into a wider variable set, mapping
// variable i to offset + i. Used to build multi-time products.
PolySymbol lift_to_slot(const PolySymbol& A, int total_vars, int offset);

} // namespace scqa

#endif
