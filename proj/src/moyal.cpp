#include "scqa/moyal.hpp"

#include <algorithm>

namespace scqa {

namespace {

// One contraction of the Janus bidifferential: for each mode i,
// d/dp_i (x) d/dx_i - d/dx_i (x) d/dp_i, acting on a polynomial in the
// doubled variable set (left slot then right slot).
PolySymbol janus_contraction(const PolySymbol& T, int n) {
    PolySymbol out(T.nvars());
    for (int i = 0; i < n; ++i) {
        const int pl = i, xl = n + i;           // left slot
        const int pr = 2 * n + i, xr = 3 * n + i; // right slot
        out += derivative(derivative(T, pl), xr);
        out -= derivative(derivative(T, xl), pr);
    }
    return out;
}

} // namespace

PolySymbol moyal_product(const PolySymbol& f, const PolySymbol& g, double hbar,
                         int degree_cap) {
    if (f.nvars() != g.nvars())
        throw DimensionMismatch("moyal_product: symbols over different variable sets");
    if (f.nvars() % 2 != 0)
        throw DimensionMismatch("moyal_product: phase-space symbols need 2n variables");
    if (f.is_graded() || g.is_graded())
        throw Error("moyal_product: graded symbols must be collapsed first");
    const int n = f.nvars() / 2;
    const int vars = 2 * f.nvars();

    // Work in the doubled variable set so repeated contractions are plain
    // polynomial operations; collapse both slots to z at the end.
    PolySymbol tensor = multiply(lift_to_slot(f, vars, 0), lift_to_slot(g, vars, f.nvars()),
                                 2 * degree_cap);

    PolySymbol result(f.nvars());
    const Complex factor(0.0, -0.5 * hbar);
    Complex scale(1.0, 0.0);
    for (int k = 0; !tensor.is_zero(); ++k) {
        if (k > 0) scale *= factor / static_cast<double>(k);
        for (const auto& [alpha, c] : tensor.terms()) {
            MultiIndex merged(f.nvars(), 0);
            int deg = 0;
            for (int i = 0; i < f.nvars(); ++i) {
                merged[i] = alpha[i] + alpha[f.nvars() + i];
                deg += merged[i];
            }
            if (deg > degree_cap)
                throw DegreeCapExceeded("moyal_product: term degree exceeds cap");
            result.add_term(merged, scale * c);
        }
        if (hbar == 0.0) break; // series truncates to the pointwise product
        tensor = janus_contraction(tensor, n);
    }
    return result;
}

PolySymbol commutator_symbol(const PolySymbol& f, const PolySymbol& g, double hbar,
                             int degree_cap) {
    return moyal_product(f, g, hbar, degree_cap) - moyal_product(g, f, hbar, degree_cap);
}

SymbolVector bopp_delta_product(const PolySymbol& A, const Eigen::VectorXd& mean,
                                double hbar) {
    if (mean.size() != A.nvars())
        throw DimensionMismatch("bopp_delta_product: mean has wrong dimension");
    if (A.is_graded()) throw Error("bopp_delta_product: collapse the hbar grading first");
    const int vars = A.nvars();
    const int n = vars / 2;
    SymbolVector grad = gradient(A);
    const Eigen::MatrixXd Jt = standard_J(PhaseDim{n}).transpose();

    SymbolVector out;
    out.reserve(vars);
    for (int mu = 0; mu < vars; ++mu) {
        PolySymbol dz_mu = PolySymbol::variable(vars, mu);
        dz_mu += PolySymbol::constant(vars, -mean(mu));
        PolySymbol comp = multiply(dz_mu, A);
        for (int nu = 0; nu < vars; ++nu) {
            if (Jt(mu, nu) == 0.0) continue;
            comp += Complex(0.0, 0.5 * hbar * Jt(mu, nu)) * grad[nu];
        }
        out.push_back(std::move(comp));
    }
    return out;
}

} // namespace scqa
