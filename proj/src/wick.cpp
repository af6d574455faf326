#include "scqa/wick.hpp"

#include <cmath>

namespace scqa {

namespace {

struct Contraction {
    int i, j;
    Complex weight; // G_ij for i < j (both triangle halves), G_ii / 2 on the diagonal
};

// 1/2 sum_ij G_ij d_i d_j applied once.
PolySymbol second_order_step(const PolySymbol& P, const std::vector<Contraction>& pairs) {
    PolySymbol out(P.nvars());
    for (const auto& [alpha, c] : P.terms()) {
        for (const auto& pair : pairs) {
            if (pair.i == pair.j) {
                const int a = alpha[pair.i];
                if (a < 2) continue;
                MultiIndex beta = alpha;
                beta[pair.i] -= 2;
                out.add_term(beta, c * pair.weight * static_cast<double>(a) *
                                       static_cast<double>(a - 1));
            } else {
                const int a = alpha[pair.i], b = alpha[pair.j];
                if (a < 1 || b < 1) continue;
                MultiIndex beta = alpha;
                beta[pair.i] -= 1;
                beta[pair.j] -= 1;
                out.add_term(beta, c * pair.weight * static_cast<double>(a) *
                                       static_cast<double>(b));
            }
        }
    }
    return out;
}

} // namespace

Complex wick_apply(const PolySymbol& P, const Eigen::MatrixXcd& G,
                   const Eigen::VectorXcd& point) {
    if (P.is_graded()) throw Error("wick_apply: collapse the hbar grading first");
    if (G.rows() != P.nvars() || G.cols() != P.nvars())
        throw DimensionMismatch("wick_apply: quadratic form has wrong shape");
    if (point.size() != P.nvars())
        throw DimensionMismatch("wick_apply: expansion point has wrong dimension");

    const Eigen::MatrixXcd Gs = 0.5 * (G + G.transpose());
    std::vector<Contraction> pairs;
    for (int i = 0; i < Gs.rows(); ++i)
        for (int j = i; j < Gs.cols(); ++j)
            if (Gs(i, j) != Complex(0.0, 0.0))
                pairs.push_back({i, j, i == j ? 0.5 * Gs(i, i) : Gs(i, j)});

    Complex sum(0.0, 0.0);
    PolySymbol current = P;
    double factorial = 1.0;
    for (int k = 0; !current.is_zero(); ++k) {
        if (k > 0) factorial *= k;
        sum += current.evaluate(point) / factorial;
        current = second_order_step(current, pairs);
    }
    return sum;
}

Complex wick_expectation(const PolySymbol& A, const GaussianState& state) {
    PolySymbol collapsed = A.is_graded() ? semiclassical_eval(A, state.hbar()) : A;
    if (collapsed.nvars() != state.mean().size())
        throw DimensionMismatch("wick_expectation: symbol and state dimensions differ");
    return wick_apply(collapsed, state.cov().cast<Complex>(),
                      state.mean().cast<Complex>());
}

Complex char_function(const GaussianState& state, const Eigen::VectorXcd& a) {
    if (a.size() != state.mean().size())
        throw DimensionMismatch("char_function: argument has wrong dimension");
    const Eigen::MatrixXcd M = state.cov().cast<Complex>();
    const Complex quad = (a.transpose() * M * a)(0, 0);
    const Complex lin = (a.transpose() * state.mean().cast<Complex>())(0, 0);
    return std::exp(0.5 * quad + lin);
}

} // namespace scqa
