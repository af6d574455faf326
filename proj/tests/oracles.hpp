// Test-only reference implementations, kept independent of the library paths
// they are used to check.
#ifndef SCQA_TESTS_ORACLES_HPP
#define SCQA_TESTS_ORACLES_HPP

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "scqa/poly_symbol.hpp"

namespace scqa::testing {

// Closed-form Groenewold series as a double multi-index sum over per-mode
// derivative counts: sum_{a,b} (-i hbar/2)^{|a|+|b|} (-1)^{|b|} / (a! b!)
//   (d_p^a d_x^b f)(d_x^a d_p^b g).
// This is an independent route to the star product: no iterated tensor
// contraction, just explicit repeated derivatives.
inline PolySymbol groenewold_series(const PolySymbol& f, const PolySymbol& g, double hbar) {
    const int n = f.nvars() / 2;
    const int kmax = std::min(f.degree(), g.degree());

    auto derive_multi = [](PolySymbol s, const std::vector<int>& per_var) {
        for (std::size_t v = 0; v < per_var.size(); ++v)
            for (int k = 0; k < per_var[v]; ++k) s = derivative(s, static_cast<int>(v));
        return s;
    };

    PolySymbol total(f.nvars());
    std::vector<int> a(n, 0), b(n, 0);
    // Enumerate all (a, b) with |a| + |b| <= kmax by odometer increments.
    std::vector<int> counts(2 * n, 0);
    while (true) {
        int order = 0;
        double fact = 1.0;
        for (int c : counts) {
            order += c;
            for (int k = 2; k <= c; ++k) fact *= k;
        }
        if (order <= kmax) {
            for (int i = 0; i < n; ++i) {
                a[i] = counts[i];
                b[i] = counts[n + i];
            }
            std::vector<int> df(2 * n, 0), dg(2 * n, 0);
            int abs_b = 0;
            for (int i = 0; i < n; ++i) {
                df[i] = a[i];         // d_p^a on f
                df[n + i] = b[i];     // d_x^b on f
                dg[i] = b[i];         // d_p^b on g
                dg[n + i] = a[i];     // d_x^a on g
                abs_b += b[i];
            }
            const Complex pref = std::pow(Complex(0.0, -0.5 * hbar), order) *
                                 ((abs_b % 2 == 0) ? 1.0 : -1.0) / fact;
            if (pref != Complex(0.0, 0.0)) {
                const PolySymbol left = derive_multi(f, df);
                const PolySymbol right = derive_multi(g, dg);
                if (!left.is_zero() && !right.is_zero())
                    total += pref * multiply(left, right, 64);
            }
        }
        // odometer over counts, each digit bounded by kmax
        std::size_t pos = 0;
        while (pos < counts.size()) {
            if (++counts[pos] <= kmax) break;
            counts[pos] = 0;
            ++pos;
        }
        if (pos == counts.size()) break;
    }
    return total;
}

// Pair-partition (Isserlis) enumeration of a Gaussian moment of a monomial:
// every factor either takes the mean or pairs with a later factor through the
// covariance.
inline double isserlis_moment(const MultiIndex& alpha, const Eigen::VectorXd& mean,
                              const Eigen::MatrixXd& M) {
    std::vector<int> slots;
    for (std::size_t v = 0; v < alpha.size(); ++v)
        for (int k = 0; k < alpha[v]; ++k) slots.push_back(static_cast<int>(v));

    std::vector<char> used(slots.size(), 0);
    std::function<double(std::size_t)> go = [&](std::size_t first) -> double {
        while (first < slots.size() && used[first]) ++first;
        if (first == slots.size()) return 1.0;
        used[first] = 1;
        double sum = mean(slots[first]) * go(first + 1);
        for (std::size_t j = first + 1; j < slots.size(); ++j) {
            if (used[j]) continue;
            used[j] = 1;
            sum += M(slots[first], slots[j]) * go(first + 1);
            used[j] = 0;
        }
        used[first] = 0;
        return sum;
    };
    return go(0);
}

inline std::mt19937& rng() {
    static std::mt19937 gen(0x5c9a);
    return gen;
}

inline double uniform(double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    return dist(rng());
}

// Random symplectic matrix exp(J S) with S symmetric.
inline Eigen::MatrixXd random_symplectic(int n) {
    Eigen::MatrixXd S(2 * n, 2 * n);
    for (int i = 0; i < 2 * n; ++i)
        for (int j = i; j < 2 * n; ++j) S(i, j) = S(j, i) = uniform(-0.7, 0.7);
    const Eigen::MatrixXd J = standard_J(PhaseDim{n});
    return (J * S).exp();
}

// Random Gaussian state whose covariance dominates hbar/2, so the uncertainty
// condition holds with margin.
inline GaussianState random_state(int n, double hbar = 1.0) {
    Eigen::MatrixXd A(2 * n, 2 * n);
    for (int i = 0; i < 2 * n; ++i)
        for (int j = 0; j < 2 * n; ++j) A(i, j) = uniform(-0.5, 0.5);
    Eigen::MatrixXd M = A * A.transpose() +
                        (0.5 * hbar + uniform(0.05, 0.6)) *
                            Eigen::MatrixXd::Identity(2 * n, 2 * n);
    Eigen::VectorXd mean(2 * n);
    for (int i = 0; i < 2 * n; ++i) mean(i) = uniform(-1.0, 1.0);
    return GaussianState(mean, M, hbar);
}

inline PolySymbol random_poly(int nvars, int max_degree, bool real_coeffs = true) {
    PolySymbol out(nvars);
    std::uniform_int_distribution<int> deg(0, max_degree);
    const int nterms = 4 + static_cast<int>(uniform(0.0, 4.0));
    for (int t = 0; t < nterms; ++t) {
        MultiIndex alpha(nvars, 0);
        int budget = deg(rng());
        for (int v = 0; v < nvars && budget > 0; ++v) {
            std::uniform_int_distribution<int> part(0, budget);
            alpha[v] = part(rng());
            budget -= alpha[v];
        }
        const double re = uniform(-1.0, 1.0);
        const double im = real_coeffs ? 0.0 : uniform(-1.0, 1.0);
        out.add_term(alpha, Complex(re, im));
    }
    if (out.is_zero()) out.add_term(MultiIndex(nvars, 0), 1.0);
    return out;
}

} // namespace scqa::testing

#endif
