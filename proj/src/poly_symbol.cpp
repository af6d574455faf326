#include "scqa/poly_symbol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace scqa {

namespace {

void merge_term(PolySymbol::TermMap& map, const MultiIndex& alpha, Complex c) {
    if (c == Complex(0.0, 0.0)) return;
    auto [it, inserted] = map.try_emplace(alpha, c);
    if (!inserted) {
        it->second += c;
        if (it->second == Complex(0.0, 0.0)) map.erase(it);
    }
}

int map_degree(const PolySymbol::TermMap& map) {
    int deg = 0;
    for (const auto& [alpha, c] : map) deg = std::max(deg, total_degree(alpha));
    return deg;
}

} // namespace

int total_degree(const MultiIndex& alpha) {
    return std::accumulate(alpha.begin(), alpha.end(), 0);
}

PolySymbol::PolySymbol(int nvars) : nvars_(nvars) {
    if (nvars < 1) throw DimensionMismatch("PolySymbol: need at least one variable");
}

PolySymbol PolySymbol::constant(int nvars, Complex c) {
    PolySymbol p(nvars);
    p.add_term(MultiIndex(nvars, 0), c);
    return p;
}

PolySymbol PolySymbol::variable(int nvars, int index, Complex coeff) {
    if (index < 0 || index >= nvars)
        throw DimensionMismatch("PolySymbol::variable: index out of range");
    PolySymbol p(nvars);
    MultiIndex alpha(nvars, 0);
    alpha[index] = 1;
    p.add_term(alpha, coeff);
    return p;
}

PolySymbol PolySymbol::monomial(const MultiIndex& alpha, Complex c) {
    PolySymbol p(static_cast<int>(alpha.size()));
    for (int e : alpha)
        if (e < 0) throw DimensionMismatch("PolySymbol::monomial: negative exponent");
    p.add_term(alpha, c);
    return p;
}

bool PolySymbol::is_zero() const {
    if (!terms_.empty()) return false;
    for (const auto& [g, map] : higher_)
        if (!map.empty()) return false;
    return true;
}

int PolySymbol::degree() const {
    int deg = map_degree(terms_);
    for (const auto& [g, map] : higher_) deg = std::max(deg, map_degree(map));
    return deg;
}

Complex PolySymbol::coeff(const MultiIndex& alpha) const {
    auto it = terms_.find(alpha);
    return it == terms_.end() ? Complex(0.0, 0.0) : it->second;
}

void PolySymbol::add_term(const MultiIndex& alpha, Complex c, int grade) {
    if (static_cast<int>(alpha.size()) != nvars_)
        throw DimensionMismatch("PolySymbol::add_term: exponent tuple has wrong length");
    if (grade < 0) throw Error("PolySymbol::add_term: negative hbar grade");
    if (grade == 0) {
        merge_term(terms_, alpha, c);
    } else {
        merge_term(higher_[grade], alpha, c);
        if (higher_[grade].empty()) higher_.erase(grade);
    }
}

PolySymbol& PolySymbol::operator+=(const PolySymbol& rhs) {
    if (nvars_ != rhs.nvars_)
        throw DimensionMismatch("PolySymbol: adding symbols over different variable sets");
    for (const auto& [alpha, c] : rhs.terms_) merge_term(terms_, alpha, c);
    for (const auto& [g, map] : rhs.higher_) {
        for (const auto& [alpha, c] : map) merge_term(higher_[g], alpha, c);
        if (higher_[g].empty()) higher_.erase(g);
    }
    return *this;
}

PolySymbol& PolySymbol::operator-=(const PolySymbol& rhs) {
    PolySymbol neg = rhs;
    neg *= Complex(-1.0, 0.0);
    return *this += neg;
}

PolySymbol& PolySymbol::operator*=(Complex c) {
    if (c == Complex(0.0, 0.0)) {
        terms_.clear();
        higher_.clear();
        return *this;
    }
    for (auto& [alpha, v] : terms_) v *= c;
    for (auto& [g, map] : higher_)
        for (auto& [alpha, v] : map) v *= c;
    return *this;
}

void PolySymbol::require_ungraded(const char* op) const {
    if (is_graded())
        throw Error(std::string(op) + ": symbol carries an hbar grading; collapse it "
                    "with semiclassical_eval first");
}

Complex PolySymbol::evaluate(const Eigen::VectorXcd& z) const {
    require_ungraded("PolySymbol::evaluate");
    if (z.size() != nvars_)
        throw DimensionMismatch("PolySymbol::evaluate: point has wrong dimension");
    Complex sum(0.0, 0.0);
    for (const auto& [alpha, c] : terms_) {
        Complex prod = c;
        for (int i = 0; i < nvars_; ++i)
            for (int k = 0; k < alpha[i]; ++k) prod *= z(i);
        sum += prod;
    }
    return sum;
}

Complex PolySymbol::evaluate(const Eigen::VectorXd& z) const {
    return evaluate(Eigen::VectorXcd(z.cast<Complex>()));
}

double PolySymbol::max_abs_coeff() const {
    double m = 0.0;
    for (const auto& [alpha, c] : terms_) m = std::max(m, std::abs(c));
    for (const auto& [g, map] : higher_)
        for (const auto& [alpha, c] : map) m = std::max(m, std::abs(c));
    return m;
}

bool PolySymbol::has_real_coeffs(double tol) const {
    for (const auto& [alpha, c] : terms_)
        if (std::abs(c.imag()) > tol) return false;
    for (const auto& [g, map] : higher_)
        for (const auto& [alpha, c] : map)
            if (std::abs(c.imag()) > tol) return false;
    return true;
}

double PolySymbol::distance(const PolySymbol& rhs) const {
    PolySymbol diff = *this;
    diff -= rhs;
    return diff.max_abs_coeff();
}

PolySymbol multiply(const PolySymbol& f, const PolySymbol& g, int degree_cap) {
    if (f.nvars() != g.nvars())
        throw DimensionMismatch("multiply: symbols over different variable sets");
    if (f.is_graded() || g.is_graded())
        throw Error("multiply: graded symbols must be collapsed first");
    PolySymbol out(f.nvars());
    MultiIndex alpha(f.nvars());
    for (const auto& [a, ca] : f.terms()) {
        for (const auto& [b, cb] : g.terms()) {
            int deg = 0;
            for (int i = 0; i < f.nvars(); ++i) {
                alpha[i] = a[i] + b[i];
                deg += alpha[i];
            }
            if (deg > degree_cap)
                throw DegreeCapExceeded("multiply: product degree " + std::to_string(deg) +
                                        " exceeds cap " + std::to_string(degree_cap));
            out.add_term(alpha, ca * cb);
        }
    }
    return out;
}

PolySymbol derivative(const PolySymbol& f, int var) {
    if (var < 0 || var >= f.nvars())
        throw DimensionMismatch("derivative: variable index out of range");
    PolySymbol out(f.nvars());
    auto derive_map = [&](const PolySymbol::TermMap& map, int grade) {
        for (const auto& [alpha, c] : map) {
            if (alpha[var] == 0) continue;
            MultiIndex beta = alpha;
            beta[var] -= 1;
            out.add_term(beta, c * static_cast<double>(alpha[var]), grade);
        }
    };
    derive_map(f.terms(), 0);
    for (const auto& [g, map] : f.higher_grades()) derive_map(map, g);
    return out;
}

SymbolVector gradient(const PolySymbol& A) {
    SymbolVector grad;
    grad.reserve(A.nvars());
    for (int i = 0; i < A.nvars(); ++i) grad.push_back(derivative(A, i));
    return grad;
}

SymbolMatrix hessian(const PolySymbol& A) {
    const int n = A.nvars();
    SymbolMatrix hess(n, std::vector<PolySymbol>(n, PolySymbol(n)));
    SymbolVector grad = gradient(A);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            PolySymbol d = derivative(grad[i], j);
            hess[i][j] = d;
            if (i != j) hess[j][i] = d;
        }
    }
    return hess;
}

PolySymbol taylor_shift(const PolySymbol& A, const Eigen::VectorXd& point) {
    if (point.size() != A.nvars())
        throw DimensionMismatch("taylor_shift: point has wrong dimension");

    // Expand each z_i^a = (point_i + dz_i)^a binomially, one variable at a
    // time, so the result is the same polynomial expressed in dz = z - point.
    auto shift_map = [&](const PolySymbol::TermMap& map, int grade, PolySymbol& out) {
        for (const auto& [alpha, c] : map) {
            PolySymbol::TermMap partial;
            partial.emplace(MultiIndex(A.nvars(), 0), c);
            for (int i = 0; i < A.nvars(); ++i) {
                if (alpha[i] == 0) continue;
                PolySymbol::TermMap next;
                // Binomial coefficients for (point_i + dz_i)^alpha_i.
                std::vector<double> binom(alpha[i] + 1, 1.0);
                for (int k = 1; k <= alpha[i]; ++k)
                    binom[k] = binom[k - 1] * static_cast<double>(alpha[i] - k + 1) / k;
                for (const auto& [beta, cb] : partial) {
                    double p_pow = 1.0;
                    for (int k = alpha[i]; k >= 0; --k) {
                        MultiIndex gamma = beta;
                        gamma[i] += k;
                        merge_term(next, gamma, cb * binom[k] * p_pow);
                        p_pow *= point(i);
                    }
                }
                partial = std::move(next);
            }
            for (const auto& [beta, cb] : partial) out.add_term(beta, cb, grade);
        }
    };

    PolySymbol out(A.nvars());
    shift_map(A.terms(), 0, out);
    for (const auto& [g, map] : A.higher_grades()) shift_map(map, g, out);
    return out;
}

PolySymbol semiclassical_eval(const PolySymbol& A, double hbar) {
    PolySymbol out(A.nvars());
    for (const auto& [alpha, c] : A.terms()) out.add_term(alpha, c);
    double factorial = 1.0;
    int last = 0;
    for (const auto& [g, map] : A.higher_grades()) {
        for (int k = last + 1; k <= g; ++k) factorial *= k;
        last = g;
        const double weight = std::pow(hbar, g) / factorial;
        for (const auto& [alpha, c] : map) out.add_term(alpha, c * weight);
    }
    return out;
}

PolySymbol classical_part(const PolySymbol& A) {
    PolySymbol out(A.nvars());
    for (const auto& [alpha, c] : A.terms()) out.add_term(alpha, c);
    return out;
}

PolySymbol lift_to_slot(const PolySymbol& A, int total_vars, int offset) {
    if (offset < 0 || offset + A.nvars() > total_vars)
        throw DimensionMismatch("lift_to_slot: slot does not fit in variable set");
    if (A.is_graded()) throw Error("lift_to_slot: collapse the hbar grading first");
    PolySymbol out(total_vars);
    for (const auto& [alpha, c] : A.terms()) {
        MultiIndex beta(total_vars, 0);
        for (int i = 0; i < A.nvars(); ++i) beta[offset + i] = alpha[i];
        out.add_term(beta, c);
    }
    return out;
}

} // namespace scqa
