#include "scqa/fock_oracle.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <map>

namespace scqa {

namespace {

constexpr double kHermitianTol = 1e-10;
constexpr double kTailTol = 1e-10;

Eigen::MatrixXcd evolution_operator(const FockOperator& H, double t) {
    if ((H.mat - H.mat.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol)
        throw NonHermitian("oracle: Hamiltonian matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H.mat);
    Eigen::VectorXcd phases(H.dim);
    for (int k = 0; k < H.dim; ++k)
        phases(k) = std::exp(Complex(0.0, -es.eigenvalues()(k) * t / H.hbar));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

} // namespace

void FockState::validate() const {
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol)
        throw Error("FockState: density matrix is not Hermitian");
    if (std::abs(rho.trace() - Complex(1.0, 0.0)) > kHermitianTol)
        throw Error("FockState: trace differs from one");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kHermitianTol)
        throw Error("FockState: density matrix is not positive semidefinite");
}

Eigen::MatrixXcd ladder_lower(int d) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(d, d);
    for (int k = 1; k < d; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    return a;
}

FockOperator momentum_op(int d, double hbar) {
    const Eigen::MatrixXcd a = ladder_lower(d);
    return {d, Complex(0.0, std::sqrt(hbar / 2.0)) * (a.adjoint() - a), hbar};
}

FockOperator position_op(int d, double hbar) {
    const Eigen::MatrixXcd a = ladder_lower(d);
    return {d, std::sqrt(hbar / 2.0) * (a + a.adjoint()), hbar};
}

FockOperator weyl_quantize(const PolySymbol& A, int d, double hbar) {
    if (A.nvars() != 2)
        throw UnsupportedDim("weyl_quantize: only single-mode symbols are supported");
    if (A.is_graded()) throw Error("weyl_quantize: collapse the hbar grading first");
    if (d < 1) throw DimensionMismatch("weyl_quantize: dimension must be positive");

    const Eigen::MatrixXcd Q[2] = {momentum_op(d, hbar).mat, position_op(d, hbar).mat};

    std::map<MultiIndex, Eigen::MatrixXcd> memo;
    memo[{0, 0}] = Eigen::MatrixXcd::Identity(d, d);
    std::function<const Eigen::MatrixXcd&(const MultiIndex&)> build =
        [&](const MultiIndex& alpha) -> const Eigen::MatrixXcd& {
        auto it = memo.find(alpha);
        if (it != memo.end()) return it->second;
        const int mu = alpha[0] > 0 ? 0 : 1;
        MultiIndex beta = alpha;
        beta[mu] -= 1;
        const Eigen::MatrixXcd& inner = build(beta);
        Eigen::MatrixXcd W = 0.5 * (Q[mu] * inner + inner * Q[mu]);
        return memo.emplace(alpha, std::move(W)).first->second;
    };

    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d, d);
    for (const auto& [alpha, c] : A.terms()) out += c * build(alpha);
    return {d, std::move(out), hbar};
}

namespace {

Eigen::MatrixXcd displace(const Eigen::MatrixXcd& rho, Complex alpha, int d) {
    const Eigen::MatrixXcd a = ladder_lower(d);
    const Eigen::MatrixXcd gen = alpha * a.adjoint() - std::conj(alpha) * a;
    const Eigen::MatrixXcd D = gen.exp();
    return D * rho * D.adjoint();
}

} // namespace

FockState gaussian_to_fock(const GaussianState& state, int d) {
    if (state.dim().modes != 1)
        throw UnsupportedDim("gaussian_to_fock: only single-mode states are supported");
    const double hbar = state.hbar();
    const Eigen::MatrixXd& M = state.cov();
    const double tol = 1e-10 * std::max(1.0, M.cwiseAbs().maxCoeff());

    const int dbuild = d + std::max(16, d / 4);
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dbuild, dbuild);

    const bool diagonal = std::abs(M(0, 1)) <= tol;
    const double half = hbar / 2.0;
    if (diagonal && std::abs(M(0, 0) - half) <= tol && std::abs(M(1, 1) - half) <= tol) {
        rho(0, 0) = 1.0; // vacuum core, displaced below if needed
    } else if (diagonal && std::abs(M(0, 0) * M(1, 1) - half * half) <= tol * half &&
               M(0, 0) > 0.0) {
        // Squeezed vacuum: M = hbar/2 diag(e^{2r}, e^{-2r}).
        const double r = 0.5 * std::log(M(0, 0) / half);
        const Eigen::MatrixXcd a = ladder_lower(dbuild);
        const Eigen::MatrixXcd gen = 0.5 * r * (a * a - a.adjoint() * a.adjoint());
        const Eigen::MatrixXcd S = gen.exp();
        Eigen::VectorXcd ket = Eigen::VectorXcd::Zero(dbuild);
        ket(0) = 1.0;
        ket = S * ket;
        rho = ket * ket.adjoint();
    } else if (diagonal && std::abs(M(0, 0) - M(1, 1)) <= tol && M(0, 0) >= half - tol) {
        // Thermal oscillator: geometric occupation with nbar = nu/hbar - 1/2.
        const double nbar = M(0, 0) / hbar - 0.5;
        if (nbar <= tol) {
            rho(0, 0) = 1.0;
        } else {
            const double ratio = nbar / (1.0 + nbar);
            double w = 1.0 / (1.0 + nbar);
            for (int k = 0; k < dbuild; ++k) {
                rho(k, k) = w;
                w *= ratio;
            }
        }
    } else {
        throw UnsupportedCovariance("gaussian_to_fock: covariance is not coherent, "
                                    "squeezed-vacuum, or thermal");
    }

    if (state.mean().cwiseAbs().maxCoeff() > 0.0) {
        const Complex alpha(state.mean()(1) / std::sqrt(2.0 * hbar),
                            state.mean()(0) / std::sqrt(2.0 * hbar));
        rho = displace(rho, alpha, dbuild);
    }

    double tail = 0.0;
    for (int k = d; k < dbuild; ++k) tail += rho(k, k).real();
    if (tail > kTailTol)
        throw TruncationError("gaussian_to_fock: occupation mass " + num_str(tail) +
                              " beyond dimension " + std::to_string(d));

    FockState out{rho.topLeftCorner(d, d)};
    return out;
}

FockState oracle_evolve(const FockOperator& H, const FockState& rho, double t) {
    if (H.mat.rows() != rho.rho.rows())
        throw DimensionMismatch("oracle_evolve: operator and state dimensions differ");
    const Eigen::MatrixXcd U = evolution_operator(H, t);
    return {U * rho.rho * U.adjoint()};
}

Complex oracle_expect(const FockOperator& A, const FockState& rho) {
    if (A.mat.rows() != rho.rho.rows())
        throw DimensionMismatch("oracle_expect: operator and state dimensions differ");
    return (A.mat * rho.rho).trace();
}

Complex oracle_response_S(const FockOperator& H, const FockState& rho0,
                          const FockOperator& V, const std::vector<double>& times) {
    if (times.empty()) throw Error("oracle_response_S: no times given");
    if ((H.mat - H.mat.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol)
        throw NonHermitian("oracle_response_S: Hamiltonian matrix is not Hermitian");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H.mat);
    auto heisenberg_V = [&](double t) {
        Eigen::VectorXcd phases(H.dim);
        for (int k = 0; k < H.dim; ++k)
            phases(k) = std::exp(Complex(0.0, -es.eigenvalues()(k) * t / H.hbar));
        const Eigen::MatrixXcd U =
            es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
        return Eigen::MatrixXcd(U.adjoint() * V.mat * U);
    };

    Eigen::MatrixXcd nested = heisenberg_V(times[0]);
    for (std::size_t j = 1; j < times.size(); ++j) {
        const Eigen::MatrixXcd Vj = heisenberg_V(times[j]);
        nested = nested * Vj - Vj * nested;
    }
    return (rho0.rho * nested).trace();
}

Complex oracle_response_S_checked(const PolySymbol& H, const GaussianState& state,
                                  const PolySymbol& V, const std::vector<double>& times,
                                  int d) {
    auto build = [&](int dim) {
        const FockOperator Hop = weyl_quantize(H, dim, state.hbar());
        const FockOperator Vop = weyl_quantize(V, dim, state.hbar());
        const FockState rho0 = gaussian_to_fock(state, dim);
        return oracle_response_S(Hop, rho0, Vop, times);
    };
    const Complex coarse = build(d);
    const Complex fine = build(2 * d);
    if (std::abs(fine - coarse) > 1e-8)
        throw TruncationError("oracle_response_S: doubling d from " + std::to_string(d) +
                              " changes the value by " + num_str(std::abs(fine - coarse)));
    return fine;
}

TruncationReport truncation_study(const std::function<Complex(int)>& builder,
                                  const std::vector<int>& d_seq, double tol) {
    if (d_seq.size() < 2) throw Error("truncation_study: need at least two dimensions");
    for (std::size_t i = 0; i + 1 < d_seq.size(); ++i)
        if (d_seq[i] >= d_seq[i + 1])
            throw Error("truncation_study: dimensions must be increasing");

    TruncationReport report;
    report.dims = d_seq;
    for (int d : d_seq) report.values.push_back(builder(d));
    for (std::size_t i = 1; i < report.values.size(); ++i)
        report.diffs.push_back(std::abs(report.values[i] - report.values[i - 1]));

    // Converged once every remaining increment stays below tolerance.
    for (std::size_t i = 0; i < report.diffs.size(); ++i) {
        bool plateau = true;
        for (std::size_t j = i; j < report.diffs.size(); ++j)
            if (report.diffs[j] > tol) {
                plateau = false;
                break;
            }
        if (plateau) {
            report.converged = true;
            report.converged_at = report.dims[i + 1];
            break;
        }
    }
    return report;
}

} // namespace scqa
