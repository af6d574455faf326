#include "scqa/dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace scqa {

namespace {

constexpr double kImagTol = 1e-10;

double real_checked(Complex v, const char* what) {
    if (std::abs(v.imag()) > kImagTol * std::max(1.0, std::abs(v.real())))
        throw NonRealHamiltonian(std::string(what) + ": imaginary residue " +
                                 num_str(v.imag()));
    return v.real();
}

// |now - ref| / |ref|, falling back to the absolute difference when the
// reference value is numerically zero (odd trace orders, odd det coefficients).
double rel_drift(double now, double ref) {
    const double denom = std::abs(ref) > 1e-12 ? std::abs(ref) : 1.0;
    return std::abs(now - ref) / denom;
}

} // namespace

const TrajectorySample& Trajectory::at_time(double t) const {
    if (samples.empty()) throw OutOfRange("Trajectory::at_time: empty trajectory");
    std::size_t best = 0;
    double dist = std::abs(samples[0].t - t);
    for (std::size_t i = 1; i < samples.size(); ++i) {
        const double d = std::abs(samples[i].t - t);
        if (d < dist) {
            dist = d;
            best = i;
        }
    }
    return samples[best];
}

GaussianState Trajectory::state_at(std::size_t index) const {
    if (index >= samples.size()) throw OutOfRange("Trajectory::state_at: index out of range");
    return GaussianState(samples[index].mean, samples[index].cov, hbar);
}

double ConservationReport::max_drift() const {
    double m = std::max(energy_drift, detM_drift);
    for (const auto& [order, d] : L_drift) m = std::max(m, d);
    return std::max(m, dcoeff_drift);
}

HamiltonianOps::HamiltonianOps(PolySymbol H, double hbar_for_grading)
    : H_(H.is_graded() ? semiclassical_eval(H, hbar_for_grading) : std::move(H)) {
    if (H_.nvars() % 2 != 0)
        throw DimensionMismatch("HamiltonianOps: phase-space symbols need 2n variables");
    if (!H_.has_real_coeffs(kImagTol))
        throw NonRealHamiltonian("HamiltonianOps: Hamiltonian symbol has complex coefficients");
    grad_ = gradient(H_);
    hess_ = hessian(H_);
}

ScCoefficients sc_coefficients(const HamiltonianOps& ops, const Eigen::VectorXd& mean,
                               const Eigen::MatrixXd& cov, Closure closure) {
    const int vars = ops.symbol().nvars();
    if (mean.size() != vars || cov.rows() != vars)
        throw DimensionMismatch("sc_coefficients: state has wrong dimension");

    const Eigen::MatrixXcd G = closure == Closure::Wick
                                   ? Eigen::MatrixXcd(cov.cast<Complex>())
                                   : Eigen::MatrixXcd(Eigen::MatrixXcd::Zero(vars, vars));
    const Eigen::VectorXcd z = mean.cast<Complex>();

    Eigen::MatrixXd B(vars, vars);
    for (int i = 0; i < vars; ++i)
        for (int j = i; j < vars; ++j) {
            const double v = real_checked(wick_apply(ops.hess()[i][j], G, z),
                                          "sc_coefficients (hessian)");
            B(i, j) = v;
            B(j, i) = v;
        }

    Eigen::VectorXd gradH(vars);
    for (int i = 0; i < vars; ++i)
        gradH(i) = real_checked(wick_apply(ops.grad()[i], G, z), "sc_coefficients (gradient)");

    return {B, gradH - B * mean};
}

ScCoefficients sc_coefficients(const PolySymbol& H, const GaussianState& state,
                               Closure closure) {
    HamiltonianOps ops(H, state.hbar());
    return sc_coefficients(ops, state.mean(), state.cov(), closure);
}

namespace {

struct RhsContext {
    const HamiltonianOps& ops;
    const GaussianState& init;
    const Eigen::MatrixXd J;
    Closure closure;
};

std::pair<Eigen::MatrixXd, Eigen::VectorXd> rhs_eval(const RhsContext& ctx,
                                                     const Eigen::MatrixXd& lambda,
                                                     const Eigen::VectorXd& delta) {
    // Runge-Kutta stage matrices sit O(h^2) off the symplectic group, so the
    // J Lambda^T J^T map is applied here without the residual gate; accepted
    // steps are checked against the tolerance by the caller.
    const Eigen::MatrixXd inv = ctx.J * lambda.transpose() * ctx.J.transpose();
    const Eigen::VectorXd mean = inv * (ctx.init.mean() - delta);
    Eigen::MatrixXd cov = inv * ctx.init.cov() * inv.transpose();
    cov = ((cov + cov.transpose()) / 2.0).eval();
    const ScCoefficients sc = sc_coefficients(ctx.ops, mean, cov, ctx.closure);
    return {lambda * ctx.J * sc.B, lambda * ctx.J * sc.C};
}

} // namespace

std::pair<Eigen::MatrixXd, Eigen::VectorXd>
scqa_rhs(const PolySymbol& H, const SymplecticPropagator& P, const GaussianState& init) {
    const double residual = symplectic_check(P.lambda);
    if (residual > kSymplecticTol)
        throw SymplecticDrift("scqa_rhs: residual " + num_str(residual) +
                              " exceeds tolerance");
    HamiltonianOps ops(H, init.hbar());
    RhsContext ctx{ops, init, standard_J(init.dim()), Closure::Wick};
    return rhs_eval(ctx, P.lambda, P.delta);
}

Trajectory integrate(const PolySymbol& H, const GaussianState& state0, double t_end,
                     const IntegratorOptions& opts) {
    if (t_end <= 0.0) throw Error("integrate: t_end must be positive");
    if (opts.step <= 0.0) throw Error("integrate: step must be positive");

    HamiltonianOps ops(H, state0.hbar());
    if (ops.symbol().nvars() != state0.mean().size())
        throw DimensionMismatch("integrate: Hamiltonian and state dimensions differ");
    const PhaseDim dim = state0.dim();
    RhsContext ctx{ops, state0, standard_J(dim), opts.closure};

    const long nsteps = static_cast<long>(std::ceil(t_end / opts.step - 1e-12));

    Trajectory traj;
    traj.hbar = state0.hbar();
    traj.samples.reserve(static_cast<std::size_t>(nsteps / std::max(1, opts.record_every)) + 2);

    Eigen::MatrixXd lambda = Eigen::MatrixXd::Identity(dim.vars(), dim.vars());
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(dim.vars());
    double t = 0.0;

    InvariantsRecord ref_inv;
    double ref_energy = 0.0;

    auto record = [&](long step_index) {
        TrajectorySample s;
        s.t = t;
        s.prop = {lambda, delta, t};
        const Eigen::MatrixXd inv = symplectic_inverse(lambda, opts.symplectic_tol);
        s.mean = inv * (state0.mean() - delta);
        s.cov = ((inv * state0.cov() * inv.transpose() +
                  (inv * state0.cov() * inv.transpose()).transpose()) /
                 2.0)
                    .eval();
        s.energy = real_checked(
            wick_apply(ops.symbol(), s.cov.cast<Complex>(), s.mean.cast<Complex>()),
            "integrate (energy)");
        s.invariants = universal_invariants(s.cov, opts.trace_orders);
        s.symplectic_residual = symplectic_check(lambda);

        if (step_index == 0) {
            ref_energy = s.energy;
            ref_inv = s.invariants;
        } else if (opts.monitor_conservation) {
            double drift = rel_drift(s.energy, ref_energy);
            drift = std::max(drift, rel_drift(s.invariants.detM, ref_inv.detM));
            for (const auto& [m, v] : s.invariants.L)
                drift = std::max(drift, rel_drift(v, ref_inv.L.at(m)));
            for (int i = 0; i < s.invariants.dcoeffs.size(); ++i)
                drift = std::max(drift, rel_drift(s.invariants.dcoeffs(i), ref_inv.dcoeffs(i)));
            if (drift > opts.conservation_tol)
                throw ConservationDrift("integrate: conserved-quantity drift " +
                                        num_str(drift) + " at t = " + num_str(t));
        }
        traj.samples.push_back(std::move(s));
    };

    record(0);
    for (long step = 0; step < nsteps; ++step) {
        const double h = std::min(opts.step, t_end - t);

        const auto [k1L, k1D] = rhs_eval(ctx, lambda, delta);
        const auto [k2L, k2D] = rhs_eval(ctx, lambda + 0.5 * h * k1L, delta + 0.5 * h * k1D);
        const auto [k3L, k3D] = rhs_eval(ctx, lambda + 0.5 * h * k2L, delta + 0.5 * h * k2D);
        const auto [k4L, k4D] = rhs_eval(ctx, lambda + h * k3L, delta + h * k3D);

        lambda += (h / 6.0) * (k1L + 2.0 * k2L + 2.0 * k3L + k4L);
        delta += (h / 6.0) * (k1D + 2.0 * k2D + 2.0 * k3D + k4D);
        t += h;

        const double residual = symplectic_check(lambda);
        if (residual > opts.symplectic_tol)
            throw SymplecticDrift("integrate: symplectic residual " + num_str(residual) +
                                  " at t = " + num_str(t));

        const bool last = step + 1 == nsteps;
        if (last || (step + 1) % std::max(1, opts.record_every) == 0) record(step + 1);
    }
    return traj;
}

double energy(const PolySymbol& H, const GaussianState& state) {
    return real_checked(wick_expectation(H, state), "energy");
}

ConservationReport conservation_monitor(const Trajectory& traj) {
    if (traj.samples.empty()) throw OutOfRange("conservation_monitor: empty trajectory");
    const TrajectorySample& ref = traj.samples.front();
    ConservationReport report;
    for (const auto& [m, v] : ref.invariants.L) report.L_drift[m] = 0.0;
    for (const TrajectorySample& s : traj.samples) {
        report.energy_drift = std::max(report.energy_drift, rel_drift(s.energy, ref.energy));
        report.detM_drift =
            std::max(report.detM_drift, rel_drift(s.invariants.detM, ref.invariants.detM));
        for (const auto& [m, v] : s.invariants.L)
            report.L_drift[m] = std::max(report.L_drift[m], rel_drift(v, ref.invariants.L.at(m)));
        for (int i = 0; i < s.invariants.dcoeffs.size(); ++i)
            report.dcoeff_drift = std::max(
                report.dcoeff_drift, rel_drift(s.invariants.dcoeffs(i), ref.invariants.dcoeffs(i)));
        report.max_symplectic_residual =
            std::max(report.max_symplectic_residual, s.symplectic_residual);
    }
    return report;
}

InvariantsRecord universal_invariants(const Eigen::MatrixXd& M,
                                      const std::vector<int>& trace_orders) {
    if (M.rows() != M.cols() || M.rows() % 2 != 0)
        throw DimensionMismatch("universal_invariants: covariance must be square, even dim");
    const int vars = static_cast<int>(M.rows());
    const int n = vars / 2;
    const Eigen::MatrixXd J = standard_J(PhaseDim{n});

    InvariantsRecord rec;
    rec.detM = M.determinant();

    const Eigen::MatrixXd MJt = M * J.transpose();
    for (int m : trace_orders) {
        Eigen::MatrixXd power = Eigen::MatrixXd::Identity(vars, vars);
        for (int k = 0; k < m; ++k) power = power * MJt;
        rec.L[m] = power.trace();
    }

    // det(M - mu J) is a degree-2n polynomial in mu; sample it at the 2n+1
    // integer nodes centred at zero and solve the Vandermonde system.
    const int ncoeff = vars + 1;
    Eigen::MatrixXd V(ncoeff, ncoeff);
    Eigen::VectorXd y(ncoeff);
    for (int i = 0; i < ncoeff; ++i) {
        const double mu = static_cast<double>(i - n);
        y(i) = (M - mu * J).determinant();
        double p = 1.0;
        for (int j = 0; j < ncoeff; ++j) {
            V(i, j) = p;
            p *= mu;
        }
    }
    rec.dcoeffs = V.colPivHouseholderQr().solve(y);
    return rec;
}

double stationary_residual(const PolySymbol& H, const GaussianState& state) {
    HamiltonianOps ops(H, state.hbar());
    const Eigen::MatrixXcd G = state.cov().cast<Complex>();
    const Eigen::VectorXcd z = state.mean().cast<Complex>();
    const int vars = ops.symbol().nvars();

    Eigen::VectorXd gradH(vars);
    for (int i = 0; i < vars; ++i)
        gradH(i) = real_checked(wick_apply(ops.grad()[i], G, z), "stationary_residual");
    Eigen::MatrixXd hessH(vars, vars);
    for (int i = 0; i < vars; ++i)
        for (int j = i; j < vars; ++j) {
            const double v =
                real_checked(wick_apply(ops.hess()[i][j], G, z), "stationary_residual");
            hessH(i, j) = v;
            hessH(j, i) = v;
        }

    const Eigen::MatrixXd J = standard_J(state.dim());
    return gradH.dot(J * state.mean()) - (J * hessH * state.cov()).trace();
}

Eigen::MatrixXd ground_state_cov(const Eigen::MatrixXd& B, double hbar) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
    if (es.eigenvalues().minCoeff() <= 1e-12)
        throw NoConvergence("ground_state_cov: effective Hessian is not positive definite");
    const Eigen::MatrixXd sqrtB = es.operatorSqrt();
    const Eigen::MatrixXd invSqrtB = es.operatorInverseSqrt();

    const Eigen::MatrixXd J = standard_J(PhaseDim{static_cast<int>(B.rows()) / 2});
    const Eigen::MatrixXd K = sqrtB * J * sqrtB; // antisymmetric
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ks(K.transpose() * K);
    const Eigen::MatrixXd absK = ks.operatorSqrt(); // sqrt(-K^2)

    Eigen::MatrixXd M = 0.5 * hbar * invSqrtB * absK * invSqrtB;
    return ((M + M.transpose()) / 2.0).eval();
}

GaussianState stationary_solve(const PolySymbol& H, const Eigen::MatrixXd& M_init,
                               double hbar, const StationaryOptions& opts) {
    HamiltonianOps ops(H, hbar);
    const int vars = ops.symbol().nvars();
    if (M_init.rows() != vars || M_init.cols() != vars)
        throw DimensionMismatch("stationary_solve: M_init has wrong shape");
    const Eigen::VectorXd mean = Eigen::VectorXd::Zero(vars);

    Eigen::MatrixXd M = ((M_init + M_init.transpose()) / 2.0).eval();
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        const ScCoefficients sc = sc_coefficients(ops, mean, M, Closure::Wick);
        const Eigen::MatrixXd target = ground_state_cov(sc.B, hbar);
        const Eigen::MatrixXd next = (1.0 - opts.alpha) * M + opts.alpha * target;
        const double change = (next - M).cwiseAbs().maxCoeff();
        M = next;
        if (change < opts.tol) {
            GaussianState state(mean, M, hbar);
            const double residual = stationary_residual(ops.symbol(), state);
            if (std::abs(residual) > 1e-8)
                throw NoConvergence("stationary_solve: fixed point found but residual " +
                                    num_str(residual) + " exceeds 1e-8");
            return state;
        }
    }
    throw NoConvergence("stationary_solve: no fixed point after " +
                        std::to_string(opts.max_iterations) + " iterations");
}

double ehrenfest_residual(const PolySymbol& A, const PolySymbol& H, const Trajectory& traj,
                          double t, double h_fd) {
    if (traj.samples.size() < 3)
        throw OutOfRange("ehrenfest_residual: trajectory too short");
    if (h_fd <= 0.0) throw Error("ehrenfest_residual: h_fd must be positive");

    const double dt = traj.samples[1].t - traj.samples[0].t;
    std::size_t center = 0;
    double best = std::abs(traj.samples[0].t - t);
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
        const double d = std::abs(traj.samples[i].t - t);
        if (d < best) {
            best = d;
            center = i;
        }
    }
    const long k = std::max(1L, std::lround(h_fd / dt));
    if (center < static_cast<std::size_t>(k) || center + k >= traj.samples.size())
        throw OutOfRange("ehrenfest_residual: t too close to the trajectory boundary");

    const GaussianState before = traj.state_at(center - k);
    const GaussianState after = traj.state_at(center + k);
    const double h = traj.samples[center + k].t - traj.samples[center].t;
    const double lhs = (real_checked(wick_expectation(A, after), "ehrenfest_residual (lhs)") -
                        real_checked(wick_expectation(A, before), "ehrenfest_residual (lhs)")) /
                       (2.0 * h);

    const TrajectorySample& s = traj.samples[center];
    const GaussianState here = traj.state_at(center);
    HamiltonianOps opsA(A, traj.hbar);
    HamiltonianOps opsH(H, traj.hbar);
    const int vars = s.mean.size();
    const Eigen::MatrixXcd G = s.cov.cast<Complex>();
    const Eigen::VectorXcd z = s.mean.cast<Complex>();

    Eigen::VectorXd gradA(vars), gradH(vars);
    Eigen::MatrixXd hessA(vars, vars), hessH(vars, vars);
    for (int i = 0; i < vars; ++i) {
        gradA(i) = real_checked(wick_apply(opsA.grad()[i], G, z), "ehrenfest_residual");
        gradH(i) = real_checked(wick_apply(opsH.grad()[i], G, z), "ehrenfest_residual");
        for (int j = i; j < vars; ++j) {
            hessA(i, j) = hessA(j, i) =
                real_checked(wick_apply(opsA.hess()[i][j], G, z), "ehrenfest_residual");
            hessH(i, j) = hessH(j, i) =
                real_checked(wick_apply(opsH.hess()[i][j], G, z), "ehrenfest_residual");
        }
    }

    const Eigen::MatrixXd J = standard_J(here.dim());
    const double rhs = gradH.dot(J * gradA) - (J * hessH * s.cov * hessA).trace();
    return std::abs(lhs - rhs);
}

} // namespace scqa
