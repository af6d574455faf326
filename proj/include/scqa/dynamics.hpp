#ifndef SCQA_DYNAMICS_HPP
#define SCQA_DYNAMICS_HPP

#include <map>
#include <vector>

#include "scqa/phase_space.hpp"
#include "scqa/poly_symbol.hpp"
#include "scqa/wick.hpp"

namespace scqa {

// State-dependent quadratic coefficients: B = <hess H>, C = <grad H> - B <q>.
struct ScCoefficients {
    Eigen::MatrixXd B; // exactly symmetric
    Eigen::VectorXd C;
};

// Closure used when evaluating <grad H> and <hess H> over the Gaussian state.
// Wick keeps the full (terminating) moment series; WavePacket truncates it to
// zeroth order, i.e. evaluates the derivatives at the mean only.
enum class Closure { Wick, WavePacket };

struct IntegratorOptions {
    double step = 1e-3;
    double symplectic_tol = kSymplecticTol;
    double conservation_tol = 1e-6;
    int record_every = 1;
    std::vector<int> trace_orders = {2, 4}; // orders m of L_m to monitor
    Closure closure = Closure::Wick;
    bool monitor_conservation = true;
};

// Conserved-quantity snapshot of a covariance matrix: detM, the trace powers
// L_m = tr((M J^T)^m), and the coefficients of det(M - mu J) in mu.
struct InvariantsRecord {
    double detM = 0.0;
    std::map<int, double> L;
    Eigen::VectorXd dcoeffs;
};

struct TrajectorySample {
    double t = 0.0;
    SymplecticPropagator prop;
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    double energy = 0.0;
    InvariantsRecord invariants;
    double symplectic_residual = 0.0;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    double hbar = 1.0;

    const TrajectorySample& at_time(double t) const; // nearest sample
    GaussianState state_at(std::size_t index) const;
};

struct ConservationReport {
    double energy_drift = 0.0;
    double detM_drift = 0.0;
    std::map<int, double> L_drift;
    double dcoeff_drift = 0.0;
    double max_symplectic_residual = 0.0;

    double max_drift() const;
};

// Hamiltonian with its gradient and Hessian symbols precomputed, so the
// integrator does not redo the formal differentiation every stage.
class HamiltonianOps {
public:
    explicit HamiltonianOps(PolySymbol H, double hbar_for_grading = 1.0);

    const PolySymbol& symbol() const { return H_; }
    const SymbolVector& grad() const { return grad_; }
    const SymbolMatrix& hess() const { return hess_; }
    PhaseDim dim() const { return PhaseDim{H_.nvars() / 2}; }

private:
    PolySymbol H_;
    SymbolVector grad_;
    SymbolMatrix hess_;
};

ScCoefficients sc_coefficients(const HamiltonianOps& ops, const Eigen::VectorXd& mean,
                               const Eigen::MatrixXd& cov, Closure closure = Closure::Wick);
ScCoefficients sc_coefficients(const PolySymbol& H, const GaussianState& state,
                               Closure closure = Closure::Wick);

// Right-hand side of the propagator system at the current propagator:
// dLambda/dt = Lambda J B_t, dDelta/dt = Lambda J C_t.
std::pair<Eigen::MatrixXd, Eigen::VectorXd>
scqa_rhs(const PolySymbol& H, const SymplecticPropagator& P, const GaussianState& init);

// Fixed-step classical RK4 on (Lambda, Delta) from (E, 0), with per-sample
// symplectic and conservation monitoring. Aborts with SymplecticDrift or
// ConservationDrift naming the offending time.
Trajectory integrate(const PolySymbol& H, const GaussianState& state0, double t_end,
                     const IntegratorOptions& opts = {});

double energy(const PolySymbol& H, const GaussianState& state);

ConservationReport conservation_monitor(const Trajectory& traj);

InvariantsRecord universal_invariants(const Eigen::MatrixXd& M,
                                      const std::vector<int>& trace_orders = {2, 4});

// Left-hand side of the stationarity condition
// <grad H>^T J <q> - tr(J <hess H> M), evaluated by Wick closure.
double stationary_residual(const PolySymbol& H, const GaussianState& state);

struct StationaryOptions {
    double alpha = 0.5;     // damping of the fixed-point update
    double tol = 1e-10;     // convergence threshold on ||dM||_inf
    int max_iterations = 500;
};

// Damped fixed-point iteration at <q> = 0: M is driven to the ground-state
// covariance of the effective quadratic Hamiltonian 1/2 q^T <hess H>_M q.
// Throws NoConvergence when <hess H> fails to stay positive definite (no
// normalizable stationary Gaussian) or the iteration stalls.
GaussianState stationary_solve(const PolySymbol& H, const Eigen::MatrixXd& M_init,
                               double hbar, const StationaryOptions& opts = {});

// Ground-state covariance of the quadratic Hamiltonian 1/2 q^T B q (B
// symmetric positive definite): the stationary covariance with all symplectic
// eigenvalues equal to hbar/2.
Eigen::MatrixXd ground_state_cov(const Eigen::MatrixXd& B, double hbar);

// |d<A>/dt - (sigma(<grad A>, <grad H>) - tr(J <hess H> M <hess A>))| at an
// interior trajectory time; the derivative is a central finite difference on
// the sample grid, with h_fd snapped to a whole number of samples.
double ehrenfest_residual(const PolySymbol& A, const PolySymbol& H, const Trajectory& traj,
                          double t, double h_fd);

} // namespace scqa

#endif
