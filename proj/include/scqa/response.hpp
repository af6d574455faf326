#ifndef SCQA_RESPONSE_HPP
#define SCQA_RESPONSE_HPP

#include <optional>
#include <vector>

#include "scqa/dynamics.hpp"
#include "scqa/phase_space.hpp"
#include "scqa/poly_symbol.hpp"

namespace scqa {

// One term of the nested-commutator expansion: a permutation sigma of
// {1..N+1} with sigma(1) > ... > sigma(k) = 1 < sigma(k+1) < ... and sign
// (-1)^(k-1).
struct PermutationTerm {
    std::vector<int> sigma; // 1-based values
    int sign = 1;
    int k = 1; // length of the descending prefix
};

// All 2^N terms; the count at fixed k is C(N, k-1).
std::vector<PermutationTerm> permutation_terms(int N);

// Propagators of the equilibrium evolution, one per waiting time (descending).
struct WaitingTimePropagators {
    std::vector<double> times;
    std::vector<SymplecticPropagator> props;
    Eigen::MatrixXd B_frozen;
    Eigen::VectorXd C_frozen;
};

struct WaitingOptions {
    bool cross_check = false;   // re-derive each propagator with the ODE integrator
    double check_tol = 1e-8;
    double ode_step = 1e-3;
    double stationary_tol = 1e-8;
};

// Since B, C are frozen at their equilibrium values, Lambda(tau) is the
// matrix exponential exp(tau J B) and Delta(tau) its integrated drive.
// Throws NotStationary when the equilibrium residual test fails.
WaitingTimePropagators waiting_propagators(const PolySymbol& H, const GaussianState& eq_state,
                                           const std::vector<double>& times,
                                           const WaitingOptions& opts = {});

// All (N+1)^2 blocks Sigma_jk = Lambda_j^{-1} Sigma_0 (Lambda_k^{-1})^T with
// Sigma_0 = M_0 + (i hbar/2) J^T.
struct SigmaBlocks {
    Eigen::MatrixXcd sigma0;
    std::vector<std::vector<Eigen::MatrixXcd>> blocks;
};

SigmaBlocks sigma_blocks(const WaitingTimePropagators& props, const Eigen::MatrixXd& M0,
                         double hbar);

enum class InteractionKind { Polynomial, Exponential };

// Inputs of an order-N response evaluation. In polynomial mode the same
// Hermitian symbol V acts at every time; in exponential mode each time j
// carries its own vector a_j with V_j = exp(a_j^T q).
struct ResponseRequest {
    int order = 1;
    std::vector<double> times; // tau_1 >= ... >= tau_{N+1} >= 0
    InteractionKind kind = InteractionKind::Polynomial;
    PolySymbol interaction;                  // polynomial mode
    std::vector<Eigen::VectorXd> exp_vectors; // exponential mode, one per time
    PolySymbol hamiltonian;
    GaussianState equilibrium;

    void validate() const;
};

// Single multi-time correlation R for one permutation: the terminating
// exponential differential operator of the Sigma blocks applied to the
// product of interaction symbols at the evolved means.
Complex gaussian_response_R(const PermutationTerm& perm, const ResponseRequest& req,
                            const WaitingTimePropagators& props, const SigmaBlocks& blocks);

// Closed form of R for exponential interactions, in slot order: a[j] acts
// under the propagator props_slots[j].
Complex exponential_response(const std::vector<Eigen::VectorXd>& a,
                             const std::vector<SymplecticPropagator>& props_slots,
                             const GaussianState& eq_state);

// The phase exponent of the closed form above, so that
// exponential_response = exp(phase) * char_samples.
Complex exponential_phase(const std::vector<Eigen::VectorXd>& a,
                          const std::vector<SymplecticPropagator>& props_slots,
                          const GaussianState& eq_state);

// chi_0 evaluated at sum_j (Lambda_j^{-1})^T a_j: the characteristic-function
// sample behind exponential_response, with the phase factor divided out.
Complex char_samples(const ResponseRequest& req, const WaitingTimePropagators& props,
                     const std::vector<Eigen::VectorXd>& a);

// Signed sum of R over the permutation expansion; equals the nested
// commutator trace. For Hermitian polynomial V, i^N S is real.
Complex response_S(const ResponseRequest& req);
Complex response_S(const ResponseRequest& req, const WaitingTimePropagators& props);

// Field driving the polarization: either samples on a uniform grid or a list
// of impulsive pulses (time, area).
struct FieldProfile {
    struct Impulse {
        double time;
        double area;
    };
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<double> values;   // sampled mode when non-empty
    std::vector<Impulse> impulses; // impulsive mode when non-empty

    bool sampled() const { return !values.empty(); }
};

// N-th order polarization P(tau_1) on the output grid: iterated trapezoid
// quadrature over the ordered time simplex, or exact pulse-time evaluation in
// impulsive mode.
std::vector<double> polarization(const ResponseRequest& req_template, const FieldProfile& field,
                                 const std::vector<double>& t_grid, int threads = 1);

struct ClassicalLimitReport {
    std::vector<double> hbars;
    std::vector<Complex> values;
    double fitted_order = 0.0;   // leading power of hbar, least-squares fit
    Complex limit_estimate{0.0, 0.0}; // S / hbar^m at the smallest hbar
    int limit_power = 0;              // the m used above
    bool bounded = false;
};

// Evaluates response_S along a decreasing hbar sequence, holding the state
// covariance fixed while Sigma_0 keeps its mandated i hbar/2 part, and fits
// the leading power of hbar. Divergence is reported, not thrown.
ClassicalLimitReport classical_limit_probe(const ResponseRequest& req,
                                           const std::vector<double>& hbar_seq);

} // namespace scqa

#endif
