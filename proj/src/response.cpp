#include "scqa/response.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace scqa {

namespace {

Complex symplectic_form(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b,
                        const Eigen::MatrixXd& J) {
    // sigma(a, b) = b^T J a
    return (b.transpose() * J.cast<Complex>() * a)(0, 0);
}

// Frozen-coefficient propagator: Lambda(tau) = exp(tau J B) and
// Delta(tau) = (int_0^tau Lambda) J C via the augmented exponential.
SymplecticPropagator equilibrium_propagator(const Eigen::MatrixXd& B, const Eigen::VectorXd& C,
                                            double tau) {
    const int vars = static_cast<int>(B.rows());
    const Eigen::MatrixXd J = standard_J(PhaseDim{vars / 2});
    const Eigen::MatrixXd A = J * B;

    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(2 * vars, 2 * vars);
    aug.topLeftCorner(vars, vars) = A;
    aug.topRightCorner(vars, vars) = Eigen::MatrixXd::Identity(vars, vars);
    const Eigen::MatrixXd expo = (tau * aug).exp();

    SymplecticPropagator P;
    P.lambda = expo.topLeftCorner(vars, vars);
    P.delta = expo.topRightCorner(vars, vars) * (J * C);
    P.t = tau;
    return P;
}

struct FrozenCoefficients {
    Eigen::MatrixXd B;
    Eigen::VectorXd C;
};

FrozenCoefficients frozen_coefficients(const PolySymbol& H, const GaussianState& eq_state,
                                       double stationary_tol) {
    const double residual = stationary_residual(H, eq_state);
    if (std::abs(residual) > stationary_tol)
        throw NotStationary("waiting_propagators: equilibrium residual " +
                            num_str(residual) + " exceeds " +
                            num_str(stationary_tol));
    const ScCoefficients sc = sc_coefficients(H, eq_state);
    return {sc.B, sc.C};
}

PolySymbol interaction_symbol(const ResponseRequest& req) {
    PolySymbol V = req.interaction.is_graded()
                       ? semiclassical_eval(req.interaction, req.equilibrium.hbar())
                       : req.interaction;
    if (!V.has_real_coeffs(1e-10))
        throw Error("ResponseRequest: polynomial interaction must have real coefficients");
    return V;
}

} // namespace

std::vector<PermutationTerm> permutation_terms(int N) {
    if (N < 1) throw Error("permutation_terms: order must be at least 1");
    const int m = N + 1;

    // A term is fixed by the subset of {2..N+1} forming the descending
    // prefix in front of the pivot value 1; the rest ascends behind it.
    std::vector<PermutationTerm> terms;
    terms.reserve(1u << N);
    for (int k = 1; k <= m; ++k) {
        // enumerate (k-1)-subsets of {2..m} in lexicographic order
        std::vector<int> idx(k - 1);
        for (int i = 0; i < k - 1; ++i) idx[i] = i;
        const int pool = m - 1;
        while (true) {
            PermutationTerm term;
            term.k = k;
            term.sign = (k - 1) % 2 == 0 ? 1 : -1;
            term.sigma.reserve(m);
            for (int i = k - 2; i >= 0; --i) term.sigma.push_back(idx[i] + 2);
            term.sigma.push_back(1);
            for (int v = 2; v <= m; ++v)
                if (std::find(term.sigma.begin(), term.sigma.end(), v) == term.sigma.end())
                    term.sigma.push_back(v);
            terms.push_back(std::move(term));

            if (k == 1) break;
            int i = k - 2;
            while (i >= 0 && idx[i] == pool - (k - 1) + i) --i;
            if (i < 0) break;
            ++idx[i];
            for (int j = i + 1; j < k - 1; ++j) idx[j] = idx[j - 1] + 1;
        }
    }
    return terms;
}

WaitingTimePropagators waiting_propagators(const PolySymbol& H, const GaussianState& eq_state,
                                           const std::vector<double>& times,
                                           const WaitingOptions& opts) {
    if (times.empty()) throw Error("waiting_propagators: no waiting times given");
    for (std::size_t i = 0; i + 1 < times.size(); ++i)
        if (times[i] < times[i + 1] - 1e-12)
            throw Error("waiting_propagators: times must be non-increasing");
    if (times.back() < -1e-12)
        throw Error("waiting_propagators: times must be non-negative");

    const FrozenCoefficients fc = frozen_coefficients(H, eq_state, opts.stationary_tol);

    WaitingTimePropagators out;
    out.times = times;
    out.B_frozen = fc.B;
    out.C_frozen = fc.C;
    out.props.reserve(times.size());
    for (double tau : times) out.props.push_back(equilibrium_propagator(fc.B, fc.C, tau));

    if (opts.cross_check) {
        IntegratorOptions iopts;
        iopts.step = opts.ode_step;
        iopts.record_every = 1 << 20; // endpoints suffice for the check
        for (std::size_t i = 0; i < times.size(); ++i) {
            if (times[i] <= 0.0) continue;
            const Trajectory traj = integrate(H, eq_state, times[i], iopts);
            const SymplecticPropagator& ode = traj.samples.back().prop;
            const double err =
                std::max((ode.lambda - out.props[i].lambda).cwiseAbs().maxCoeff(),
                         (ode.delta - out.props[i].delta).cwiseAbs().maxCoeff());
            if (err > opts.check_tol)
                throw Error("waiting_propagators: ODE cross-check failed at tau = " +
                            num_str(times[i]) + " (error " + num_str(err) + ")");
        }
    }
    return out;
}

SigmaBlocks sigma_blocks(const WaitingTimePropagators& props, const Eigen::MatrixXd& M0,
                         double hbar) {
    const std::size_t m = props.props.size();
    if (m == 0) throw Error("sigma_blocks: no propagators");
    const int vars = static_cast<int>(M0.rows());
    const Eigen::MatrixXd J = standard_J(PhaseDim{vars / 2});

    SigmaBlocks out;
    out.sigma0 = M0.cast<Complex>() +
                 Complex(0.0, 0.5 * hbar) * J.transpose().cast<Complex>();

    std::vector<Eigen::MatrixXcd> inv(m);
    for (std::size_t j = 0; j < m; ++j)
        inv[j] = symplectic_inverse(props.props[j]).cast<Complex>();

    out.blocks.assign(m, std::vector<Eigen::MatrixXcd>(m));
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t k = 0; k < m; ++k)
            out.blocks[j][k] = inv[j] * out.sigma0 * inv[k].transpose();
    return out;
}

void ResponseRequest::validate() const {
    if (order < 1) throw Error("ResponseRequest: order must be at least 1");
    if (static_cast<int>(times.size()) != order + 1)
        throw Error("ResponseRequest: need order + 1 waiting times");
    for (std::size_t i = 0; i + 1 < times.size(); ++i)
        if (times[i] < times[i + 1] - 1e-12)
            throw Error("ResponseRequest: times must be non-increasing");
    if (kind == InteractionKind::Exponential &&
        exp_vectors.size() != times.size())
        throw Error("ResponseRequest: need one exponential vector per time");
}

Complex gaussian_response_R(const PermutationTerm& perm, const ResponseRequest& req,
                            const WaitingTimePropagators& props, const SigmaBlocks& blocks) {
    const PolySymbol V = interaction_symbol(req);
    const int vars = V.nvars();
    const int slots = static_cast<int>(perm.sigma.size());
    const int total = vars * slots;

    const int cap = std::max(kDefaultDegreeCap, slots * std::max(1, V.degree()));
    PolySymbol product = lift_to_slot(V, total, 0);
    for (int j = 1; j < slots; ++j)
        product = multiply(product, lift_to_slot(V, total, j * vars), cap);

    Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(total, total);
    Eigen::VectorXcd point(total);
    for (int j = 0; j < slots; ++j) {
        const int pj = perm.sigma[j] - 1;
        G.block(j * vars, j * vars, vars, vars) = blocks.blocks[pj][pj];
        for (int k = j + 1; k < slots; ++k) {
            const int pk = perm.sigma[k] - 1;
            G.block(j * vars, k * vars, vars, vars) = blocks.blocks[pj][pk];
            G.block(k * vars, j * vars, vars, vars) = blocks.blocks[pj][pk].transpose();
        }
        point.segment(j * vars, vars) =
            mean_evolve(props.props[pj], req.equilibrium.mean()).cast<Complex>();
    }
    return wick_apply(product, G, point);
}

Complex exponential_response(const std::vector<Eigen::VectorXd>& a,
                             const std::vector<SymplecticPropagator>& props_slots,
                             const GaussianState& eq_state) {
    if (a.size() != props_slots.size() || a.empty())
        throw Error("exponential_response: need one vector per propagator");
    const double hbar = eq_state.hbar();
    const Eigen::MatrixXd J = standard_J(eq_state.dim());

    std::vector<Eigen::VectorXcd> b(a.size());
    Complex phase(0.0, 0.0);
    Eigen::VectorXcd total = Eigen::VectorXcd::Zero(eq_state.mean().size());
    for (std::size_t j = 0; j < a.size(); ++j) {
        const Eigen::MatrixXd inv = symplectic_inverse(props_slots[j]);
        b[j] = (inv.transpose() * a[j]).cast<Complex>();
        total += b[j];
        phase -= (a[j].transpose() * inv * props_slots[j].delta)(0, 0);
    }
    for (std::size_t k = 1; k < b.size(); ++k)
        for (std::size_t j = 0; j < k; ++j)
            phase += Complex(0.0, -0.5 * hbar) * symplectic_form(b[k], b[j], J);

    return std::exp(phase) * char_function(eq_state, total);
}

Complex exponential_phase(const std::vector<Eigen::VectorXd>& a,
                          const std::vector<SymplecticPropagator>& props_slots,
                          const GaussianState& eq_state) {
    const double hbar = eq_state.hbar();
    const Eigen::MatrixXd J = standard_J(eq_state.dim());
    std::vector<Eigen::VectorXcd> b(a.size());
    Complex phase(0.0, 0.0);
    for (std::size_t j = 0; j < a.size(); ++j) {
        const Eigen::MatrixXd inv = symplectic_inverse(props_slots[j]);
        b[j] = (inv.transpose() * a[j]).cast<Complex>();
        phase -= (a[j].transpose() * inv * props_slots[j].delta)(0, 0);
    }
    for (std::size_t k = 1; k < b.size(); ++k)
        for (std::size_t j = 0; j < k; ++j)
            phase += Complex(0.0, -0.5 * hbar) * symplectic_form(b[k], b[j], J);
    return phase;
}

Complex char_samples(const ResponseRequest& req, const WaitingTimePropagators& props,
                     const std::vector<Eigen::VectorXd>& a) {
    if (a.size() != props.props.size())
        throw Error("char_samples: need one vector per propagator");
    Eigen::VectorXcd total = Eigen::VectorXcd::Zero(req.equilibrium.mean().size());
    for (std::size_t j = 0; j < a.size(); ++j)
        total += (symplectic_inverse(props.props[j]).transpose() * a[j]).cast<Complex>();
    return char_function(req.equilibrium, total);
}

Complex response_S(const ResponseRequest& req, const WaitingTimePropagators& props) {
    req.validate();
    if (props.props.size() != req.times.size())
        throw Error("response_S: propagator count does not match the waiting times");
    const std::vector<PermutationTerm> terms = permutation_terms(req.order);

    Complex sum(0.0, 0.0);
    if (req.kind == InteractionKind::Polynomial) {
        const SigmaBlocks blocks =
            sigma_blocks(props, req.equilibrium.cov(), req.equilibrium.hbar());
        for (const PermutationTerm& term : terms)
            sum += static_cast<double>(term.sign) *
                   gaussian_response_R(term, req, props, blocks);
    } else {
        for (const PermutationTerm& term : terms) {
            std::vector<Eigen::VectorXd> a_slots(term.sigma.size());
            std::vector<SymplecticPropagator> p_slots(term.sigma.size());
            for (std::size_t j = 0; j < term.sigma.size(); ++j) {
                a_slots[j] = req.exp_vectors[term.sigma[j] - 1];
                p_slots[j] = props.props[term.sigma[j] - 1];
            }
            sum += static_cast<double>(term.sign) *
                   exponential_response(a_slots, p_slots, req.equilibrium);
        }
    }
    return sum;
}

Complex response_S(const ResponseRequest& req) {
    req.validate();
    const WaitingTimePropagators props =
        waiting_propagators(req.hamiltonian, req.equilibrium, req.times);
    return response_S(req, props);
}

namespace {

// Per-output-time polarization work shared by both field modes.
class PolarizationJob {
public:
    PolarizationJob(const ResponseRequest& req_template, const FieldProfile& field,
                    const std::vector<double>& t_grid)
        : req_(req_template), field_(field), t_grid_(t_grid) {
        const FrozenCoefficients fc = frozen_coefficients(
            req_.hamiltonian, req_.equilibrium, 1e-8);
        B_ = fc.B;
        C_ = fc.C;

        if (field_.sampled()) {
            if (field_.dt <= 0.0) throw GridMismatch("polarization: field grid step must be positive");
            for (double t : t_grid_) grid_index(t); // validates alignment
            const int top = grid_index(*std::max_element(t_grid_.begin(), t_grid_.end()));
            if (top >= static_cast<int>(field_.values.size()))
                throw GridMismatch("polarization: output grid extends past the field samples");
            props_.reserve(top + 1);
            for (int i = 0; i <= top; ++i)
                props_.push_back(equilibrium_propagator(B_, C_, field_.t0 + i * field_.dt));
        } else {
            if (field_.impulses.empty()) throw GridMismatch("polarization: empty field");
            pulses_ = field_.impulses;
            std::sort(pulses_.begin(), pulses_.end(),
                      [](const FieldProfile::Impulse& a, const FieldProfile::Impulse& b) {
                          return a.time > b.time;
                      });
        }
    }

    double evaluate(double tau1) const {
        const int N = req_.order;
        Complex iN(1.0, 0.0);
        for (int k = 0; k < N; ++k) iN *= Complex(0.0, 1.0);

        Complex value(0.0, 0.0);
        if (field_.sampled()) {
            const int i1 = grid_index(tau1);
            std::vector<int> tuple;
            value = simplex_integral(i1, i1, tuple);
        } else {
            std::vector<FieldProfile::Impulse> tuple;
            value = impulse_sum(tau1, 0, tuple);
        }
        return (iN * value).real();
    }

private:
    int grid_index(double t) const {
        const double x = (t - field_.t0) / field_.dt;
        const long i = std::lround(x);
        if (std::abs(x - static_cast<double>(i)) > 1e-9 || i < 0)
            throw GridMismatch("polarization: time " + num_str(t) +
                               " is not on the field grid");
        return static_cast<int>(i);
    }

    Complex S_at(const std::vector<double>& times,
                 const std::vector<SymplecticPropagator>& props) const {
        WaitingTimePropagators wp;
        wp.times = times;
        wp.props = props;
        wp.B_frozen = B_;
        wp.C_frozen = C_;
        ResponseRequest req = req_;
        req.times = times;
        return response_S(req, wp);
    }

    // Nested trapezoid over tau_{level} in [t0, grid[upper]]; `tuple` holds
    // the already-fixed indices tau_1..tau_{level-1} (descending).
    Complex simplex_integral(int tau1_index, int upper, std::vector<int>& tuple) const {
        if (static_cast<int>(tuple.size()) == req_.order) {
            std::vector<double> times;
            std::vector<SymplecticPropagator> props;
            times.reserve(req_.order + 1);
            times.push_back(field_.t0 + tau1_index * field_.dt);
            props.push_back(props_[tau1_index]);
            for (int idx : tuple) {
                times.push_back(field_.t0 + idx * field_.dt);
                props.push_back(props_[idx]);
            }
            return S_at(times, props);
        }
        if (upper == 0) return Complex(0.0, 0.0);
        Complex sum(0.0, 0.0);
        for (int i = 0; i <= upper; ++i) {
            const double w = (i == 0 || i == upper) ? 0.5 : 1.0;
            tuple.push_back(i);
            sum += w * field_.values[i] * simplex_integral(tau1_index, i, tuple);
            tuple.pop_back();
        }
        return sum * field_.dt;
    }

    // Impulsive mode: the deltas collapse each integral onto the pulse times;
    // a run of coincident pulse times contributes with weight 1/run!.
    Complex impulse_sum(double tau1, int level, std::vector<FieldProfile::Impulse>& tuple) const {
        if (level == req_.order) {
            std::vector<double> times;
            times.reserve(req_.order + 1);
            times.push_back(tau1);
            double weight = 1.0;
            int run = 1;
            for (std::size_t j = 0; j < tuple.size(); ++j) {
                times.push_back(tuple[j].time);
                weight *= tuple[j].area;
                if (j > 0 && tuple[j].time == tuple[j - 1].time) {
                    ++run;
                    weight /= run;
                } else {
                    run = 1;
                }
            }
            std::vector<SymplecticPropagator> props;
            props.reserve(times.size());
            for (double t : times) props.push_back(equilibrium_propagator(B_, C_, t));
            return weight * S_at(times, props);
        }
        const double upper = level == 0 ? tau1 : tuple.back().time;
        Complex sum(0.0, 0.0);
        for (const FieldProfile::Impulse& pulse : pulses_) {
            if (pulse.time > upper + 1e-15) continue;
            tuple.push_back(pulse);
            sum += impulse_sum(tau1, level + 1, tuple);
            tuple.pop_back();
        }
        return sum;
    }

    ResponseRequest req_;
    FieldProfile field_;
    std::vector<double> t_grid_;
    Eigen::MatrixXd B_;
    Eigen::VectorXd C_;
    std::vector<SymplecticPropagator> props_;
    std::vector<FieldProfile::Impulse> pulses_;
};

} // namespace

std::vector<double> polarization(const ResponseRequest& req_template, const FieldProfile& field,
                                 const std::vector<double>& t_grid, int threads) {
    if (t_grid.empty()) return {};
    const PolarizationJob job(req_template, field, t_grid);

    std::vector<double> out(t_grid.size(), 0.0);
    const int nthreads = std::max(1, std::min<int>(threads, static_cast<int>(t_grid.size())));
    if (nthreads == 1) {
        for (std::size_t i = 0; i < t_grid.size(); ++i) out[i] = job.evaluate(t_grid[i]);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (int w = 0; w < nthreads; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < t_grid.size();
                     i = next.fetch_add(1))
                    out[i] = job.evaluate(t_grid[i]);
            });
        for (std::thread& th : pool) th.join();
    }
    return out;
}

ClassicalLimitReport classical_limit_probe(const ResponseRequest& req,
                                           const std::vector<double>& hbar_seq) {
    if (hbar_seq.size() < 2)
        throw Error("classical_limit_probe: need at least two hbar values");
    for (std::size_t i = 0; i + 1 < hbar_seq.size(); ++i)
        if (hbar_seq[i] <= hbar_seq[i + 1] || hbar_seq[i + 1] <= 0.0)
            throw Error("classical_limit_probe: hbar sequence must be positive, decreasing");

    ClassicalLimitReport report;
    report.hbars = hbar_seq;
    for (double hb : hbar_seq) {
        ResponseRequest scaled = req;
        scaled.equilibrium =
            GaussianState(req.equilibrium.mean(), req.equilibrium.cov(), hb);
        scaled.hamiltonian = semiclassical_eval(req.hamiltonian, hb);
        if (scaled.kind == InteractionKind::Polynomial)
            scaled.interaction = semiclassical_eval(req.interaction, hb);
        report.values.push_back(response_S(scaled));
    }

    // Least-squares slope of log|S| against log hbar.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int used = 0;
    bool finite = true;
    for (std::size_t i = 0; i < report.values.size(); ++i) {
        const double mag = std::abs(report.values[i]);
        if (!std::isfinite(mag)) finite = false;
        if (mag < 1e-250) continue;
        const double x = std::log(report.hbars[i]);
        const double y = std::log(mag);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++used;
    }
    if (used >= 2) {
        report.fitted_order = (used * sxy - sx * sy) / (used * sxx - sx * sx);
    } else {
        report.fitted_order = 0.0; // response vanishes identically
    }
    report.limit_power = static_cast<int>(std::max(0L, std::lround(report.fitted_order)));
    report.limit_estimate =
        report.values.back() / std::pow(report.hbars.back(), report.limit_power);
    report.bounded = finite && report.fitted_order >= -1e-3;
    return report;
}

} // namespace scqa
