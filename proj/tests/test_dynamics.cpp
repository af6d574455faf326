#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include "oracles.hpp"
#include "scqa/dynamics.hpp"

using namespace scqa;

namespace {

PolySymbol harmonic(double omega = 1.0) {
    PolySymbol H(2);
    H.add_term({2, 0}, 0.5);
    H.add_term({0, 2}, 0.5 * omega * omega);
    return H;
}

PolySymbol quartic(double lambda) {
    PolySymbol H = harmonic();
    H.add_term({0, 4}, lambda);
    return H;
}

PolySymbol free_particle() {
    PolySymbol H(2);
    H.add_term({2, 0}, 0.5);
    return H;
}

GaussianState vacuum() {
    return GaussianState(Eigen::VectorXd::Zero(2), 0.5 * Eigen::MatrixXd::Identity(2, 2), 1.0);
}

GaussianState coherent(double p0, double x0) {
    Eigen::VectorXd mean(2);
    mean << p0, x0;
    return GaussianState(mean, 0.5 * Eigen::MatrixXd::Identity(2, 2), 1.0);
}

} // namespace

TEST_CASE("sc_coefficients closed forms") {
    // quadratic: B = E, C = 0 for any state
    for (int rep = 0; rep < 3; ++rep) {
        const ScCoefficients sc = sc_coefficients(harmonic(), testing::random_state(1));
        CHECK((sc.B - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
        CHECK(sc.C.cwiseAbs().maxCoeff() < 1e-14);
    }

    // quartic at the vacuum: B_xx = 1 + 12 lambda Mxx = 1.6
    const ScCoefficients sq = sc_coefficients(quartic(0.1), vacuum());
    CHECK(sq.B(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(sq.B(1, 1) == doctest::Approx(1.6).epsilon(1e-14));
    CHECK(sq.B(0, 1) == 0.0);
    CHECK(sq.C.cwiseAbs().maxCoeff() < 1e-14);

    // linear H = x: B = 0, C = (0, 1)
    PolySymbol lin(2);
    lin.add_term({0, 1}, 1.0);
    const ScCoefficients sl = sc_coefficients(lin, testing::random_state(1));
    CHECK(sl.B.cwiseAbs().maxCoeff() == 0.0);
    CHECK(sl.C(0) == 0.0);
    CHECK(sl.C(1) == 1.0);

    // B is exactly symmetric by construction
    PolySymbol mixed = quartic(0.05);
    mixed.add_term({1, 1}, 0.3);
    mixed.add_term({1, 3}, 0.07);
    const ScCoefficients sm = sc_coefficients(mixed, testing::random_state(1));
    CHECK((sm.B - sm.B.transpose()).cwiseAbs().maxCoeff() == 0.0);

    // complex coefficients are rejected
    PolySymbol badH(2);
    badH.add_term({0, 2}, Complex(0.0, 0.3));
    CHECK_THROWS_AS(sc_coefficients(badH, vacuum()), NonRealHamiltonian);
}

TEST_CASE("scqa_rhs at t = 0") {
    const SymplecticPropagator id = SymplecticPropagator::identity(PhaseDim{1});
    const Eigen::MatrixXd J = standard_J(PhaseDim{1});

    const auto [dL, dD] = scqa_rhs(harmonic(), id, vacuum());
    CHECK((dL - J).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(dD.cwiseAbs().maxCoeff() < 1e-14);

    Eigen::MatrixXd Bq(2, 2);
    Bq << 1.0, 0.0, 0.0, 1.6;
    const auto [dLq, dDq] = scqa_rhs(quartic(0.1), id, vacuum());
    CHECK((dLq - J * Bq).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(dDq.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("integrate: harmonic period recovery") {
    IntegratorOptions opts;
    opts.record_every = 100;
    const Trajectory traj = integrate(harmonic(), coherent(0.4, 0.8), 2.0 * M_PI, opts);
    const SymplecticPropagator& last = traj.samples.back().prop;
    CHECK((last.lambda - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(last.delta.cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("integrate: free particle ballistic mean") {
    IntegratorOptions opts;
    opts.record_every = 100;
    const Trajectory traj = integrate(free_particle(), coherent(1.0, 0.0), 3.0, opts);
    const TrajectorySample& last = traj.samples.back();
    CHECK(last.mean(0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(last.mean(1) == doctest::Approx(3.0).epsilon(1e-10));

    // Lambda_t = E + t J B is exact for the nilpotent generator
    Eigen::MatrixXd expect(2, 2);
    expect << 1, 0, -3, 1;
    CHECK((last.prop.lambda - expect).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("integrate: exactness for generic quadratic Hamiltonians") {
    // H = 1/2 q^T B q + q^T c against the closed-form flow
    Eigen::MatrixXd B(2, 2);
    B << 1.3, 0.2, 0.2, 0.8;
    Eigen::VectorXd c(2);
    c << 0.1, -0.3;
    PolySymbol H(2);
    H.add_term({2, 0}, 0.5 * B(0, 0));
    H.add_term({0, 2}, 0.5 * B(1, 1));
    H.add_term({1, 1}, B(0, 1));
    H.add_term({1, 0}, c(0));
    H.add_term({0, 1}, c(1));

    const GaussianState s0 = testing::random_state(1);
    IntegratorOptions opts;
    opts.record_every = 500;
    const Trajectory traj = integrate(H, s0, 10.0, opts);

    const Eigen::MatrixXd J = standard_J(PhaseDim{1});
    const Eigen::MatrixXd A = J * B;
    for (const TrajectorySample& s : traj.samples) {
        const Eigen::MatrixXd closed = (s.t * A).exp();
        CHECK((s.prop.lambda - closed).cwiseAbs().maxCoeff() < 1e-6);

        // Delta from the augmented closed form
        Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(4, 4);
        aug.topLeftCorner(2, 2) = A;
        aug.topRightCorner(2, 2) = Eigen::MatrixXd::Identity(2, 2);
        const Eigen::MatrixXd phi = (s.t * aug).exp().topRightCorner(2, 2);
        CHECK((s.prop.delta - phi * (J * c)).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("energy and conservation monitoring") {
    CHECK(energy(harmonic(), vacuum()) == doctest::Approx(0.5).epsilon(1e-14));

    IntegratorOptions opts;
    opts.record_every = 20;
    const Trajectory harm = integrate(harmonic(), coherent(0.3, 1.1), 2.0, opts);
    CHECK(conservation_monitor(harm).energy_drift <= 1e-9);

    const Trajectory quart = integrate(quartic(0.1), coherent(0.0, 0.6), 2.0, opts);
    const ConservationReport rep = conservation_monitor(quart);
    CHECK(rep.energy_drift <= 1e-6);
    CHECK(rep.detM_drift <= 1e-6);
    CHECK(rep.L_drift.at(2) <= 1e-6);
    CHECK(rep.L_drift.at(4) <= 1e-6);
    CHECK(rep.dcoeff_drift <= 1e-6);
    CHECK(rep.max_symplectic_residual <= 1e-8);

    // the symplectic spectrum (via det M for one mode) is time-invariant
    const double nu0 = std::sqrt(quart.samples.front().invariants.detM);
    for (const TrajectorySample& s : quart.samples)
        CHECK(std::abs(std::sqrt(s.invariants.detM) - nu0) <= 1e-8);
}

TEST_CASE("universal_invariants closed forms") {
    const Eigen::MatrixXd half = 0.5 * Eigen::MatrixXd::Identity(2, 2);
    const InvariantsRecord rec = universal_invariants(half, {2, 3, 4});
    CHECK(rec.detM == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(rec.L.at(2) == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(std::abs(rec.L.at(3)) <= 1e-10); // odd orders vanish
    // det(M - mu J) = detM + mu^2 for one mode
    CHECK(rec.dcoeffs(0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(std::abs(rec.dcoeffs(1)) <= 1e-12);
    CHECK(rec.dcoeffs(2) == doctest::Approx(1.0).epsilon(1e-12));

    // random symmetric M, one and two modes: odd structure vanishes
    for (int n : {1, 2}) {
        Eigen::MatrixXd A(2 * n, 2 * n);
        for (int i = 0; i < 2 * n; ++i)
            for (int j = 0; j < 2 * n; ++j) A(i, j) = testing::uniform(-1.0, 1.0);
        const Eigen::MatrixXd M = 0.5 * (A + A.transpose());
        const InvariantsRecord r = universal_invariants(M, {2, 3, 4, 5});
        CHECK(std::abs(r.L.at(3)) <= 1e-10);
        CHECK(std::abs(r.L.at(5)) <= 1e-10);
        for (int k = 1; k < r.dcoeffs.size(); k += 2) CHECK(std::abs(r.dcoeffs(k)) <= 1e-10);
    }
}

TEST_CASE("stationary_residual") {
    // harmonic: zero for mean 0 with M = E and with any symmetric M
    CHECK(stationary_residual(harmonic(),
                              GaussianState(Eigen::VectorXd::Zero(2),
                                            Eigen::MatrixXd::Identity(2, 2), 1.0)) ==
          doctest::Approx(0.0).epsilon(1e-14));
    for (int rep = 0; rep < 5; ++rep) {
        GaussianState s = testing::random_state(1);
        GaussianState centered(Eigen::VectorXd::Zero(2), s.cov(), 1.0);
        CHECK(std::abs(stationary_residual(harmonic(), centered)) < 1e-12);
    }

    // quartic with an off-diagonal covariance against the hand-expanded trace
    Eigen::MatrixXd M(2, 2);
    M << 0.6, 0.1, 0.1, 0.6;
    const GaussianState s(Eigen::VectorXd::Zero(2), M, 1.0);
    const double lambda = 0.1;
    // B = diag(1, 1 + 12 lambda Mxx); tr(J B M) = (B M)_{21} - (B M)_{12}
    const double bxx = 1.0 + 12.0 * lambda * M(1, 1);
    const double hand = -(bxx * M(1, 0) - 1.0 * M(0, 1));
    CHECK(stationary_residual(quartic(lambda), s) == doctest::Approx(hand).epsilon(1e-12));
}

TEST_CASE("stationary_solve fixed points") {
    // harmonic: the vacuum is the fixed point, reached in one step
    const GaussianState harm = stationary_solve(harmonic(), 0.5 * Eigen::MatrixXd::Identity(2, 2),
                                                1.0);
    CHECK((harm.cov() - 0.5 * Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);

    // harmonic with omega = 2: M = (hbar/2) diag(omega, 1/omega)
    const GaussianState harm2 = stationary_solve(harmonic(2.0),
                                                 0.5 * Eigen::MatrixXd::Identity(2, 2), 1.0);
    CHECK(harm2.cov()(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(harm2.cov()(1, 1) == doctest::Approx(0.25).epsilon(1e-9));

    // quartic: residual under 1e-8 and genuinely invariant under the flow
    const GaussianState eq = stationary_solve(quartic(0.1),
                                              0.5 * Eigen::MatrixXd::Identity(2, 2), 1.0);
    CHECK(std::abs(stationary_residual(quartic(0.1), eq)) < 1e-8);
    IntegratorOptions opts;
    opts.record_every = 100;
    const Trajectory traj = integrate(quartic(0.1), eq, 2.0, opts);
    for (const TrajectorySample& smp : traj.samples) {
        CHECK((smp.cov - eq.cov()).cwiseAbs().maxCoeff() < 1e-8);
        CHECK(smp.mean.cwiseAbs().maxCoeff() < 1e-10);
    }

    // free particle: no normalizable stationary Gaussian
    CHECK_THROWS_AS(stationary_solve(free_particle(), 0.5 * Eigen::MatrixXd::Identity(2, 2), 1.0),
                    NoConvergence);
}

TEST_CASE("ehrenfest residual along trajectories") {
    IntegratorOptions fine;
    fine.step = 1e-4;
    const Trajectory harm = integrate(harmonic(), coherent(0.5, 0.7), 0.5, fine);
    const Trajectory quart = integrate(quartic(0.1), coherent(0.0, 0.8), 0.5, fine);

    // A = H: pure conservation
    CHECK(ehrenfest_residual(harmonic(), harmonic(), harm, 0.25, 1e-4) <= 1e-6);

    // A = x on the harmonic trajectory: both sides equal <p>
    PolySymbol X(2);
    X.add_term({0, 1}, 1.0);
    CHECK(ehrenfest_residual(X, harmonic(), harm, 0.25, 1e-4) <= 1e-6);

    // A = x^2 on the quartic trajectory
    PolySymbol X2(2);
    X2.add_term({0, 2}, 1.0);
    CHECK(ehrenfest_residual(X2, quartic(0.1), quart, 0.25, 1e-4) <= 1e-5);

    // battery of observables on both trajectories
    PolySymbol P(2), PX(2), X3(2);
    P.add_term({1, 0}, 1.0);
    PX.add_term({1, 1}, 1.0);
    X3.add_term({0, 3}, 1.0);
    for (const PolySymbol& A : {X, P, X2, PX, X3}) {
        CHECK(ehrenfest_residual(A, harmonic(), harm, 0.25, 1e-4) <= 1e-5);
        CHECK(ehrenfest_residual(A, quartic(0.1), quart, 0.25, 1e-4) <= 1e-5);
    }

    CHECK_THROWS_AS(ehrenfest_residual(X, harmonic(), harm, 0.0, 1e-4), OutOfRange);
}

TEST_CASE("wavepacket closure truncates the moment series") {
    // identical on quadratic H, different on the quartic
    const ScCoefficients wick = sc_coefficients(quartic(0.1), vacuum(), Closure::Wick);
    const ScCoefficients wp = sc_coefficients(quartic(0.1), vacuum(), Closure::WavePacket);
    CHECK(wp.B(1, 1) == doctest::Approx(1.0).epsilon(1e-14)); // hessian at the mean only
    CHECK(wick.B(1, 1) == doctest::Approx(1.6).epsilon(1e-14));

    const ScCoefficients hw = sc_coefficients(harmonic(), vacuum(), Closure::WavePacket);
    CHECK((hw.B - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("drift aborts carry the offending time") {
    // An enormous step makes RK4 lose symplecticity immediately.
    IntegratorOptions bad;
    bad.step = 0.5;
    bad.symplectic_tol = 1e-12;
    CHECK_THROWS_AS(integrate(quartic(0.3), coherent(0.0, 1.5), 2.0, bad), SymplecticDrift);

    IntegratorOptions tight;
    tight.step = 0.2;
    tight.conservation_tol = 1e-14;
    tight.symplectic_tol = 10.0; // let the conservation gate fire first
    CHECK_THROWS_AS(integrate(quartic(0.3), coherent(0.0, 1.5), 2.0, tight), ConservationDrift);
}
