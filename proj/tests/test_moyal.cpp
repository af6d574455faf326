#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "scqa/moyal.hpp"

using namespace scqa;

namespace {

PolySymbol sym_p() { return PolySymbol::variable(2, 0); }
PolySymbol sym_x() { return PolySymbol::variable(2, 1); }

PolySymbol pow_sym(const PolySymbol& b, int k) {
    PolySymbol out = PolySymbol::constant(b.nvars(), 1.0);
    for (int i = 0; i < k; ++i) out = multiply(out, b);
    return out;
}

} // namespace

TEST_CASE("canonical commutation relation") {
    for (double hbar : {1.0, 0.5, 2.0}) {
        const PolySymbol comm = commutator_symbol(sym_p(), sym_x(), hbar);
        CHECK(comm.terms().size() == 1);
        CHECK(std::abs(comm.coeff({0, 0}) - Complex(0.0, -hbar)) < 1e-15);
    }
}

TEST_CASE("star product basics") {
    const PolySymbol xx = moyal_product(sym_x(), sym_x(), 1.0);
    CHECK(xx.distance(pow_sym(sym_x(), 2)) == 0.0);

    // p * x = px - i hbar / 2
    const PolySymbol px = moyal_product(sym_p(), sym_x(), 1.0);
    CHECK(std::abs(px.coeff({1, 1}) - Complex(1.0, 0.0)) < 1e-15);
    CHECK(std::abs(px.coeff({0, 0}) - Complex(0.0, -0.5)) < 1e-15);

    CHECK(commutator_symbol(sym_x(), sym_x(), 1.0).is_zero());
}

TEST_CASE("star product matches the closed-form series oracle") {
    // x^2 * p^2 against the independent double multi-index expansion
    const PolySymbol lhs = moyal_product(pow_sym(sym_x(), 2), pow_sym(sym_p(), 2), 1.0);
    const PolySymbol oracle =
        testing::groenewold_series(pow_sym(sym_x(), 2), pow_sym(sym_p(), 2), 1.0);
    CHECK(lhs.distance(oracle) < 1e-14);

    for (int rep = 0; rep < 8; ++rep) {
        const PolySymbol f = testing::random_poly(2, 3);
        const PolySymbol g = testing::random_poly(2, 3);
        const double hbar = testing::uniform(0.2, 1.5);
        CHECK(moyal_product(f, g, hbar).distance(testing::groenewold_series(f, g, hbar)) < 1e-12);
    }

    // two modes as well
    const PolySymbol f2 = testing::random_poly(4, 2);
    const PolySymbol g2 = testing::random_poly(4, 2);
    CHECK(moyal_product(f2, g2, 0.7).distance(testing::groenewold_series(f2, g2, 0.7)) < 1e-12);
}

TEST_CASE("hbar = 0 reduces to the pointwise product") {
    for (int rep = 0; rep < 5; ++rep) {
        const PolySymbol f = testing::random_poly(2, 3);
        const PolySymbol g = testing::random_poly(2, 3);
        CHECK(moyal_product(f, g, 0.0).distance(multiply(f, g)) == 0.0);
    }
}

TEST_CASE("associativity on random triples") {
    for (int rep = 0; rep < 6; ++rep) {
        const PolySymbol f = testing::random_poly(2, 3);
        const PolySymbol g = testing::random_poly(2, 3);
        const PolySymbol h = testing::random_poly(2, 3);
        const double hbar = testing::uniform(0.3, 1.2);
        const PolySymbol left = moyal_product(moyal_product(f, g, hbar), h, hbar);
        const PolySymbol right = moyal_product(f, moyal_product(g, h, hbar), hbar);
        CHECK(left.distance(right) < 1e-10);
    }
}

TEST_CASE("commutator with a canonical variable is -i hbar (J grad)") {
    const double hbar = 0.8;
    const Eigen::MatrixXd J = standard_J(PhaseDim{1});

    // all monomials of total degree <= 5
    for (int a = 0; a <= 5; ++a)
        for (int b = 0; a + b <= 5; ++b) {
            MultiIndex alpha{a, b};
            const PolySymbol A = PolySymbol::monomial(alpha, 1.0);
            const SymbolVector grad = gradient(A);
            for (int mu = 0; mu < 2; ++mu) {
                const PolySymbol lhs =
                    commutator_symbol(PolySymbol::variable(2, mu), A, hbar);
                PolySymbol rhs(2);
                for (int nu = 0; nu < 2; ++nu)
                    if (J(mu, nu) != 0.0)
                        rhs += Complex(0.0, -hbar * J(mu, nu)) * grad[nu];
                CHECK(lhs.distance(rhs) == 0.0); // exact, every term cancels bitwise
            }
        }

    // spec example: f = x, A = x^2 p
    PolySymbol A = multiply(pow_sym(sym_x(), 2), sym_p());
    const PolySymbol lhs = commutator_symbol(sym_x(), A, 1.0);
    PolySymbol rhs = Complex(0.0, 1.0) * gradient(A)[0]; // -i (J grad)_x = +i dA/dp
    CHECK(lhs.distance(rhs) < 1e-15);
}

TEST_CASE("bopp_delta_product against the star product") {
    const double hbar = 1.0;

    // A = 1: the symbol vector is dz itself
    const SymbolVector triv =
        bopp_delta_product(PolySymbol::constant(2, 1.0), Eigen::VectorXd::Zero(2), hbar);
    CHECK(triv[0].distance(sym_p()) == 0.0);
    CHECK(triv[1].distance(sym_x()) == 0.0);

    // A = x, p component at mean 0: p x - i hbar/2 == p * x
    const SymbolVector bx = bopp_delta_product(sym_x(), Eigen::VectorXd::Zero(2), hbar);
    CHECK(bx[0].distance(moyal_product(sym_p(), sym_x(), hbar)) < 1e-15);

    // A = x^2, x component at mean 0: plain x^3
    const SymbolVector bx2 = bopp_delta_product(pow_sym(sym_x(), 2), Eigen::VectorXd::Zero(2), hbar);
    CHECK(bx2[1].distance(pow_sym(sym_x(), 3)) == 0.0);

    // general check: component mu equals (z_mu - mean_mu) * A under the star
    for (int rep = 0; rep < 6; ++rep) {
        const PolySymbol A = testing::random_poly(2, 4);
        Eigen::VectorXd mean(2);
        mean << testing::uniform(-1.0, 1.0), testing::uniform(-1.0, 1.0);
        const SymbolVector bopp = bopp_delta_product(A, mean, hbar);
        for (int mu = 0; mu < 2; ++mu) {
            PolySymbol dq = PolySymbol::variable(2, mu);
            dq += PolySymbol::constant(2, -mean(mu));
            CHECK(bopp[mu].distance(moyal_product(dq, A, hbar)) < 1e-13);
        }
    }
}
