#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "scqa/config.hpp"
#include "scqa/poly_symbol.hpp"

using namespace scqa;

namespace {

// single-mode helpers over (p, x)
PolySymbol sym_p() { return PolySymbol::variable(2, 0); }
PolySymbol sym_x() { return PolySymbol::variable(2, 1); }

PolySymbol pow_sym(const PolySymbol& b, int k) {
    PolySymbol out = PolySymbol::constant(b.nvars(), 1.0);
    for (int i = 0; i < k; ++i) out = multiply(out, b);
    return out;
}

} // namespace

TEST_CASE("construction and arithmetic") {
    PolySymbol a = PolySymbol::constant(2, 2.0);
    a += PolySymbol::variable(2, 1, 3.0);
    CHECK(a.coeff({0, 0}) == Complex(2.0, 0.0));
    CHECK(a.coeff({0, 1}) == Complex(3.0, 0.0));

    a -= PolySymbol::constant(2, 2.0);
    CHECK(a.coeff({0, 0}) == Complex(0.0, 0.0));
    CHECK(a.terms().size() == 1); // exact zeros are not stored

    CHECK_THROWS_AS(PolySymbol::variable(2, 5), DimensionMismatch);
    CHECK_THROWS_AS(a += PolySymbol::constant(4, 1.0), DimensionMismatch);
}

TEST_CASE("gradient and hessian") {
    const PolySymbol x2 = pow_sym(sym_x(), 2);
    const SymbolVector g = gradient(x2);
    CHECK(g[0].is_zero());
    CHECK(g[1].coeff({0, 1}) == Complex(2.0, 0.0));

    const SymbolMatrix h = hessian(x2);
    CHECK(h[0][0].is_zero());
    CHECK(h[1][1].coeff({0, 0}) == Complex(2.0, 0.0));
    CHECK(h[0][1].is_zero());

    const PolySymbol px = multiply(sym_p(), sym_x());
    const SymbolVector gpx = gradient(px);
    CHECK(gpx[0].coeff({0, 1}) == Complex(1.0, 0.0)); // d/dp (px) = x
    CHECK(gpx[1].coeff({1, 0}) == Complex(1.0, 0.0)); // d/dx (px) = p

    const PolySymbol x4 = pow_sym(sym_x(), 4);
    CHECK(hessian(x4)[1][1].coeff({0, 2}) == Complex(12.0, 0.0));
}

TEST_CASE("taylor_shift re-expands exactly") {
    const PolySymbol x2 = pow_sym(sym_x(), 2);

    const PolySymbol same = taylor_shift(x2, Eigen::VectorXd::Zero(2));
    CHECK(same.distance(x2) == 0.0);

    Eigen::VectorXd point(2);
    point << 0.0, 1.0;
    const PolySymbol shifted = taylor_shift(x2, point);
    CHECK(shifted.coeff({0, 0}) == Complex(1.0, 0.0));
    CHECK(shifted.coeff({0, 1}) == Complex(2.0, 0.0));
    CHECK(shifted.coeff({0, 2}) == Complex(1.0, 0.0));

    // random degree-5 symbol: A(point + dz) == shifted(dz) pointwise
    for (int rep = 0; rep < 5; ++rep) {
        const PolySymbol A = testing::random_poly(2, 5);
        Eigen::VectorXd c(2);
        c << testing::uniform(-2.0, 2.0), testing::uniform(-2.0, 2.0);
        const PolySymbol B = taylor_shift(A, c);
        for (int s = 0; s < 10; ++s) {
            Eigen::VectorXd z(2);
            z << testing::uniform(-1.5, 1.5), testing::uniform(-1.5, 1.5);
            const Complex direct = A.evaluate(Eigen::VectorXd(z + c));
            const Complex viaShift = B.evaluate(z);
            CHECK(std::abs(direct - viaShift) < 1e-10 * std::max(1.0, std::abs(direct)));
        }
    }
}

TEST_CASE("hbar grading") {
    PolySymbol A = pow_sym(sym_x(), 2);
    CHECK(semiclassical_eval(A, 0.7).distance(A) == 0.0); // ungraded is grade 0

    A.add_term({0, 0}, 1.0, 1);
    CHECK(A.is_graded());
    CHECK(semiclassical_eval(A, 0.0).distance(pow_sym(sym_x(), 2)) == 0.0);

    const PolySymbol at_half = semiclassical_eval(A, 0.5);
    CHECK(at_half.coeff({0, 0}) == Complex(0.5, 0.0));
    CHECK(at_half.coeff({0, 2}) == Complex(1.0, 0.0));

    CHECK(classical_part(A).distance(pow_sym(sym_x(), 2)) == 0.0);

    // grade-2 coefficient is of hbar^2/2!
    PolySymbol B = PolySymbol::constant(2, 0.0);
    B.add_term({0, 0}, 6.0, 2);
    CHECK(semiclassical_eval(B, 2.0).coeff({0, 0}) == Complex(12.0, 0.0));

    CHECK_THROWS(multiply(A, A));
    CHECK_THROWS(A.evaluate(Eigen::VectorXd(Eigen::VectorXd::Zero(2))));
}

TEST_CASE("degree cap rejects runaway products") {
    const PolySymbol big = pow_sym(sym_x(), 9);
    CHECK_THROWS_AS(multiply(big, big), DegreeCapExceeded);
    CHECK_NOTHROW(multiply(big, big, 18));
}

TEST_CASE("symbol JSON round trip") {
    PolySymbol A = testing::random_poly(2, 4, false);
    A.add_term({1, 1}, Complex(0.25, -0.5), 2);
    const std::string text = symbol_to_json(A);
    const PolySymbol back = symbol_from_json_text(text);
    CHECK(back.distance(A) < 1e-15);

    CHECK_THROWS_AS(symbol_from_json_text("not json"), ConfigError);
    CHECK_THROWS_AS(symbol_from_json_text("[]"), ConfigError);
    CHECK_THROWS_AS(symbol_from_json_text("[{\"exponents\": [1]}]"), ConfigError);
}

TEST_CASE("lift_to_slot embeds variables") {
    const PolySymbol px = multiply(sym_p(), sym_x());
    const PolySymbol lifted = lift_to_slot(px, 6, 2);
    CHECK(lifted.coeff({0, 0, 1, 1, 0, 0}) == Complex(1.0, 0.0));
    CHECK_THROWS_AS(lift_to_slot(px, 3, 2), DimensionMismatch);
}
