#include "doctest.h"
#include "test_support.hpp"

#include "ksns/core/operators.hpp"
#include "ksns/flow/flow.hpp"
#include "ksns/model/expression.hpp"
#include "ksns/model/fields.hpp"
#include "ksns/model/params.hpp"

#include <cmath>
#include <numbers>

using namespace ksns;
using namespace ksns::model;

TEST_CASE("parameter validation names the violated constraint")
{
    ModelParams p;
    CHECK_NOTHROW(p.validate());
    p.mu1 = 0.0;
    CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("mu1"), ParameterError);
    p = {};
    p.kappa = 2;
    CHECK_THROWS_AS(p.validate(), ParameterError);
    p = {};
    p.chi2 = -1.0;
    CHECK_THROWS_AS(p.validate(), ParameterError);
    p = {};
    p.eps = std::nan("");
    CHECK_THROWS_AS(p.validate(), ParameterError);
}

TEST_CASE("steady states by regime")
{
    ModelParams p;
    auto s = steady_states(p);
    CHECK(s.regime == Regime::coexistence);
    CHECK(s.n1_limit == 1.0);
    CHECK(s.n2_limit == 1.0);

    p.a1 = p.a2 = 0.5;
    s = steady_states(p);
    CHECK(s.n1_limit == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(s.n2_limit == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

    p.a1 = 1.5;
    s = steady_states(p);
    CHECK(s.regime == Regime::exclusion);
    CHECK(s.n1_limit == 0.0);
    CHECK(s.n2_limit == 1.0);

    p.a2 = 1.5;
    CHECK(steady_states(p).regime == Regime::out_of_scope);
    p.a1 = 0.5;
    CHECK(steady_states(p).regime == Regime::out_of_scope);
    CHECK(std::string(to_string(Regime::exclusion)) == "exclusion");
}

TEST_CASE("kinetics")
{
    ModelParams p;
    p.a1 = 0.3;
    p.a2 = 0.7;
    p.mu1 = 2.0;
    p.mu2 = 0.5;
    CHECK(lv_reaction(0.0, 0.8, p).first == 0.0);
    CHECK(lv_reaction(1.0, 0.0, p).first == 0.0);
    const auto s = steady_states(p);
    const auto [r1, r2] = lv_reaction(s.n1_limit, s.n2_limit, p);
    CHECK(std::abs(r1) <= 1e-15);
    CHECK(std::abs(r2) <= 1e-15);

    CHECK(chemo_mobility(2.5, 0.0) == 2.5);
    CHECK(chemo_mobility(1.0, 1.0) == 0.5);

    ModelParams q;
    CHECK(consumption_rate(0.0, 0.0, q) == 0.0);
    q.eps = 1.0;
    CHECK(consumption_rate(1.0, 1.0, q) == doctest::Approx(std::log(3.0)).epsilon(1e-15));
    for (double n1 : {0.0, 0.3, 2.0, 40.0}) {
        q.eps = 1e-8;
        const double reg = consumption_rate(n1, 1.1, q);
        q.eps = 0.0;
        const double lin = consumption_rate(n1, 1.1, q);
        CHECK(reg <= lin);
        CHECK(reg >= 0.0);
        CHECK(std::abs(reg - lin) <= 1e-6 * lin);
    }
}

TEST_CASE("expression parser: values and precedence")
{
    const std::array<double, 3> x{0.25, 0.5, 2.0};
    CHECK(Expression::parse("1 + 2 * 3")(x) == 7.0);
    CHECK(Expression::parse("2 ^ 3 ^ 2")(x) == 512.0);
    CHECK(Expression::parse("-2 ^ 2")(x) == -4.0);
    CHECK(Expression::parse("(1 + 2) * 3")(x) == 9.0);
    CHECK(Expression::parse("x + 10*y + 100*z")(x) == doctest::Approx(205.25));
    CHECK(Expression::parse("cos(pi * x) * cos(pi*y)")(x) == doctest::Approx(std::cos(std::numbers::pi / 4) * 0.0).scale(1.0));
    CHECK(Expression::parse("exp(1) - e")(x) == doctest::Approx(0.0).scale(1.0));
    CHECK(Expression::parse("sqrt(4) + log(e) + tan(0) + sin(0)")(x) == 3.0);
    CHECK(Expression::parse("1.5e-3")(x) == 1.5e-3);
    CHECK(Expression::parse("6/3/2")(x) == 1.0);
    CHECK(Expression::parse("3").is_constant());
    CHECK(!Expression::parse("3 + y").is_constant());
    CHECK(Expression::parse("x*y").source() == "x*y");
    CHECK(Expression()(x) == 0.0);
    CHECK(Expression::constant(2.5)(x) == 2.5);
}

TEST_CASE("expression parser: errors")
{
    for (const char* bad : {"", "1 +", "(1", "foo(1)", "1 2", "x $ y", "sin 1", "q"})
        CHECK_THROWS_AS(Expression::parse(bad), ExpressionError);
    CHECK_THROWS_WITH(Expression::parse("1 + )"), doctest::Contains("column"));
}

TEST_CASE("symbolic derivatives agree with finite differences")
{
    const char* sources[] = {"sin(pi*x)^2 * sin(pi*y)^2", "exp(-x*y) + log(2 + z)", "sqrt(1 + x^2) / (2 + cos(y))",
                             "x^3 - tan(0.3*y)", "0.1*x", "2^x"};
    const std::array<double, 3> p{0.31, 0.47, 0.73};
    for (const char* s : sources) {
        const Expression e = Expression::parse(s);
        for (int a = 0; a < 3; ++a) {
            const double h = 1e-6;
            auto lo = p, hi = p;
            lo[a] -= h;
            hi[a] += h;
            const double fd = (e(hi) - e(lo)) / (2 * h);
            CHECK(e.derivative(a)(p) == doctest::Approx(fd).epsilon(1e-7).scale(1.0));
        }
    }
    CHECK(Expression::parse("0.1*x").derivative(1).is_constant());
}

TEST_CASE("sampling and buoyancy")
{
    const core::Grid g = test::grid2(8);
    const ScalarField s = sample_cells(g, Expression::parse("x + 2*y"));
    CHECK(s(0, 0, 0) == doctest::Approx(1.0 / 16 + 2.0 / 16));

    const FaceField grad = potential_gradient(g, Expression::parse("0.1*x"));
    CHECK(grad.boundary_is_zero());
    CHECK(grad(0, 3, 3, 0) == doctest::Approx(0.1));
    CHECK(grad(1, 3, 3, 0) == 0.0);

    ModelParams p;
    p.gamma = 2.0;
    p.delta = 3.0;
    const ScalarField n1(g, 0.5), n2(g, 0.25);
    const FaceField f = buoyancy_force(n1, n2, grad, p);
    CHECK(f(0, 4, 2, 0) == doctest::Approx((2.0 * 0.5 + 3.0 * 0.25) * 0.1));
    CHECK(f(0, 0, 2, 0) == 0.0);
    const FaceField zero = buoyancy_force(n1, n2, FaceField(g), p);
    CHECK(zero.max_abs() == 0.0);
    CHECK_THROWS(sample_faces(g, {Expression::parse("1")}));
}

TEST_CASE("initial data validation")
{
    const core::Grid g = test::grid2(8);
    const flow::PressureSolver pressure(g);
    const ScalarField one(g, 1.0);
    const InitialData ok = validate_initial_data(one, one, one, VelocityField(g), pressure);
    CHECK(ok.n1 == one);
    CHECK(ok.u.max_abs() == 0.0);

    ScalarField hole = one;
    hole[17] = 0.0;
    try {
        validate_initial_data(hole, one, one, VelocityField(g), pressure);
        FAIL("expected rejection");
    } catch (const InitialDataError& e) {
        CHECK(e.field == "n1");
        CHECK(e.minimum == 0.0);
    }
    ScalarField neg = one;
    neg[3] = -0.5;
    CHECK_THROWS_AS(validate_initial_data(one, one, neg, VelocityField(g), pressure), InitialDataError);

    // A discrete gradient is annihilated by the projection.
    const ScalarField pot = sample_cells(g, Expression::parse("cos(pi*x)*y^2"));
    const VelocityField grad = core::gradient_faces(pot);
    const InitialData proj = validate_initial_data(one, one, one, grad, pressure);
    CHECK(proj.u.max_abs() <= 1e-10);
}

TEST_CASE("printed derivatives parse back to the same function")
{
    const std::array<double, 3> p{0.31, 0.47, 0.73};
    for (const char* s : {"sin(pi*x)^2 * sin(pi*y)^2", "-(x*y)^3 / (1 + z^2)", "exp(-2*x) * log(3 + y) - sqrt(z + 1)",
                          "1 - -x", "2^-x"}) {
        const Expression e = Expression::parse(s);
        for (int a = 0; a < 3; ++a) {
            const Expression d = e.derivative(a).derivative(a);
            const Expression back = Expression::parse(d.source());
            CHECK(back(p) == doctest::Approx(d(p)).epsilon(1e-14).scale(1.0));
        }
    }
}
