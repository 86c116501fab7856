#include "doctest.h"
#include "test_support.hpp"

#include "ksns/diagnostics/diagnostics.hpp"
#include "ksns/flow/flow.hpp"
#include "ksns/model/expression.hpp"
#include "ksns/model/fields.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

using namespace ksns;
using namespace ksns::diagnostics;
using model::Expression;

namespace {

State uniform(const Grid& g, double n1, double n2, double c)
{
    return {0.0, ScalarField(g, n1), ScalarField(g, n2), ScalarField(g, c), VelocityField(g), ScalarField(g)};
}

State manufactured(const Grid& g)
{
    State s = uniform(g, 1.0, 1.0, 1.0);
    s.n1 = model::sample_cells(g, Expression::parse("1 + 0.5*cos(pi*x)*cos(pi*y)"));
    s.n2 = model::sample_cells(g, Expression::parse("1.2 + 0.3*cos(2*pi*x)"));
    s.c = model::sample_cells(g, Expression::parse("1 + 0.5*cos(pi*x)*cos(2*pi*y)"));
    s.u = test::stream_velocity(g, [](double x, double y) {
        return 0.05 * std::pow(std::sin(std::numbers::pi * x) * std::sin(std::numbers::pi * y), 2);
    });
    return s;
}

model::SteadyState coexistence_half()
{
    model::ModelParams p;
    p.a1 = p.a2 = 0.5;
    return model::steady_states(p);
}

}  // namespace

TEST_CASE("energy configuration validation")
{
    EnergyConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.B = 0.0;
    CHECK_THROWS_AS(cfg.validate(), DiagnosticsError);
}

TEST_CASE("energy F: hand values and the s log s bound")
{
    const Grid g = test::grid2(16);
    CHECK(energy_F(uniform(g, 1.0, 1.0, 0.4), {}).value == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
    CHECK(energy_F(uniform(g, std::exp(1.0), 1.0, 0.4), {}).value == doctest::Approx(std::exp(1.0)).epsilon(1e-14));
    CHECK_THROWS_AS(energy_F(uniform(g, 0.0, 1.0, 1.0), {}), DiagnosticsError);

    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 5; ++trial) {
        State s = uniform(g, 1.0, 1.0, 1.0);
        s.n1 = test::random_scalar(g, rng, 1e-6, 3.0);
        s.n2 = test::random_scalar(g, rng, 1e-6, 3.0);
        s.c = test::random_scalar(g, rng, 1e-3, 1.0);
        CHECK(energy_F(s, {}).value >= -2.0 * g.domain_volume() / std::exp(1.0));
    }

    State tiny = uniform(g, 1.0, 1.0, 1e-310);
    const EnergyValue e = energy_F(tiny, {});
    CHECK(e.signal_underflow);
    CHECK(std::isfinite(e.value));
}

TEST_CASE("energy F converges to the fine-grid quadrature")
{
    const double coarse = energy_F(manufactured(test::grid2(64)), {}).value;
    const double fine = energy_F(manufactured(test::grid2(512)), {}).value;
    CHECK(std::abs(coarse - fine) <= 1e-3 * std::abs(fine));
}

TEST_CASE("dissipation terms: zero at uniform states, nonnegative always")
{
    const Grid g = test::grid2(16);
    const Dissipation d = dissipation_terms(uniform(g, 0.7, 1.3, 0.5));
    CHECK(d.n1 == 0.0);
    CHECK(d.n2 == 0.0);
    CHECK(d.c4 == 0.0);
    CHECK(std::abs(d.hess) <= 1e-20);
    CHECK(d.u == 0.0);

    std::mt19937_64 rng(6);
    for (const Grid& gg : {test::grid2(12), test::grid3(6)}) {
        State s = uniform(gg, 1.0, 1.0, 1.0);
        s.n1 = test::random_scalar(gg, rng, 0.1, 2.0);
        s.n2 = test::random_scalar(gg, rng, 0.1, 2.0);
        s.c = test::random_scalar(gg, rng, 0.01, 2.0);
        s.u = test::random_faces(gg, rng);
        const Dissipation r = dissipation_terms(s);
        for (double v : {r.n1, r.n2, r.c4, r.hess, r.u}) CHECK(v >= -1e-14);
    }
}

TEST_CASE("log-Hessian term vanishes for exponential-linear signals and converges otherwise")
{
    for (const Grid& g : {test::grid2(32), test::grid3(8)}) {
        State s = uniform(g, 1.0, 1.0, 1.0);
        s.c = model::sample_cells(g, Expression::parse("exp(0.3*x - 0.7*y + 0.2*z)"));
        const ScalarField dens = hessian_density(s.c);
        CHECK(dens.max() <= 1e-16 * 1e4);
        CHECK(dissipation_terms(s).hess <= 1e-10);
    }
    // log c = 0.5 cos(pi x): density c (pi^2/2 cos(pi x))^2.
    auto exact = [] {
        const double pi = std::numbers::pi;
        double s = 0.0;
        const int n = 1 << 16;
        for (int i = 0; i < n; ++i) {
            const double x = (i + 0.5) / n;
            const double d = 0.5 * pi * pi * std::cos(pi * x);
            s += std::exp(0.5 * std::cos(pi * x)) * d * d / n;
        }
        return s;
    }();
    double prev_err = INFINITY;
    for (int n : {32, 64, 128}) {
        State s = uniform(test::grid2(n), 1.0, 1.0, 1.0);
        s.c = model::sample_cells(s.grid(), Expression::parse("exp(0.5*cos(pi*x))"));
        const double err = std::abs(dissipation_terms(s).hess - exact);
        CHECK(err < prev_err);
        prev_err = err;
    }
    CHECK(prev_err <= 2e-2 * exact);
}

TEST_CASE("Lyapunov functional G")
{
    const Grid g = test::grid2(16);
    const auto target = coexistence_half();
    const State eq = uniform(g, target.n1_limit, target.n2_limit, 0.0);
    CHECK(energy_G(eq, {}, target) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));

    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 5; ++trial) {
        State s = uniform(g, 1.0, 1.0, 1.0);
        s.n1 = test::random_scalar(g, rng, 0.01, 3.0);
        s.n2 = test::random_scalar(g, rng, 0.01, 3.0);
        s.c = test::random_scalar(g, rng, 0.0, 1.0);
        CHECK(energy_G(s, {}, target) >= (target.n1_limit + target.n2_limit) * g.domain_volume() - 1e-12);
    }

    model::ModelParams px;
    px.a1 = 1.5;
    px.a2 = 0.5;
    const auto excl = model::steady_states(px);
    State ex = uniform(g, 1.0, 1.0, 0.0);
    ex.n1 = ScalarField(g, 1e-300);
    CHECK(energy_G(ex, {}, excl) == doctest::Approx(1.0).epsilon(1e-14));

    CHECK_THROWS_AS(energy_G(eq, {}, model::SteadyState{}), DiagnosticsError);
}

TEST_CASE("blow-up indicator")
{
    const Grid g = test::grid2(16);
    const State s = uniform(g, 1.0, 1.0, 1.0);
    const BlowUp b = blow_up_indicator(s, 4.0);
    CHECK(b.value == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(!b.flagged);
    State doubled = s;
    doubled.n1 = ScalarField(g, 2.0);
    CHECK(blow_up_indicator(doubled).value > b.value);
    CHECK(blow_up_indicator(s, 4.0, 2.0).flagged);
    State bad = s;
    bad.c[3] = std::nan("");
    CHECK(std::isinf(blow_up_indicator(bad).value));
    CHECK(blow_up_indicator(bad).flagged);
    CHECK_THROWS_AS(blow_up_indicator(s, 2.0), DiagnosticsError);
}

TEST_CASE("distance to the limit")
{
    const Grid g = test::grid2(8);
    const auto target = coexistence_half();
    const Distances zero = distance_to_limit(uniform(g, target.n1_limit, target.n2_limit, 0.0), target);
    CHECK(zero.max() == 0.0);
    const Distances d = distance_to_limit(uniform(g, 1.0, 1.0, 0.0), target);
    CHECK(d.n1 == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(d.n2 == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(d.c == 0.0);
    CHECK(d.u == 0.0);
}

TEST_CASE("accumulators freeze at equilibrium and never decrease")
{
    const Grid g = test::grid2(16);
    const auto target = coexistence_half();
    const State eq = uniform(g, target.n1_limit, target.n2_limit, 0.0);
    DiagnosticsRecord r;
    for (int k = 0; k < 4; ++k) r = update_accumulators(r, eq, 0.1, target);
    CHECK(r.acc.A1 == 0.0);
    CHECK(r.acc.A2 == 0.0);
    CHECK(r.acc.Au == 0.0);
    CHECK(r.acc.Ac == 0.0);

    const State m = manufactured(g);
    DiagnosticsRecord prev;
    for (int k = 0; k < 4; ++k) {
        const DiagnosticsRecord next = update_accumulators(prev, m, 0.1, target);
        CHECK(next.acc.A1 > prev.acc.A1);
        CHECK(next.acc.Au > prev.acc.Au);
        CHECK(next.acc.Ac > prev.acc.Ac);
        prev = next;
    }
}

TEST_CASE("record evaluation and CSV schema")
{
    const Grid g = test::grid2(16);
    const DiagnosticsRecord r = evaluate(manufactured(g), 1e-3, {}, coexistence_half());
    const auto values = csv_values(r);
    CHECK(values.size() == csv_columns().size());
    for (double v : values) CHECK(std::isfinite(v));
    CHECK(csv_header().rfind("t,dt,", 0) == 0);
    CHECK(csv_row(r) == csv_row(r));
    const DiagnosticsRecord o = evaluate(manufactured(g), 1e-3, {}, model::SteadyState{});
    CHECK(o.G == 0.0);
}

TEST_CASE("test-function draws are deterministic")
{
    const TestFunctions a = draw_test_functions(42, 0.0, 1.0);
    const TestFunctions b = draw_test_functions(42, 0.0, 1.0);
    CHECK(a.k == b.k);
    CHECK(a.m == b.m);
    CHECK(a.bump(0.5) == doctest::Approx(1.0));
    CHECK(a.bump(0.0) == 0.0);
    CHECK(a.bump(1.0) == 0.0);
    CHECK_THROWS_AS(draw_test_functions(1, 1.0, 1.0), DiagnosticsError);
}

TEST_CASE("weak residuals of a stationary equilibrium vanish")
{
    for (const Grid& g : {test::grid2(16), test::grid3(8)}) {
        model::ModelParams p;
        p.a1 = p.a2 = 0.5;
        p.chi1 = p.chi2 = 0.5;
        const auto target = model::steady_states(p);
        const FaceField grad_phi = model::potential_gradient(g, Expression::parse("0.1*x"));
        std::vector<State> traj;
        for (int k = 0; k <= 20; ++k) {
            State s = uniform(g, target.n1_limit, target.n2_limit, 0.0);
            s.t = 0.05 * k;
            traj.push_back(s);
        }
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            const TestFunctions tf = draw_test_functions(seed, 0.0, 1.0);
            CHECK(weak_residuals(traj, p, grad_phi, tf).max() <= 1e-10);
        }
        // Support outside the stored window is rejected.
        CHECK_THROWS_AS(weak_residuals(traj, p, grad_phi, draw_test_functions(1, 0.0, 2.0)), DiagnosticsError);
    }
}

TEST_CASE("weak residual of a moving exact solution is small")
{
    // n1 = 1 + 0.1 e^{-pi^2 t} cos(pi x) solves the heat equation; with mu
    // tiny and no signal the n1 identity balances up to quadrature error.
    const Grid g = test::grid2(32);
    model::ModelParams p;
    p.mu1 = p.mu2 = 1e-300;
    const FaceField grad_phi(g);
    std::vector<State> traj;
    const double dt = 1e-3;
    for (int k = 0; k <= 200; ++k) {
        const double t = k * dt;
        State s = uniform(g, 1.0, 1.0, 0.0);
        s.t = t;
        const double amp = 0.1 * std::exp(-std::numbers::pi * std::numbers::pi * t);
        char src[64];
        std::snprintf(src, sizeof src, "1 + %.17g*cos(pi*x)", amp);
        s.n1 = model::sample_cells(g, Expression::parse(src));
        traj.push_back(s);
    }
    TestFunctions tf;
    tf.k = {1, 2, 1};
    tf.t1 = 0.2;
    CHECK(weak_residuals(traj, p, grad_phi, tf).n1 <= 1e-12);
    tf.k = {1, 1, 1};
    const double r = weak_residuals(traj, p, grad_phi, tf).n1;
    CHECK(r <= 1e-4);
}
