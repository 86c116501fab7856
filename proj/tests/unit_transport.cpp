#include "doctest.h"
#include "test_support.hpp"

#include "ksns/transport/transport.hpp"

#include <cmath>
#include <random>

using namespace ksns;
using namespace ksns::transport;

namespace {

State uniform_state(const Grid& g, double n1, double n2, double c)
{
    return {0.0, ScalarField(g, n1), ScalarField(g, n2), ScalarField(g, c), VelocityField(g), ScalarField(g)};
}

model::ModelParams coupled()
{
    model::ModelParams p;
    p.a1 = p.a2 = 0.5;
    p.chi1 = p.chi2 = 0.5;
    p.eps = 1e-3;
    return p;
}

double spread(const ScalarField& f) { return f.max() - f.min(); }

}  // namespace

TEST_CASE("chemotactic flux vanishes without a gradient or without cells")
{
    std::mt19937_64 rng(1);
    const Grid g = test::grid2(16);
    const ScalarField n = test::random_scalar(g, rng, 0.1, 2.0);
    const ScalarField c = test::random_scalar(g, rng, 0.1, 2.0);
    const ScalarField flat = chemotaxis_div(n, ScalarField(g, 0.7), 2.0, 0.1);
    CHECK(flat.max() == 0.0);
    CHECK(flat.min() == 0.0);
    const ScalarField none = chemotaxis_div(ScalarField(g), c, 2.0, 0.0);
    CHECK(none.max() == 0.0);
    CHECK(none.min() == 0.0);
    CHECK(std::abs(core::integrate(chemotaxis_div(n, c, 2.0, 0.1))) <= 1e-12);
}

TEST_CASE("Patankar kinetics: absorbing zero, exact equilibria, positivity")
{
    model::ModelParams p = coupled();
    p.mu1 = 1.7;
    p.mu2 = 0.4;
    const auto s = model::steady_states(p);
    for (double dt : {1e-3, 0.1, 10.0}) {
        const auto [m1, m2] = reaction_update(s.n1_limit, s.n2_limit, p, dt);
        CHECK(std::abs(m1 - s.n1_limit) <= 1e-15);
        CHECK(std::abs(m2 - s.n2_limit) <= 1e-15);
        CHECK(reaction_update(0.0, 0.4, p, dt).first == 0.0);
        CHECK(reaction_update(0.4, 0.0, p, dt).second == 0.0);
        const auto [q1, q2] = reaction_update(5.0, 1e-9, p, dt);
        CHECK(q1 > 0.0);
        CHECK(q2 > 0.0);
    }
    // First-order consistency with the kinetics.
    const double dt = 1e-6;
    const auto [m1, m2] = reaction_update(0.3, 0.9, p, dt);
    const auto [r1, r2] = model::lv_reaction(0.3, 0.9, p);
    CHECK((m1 - 0.3) / dt == doctest::Approx(r1).epsilon(1e-5));
    CHECK((m2 - 0.9) / dt == doctest::Approx(r2).epsilon(1e-5));
}

TEST_CASE("diffusion solve conserves mass and smooths")
{
    std::mt19937_64 rng(3);
    const Grid g = test::grid3(8);
    const ScalarDiffusionSolver solver(g);
    const ScalarField b = test::random_scalar(g, rng, 0.5, 1.5);
    const ScalarField x = solver.solve(b, 0.05, 1e-12);
    CHECK(core::integrate(x) == doctest::Approx(core::integrate(b)).epsilon(1e-13));
    CHECK(x.max() <= b.max());
    CHECK(x.min() >= b.min());
}

TEST_CASE("uniform state stays uniform and tracks the kinetics")
{
    const Grid g = test::grid2(16);
    const ScalarDiffusionSolver diffusion(g);
    const model::ModelParams p = coupled();
    State s = uniform_state(g, 0.6, 0.7, 1.0);
    const double dt = 1e-3;
    for (int step = 0; step < 20; ++step) {
        const ScalarStep r = scalar_step(diffusion, s, p, dt);
        CHECK(spread(r.n1) <= 1e-12);
        CHECK(spread(r.n2) <= 1e-12);
        CHECK(spread(r.c) <= 1e-12);
        const auto [m1, m2] = reaction_update(s.n1[0], s.n2[0], p, dt);
        CHECK(r.n1[0] == doctest::Approx(m1).epsilon(1e-13));
        CHECK(r.n2[0] == doctest::Approx(m2).epsilon(1e-13));
        s.n1 = r.n1;
        s.n2 = r.n2;
        s.c = r.c;
    }
}

TEST_CASE("signal without consumers is left alone")
{
    const Grid g = test::grid2(8);
    const ScalarDiffusionSolver diffusion(g);
    const State s = uniform_state(g, 0.0, 0.0, 0.8);
    const ScalarStep r = scalar_step(diffusion, s, coupled(), 1e-2);
    for (double v : r.c.values()) CHECK(v == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(r.n1.max() == 0.0);
}

TEST_CASE("random coupled steps: positivity, max principle for c, mass ledger")
{
    std::mt19937_64 rng(5);
    for (const Grid& g : {test::grid2(24), test::grid3(8)}) {
        const ScalarDiffusionSolver diffusion(g);
        const model::ModelParams p = coupled();
        State s{0.0, test::random_scalar(g, rng, 0.05, 2.0), test::random_scalar(g, rng, 0.05, 2.0),
                test::random_scalar(g, rng, 0.01, 1.0), VelocityField(g), ScalarField(g)};
        if (g.dim() == 2) s.u = test::random_solenoidal_2d(g, rng);
        const TransportSettings settings;
        for (int step = 0; step < 10; ++step) {
            const double dt = std::min({settings.dt_max, donor_cell_dt_limit(s.u, settings.cfl_safety),
                                        chemotactic_dt_limit(s.c, p, settings.cfl_safety),
                                        reaction_dt_limit(s.n1, s.n2, p, settings.cfl_safety)});
            const ScalarStep r = scalar_step(diffusion, s, p, dt, settings);
            CHECK(r.n1.min() > 0.0);
            CHECK(r.n2.min() > 0.0);
            CHECK(r.c.min() >= 0.0);
            CHECK(r.c.max() <= s.c.max() + 1e-12);
            CHECK(r.ledger.relative_error() <= 1e-10);
            s.n1 = r.n1;
            s.n2 = r.n2;
            s.c = r.c;
        }
    }
}

TEST_CASE("step limits")
{
    const Grid g = test::grid2(16);
    const ScalarDiffusionSolver diffusion(g);
    const model::ModelParams p = coupled();
    State s = uniform_state(g, 0.5, 0.5, 1.0);
    CHECK(std::isinf(donor_cell_dt_limit(s.u, 0.4)));
    CHECK(std::isinf(chemotactic_dt_limit(s.c, p, 0.4)));
    CHECK(reaction_dt_limit(s.n1, s.n2, p, 0.4) == doctest::Approx(0.4 / 1.75));
    CHECK_THROWS_AS(scalar_step(diffusion, s, p, 1.0), CflError);
    CHECK_THROWS_AS(scalar_step(diffusion, s, p, 0.0), CflError);

    std::mt19937_64 rng(7);
    s.c = test::random_scalar(g, rng, 0.0, 1.0);
    const double lim = chemotactic_dt_limit(s.c, p, 0.4);
    CHECK(lim < INFINITY);
    CHECK_THROWS_AS(scalar_step(diffusion, s, p, 1.01 * lim), CflError);
}
