// Acceptance suite: one PASS/FAIL line per criterion. Every tolerance is
// fixed here; nothing is read from the environment.

#include "test_support.hpp"

#include "ksns/core/operators.hpp"
#include "ksns/flow/flow.hpp"
#include "ksns/harness/simulation.hpp"
#include "ksns/harness/verification.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace ksns;
using namespace ksns::harness;
namespace fs = std::filesystem;

namespace {

// Tolerances.
constexpr double kUniformDeviation = 1e-4;
constexpr double kUniformVelocity = 1e-12;
constexpr double kUniformSeconds = 30.0;
constexpr double kDistanceTol = 1e-2;
constexpr double kStabilizeSeconds = 300.0;
constexpr double kDivergenceTol = 1e-10;
constexpr double kLedgerTol = 1e-10;
constexpr double kL1Slack = 1e-8;
constexpr double kMaxCSlack = 1e-12;
constexpr double kDualityTol = 1e-12;
constexpr double kIdempotenceTol = 1e-11;
constexpr double kYosidaTol = 1e-12;
constexpr double kAdvectionWorkTol = 1e-10;
constexpr double kDiffusionOrder = 1.8;
constexpr double kCompositeOrder = 0.9;
constexpr double kTemporalOrder = 0.9;
constexpr double kAccumulatorTailTol = 1e-4;
constexpr double kEpsZeroTol = 1e-4;
constexpr double kWeakRatio = 1.8;
constexpr double kEquilibriumResidual = 1e-10;

struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok) pass = false;
        if (!detail.empty()) detail += "; ";
        detail += (ok ? "" : "!! ") + what;
    }
};

std::string fmt(const char* f, double a)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

ScenarioConfig scenario(const std::string& name) { return parse_config(canonical_config_text(name), name); }

const fs::path& work_dir()
{
    static const fs::path d = [] {
        fs::path p = fs::temp_directory_path() / "ksns_acceptance";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return d;
}

struct TimedRun {
    RunResult result;
    double seconds = 0.0;
};

TimedRun timed_run(const ScenarioConfig& cfg, const fs::path& out)
{
    RunOptions o;
    o.out_dir = out;
    const auto t0 = std::chrono::steady_clock::now();
    TimedRun r{run_scenario(cfg, o), 0.0};
    r.seconds = seconds_since(t0);
    return r;
}

// -- 1 ---------------------------------------------------------------------

Verdict uniform_oracle()
{
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    const UniformEquivalence u = uniform_equivalence_test(scenario("uniform"));
    const double secs = seconds_since(t0);
    v.require(u.summary.passed(), std::string("run ") + to_string(u.summary.status));
    v.require(u.max_relative_deviation <= kUniformDeviation, "rel. deviation " + fmt("%.3e", u.max_relative_deviation));
    v.require(u.max_u <= kUniformVelocity, "max|u| " + fmt("%.1e", u.max_u));
    v.require(secs < kUniformSeconds, "runtime " + fmt("%.1f", secs) + " s");
    return v;
}

// -- 2, 3 ------------------------------------------------------------------

Verdict stabilization(const TimedRun& run, bool check_tail, bool check_time)
{
    Verdict v;
    const StabilizationResult s = evaluate_stabilization(run.result, kDistanceTol);
    const auto& d = run.result.summary.final_distances;
    v.require(run.result.summary.passed(), std::string("run ") + to_string(run.result.summary.status));
    v.require(s.within_tolerance, "max distance " + fmt("%.3e", d.max()));
    if (check_tail) v.require(s.tail_monotone, "tail distances nonincreasing");
    if (check_time) v.require(run.seconds < kStabilizeSeconds, "runtime " + fmt("%.1f", run.seconds) + " s");
    return v;
}

// -- 4 ---------------------------------------------------------------------

Verdict invariants(const std::vector<const RunSummary*>& runs)
{
    Verdict v;
    double min_n = INFINITY, min_c = INFINITY, growth = 0, div = 0, ledger = 0, excess = 0;
    for (const RunSummary* s : runs) {
        const InvariantReport& r = s->invariants;
        min_n = std::min({min_n, r.min_n1, r.min_n2});
        min_c = std::min(min_c, r.min_c);
        growth = std::max(growth, r.max_c_increase);
        div = std::max(div, r.max_divergence);
        ledger = std::max(ledger, r.max_ledger_error);
        excess = std::max({excess, r.max_l1_excess[0], r.max_l1_excess[1]});
        v.require(s->status == RunStatus::completed, s->name + " " + to_string(s->status));
    }
    v.require(min_n > 0.0, "min n " + fmt("%.3e", min_n));
    v.require(min_c >= 0.0, "min c " + fmt("%.3e", min_c));
    v.require(growth <= kMaxCSlack, "max c growth " + fmt("%.1e", growth));
    v.require(div <= kDivergenceTol, "|div u| " + fmt("%.1e", div));
    v.require(ledger <= kLedgerTol, "ledger " + fmt("%.1e", ledger));
    v.require(excess <= kL1Slack, "L1 excess " + fmt("%.1e", excess));
    v.detail += " over " + std::to_string(runs.size()) + " runs, every step";
    return v;
}

// -- 5 ---------------------------------------------------------------------

Verdict operators()
{
    Verdict v;
    std::mt19937_64 rng(2024);
    double duality = 0.0, idem = 0.0, work = 0.0;
    for (const core::Grid& g : {test::grid2(32), test::grid3(12)}) {
        const core::ScalarField f = test::random_scalar(g, rng, -1.0, 1.0);
        const core::FaceField G = test::random_faces(g, rng);
        const core::ScalarField dG = core::divergence_faces(G);
        const core::FaceField gf = core::gradient_faces(f);
        const double scale =
            std::sqrt(core::inner(dG, dG) * core::inner(f, f)) + std::sqrt(core::inner(G, G) * core::inner(gf, gf));
        duality = std::max(duality, std::abs(core::inner(dG, f) + core::inner(G, gf)) / scale);

        const flow::FlowSolvers s(g);
        const core::VelocityField once = flow::project(s.pressure, test::random_faces(g, rng)).velocity;
        const core::VelocityField twice = flow::project(s.pressure, once).velocity;
        idem = std::max(idem, test::max_abs_diff(once, twice));

        const core::VelocityField u = flow::project(s.pressure, test::random_faces(g, rng)).velocity;
        const core::VelocityField w = flow::yosida_apply(s.stokes, u, 1e-2);
        work = std::max(work, std::abs(core::inner(u, flow::momentum_advection(w, u))) / core::inner(u, u));
    }

    // Yosida damping of a discrete no-slip eigenmode on 8^3.
    const core::Grid g = test::grid3(8);
    const flow::StokesOperator op(g);
    double yosida = 0.0;
    for (std::array<int, 3> k : {std::array<int, 3>{1, 1, 1}, {3, 2, 5}, {7, 8, 1}}) {
        core::VelocityField m(g);
        core::for_each_face(g, 0, [&](int i, int j, int kk, std::size_t f) {
            m.component(0)[f] = std::sin(M_PI * k[0] * i / 8.0) * std::sin(M_PI * k[1] * (j + 0.5) / 8.0) *
                                std::sin(M_PI * k[2] * (kk + 0.5) / 8.0);
        });
        m.zero_boundary();
        // Closed-form eigenvalue of the MAC Laplacian for this mode.
        double lambda = 0.0;
        for (int a = 0; a < 3; ++a) lambda += 4.0 * 64.0 * std::pow(std::sin(M_PI * k[a] / 16.0), 2);
        for (double eps : {1e-1, 1e-2, 1e-3}) {
            const core::VelocityField y = flow::yosida_apply(op, m, eps);
            core::VelocityField expect = m;
            for (double& x : expect.component(0)) x /= 1.0 + eps * lambda;
            yosida = std::max(yosida, test::max_abs_diff(y, expect));
        }
    }
    v.require(duality <= kDualityTol, "SBP duality " + fmt("%.1e", duality));
    v.require(idem <= kIdempotenceTol, "idempotence " + fmt("%.1e", idem));
    v.require(yosida <= kYosidaTol, "Yosida 8^3 " + fmt("%.1e", yosida));
    v.require(work <= kAdvectionWorkTol, "advection work/|u|^2 " + fmt("%.1e", work));
    return v;
}

// -- 6 ---------------------------------------------------------------------

Verdict mms()
{
    Verdict v;
    const MmsResult d = mms_convergence("diffusion");
    const MmsResult c = mms_convergence("composite");
    const TemporalOrder t = uniform_temporal_order(apply_overrides(
        scenario("uniform"), {"run.t_end = 2", "run.dt_fixed = 0.01", "output.cadence = 1"}));
    v.require(d.order >= kDiffusionOrder, "diffusion " + fmt("%.3f", d.order));
    v.require(c.order >= kCompositeOrder, "advection/chemotaxis " + fmt("%.3f", c.order));
    v.require(t.order >= kTemporalOrder, "temporal " + fmt("%.3f", t.order));
    return v;
}

// -- 7 ---------------------------------------------------------------------

double value_at(const std::vector<diagnostics::DiagnosticsRecord>& recs, double t,
                double diagnostics::Accumulators::*field)
{
    for (const auto& r : recs)
        if (std::abs(r.t - t) <= 1e-9) return r.acc.*field;
    return NAN;
}

void energy_checks(Verdict& v, const RunResult& run)
{
    const RunSummary& s = run.summary;
    const double K = s.energy_growth();
    double worst = -INFINITY;
    for (const auto& r : run.records) worst = std::max(worst, r.F - s.F_initial);
    const std::string tag = s.name + ": ";
    v.require(std::isfinite(K) && worst <= K + 1e-12, tag + "F <= F(0)+K, K=" + fmt("%.3e", K));
    v.require(s.G_final < s.G_initial, tag + "G " + fmt("%.4f", s.G_initial) + "->" + fmt("%.4f", s.G_final));
    const double T = s.final_time;
    const double dA1 = value_at(run.records, T, &diagnostics::Accumulators::A1) -
                       value_at(run.records, T - 1.0, &diagnostics::Accumulators::A1);
    const double dA2 = value_at(run.records, T, &diagnostics::Accumulators::A2) -
                       value_at(run.records, T - 1.0, &diagnostics::Accumulators::A2);
    v.require(dA1 <= kAccumulatorTailTol && dA2 <= kAccumulatorTailTol,
              tag + "last-unit dA1 " + fmt("%.1e", dA1) + " dA2 " + fmt("%.1e", dA2));
    v.require(std::isfinite(s.accumulators.Au) && std::isfinite(s.accumulators.Ac), tag + "A_u, A_c finite");
}

// -- 8 ---------------------------------------------------------------------

Verdict eps_sweep()
{
    Verdict v;
    const ScenarioConfig cfg = scenario("eps_sweep");
    const EpsSweep s = eps_consistency_sweep(cfg, {1e-1, 1e-2, 1e-3});
    v.require(s.complete && s.pairs.size() == 2, "sweep complete");
    if (s.pairs.size() == 2)
        v.require(s.cauchy(), "distances " + fmt("%.2e", s.pairs[0].c) + " -> " + fmt("%.2e", s.pairs[1].c) +
                                  " (c), strictly decreasing per field");
    const EpsSweep z = eps_consistency_sweep(cfg, {1e-6, 0.0});
    if (z.pairs.size() == 1) {
        const EpsDistance& d = z.pairs[0];
        const double m = std::max({d.n1, d.n2, d.c, d.u});
        v.require(m <= kEpsZeroTol, "eps 1e-6 vs 0: " + fmt("%.1e", m));
    } else {
        v.require(false, "eps 1e-6 vs 0 sweep incomplete: " + z.message);
    }
    return v;
}

// -- 9 ---------------------------------------------------------------------

Verdict weak_residuals()
{
    Verdict v;
    const ScenarioConfig coarse = scenario("weak_smooth");
    char dt[64];
    std::snprintf(dt, sizeof dt, "run.dt_fixed = %.17g", 0.5 * coarse.run.dt_fixed);
    const ScenarioConfig fine = apply_overrides(coarse, {"grid.cells = 64 64", dt});
    const WeakResidualRun a = weak_residual_run(coarse);
    const WeakResidualRun b = weak_residual_run(fine);
    const double ra[4] = {a.residuals.n1, a.residuals.n2, a.residuals.c, a.residuals.u};
    const double rb[4] = {b.residuals.n1, b.residuals.n2, b.residuals.c, b.residuals.u};
    const char* names[4] = {"n1", "n2", "c", "u"};
    v.require(a.summary.passed() && b.summary.passed(), "smooth runs completed");
    for (int i = 0; i < 4; ++i)
        v.require(ra[i] / rb[i] >= kWeakRatio, std::string(names[i]) + " x" + fmt("%.2f", ra[i] / rb[i]));

    const ScenarioConfig eq = parse_config(R"(name = "equilibrium"
grid.cells = 32 32
model.a1 = 0.5
model.a2 = 0.5
model.chi1 = 0.5
model.chi2 = 0.5
model.eps = 0.001
init.n1 = "2/3"
init.n2 = "2/3"
init.c = "1e-12"
potential.phi = "0.1*x"
run.t_end = 1
run.dt_fixed = 0.01
run.seed = 3
output.cadence = 0.5
)",
                                           "equilibrium");
    const WeakResidualRun e = weak_residual_run(eq);
    v.require(e.residuals.max() <= kEquilibriumResidual, "equilibrium " + fmt("%.1e", e.residuals.max()));
    return v;
}

// -- 10 --------------------------------------------------------------------

Verdict determinism(const fs::path& first, const ScenarioConfig& cfg)
{
    Verdict v;
    const fs::path second = work_dir() / "coexistence_repeat";
    run_scenario(cfg, RunOptions{second, std::nullopt, true, {}, {}});
    for (const char* f : {"diagnostics.csv", "summary.json"}) {
        const std::string a = slurp(first / f), b = slurp(second / f);
        v.require(!a.empty() && a == b, std::string(f) + " identical (" + std::to_string(a.size()) + " bytes)");
    }
    return v;
}

int failures = 0;

void report(int n, const Verdict& v)
{
    if (!v.pass) ++failures;
    std::printf("criterion %2d: %s  %s\n", n, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
}

}  // namespace

int main()
{
    report(1, uniform_oracle());

    const ScenarioConfig coex = scenario("coexistence");
    const ScenarioConfig excl = scenario("exclusion");
    const TimedRun r2 = timed_run(coex, work_dir() / "coexistence");
    report(2, stabilization(r2, true, true));
    const TimedRun r3 = timed_run(excl, work_dir() / "exclusion");
    report(3, stabilization(r3, false, false));

    const RunResult uni = run_scenario(scenario("uniform"));
    const RunResult sweep = run_scenario(scenario("eps_sweep"));
    report(4, invariants({&r2.result.summary, &r3.result.summary, &uni.summary, &sweep.summary}));
    report(5, operators());
    report(6, mms());

    Verdict e;
    energy_checks(e, r2.result);
    energy_checks(e, r3.result);
    report(7, e);

    report(8, eps_sweep());
    report(9, weak_residuals());
    report(10, determinism(work_dir() / "coexistence", coex));

    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
