#include "ksns/harness/verification.hpp"

#include "ksns/core/linear_solve.hpp"
#include "ksns/core/operators.hpp"
#include "ksns/flow/flow.hpp"
#include "ksns/model/fields.hpp"
#include "ksns/transport/transport.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace ksns::harness {

using core::FaceField;
using core::Grid;
using core::ScalarField;
using core::VelocityField;
using model::Expression;

// ---------------------------------------------------------------------------
// Homogeneous reduction

std::vector<OdeSample> ode_oracle(const model::ModelParams& p, const std::array<double, 3>& y0, double T, double dt_ode)
{
    if (!(y0[0] > 0.0 && y0[1] > 0.0 && y0[2] > 0.0)) throw std::invalid_argument("ode_oracle needs positive y0");
    if (!(T >= 0.0 && dt_ode > 0.0)) throw std::invalid_argument("ode_oracle needs T >= 0 and dt_ode > 0");
    using Y = std::array<double, 3>;
    auto rhs = [&p](const Y& y) -> Y {
        const auto [r1, r2] = model::lv_reaction(y[0], y[1], p);
        return {r1, r2, -model::consumption_rate(y[0], y[1], p) * y[2]};
    };
    const long n = std::max(0L, static_cast<long>(std::ceil(T / dt_ode - 1e-9)));
    std::vector<OdeSample> out;
    out.reserve(static_cast<std::size_t>(n) + 1);
    Y y = y0;
    out.push_back({0.0, y[0], y[1], y[2]});
    for (long k = 0; k < n; ++k) {
        const double t0 = static_cast<double>(k) * dt_ode;
        const double t1 = k + 1 == n ? T : static_cast<double>(k + 1) * dt_ode;
        const double h = t1 - t0;
        const Y k1 = rhs(y);
        Y tmp;
        for (int i = 0; i < 3; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
        const Y k2 = rhs(tmp);
        for (int i = 0; i < 3; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
        const Y k3 = rhs(tmp);
        for (int i = 0; i < 3; ++i) tmp[i] = y[i] + h * k3[i];
        const Y k4 = rhs(tmp);
        for (int i = 0; i < 3; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        out.push_back({t1, y[0], y[1], y[2]});
    }
    return out;
}

namespace {

bool is_zero_constant(const Expression& e) { return e.is_constant() && e({0.0, 0.0, 0.0}) == 0.0; }

void require_uniform(const ScenarioConfig& cfg)
{
    const std::string src = cfg.name;
    if (!cfg.init.n1.is_constant() || !cfg.init.n2.is_constant() || !cfg.init.c.is_constant())
        throw ConfigError(src, 0, "uniform equivalence needs constant init.n1, init.n2 and init.c");
    for (const auto& e : cfg.init.u)
        if (!is_zero_constant(e)) throw ConfigError(src, 0, "uniform equivalence needs init.u at rest");
    for (int a = 0; a < cfg.grid.dim; ++a)
        if (!is_zero_constant(cfg.potential.derivative(a)))
            throw ConfigError(src, 0, "uniform equivalence needs a constant potential.phi");
    if (!(cfg.run.dt_fixed > 0.0)) throw ConfigError(src, 0, "uniform equivalence needs run.dt_fixed > 0");
}

}  // namespace

UniformEquivalence uniform_equivalence_test(const ScenarioConfig& cfg)
{
    require_uniform(cfg);
    const std::array<double, 3> y0{cfg.init.n1({0, 0, 0}), cfg.init.n2({0, 0, 0}), cfg.init.c({0, 0, 0})};
    const std::vector<OdeSample> ode = ode_oracle(cfg.model, y0, cfg.run.t_end, cfg.run.dt_fixed);
    UniformEquivalence out;
    out.dt = cfg.run.dt_fixed;
    std::size_t step = 0;
    RunOptions opts;
    opts.on_step = [&](const State&, const State& s, double) {
        ++step;
        const OdeSample& ref = ode.at(step);
        const double r[3] = {ref.n1, ref.n2, ref.c};
        const ScalarField* f[3] = {&s.n1, &s.n2, &s.c};
        for (int i = 0; i < 3; ++i) {
            const double dev = std::max(std::abs(f[i]->max() - r[i]), std::abs(f[i]->min() - r[i])) / std::abs(r[i]);
            out.deviation[i] = std::max(out.deviation[i], dev);
        }
        out.max_u = std::max(out.max_u, s.u.max_abs());
    };
    out.summary = run_scenario(cfg, opts).summary;
    out.max_relative_deviation = std::max({out.deviation[0], out.deviation[1], out.deviation[2]});
    return out;
}

TemporalOrder uniform_temporal_order(const ScenarioConfig& cfg)
{
    TemporalOrder t;
    t.dt = cfg.run.dt_fixed;
    t.deviation_coarse = uniform_equivalence_test(cfg).max_relative_deviation;
    ScenarioConfig fine = cfg;
    fine.run.dt_fixed = 0.5 * cfg.run.dt_fixed;
    t.deviation_fine = uniform_equivalence_test(fine).max_relative_deviation;
    t.order = std::log2(t.deviation_coarse / t.deviation_fine);
    return t;
}

// ---------------------------------------------------------------------------
// Manufactured solutions

double fitted_order(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fitted_order needs matching samples");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

const std::vector<std::string>& mms_suites()
{
    static const std::vector<std::string> s = {"diffusion", "advection", "chemotaxis", "composite", "stokes", "zero"};
    return s;
}

namespace {

std::string paren(const Expression& e) { return "(" + e.source() + ")"; }

Expression sum_of(const std::vector<std::string>& parts)
{
    std::string s = "0";
    for (const auto& p : parts) s += "+" + p;
    return Expression::parse(s);
}

struct ScalarProblem {
    Expression A, B;      // exact n = A + t B
    bool advect = false;
    bool chemo = false;
    double chi = 1.0;
    Expression stream;    // velocity u = (d_y s, -d_x s)
    Expression signal;    // frozen chemical c
};

// Forcing f = F0 + t F1 for n_t + u.grad n = lap n - chi div(n grad c) + f.
std::pair<Expression, Expression> forcing(const ScalarProblem& pb)
{
    const Expression ux = pb.stream.derivative(1);
    const Expression uy = Expression::parse("-" + paren(pb.stream)).derivative(0);
    auto op = [&](const Expression& e) {
        std::vector<std::string> parts;
        parts.push_back("-" + paren(sum_of({paren(e.derivative(0).derivative(0)), paren(e.derivative(1).derivative(1))})));
        if (pb.advect)
            parts.push_back(paren(ux) + "*" + paren(e.derivative(0)) + "+" + paren(uy) + "*" + paren(e.derivative(1)));
        if (pb.chemo) {
            std::vector<std::string> div;
            for (int a = 0; a < 2; ++a)
                div.push_back(paren(Expression::parse(paren(e) + "*" + paren(pb.signal.derivative(a))).derivative(a)));
            char chi[32];
            std::snprintf(chi, sizeof chi, "%.17g", pb.chi);
            parts.push_back(std::string(chi) + "*" + paren(sum_of(div)));
        }
        return sum_of(parts);
    };
    return {Expression::parse(paren(pb.B) + "+" + paren(op(pb.A))), op(pb.B)};
}

VelocityField stream_velocity(const Grid& g, const Expression& psi)
{
    const double hx = g.spacing(0), hy = g.spacing(1);
    VelocityField u(g);
    for (int j = 0; j < g.cells(1); ++j)
        for (int i = 1; i < g.cells(0); ++i)
            u(0, i, j, 0) = (psi({i * hx, (j + 1) * hy, 0.0}) - psi({i * hx, j * hy, 0.0})) / hy;
    for (int j = 1; j < g.cells(1); ++j)
        for (int i = 0; i < g.cells(0); ++i)
            u(1, i, j, 0) = -(psi({(i + 1) * hx, j * hy, 0.0}) - psi({i * hx, j * hy, 0.0})) / hx;
    return u;
}

// Discrete L2 error against the exact solution at cell centres.
double l2_error(const ScalarField& n, const ScalarField& A, const ScalarField& B, double t)
{
    double e = 0.0;
    for (std::size_t i = 0; i < n.size(); ++i) e += std::pow(n[i] - (A[i] + t * B[i]), 2);
    return std::sqrt(e * n.grid().cell_volume());
}

double solve_scalar_problem(const ScalarProblem& pb, int cells, double dt_target, double T)
{
    const int dims[] = {cells, cells};
    const double lens[] = {1.0, 1.0};
    const Grid g = Grid::make(2, dims, lens);
    const auto [F0e, F1e] = forcing(pb);
    const ScalarField A = model::sample_cells(g, pb.A), B = model::sample_cells(g, pb.B);
    const ScalarField F0 = model::sample_cells(g, F0e), F1 = model::sample_cells(g, F1e);
    const VelocityField u = pb.advect ? stream_velocity(g, pb.stream) : VelocityField(g);
    const ScalarField c = pb.chemo ? model::sample_cells(g, pb.signal) : ScalarField(g, 1.0);
    const transport::ScalarDiffusionSolver diffusion(g);
    const long steps = std::max(1L, static_cast<long>(std::ceil(T / dt_target - 1e-9)));
    const double dt = T / static_cast<double>(steps);
    ScalarField n = A;
    for (long k = 0; k < steps; ++k) {
        const double t1 = static_cast<double>(k + 1) * dt;
        if (pb.advect) {
            const ScalarField a = core::advect_upwind(n, u);
            for (std::size_t i = 0; i < n.size(); ++i) n[i] -= dt * a[i];
        }
        if (pb.chemo) {
            const ScalarField d = transport::chemotaxis_div(n, c, pb.chi, 0.0);
            for (std::size_t i = 0; i < n.size(); ++i) n[i] -= dt * d[i];
        }
        for (std::size_t i = 0; i < n.size(); ++i) n[i] += dt * (F0[i] + t1 * F1[i]);
        n = diffusion.solve(n, dt, 1e-13);
    }
    return l2_error(n, A, B, T);
}

MmsResult spatial_suite(const std::string& name, const ScalarProblem& pb, double T,
                        const std::function<double(double)>& dt_of_h, double lo, double hi,
                        std::vector<int> levels = {32, 64, 128})
{
    MmsResult r;
    r.suite = name;
    r.variable = "h";
    r.expected_min = lo;
    r.expected_max = hi;
    std::vector<double> hs, es;
    for (int cells : levels) {
        const double h = 1.0 / cells;
        const double dt = dt_of_h(h);
        const double e = solve_scalar_problem(pb, cells, dt, T);
        r.levels.push_back({cells, h, dt, e});
        hs.push_back(h);
        es.push_back(e);
    }
    r.order = fitted_order(hs, es);
    r.passed = r.order >= lo && r.order <= hi;
    return r;
}

MmsResult stokes_suite()
{
    MmsResult r;
    r.suite = "stokes";
    r.variable = "dt";
    r.expected_min = 0.9;
    r.expected_max = std::numeric_limits<double>::infinity();
    const int dims[] = {32, 32};
    const double lens[] = {1.0, 1.0};
    const Grid g = Grid::make(2, dims, lens);
    const flow::FlowSolvers solvers(g);
    model::ModelParams p;
    p.kappa = 0;
    const FaceField f = model::sample_faces(
        g, {Expression::parse("sin(pi*x)^2*sin(2*pi*y) + x"), Expression::parse("-sin(2*pi*x)*sin(pi*y)^2")});
    const double T = 0.2;
    std::vector<VelocityField> finals;
    std::vector<double> dts;
    for (double dt : {0.02, 0.01, 0.005, 0.0025, 0.00125}) {
        transport::State s{0.0, ScalarField(g, 1.0), ScalarField(g, 1.0), ScalarField(g, 1.0), VelocityField(g), ScalarField(g)};
        const long steps = std::lround(T / dt);
        for (long k = 0; k < steps; ++k) s.u = flow::velocity_step(solvers, s, f, p, dt).u;
        finals.push_back(s.u);
        dts.push_back(dt);
    }
    std::vector<double> xs, es;
    for (std::size_t k = 0; k + 1 < finals.size(); ++k) {
        double e = 0.0;
        for (int a = 0; a < 2; ++a)
            for (std::size_t i = 0; i < finals[k].component(a).size(); ++i)
                e = std::max(e, std::abs(finals[k].component(a)[i] - finals[k + 1].component(a)[i]));
        r.levels.push_back({32, 1.0 / 32, dts[k], e});
        xs.push_back(dts[k]);
        es.push_back(e);
    }
    r.order = fitted_order(xs, es);
    r.passed = r.order >= r.expected_min;
    return r;
}

MmsResult zero_suite()
{
    MmsResult r;
    r.suite = "zero";
    r.variable = "none";
    r.expected_min = 0.0;
    r.expected_max = 1e-12;
    ScalarProblem pb;
    pb.A = Expression::constant(1.5);
    pb.B = Expression::constant(0.0);
    pb.advect = pb.chemo = true;
    pb.stream = Expression::parse("0.1*sin(pi*x)^2*sin(pi*y)^2");
    pb.signal = Expression::constant(2.0);
    double worst = 0.0;
    for (int cells : {16, 32}) {
        const double e = solve_scalar_problem(pb, cells, 0.25 / cells, 0.25);
        r.levels.push_back({cells, 1.0 / cells, 0.25 / cells, e});
        worst = std::max(worst, e);
    }
    r.order = 0.0;
    r.passed = worst <= r.expected_max;
    return r;
}

}  // namespace

MmsResult mms_convergence(const std::string& suite)
{
    ScalarProblem pb;
    pb.A = Expression::parse("1 + 0.5*cos(pi*x)*cos(pi*y)");
    pb.B = Expression::parse("0.3*cos(2*pi*x)*cos(pi*y)");
    pb.stream = Expression::parse("0.1*sin(pi*x)^2*sin(pi*y)^2");
    pb.signal = Expression::parse("1 + 0.3*cos(pi*x)*cos(pi*y)");
    const double inf = std::numeric_limits<double>::infinity();
    if (suite == "diffusion")
        return spatial_suite(suite, pb, 0.05, [](double h) { return 0.5 * h * h; }, 1.8, inf);
    if (suite == "advection") {
        pb.advect = true;
        // Low-speed upwind transport reaches the asymptotic range only past 128 cells.
        return spatial_suite(suite, pb, 0.25, [](double h) { return 0.5 * h; }, 0.9, 1.5, {128, 256, 512});
    }
    if (suite == "chemotaxis") {
        pb.chemo = true;
        return spatial_suite(suite, pb, 0.25, [](double h) { return 0.5 * h; }, 0.9, inf);
    }
    if (suite == "composite") {
        pb.advect = pb.chemo = true;
        return spatial_suite(suite, pb, 0.25, [](double h) { return 0.5 * h; }, 0.9, inf);
    }
    if (suite == "stokes") return stokes_suite();
    if (suite == "zero") return zero_suite();
    throw std::invalid_argument("unknown MMS suite '" + suite + "'");
}

// ---------------------------------------------------------------------------
// Regularisation sweep

bool EpsSweep::cauchy() const
{
    for (std::size_t k = 0; k + 1 < pairs.size(); ++k) {
        const EpsDistance& a = pairs[k];
        const EpsDistance& b = pairs[k + 1];
        if (!(b.n1 < a.n1 && b.n2 < a.n2 && b.c < a.c && b.u < a.u)) return false;
    }
    return true;
}

namespace {

struct Frame {
    double t;
    ScalarField n1, n2, c;
    VelocityField u;
};

double squared_difference(const ScalarField& a, const ScalarField& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s * a.grid().cell_volume();
}

double squared_difference(const VelocityField& a, const VelocityField& b)
{
    double s = 0.0;
    for (int ax = 0; ax < a.grid().dim(); ++ax) {
        const auto x = a.component(ax), y = b.component(ax);
        for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
    }
    return s * a.grid().cell_volume();
}

EpsDistance spacetime_distance(const std::vector<Frame>& a, const std::vector<Frame>& b)
{
    if (a.size() != b.size()) throw std::runtime_error("eps sweep runs produced different output times");
    EpsDistance d;
    for (std::size_t j = 0; j < a.size(); ++j) {
        // Trapezoid weights over the output times.
        double w = 0.0;
        if (j > 0) w += 0.5 * (a[j].t - a[j - 1].t);
        if (j + 1 < a.size()) w += 0.5 * (a[j + 1].t - a[j].t);
        d.n1 += w * squared_difference(a[j].n1, b[j].n1);
        d.n2 += w * squared_difference(a[j].n2, b[j].n2);
        d.c += w * squared_difference(a[j].c, b[j].c);
        d.u += w * squared_difference(a[j].u, b[j].u);
    }
    d.n1 = std::sqrt(d.n1);
    d.n2 = std::sqrt(d.n2);
    d.c = std::sqrt(d.c);
    d.u = std::sqrt(d.u);
    return d;
}

}  // namespace

EpsSweep eps_consistency_sweep(const ScenarioConfig& cfg, const std::vector<double>& eps_list)
{
    for (std::size_t k = 0; k < eps_list.size(); ++k) {
        if (!(eps_list[k] >= 0.0) || !std::isfinite(eps_list[k]))
            throw ConfigError("<eps list>", 0, "eps values must be finite and >= 0");
        if (k > 0 && !(eps_list[k] < eps_list[k - 1]))
            throw ConfigError("<eps list>", 0, "eps values must be strictly decreasing");
    }
    EpsSweep sweep;
    std::vector<Frame> previous;
    for (double eps : eps_list) {
        ScenarioConfig c = cfg;
        c.model.eps = eps;
        std::vector<Frame> frames;
        RunOptions opts;
        opts.on_output = [&frames](const State& s, const diagnostics::DiagnosticsRecord&) {
            frames.push_back({s.t, s.n1, s.n2, s.c, s.u});
        };
        const RunResult r = run_scenario(c, opts);
        sweep.runs.push_back(r.summary);
        if (!r.summary.passed()) {
            sweep.complete = false;
            sweep.message = "run with eps=" + std::to_string(eps) + " failed: " +
                            (r.summary.message.empty() ? std::string("invariant violation") : r.summary.message);
            return sweep;
        }
        sweep.eps.push_back(eps);
        if (!previous.empty()) {
            EpsDistance d = spacetime_distance(previous, frames);
            d.eps_a = sweep.eps[sweep.eps.size() - 2];
            d.eps_b = eps;
            sweep.pairs.push_back(d);
        }
        previous = std::move(frames);
    }
    return sweep;
}

// ---------------------------------------------------------------------------
// Large-time behaviour

StabilizationResult evaluate_stabilization(RunResult run, double tolerance)
{
    StabilizationResult out;
    out.tolerance = tolerance;
    const RunSummary& s = run.summary;
    const diagnostics::Distances& d = s.final_distances;
    out.within_tolerance = s.limit_asserted && d.n1 <= tolerance && d.n2 <= tolerance && d.c <= tolerance &&
                           d.u <= tolerance;
    out.tail_monotone = true;
    const double tail_start = 0.8 * s.final_time;
    const diagnostics::DiagnosticsRecord* prev = nullptr;
    for (const auto& r : run.records) {
        if (r.t < tail_start) continue;
        if (prev) {
            const double a[4] = {prev->dist.n1, prev->dist.n2, prev->dist.c, prev->dist.u};
            const double b[4] = {r.dist.n1, r.dist.n2, r.dist.c, r.dist.u};
            for (int i = 0; i < 4; ++i)
                if (b[i] > a[i] + 1e-6) out.tail_monotone = false;
        }
        prev = &r;
    }
    out.passed = s.passed() && out.within_tolerance && out.tail_monotone;
    char buf[256];
    std::snprintf(buf, sizeof buf, "final distances n1=%.3e n2=%.3e c=%.3e u=%.3e (tolerance %.1e)", d.n1, d.n2, d.c,
                  d.u, tolerance);
    out.verdict = std::string(out.passed ? "pass: " : "fail: ") + buf;
    if (!s.passed()) out.verdict += "; run " + std::string(to_string(s.status)) + " " + s.message;
    if (!s.invariants.ok()) out.verdict += "; invariant violated: " + s.invariants.violations.front();
    if (!out.tail_monotone) out.verdict += "; distances not monotone over the final 20%";
    if (!s.limit_asserted) out.verdict += "; regime has no asserted limit";
    out.run = std::move(run);
    return out;
}

StabilizationResult stabilization_experiment(StabilizationCase c, const std::vector<std::string>& overrides,
                                             const RunOptions& opts, double tolerance)
{
    const ScenarioConfig cfg = apply_overrides(canonical_scenario(c), overrides);
    return evaluate_stabilization(run_scenario(cfg, opts), tolerance);
}

// ---------------------------------------------------------------------------
// Weak identities

WeakResidualRun weak_residual_run(const ScenarioConfig& cfg)
{
    const Grid g = cfg.grid.make();
    const FaceField grad_phi = model::potential_gradient(g, cfg.potential);
    WeakResidualRun out;
    out.test_functions = diagnostics::draw_test_functions(cfg.run.seed, 0.0, cfg.run.t_end);
    diagnostics::WeakResidualMonitor monitor(g, cfg.model, grad_phi, out.test_functions);
    RunOptions opts;
    opts.on_step = [&monitor](const State& a, const State& b, double) { monitor.add(a, b); };
    out.summary = run_scenario(cfg, opts).summary;
    out.residuals = monitor.residuals();
    return out;
}

}  // namespace ksns::harness
