#include "ksns/transport/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ksns::transport {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Largest per-cell outflow rate sum_faces max(out-normal v, 0) / h.
double max_outflow_rate(const FaceField& v)
{
    const Grid& g = v.grid();
    ScalarField rate(g);
    for (int a = 0; a < g.dim(); ++a) {
        const auto comp = v.component(a);
        const std::size_t fs = g.face_stride(a, a);
        const double inv_h = 1.0 / g.spacing(a);
        core::for_each_cell(g, [&](int i, int j, int k, std::size_t idx) {
            const std::size_t lo = g.face_index(a, i, j, k);
            rate[idx] += (std::max(comp[lo + fs], 0.0) + std::max(-comp[lo], 0.0)) * inv_h;
        });
    }
    return rate.max();
}

}  // namespace

ScalarDiffusionSolver::ScalarDiffusionSolver(const Grid& g) : grid_(g), solver_(g, core::Layout::cell_neumann) {}

ScalarField ScalarDiffusionSolver::solve(const ScalarField& b, double dt, double tol) const
{
    core::require_same_grid(grid_, b.grid(), "ScalarDiffusionSolver::solve");
    ScalarField x(grid_);
    auto xs = x.values();
    core::pcg(
        [&](std::span<const double> in, std::span<double> out) {
            core::laplacian_neumann(grid_, in, out);
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = in[i] - dt * out[i];
        },
        [&](std::span<const double> in, std::span<double> out) { solver_.solve(in, out, 1.0, dt); }, b.values(), xs,
        tol, core::default_iteration_cap(grid_), "scalar diffusion solve");
    return x;
}

ScalarField chemotaxis_div(const ScalarField& n, const ScalarField& c, double chi, double eps)
{
    core::require_same_grid(n.grid(), c.grid(), "chemotaxis_div");
    core::require_finite(n, "chemotaxis_div density");
    const Grid& g = n.grid();
    const FaceField grad_c = core::gradient_faces(c);
    FaceField flux(g);
    for (int a = 0; a < g.dim(); ++a) {
        const auto gc = grad_c.component(a);
        auto fl = flux.component(a);
        const std::size_t s = g.stride(a);
        core::for_each_face(g, a, [&](int i, int j, int k, std::size_t f) {
            if (core::is_boundary_face(g, a, i, j, k)) return;
            const std::size_t hi = g.index(i, j, k);
            const double donor = gc[f] > 0.0 ? n[hi - s] : n[hi];
            fl[f] = chi * model::chemo_mobility(donor, eps) * gc[f];
        });
    }
    return core::divergence_faces(flux);
}

std::pair<double, double> reaction_update(double n1, double n2, const model::ModelParams& p, double dt)
{
    const double k1 = dt * p.mu1;
    const double k2 = dt * p.mu2;
    return {n1 * (1.0 + k1) / (1.0 + k1 * (n1 + p.a1 * n2)), n2 * (1.0 + k2) / (1.0 + k2 * (n2 + p.a2 * n1))};
}

double donor_cell_dt_limit(const VelocityField& u, double safety)
{
    const double rate = max_outflow_rate(u);
    return rate > 0.0 ? safety / rate : kInf;
}

double chemotactic_dt_limit(const ScalarField& c, const model::ModelParams& p, double safety)
{
    const double chi = std::max(p.chi1, p.chi2);
    if (chi == 0.0) return kInf;
    FaceField drift = core::gradient_faces(c);
    double max_drift = 0.0;
    for (int a = 0; a < c.grid().dim(); ++a)
        for (double& v : drift.component(a)) {
            v *= chi;
            max_drift = std::max(max_drift, std::abs(v));
        }
    if (max_drift == 0.0) return kInf;
    // Max-drift rule and donor-cell outflow bound, whichever is tighter.
    const double by_drift = safety * c.grid().min_spacing() / max_drift;
    return std::min(by_drift, safety / max_outflow_rate(drift));
}

double reaction_dt_limit(const ScalarField& n1, const ScalarField& n2, const model::ModelParams& p, double safety)
{
    double worst = 0.0;
    for (std::size_t i = 0; i < n1.size(); ++i) {
        worst = std::max(worst, p.mu1 * (1.0 + n1[i] + p.a1 * n2[i]));
        worst = std::max(worst, p.mu2 * (1.0 + n2[i] + p.a2 * n1[i]));
    }
    return worst > 0.0 ? safety / worst : kInf;
}

double MassLedger::relative_error() const
{
    double worst = 0.0;
    for (int s = 0; s < 2; ++s) {
        const double transported = mass_after[s] - mass_before[s] - reaction_change[s];
        worst = std::max(worst, std::abs(transported) / mass_before[s]);
    }
    return worst;
}

ScalarStep scalar_step(const ScalarDiffusionSolver& diffusion, const State& state, const model::ModelParams& p,
                       double dt, const TransportSettings& settings)
{
    const Grid& g = state.grid();
    core::require_same_grid(g, diffusion.grid(), "scalar_step");
    const double limit = std::min({donor_cell_dt_limit(state.u, settings.cfl_safety),
                                   chemotactic_dt_limit(state.c, p, settings.cfl_safety),
                                   reaction_dt_limit(state.n1, state.n2, p, settings.cfl_safety)});
    if (!(dt > 0.0) || dt > limit)
        throw CflError("scalar step dt=" + std::to_string(dt) + " exceeds the transport limit " +
                       std::to_string(limit) + "; reduce dt");

    ScalarStep out{state.n1, state.n2, state.c, {}};
    out.ledger.mass_before[0] = core::integrate(state.n1);
    out.ledger.mass_before[1] = core::integrate(state.n2);

    auto explicit_update = [dt](ScalarField& f, const ScalarField& rate) {
        for (std::size_t i = 0; i < f.size(); ++i) f[i] -= dt * rate[i];
    };

    // Fluid advection.
    {
        const ScalarField a1 = core::advect_upwind(out.n1, state.u);
        const ScalarField a2 = core::advect_upwind(out.n2, state.u);
        const ScalarField ac = core::advect_upwind(out.c, state.u);
        explicit_update(out.n1, a1);
        explicit_update(out.n2, a2);
        explicit_update(out.c, ac);
    }
    // Chemotactic drift up the advected signal.
    {
        const ScalarField d1 = chemotaxis_div(out.n1, out.c, p.chi1, p.eps);
        const ScalarField d2 = chemotaxis_div(out.n2, out.c, p.chi2, p.eps);
        explicit_update(out.n1, d1);
        explicit_update(out.n2, d2);
    }
    // Diffusion.
    out.n1 = diffusion.solve(out.n1, dt, settings.helmholtz_tol);
    out.n2 = diffusion.solve(out.n2, dt, settings.helmholtz_tol);
    out.c = diffusion.solve(out.c, dt, settings.helmholtz_tol);

    out.ledger.mass_after[0] = core::integrate(out.n1);
    out.ledger.mass_after[1] = core::integrate(out.n2);
    const double pre_reaction[2] = {out.ledger.mass_after[0], out.ledger.mass_after[1]};

    // Kinetics and consumption. The signal decays by the exponential of the
    // trapezoidal consumption integral over the kinetic substep.
    for (std::size_t i = 0; i < out.n1.size(); ++i) {
        const double g0 = model::consumption_rate(out.n1[i], out.n2[i], p);
        const auto [m1, m2] = reaction_update(out.n1[i], out.n2[i], p, dt);
        const double g1 = model::consumption_rate(m1, m2, p);
        out.n1[i] = m1;
        out.n2[i] = m2;
        out.c[i] *= std::exp(-0.5 * dt * (g0 + g1));
    }

    out.ledger.mass_after[0] = core::integrate(out.n1);
    out.ledger.mass_after[1] = core::integrate(out.n2);
    out.ledger.reaction_change[0] = out.ledger.mass_after[0] - pre_reaction[0];
    out.ledger.reaction_change[1] = out.ledger.mass_after[1] - pre_reaction[1];

    const std::pair<const char*, const ScalarField*> fields[] = {{"n1", &out.n1}, {"n2", &out.n2}, {"c", &out.c}};
    for (const auto& [name, f] : fields) {
        if (!f->all_finite()) throw NonFiniteError(std::string("scalar step produced a non-finite ") + name);
        if (f->min() < -1e-13)
            throw SchemeError(std::string("positivity lost in ") + name + " (min " + std::to_string(f->min()) + ")");
    }
    return out;
}

}  // namespace ksns::transport
