#include "ksns/flow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ksns::flow {

namespace {

std::array<int, 3> compact_extent(const Grid& g, int axis)
{
    std::array<int, 3> e{1, 1, 1};
    for (int b = 0; b < g.dim(); ++b) e[b] = g.cells(b);
    e[axis] -= 1;
    return e;
}

}  // namespace

StokesOperator::StokesOperator(const Grid& g) : grid_(g)
{
    for (int a = 0; a < g.dim(); ++a) solvers_.emplace_back(g, core::Layout::face_no_slip, a);
}

std::vector<double> StokesOperator::gather(const VelocityField& u, int axis) const
{
    const auto e = compact_extent(grid_, axis);
    std::vector<double> out(solvers_[axis].size());
    const auto comp = u.component(axis);
    std::array<int, 3> off{0, 0, 0};
    off[axis] = 1;
    std::size_t idx = 0;
    for (int k = 0; k < e[2]; ++k)
        for (int j = 0; j < e[1]; ++j)
            for (int i = 0; i < e[0]; ++i, ++idx)
                out[idx] = comp[grid_.face_index(axis, i + off[0], j + off[1], k + off[2])];
    return out;
}

void StokesOperator::scatter(std::span<const double> values, VelocityField& u, int axis) const
{
    const auto e = compact_extent(grid_, axis);
    auto comp = u.component(axis);
    std::array<int, 3> off{0, 0, 0};
    off[axis] = 1;
    std::size_t idx = 0;
    for (int k = 0; k < e[2]; ++k)
        for (int j = 0; j < e[1]; ++j)
            for (int i = 0; i < e[0]; ++i, ++idx)
                comp[grid_.face_index(axis, i + off[0], j + off[1], k + off[2])] = values[idx];
}

void StokesOperator::apply_component(std::span<const double> x, std::span<double> y, int axis, double shift,
                                     double scale) const
{
    const auto e = compact_extent(grid_, axis);
    const std::size_t stride[3] = {1, static_cast<std::size_t>(e[0]),
                                   static_cast<std::size_t>(e[0]) * static_cast<std::size_t>(e[1])};
    std::size_t idx = 0;
    for (int k = 0; k < e[2]; ++k)
        for (int j = 0; j < e[1]; ++j)
            for (int i = 0; i < e[0]; ++i, ++idx) {
                const int c[3] = {i, j, k};
                const double xc = x[idx];
                double lap = 0.0;
                for (int b = 0; b < grid_.dim(); ++b) {
                    // Missing neighbour: zero wall face along the normal,
                    // antisymmetric ghost across a tangential wall.
                    const double missing = b == axis ? 0.0 : -xc;
                    const double lo = c[b] > 0 ? x[idx - stride[b]] : missing;
                    const double hi = c[b] < e[b] - 1 ? x[idx + stride[b]] : missing;
                    const double h = grid_.spacing(b);
                    lap += (hi - 2.0 * xc + lo) / (h * h);
                }
                y[idx] = shift * xc - scale * lap;
            }
}

VelocityField StokesOperator::apply(const VelocityField& u) const
{
    core::require_same_grid(grid_, u.grid(), "StokesOperator::apply");
    VelocityField out(grid_);
    for (int a = 0; a < grid_.dim(); ++a) {
        const auto x = gather(u, a);
        std::vector<double> y(x.size());
        apply_component(x, y, a, 0.0, 1.0);
        scatter(y, out, a);
    }
    return out;
}

VelocityField StokesOperator::solve_shifted(const VelocityField& rhs, double shift, double scale, double tol) const
{
    core::require_same_grid(grid_, rhs.grid(), "StokesOperator::solve_shifted");
    VelocityField out(grid_);
    const int cap = core::default_iteration_cap(grid_);
    for (int a = 0; a < grid_.dim(); ++a) {
        const auto b = gather(rhs, a);
        std::vector<double> x(b.size());
        const auto& fast = solvers_[a];
        core::pcg([&](std::span<const double> in, std::span<double> o) { apply_component(in, o, a, shift, scale); },
                  [&](std::span<const double> in, std::span<double> o) { fast.solve(in, o, shift, scale); }, b, x,
                  tol, cap, "velocity Helmholtz solve");
        scatter(x, out, a);
    }
    return out;
}

PressureSolver::PressureSolver(const Grid& g) : grid_(g), solver_(g, core::Layout::cell_neumann) {}

ScalarField PressureSolver::solve(const ScalarField& rhs, double tol) const
{
    core::require_same_grid(grid_, rhs.grid(), "PressureSolver::solve");
    const std::size_t n = rhs.size();
    double mean = 0.0;
    for (double v : rhs.values()) mean += v;
    mean /= static_cast<double>(n);

    // Solve (-lap) p = -(rhs - mean) on the mean-zero subspace.
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = -(rhs[i] - mean);

    ScalarField p(grid_);
    auto x = p.values();
    core::pcg(
        [&](std::span<const double> in, std::span<double> o) {
            core::laplacian_neumann(grid_, in, o);
            for (double& v : o) v = -v;
        },
        [&](std::span<const double> in, std::span<double> o) {
            solver_.solve(in, o, 0.0, 1.0);
            double m = 0.0;
            for (double v : o) m += v;
            m /= static_cast<double>(o.size());
            for (double& v : o) v -= m;
        },
        b, x, tol, core::default_iteration_cap(grid_), "pressure Poisson solve");

    double pm = 0.0;
    for (double v : p.values()) pm += v;
    pm /= static_cast<double>(n);
    for (double& v : p.values()) v -= pm;
    return p;
}

VelocityField yosida_apply(const StokesOperator& op, const VelocityField& u, double eps, double tol)
{
    core::require_finite(u, "yosida_apply input");
    if (eps == 0.0) return u;
    return op.solve_shifted(u, 1.0, eps, tol);
}

Projection project(const PressureSolver& solver, const VelocityField& u_star, double tol)
{
    core::require_finite(u_star, "project input");
    const ScalarField div = core::divergence_faces(u_star);
    Projection out{u_star, solver.solve(div, tol)};
    const FaceField grad = core::gradient_faces(out.potential);
    for (int a = 0; a < u_star.grid().dim(); ++a) {
        auto v = out.velocity.component(a);
        const auto gp = grad.component(a);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= gp[i];
    }
    return out;
}

VelocityField momentum_advection(const VelocityField& w, const VelocityField& u)
{
    core::require_same_grid(w.grid(), u.grid(), "momentum_advection");
    const Grid& g = u.grid();
    VelocityField out(g);
    for (int a = 0; a < g.dim(); ++a) {
        const auto ua = u.component(a);
        const auto wa = w.component(a);
        auto oa = out.component(a);
        for_each_face(g, a, [&](int i, int j, int k, std::size_t f) {
            if (core::is_boundary_face(g, a, i, j, k)) return;
            const int c[3] = {i, j, k};
            double sum = 0.0;
            for (int b = 0; b < g.dim(); ++b) {
                const double inv2h = 0.5 / g.spacing(b);
                if (b == a) {
                    const std::size_t s = g.face_stride(a, a);
                    const double w_hi = 0.5 * (wa[f] + wa[f + s]);
                    const double w_lo = 0.5 * (wa[f - s] + wa[f]);
                    sum += (w_hi * ua[f + s] - w_lo * ua[f - s]) * inv2h;
                    continue;
                }
                // Edge fluxes: average w_b over the two cells sharing face f.
                const auto wb = w.component(b);
                int left[3] = {i, j, k};
                left[a] -= 1;
                const std::size_t bl = g.face_index(b, left[0], left[1], left[2]);
                const std::size_t br = g.face_index(b, i, j, k);
                const std::size_t bs = g.face_stride(b, b);
                const std::size_t s = g.face_stride(a, b);
                if (c[b] < g.cells(b) - 1) {
                    const double w_hi = 0.5 * (wb[bl + bs] + wb[br + bs]);
                    sum += w_hi * ua[f + s] * inv2h;
                }
                if (c[b] > 0) {
                    const double w_lo = 0.5 * (wb[bl] + wb[br]);
                    sum -= w_lo * ua[f - s] * inv2h;
                }
            }
            oa[f] = sum;
        });
    }
    return out;
}

double advective_dt_limit(const VelocityField& u, double cfl_safety)
{
    return cfl_safety * u.grid().min_spacing() / std::max(1e-12, u.max_abs());
}

VelocityStep velocity_step(const FlowSolvers& solvers, const transport::State& state, const FaceField& forcing,
                           const model::ModelParams& params, double dt, const FlowSettings& settings)
{
    const Grid& g = state.grid();
    core::require_same_grid(g, state.u.grid(), "velocity_step");
    core::require_same_grid(g, forcing.grid(), "velocity_step forcing");
    core::require_finite(state.u, "velocity_step velocity");
    core::require_finite(forcing, "velocity_step forcing");
    const double limit = advective_dt_limit(state.u, settings.cfl_safety);
    if (!(dt > 0.0) || dt > limit)
        throw CflError("velocity step dt=" + std::to_string(dt) + " exceeds the advective limit " +
                       std::to_string(limit) + "; reduce dt");

    VelocityField rhs = state.u;
    if (params.kappa != 0) {
        const VelocityField w = yosida_apply(solvers.stokes, state.u, params.eps, settings.helmholtz_tol);
        const VelocityField adv = momentum_advection(w, state.u);
        for (int a = 0; a < g.dim(); ++a) {
            auto r = rhs.component(a);
            const auto n = adv.component(a);
            for (std::size_t i = 0; i < r.size(); ++i) r[i] -= dt * n[i];
        }
    }

    VelocityField u_star = solvers.stokes.solve_shifted(rhs, 1.0, dt, settings.helmholtz_tol);
    for (int a = 0; a < g.dim(); ++a) {
        auto v = u_star.component(a);
        const auto f = forcing.component(a);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += dt * f[i];
    }
    u_star.zero_boundary();

    Projection proj = project(solvers.pressure, u_star, settings.poisson_tol);
    VelocityStep out{std::move(proj.velocity), std::move(proj.potential)};
    for (double& v : out.p.values()) v = -v / dt;
    return out;
}

double velocity_gradient_energy(const VelocityField& u)
{
    const Grid& g = u.grid();
    double sum = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
        const auto ua = u.component(a);
        for_each_face(g, a, [&](int i, int j, int k, std::size_t f) {
            const int c[3] = {i, j, k};
            for (int b = 0; b < g.dim(); ++b) {
                const double h2 = g.spacing(b) * g.spacing(b);
                if (b == a) {
                    // Links from face f to f+1 along the normal, walls included.
                    if (c[a] < g.cells(a)) {
                        const double d = ua[f + g.face_stride(a, a)] - ua[f];
                        sum += d * d / h2;
                    }
                    continue;
                }
                if (core::is_boundary_face(g, a, i, j, k)) continue;
                if (c[b] < g.cells(b) - 1) {
                    const double d = ua[f + g.face_stride(a, b)] - ua[f];
                    sum += d * d / h2;
                }
                // Half of (u - ghost)^2 = 2u^2 for each tangential wall.
                if (c[b] == 0) sum += 2.0 * ua[f] * ua[f] / h2;
                if (c[b] == g.cells(b) - 1) sum += 2.0 * ua[f] * ua[f] / h2;
            }
        });
    }
    return sum * g.cell_volume();
}

KineticEnergyLedger kinetic_energy_ledger(const FlowSolvers& solvers, const transport::State& before,
                                          const transport::State& after, const FaceField& forcing,
                                          const model::ModelParams& params, double dt)
{
    KineticEnergyLedger led;
    led.energy_before = core::inner(before.u, before.u);
    led.energy_after = core::inner(after.u, after.u);
    led.energy_rate = (led.energy_after - led.energy_before) / dt;
    const VelocityField w = yosida_apply(solvers.stokes, before.u, params.eps);
    led.advection_work = core::inner(before.u, momentum_advection(w, before.u));
    led.viscous_dissipation = velocity_gradient_energy(after.u);
    led.forcing_work = core::inner(after.u, forcing);
    return led;
}

}  // namespace ksns::flow
