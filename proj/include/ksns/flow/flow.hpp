#pragma once

#include "ksns/core/linear_solve.hpp"
#include "ksns/core/operators.hpp"
#include "ksns/model/params.hpp"
#include "ksns/transport/state.hpp"

#include <array>
#include <vector>

namespace ksns::flow {

using core::FaceField;
using core::Grid;
using core::ScalarField;
using core::VelocityField;

/// Solver tolerances and the advective CFL safety factor
/// (config keys flow.poisson_tol, flow.helmholtz_tol, flow.cfl_safety).
struct FlowSettings {
    double poisson_tol = 1e-12;
    double helmholtz_tol = 1e-12;
    double cfl_safety = 0.4;

    bool operator==(const FlowSettings&) const = default;
};

/// Discrete Stokes operator A_h: the componentwise negative Laplacian on
/// MAC faces with no-slip walls. Normal components see zero wall faces,
/// tangential components an antisymmetric ghost across the wall.
class StokesOperator {
public:
    explicit StokesOperator(const Grid& g);

    const Grid& grid() const { return grid_; }

    /// A_h u on interior faces; wall faces of the result are 0.
    VelocityField apply(const VelocityField& u) const;

    /// Solves (shift*I + scale*A_h) v = rhs componentwise by PCG.
    VelocityField solve_shifted(const VelocityField& rhs, double shift, double scale, double tol) const;

    /// Compact interior unknowns of one component, and back.
    std::vector<double> gather(const VelocityField& u, int axis) const;
    void scatter(std::span<const double> values, VelocityField& u, int axis) const;

private:
    void apply_component(std::span<const double> x, std::span<double> y, int axis, double shift, double scale) const;

    Grid grid_;
    std::vector<core::FastDiagonalSolver> solvers_;
};

/// Pure-Neumann Poisson solve with a mean-zero gauge.
class PressureSolver {
public:
    explicit PressureSolver(const Grid& g);

    const Grid& grid() const { return grid_; }

    /// Returns p with laplacian_neumann(p) = rhs - mean(rhs) and mean(p) = 0.
    ScalarField solve(const ScalarField& rhs, double tol) const;

private:
    Grid grid_;
    core::FastDiagonalSolver solver_;
};

/// Assembled operators for one grid. Immutable after construction.
struct FlowSolvers {
    explicit FlowSolvers(const Grid& g) : stokes(g), pressure(g) {}
    StokesOperator stokes;
    PressureSolver pressure;
};

/// Yosida smoothing (I + eps A_h)^{-1} u; eps == 0 returns u.
VelocityField yosida_apply(const StokesOperator& op, const VelocityField& u, double eps, double tol = 1e-12);

struct Projection {
    VelocityField velocity;  ///< u_star - grad(potential)
    ScalarField potential;   ///< mean-zero solution of lap(potential) = div(u_star)
};

/// Chorin projection onto the discretely solenoidal subspace.
Projection project(const PressureSolver& solver, const VelocityField& u_star, double tol = 1e-12);

/// Skew-symmetric transport of u by w: half the sum of the divergence form
/// and the advective form, so <u, N(w, u)> vanishes to roundoff for any w
/// with zero wall faces.
VelocityField momentum_advection(const VelocityField& w, const VelocityField& u);

/// Largest dt allowed by dt <= cfl_safety * min(h) / max(1e-12, max|u|).
double advective_dt_limit(const VelocityField& u, double cfl_safety);

struct VelocityStep {
    VelocityField u;
    ScalarField p;  ///< "+grad P" convention: u_new = u_star + dt grad(p)
};

/// One velocity step: explicit skew-symmetric advection by the smoothed
/// velocity (scaled by kappa), backward-Euler diffusion, explicit forcing,
/// projection. Throws CflError when dt breaks the advective bound.
VelocityStep velocity_step(const FlowSolvers& solvers, const transport::State& state, const FaceField& forcing,
                           const model::ModelParams& params, double dt, const FlowSettings& settings = {});

/// Per-step kinetic energy bookkeeping.
struct KineticEnergyLedger {
    double energy_before = 0.0;        ///< int |u|^2 before the step
    double energy_after = 0.0;
    double energy_rate = 0.0;          ///< (after - before) / dt
    double advection_work = 0.0;       ///< int u . (Y u . grad) u, ~0 for the skew form
    double viscous_dissipation = 0.0;  ///< int |grad u_after|^2
    double forcing_work = 0.0;         ///< int u_after . f
};

KineticEnergyLedger kinetic_energy_ledger(const FlowSolvers& solvers, const transport::State& before,
                                          const transport::State& after, const FaceField& forcing,
                                          const model::ModelParams& params, double dt);

/// int |grad u|^2 as a sum of squared neighbour differences, wall links
/// included (equal to <u, A_h u>).
double velocity_gradient_energy(const VelocityField& u);

}  // namespace ksns::flow
