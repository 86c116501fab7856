#pragma once

#include "ksns/core/linear_solve.hpp"
#include "ksns/core/operators.hpp"
#include "ksns/model/params.hpp"
#include "ksns/transport/state.hpp"

#include <utility>

namespace ksns::transport {

using core::FaceField;
using core::Grid;
using core::ScalarField;
using core::VelocityField;

/// Step policy (config keys transport.cfl_safety, transport.dt_max,
/// transport.dt_min) plus the scalar diffusion tolerance.
struct TransportSettings {
    double cfl_safety = 0.4;
    double dt_max = 0.01;
    double dt_min = 1e-9;
    double helmholtz_tol = 1e-12;

    bool operator==(const TransportSettings&) const = default;
};

/// Backward-Euler diffusion solve (I - dt lap) x = b with Neumann walls.
class ScalarDiffusionSolver {
public:
    explicit ScalarDiffusionSolver(const Grid& g);
    const Grid& grid() const { return grid_; }
    ScalarField solve(const ScalarField& b, double dt, double tol) const;

private:
    Grid grid_;
    core::FastDiagonalSolver solver_;
};

/// div(chi m(n) grad c) with the mobility m = n/(1+eps n) taken from the
/// donor cell selected by the sign of grad c on each face.
ScalarField chemotaxis_div(const ScalarField& n, const ScalarField& c, double chi, double eps);

/// Patankar-type Lotka-Volterra update
/// n_i' = n_i (1 + dt mu_i) / (1 + dt mu_i (n_i + a_i n_other)).
std::pair<double, double> reaction_update(double n1, double n2, const model::ModelParams& p, double dt);

/// dt bounds of the explicit substeps. Each returns +inf when nothing limits.
double donor_cell_dt_limit(const VelocityField& u, double safety);
double chemotactic_dt_limit(const ScalarField& c, const model::ModelParams& p, double safety);
double reaction_dt_limit(const ScalarField& n1, const ScalarField& n2, const model::ModelParams& p, double safety);

/// Mass bookkeeping of one scalar step, per species.
struct MassLedger {
    double mass_before[2] = {0.0, 0.0};
    double mass_after[2] = {0.0, 0.0};
    double reaction_change[2] = {0.0, 0.0};  ///< int (n after reaction - n before reaction)

    /// |delta mass - reaction change| / mass_before, worst species.
    double relative_error() const;
};

struct ScalarStep {
    ScalarField n1;
    ScalarField n2;
    ScalarField c;
    MassLedger ledger;
};

/// One split step for n1, n2, c: upwind fluid advection, upwind
/// chemotaxis, backward-Euler diffusion, then Patankar kinetics and
/// exponential consumption. Throws CflError when dt exceeds an explicit
/// bound and SchemeError when a density drops below -1e-13.
ScalarStep scalar_step(const ScalarDiffusionSolver& diffusion, const State& state, const model::ModelParams& p,
                       double dt, const TransportSettings& settings = {});

}  // namespace ksns::transport
