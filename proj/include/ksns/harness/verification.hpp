#pragma once

#include "ksns/diagnostics/diagnostics.hpp"
#include "ksns/harness/config.hpp"
#include "ksns/harness/simulation.hpp"

#include <array>
#include <string>
#include <vector>

namespace ksns::harness {

// ---------------------------------------------------------------------------
// Spatially homogeneous reduction

struct OdeSample {
    double t = 0.0;
    double n1 = 0.0, n2 = 0.0, c = 0.0;
};

/// Classical RK4 for n1' = mu1 n1 (1 - n1 - a1 n2), n2' = mu2 n2 (1 - a2 n1 - n2),
/// c' = -g(n1, n2) c, with g the (regularised) consumption rate. Returns
/// the initial point and every step; the last step is shortened to land on T.
std::vector<OdeSample> ode_oracle(const model::ModelParams& p, const std::array<double, 3>& y0, double T,
                                  double dt_ode);

struct UniformEquivalence {
    double max_relative_deviation = 0.0;  ///< over time, cells and (n1, n2, c)
    double deviation[3] = {0.0, 0.0, 0.0};
    double max_u = 0.0;
    double dt = 0.0;
    RunSummary summary;
};

/// Runs a uniform, unforced configuration with fixed steps through the full
/// solver and compares every step with the RK4 reduction (same step size).
/// Throws ConfigError for non-uniform data, a non-constant potential or
/// run.dt_fixed == 0.
UniformEquivalence uniform_equivalence_test(const ScenarioConfig& cfg);

struct TemporalOrder {
    double dt = 0.0;
    double deviation_coarse = 0.0;
    double deviation_fine = 0.0;  ///< at dt / 2
    double order = 0.0;
};

TemporalOrder uniform_temporal_order(const ScenarioConfig& cfg);

// ---------------------------------------------------------------------------
// Manufactured solutions

struct MmsLevel {
    int cells = 0;
    double h = 0.0;
    double dt = 0.0;
    double error = 0.0;
};

struct MmsResult {
    std::string suite;
    std::string variable;  ///< "h" (spatial), "dt" (temporal) or "none"
    std::vector<MmsLevel> levels;
    double order = 0.0;    ///< least-squares slope of log error against log variable
    double expected_min = 0.0;
    double expected_max = 0.0;
    bool passed = false;
};

/// Suites: diffusion, advection, chemotaxis, composite, stokes, zero.
const std::vector<std::string>& mms_suites();
MmsResult mms_convergence(const std::string& suite);

/// Least-squares slope of log(y) against log(x).
double fitted_order(const std::vector<double>& x, const std::vector<double>& y);

// ---------------------------------------------------------------------------
// Regularisation sweep

struct EpsDistance {
    double eps_a = 0.0, eps_b = 0.0;
    double n1 = 0.0, n2 = 0.0, c = 0.0, u = 0.0;  ///< L2(Omega x (0, T)) distances
};

struct EpsSweep {
    std::vector<double> eps;
    std::vector<EpsDistance> pairs;  ///< consecutive entries of eps
    std::vector<RunSummary> runs;
    bool complete = true;
    std::string message;

    /// Every field's distance strictly decreases along the list.
    bool cauchy() const;
};

/// Runs the scenario once per eps (strictly decreasing, >= 0). A failing
/// member run stops the sweep and the partial table is returned.
EpsSweep eps_consistency_sweep(const ScenarioConfig& cfg, const std::vector<double>& eps_list);

// ---------------------------------------------------------------------------
// Large-time behaviour

enum class StabilizationCase { coexistence, exclusion };

StabilizationCase parse_case(const std::string& name);
const char* to_string(StabilizationCase c);

/// The in-repo canonical scenarios (also stored under scenarios/).
std::string canonical_config_text(const std::string& name);
const std::vector<std::string>& canonical_names();
ScenarioConfig canonical_scenario(StabilizationCase c, int dim = 2);

struct StabilizationResult {
    RunResult run;
    double tolerance = 1e-2;
    bool within_tolerance = false;
    bool tail_monotone = false;  ///< distances nonincreasing over the final 20% (slack 1e-6)
    bool passed = false;
    std::string verdict;
};

/// Checks the distances at T_end against the regime limits and the tail monotonicity.
StabilizationResult evaluate_stabilization(RunResult run, double tolerance = 1e-2);
StabilizationResult stabilization_experiment(StabilizationCase c, const std::vector<std::string>& overrides,
                                             const RunOptions& opts = {}, double tolerance = 1e-2);

// ---------------------------------------------------------------------------
// Weak identities along a run

struct WeakResidualRun {
    diagnostics::WeakResiduals residuals;
    diagnostics::TestFunctions test_functions;
    RunSummary summary;
};

/// Runs cfg and evaluates the four weak identities with test functions drawn
/// from run.seed over (0, T_end).
WeakResidualRun weak_residual_run(const ScenarioConfig& cfg);

}  // namespace ksns::harness
