#pragma once

#include "ksns/diagnostics/diagnostics.hpp"
#include "ksns/flow/flow.hpp"
#include "ksns/harness/config.hpp"
#include "ksns/transport/transport.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ksns::harness {

using transport::State;

enum class RunStatus {
    completed,
    blow_up,          ///< indicator crossed the ceiling; clean verdict
    scheme_failure,   ///< positivity lost
    solver_failure,   ///< linear solve did not converge
    step_failure,     ///< dt bound violated or dt fell below dt_min
    non_finite,
};

const char* to_string(RunStatus s);

/// Structural checks accumulated over every accepted step.
struct InvariantReport {
    double min_n1 = 0.0;
    double min_n2 = 0.0;
    double min_c = 0.0;
    bool max_c_monotone = true;
    double max_c_increase = 0.0;   ///< largest max-c growth in one step
    double max_divergence = 0.0;
    double max_ledger_error = 0.0;
    double max_l1_excess[2] = {0.0, 0.0};  ///< largest int n_i - max(int n_i(0), |Omega|)
    std::vector<std::string> violations;   ///< first violation per kind

    bool ok() const { return violations.empty(); }
};

struct RunSummary {
    std::string name;
    std::string config_hash;
    model::SteadyState target;
    bool limit_asserted = false;
    RunStatus status = RunStatus::completed;
    std::string message;
    double final_time = 0.0;
    long steps = 0;
    double dt_smallest = 0.0;
    double dt_largest = 0.0;
    diagnostics::Distances final_distances;
    diagnostics::Accumulators accumulators;
    InvariantReport invariants;
    double F_initial = 0.0;
    double F_max = 0.0;
    double G_initial = 0.0;
    double G_final = 0.0;
    double blow_up_max = 0.0;
    bool signal_underflow = false;
    double wall_clock_seconds = 0.0;  ///< not serialized into summary.json

    /// completed and no invariant violated
    bool passed() const { return status == RunStatus::completed && invariants.ok(); }
    /// K with F(t) <= F(0) + K over the run
    double energy_growth() const { return F_max - F_initial; }
};

struct RunResult {
    RunSummary summary;
    std::vector<diagnostics::DiagnosticsRecord> records;  ///< one per output time
};

struct RunOptions {
    /// Directory for diagnostics.csv, summary.json and snapshots; none writes nothing.
    std::optional<std::filesystem::path> out_dir;
    std::optional<bool> snapshots;  ///< overrides output.snapshots
    bool quiet = true;
    /// Called after every accepted step with the states before and after.
    std::function<void(const State&, const State&, double)> on_step;
    /// Called at t = 0 and at every output time.
    std::function<void(const State&, const diagnostics::DiagnosticsRecord&)> on_output;
};

/// Assembled fields and solvers of one scenario.
class Simulation {
public:
    /// Throws ConfigError-derived or InitialDataError when the data are inadmissible.
    explicit Simulation(const ScenarioConfig& cfg);

    const ScenarioConfig& config() const { return cfg_; }
    const core::Grid& grid() const { return grid_; }
    const State& state() const { return state_; }
    const core::FaceField& potential_gradient() const { return grad_phi_; }

    /// Largest admissible step for the current state (before clipping to output times).
    double step_limit() const;

    /// Advances to t_new: scalar step, then the velocity step driven by the new
    /// densities. Returns the transport mass ledger.
    transport::MassLedger step_to(double t_new);

private:
    ScenarioConfig cfg_;
    core::Grid grid_;
    flow::FlowSolvers flow_;
    transport::ScalarDiffusionSolver diffusion_;
    core::FaceField grad_phi_;
    State state_;
};

/// Initial state of a configuration (validated and projected).
State initial_state(const ScenarioConfig& cfg, const flow::PressureSolver& pressure);

/// Full run with adaptive (or fixed) steps, diagnostics at the output
/// cadence and the invariant monitor on every step. Numerical failures are
/// reported through the summary status, not thrown.
RunResult run_scenario(const ScenarioConfig& cfg, const RunOptions& opts = {});

/// summary.json content (deterministic: no timings).
std::string summary_json(const RunSummary& s);

/// Flat binary snapshot: a text header terminated by "end\n", then the
/// values as little-endian float64, x fastest.
void write_snapshot(const std::filesystem::path& path, const std::string& field, double t,
                    const std::array<int, 3>& dims, std::span<const double> values);

struct Snapshot {
    std::string field;
    double t = 0.0;
    std::array<int, 3> dims{1, 1, 1};
    std::vector<double> values;
};
Snapshot read_snapshot(const std::filesystem::path& path);

/// Legacy VTK structured points: n1, n2, c, p and the cell-averaged velocity.
void write_vtk(const std::filesystem::path& path, const State& s);

}  // namespace ksns::harness
