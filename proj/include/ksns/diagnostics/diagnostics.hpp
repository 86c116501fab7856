#pragma once

#include "ksns/core/grid.hpp"
#include "ksns/model/params.hpp"
#include "ksns/transport/state.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ksns::diagnostics {

using core::FaceField;
using core::Grid;
using core::ScalarField;
using core::VelocityField;
using transport::State;

struct DiagnosticsError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Weights of the energy functionals (config keys energy.chi, energy.kbar, energy.B).
struct EnergyConfig {
    double chi = 1.0;   ///< weight of int |grad c|^2 / c
    double kbar = 1.0;  ///< weight of int |u|^2 (multiplied by chi)
    double B = 1.0;     ///< weight of int c^2 in G

    void validate() const;
    bool operator==(const EnergyConfig&) const = default;
};

/// Below this the signal is treated as underflowed by the c-weighted terms.
inline constexpr double kSignalFloor = 1e-300;

struct EnergyValue {
    double value = 0.0;
    bool signal_underflow = false;  ///< the |grad c|^2/c term was dropped
};

/// int n1 log n1 + int n2 log n2 + (chi/2) int |grad c|^2/c + kbar chi int |u|^2.
EnergyValue energy_F(const State& s, const EnergyConfig& cfg);

struct Dissipation {
    double n1 = 0.0;    ///< int |grad n1|^2 / n1
    double n2 = 0.0;
    double c4 = 0.0;    ///< int |grad c|^4 / c^3
    double hess = 0.0;  ///< int c |D^2 log c|^2
    double u = 0.0;     ///< int |grad u|^2
    bool signal_underflow = false;
};

Dissipation dissipation_terms(const State& s);

/// Per-cell c |D^2 log c|^2. Centred second differences; the ghost layer
/// is filled by quadratic extrapolation, so a linear log c gives exactly 0.
ScalarField hessian_density(const ScalarField& c, bool* underflow = nullptr);

/// Regime-appropriate Lyapunov functional. Throws for out_of_scope targets.
double energy_G(const State& s, const EnergyConfig& cfg, const model::SteadyState& target);

struct BlowUp {
    double value = 0.0;
    bool flagged = false;
};

/// max n1 + max n2 + (int c^q + int |grad c|^q)^(1/q) + ||grad u||_2, the
/// gradient seminorm standing in for the fractional Stokes power. Non-finite
/// fields give +inf and raise the flag.
BlowUp blow_up_indicator(const State& s, double q = 4.0, double ceiling = 1e6);

struct Distances {
    double n1 = 0.0;  ///< max |n1 - n1_limit|
    double n2 = 0.0;
    double c = 0.0;   ///< max c
    double u = 0.0;   ///< max face |u|

    double max() const;
};

Distances distance_to_limit(const State& s, const model::SteadyState& target);

/// Time integrals accumulated with the step size as weight.
struct Accumulators {
    double A1 = 0.0;  ///< int int (n1 - n1_limit)^2
    double A2 = 0.0;
    double Au = 0.0;  ///< int int |grad u|^2
    double Ac = 0.0;  ///< int int |grad c|^4 / c^3
};

/// One output row.
struct DiagnosticsRecord {
    double t = 0.0;
    double dt = 0.0;
    double mass_n1 = 0.0, mass_n2 = 0.0, mass_c = 0.0;
    double max_n1 = 0.0, max_n2 = 0.0, max_c = 0.0, max_u = 0.0;
    double F = 0.0;
    double G = 0.0;
    Dissipation D;
    double nlogn1 = 0.0, nlogn2 = 0.0;
    Accumulators acc;
    Distances dist;
    double blow_up = 0.0;
    bool signal_underflow = false;
};

/// Every instantaneous entry of a record. Accumulators are left at 0. The
/// G column is 0 when the target regime is out_of_scope.
DiagnosticsRecord evaluate(const State& s, double dt, const EnergyConfig& cfg, const model::SteadyState& target,
                           double q = 4.0);

/// Adds dt times the current integrands to the accumulators of `record`.
DiagnosticsRecord update_accumulators(DiagnosticsRecord record, const State& s, double dt,
                                      const model::SteadyState& target);

/// Fixed CSV schema.
const std::vector<std::string>& csv_columns();
std::string csv_header();
std::string csv_row(const DiagnosticsRecord& r);
std::vector<double> csv_values(const DiagnosticsRecord& r);

/// Space-time test functions for the weak identities: phi = b(t) prod_a
/// cos(k_a pi x_a / L_a) for the scalars and psi = b(t) (d_y s, -d_x s, 0)
/// with s = prod_a sin^2(m pi x_a / L_a) for the velocity. b is the smooth
/// bump exp(1 - 1/(1 - tau^2)) on (t0, t1).
struct TestFunctions {
    std::array<int, 3> k{1, 1, 1};
    int m = 1;
    double t0 = 0.0;
    double t1 = 1.0;

    double bump(double t) const;
};

/// Deterministic draw of the mode numbers (k_a, m in 1..3) from a seed.
TestFunctions draw_test_functions(std::uint64_t seed, double t0, double t1);

struct WeakResiduals {
    double n1 = 0.0, n2 = 0.0, c = 0.0, u = 0.0;
    double max() const;
};

/// Streaming evaluation of the four weak identities over consecutive states.
/// The time derivative uses (f^{k+1} - f^k) phi^{k+1}; every other integrand
/// is taken at t^{k+1} and weighted by dt_k.
class WeakResidualMonitor {
public:
    WeakResidualMonitor(const Grid& g, const model::ModelParams& p, const FaceField& grad_phi,
                        const TestFunctions& tf);

    void add(const State& before, const State& after);

    /// |LHS - RHS| per identity. Throws DiagnosticsError unless the steps
    /// added so far cover the support of the test functions.
    WeakResiduals residuals() const;

private:
    Grid grid_;
    model::ModelParams params_;
    FaceField grad_phi_;
    TestFunctions tf_;
    ScalarField phi_, lap_phi_;
    FaceField grad_phi_test_, psi_, lap_psi_;
    std::array<ScalarField, 9> grad_psi_;  ///< d_b psi_a at cell centres, index a + 3 b
    double first_t_ = 0.0, last_t_ = 0.0;
    bool started_ = false;
    std::array<double, 4> sum_{0.0, 0.0, 0.0, 0.0};
};

/// Convenience wrapper over a stored trajectory.
WeakResiduals weak_residuals(std::span<const State> trajectory, const model::ModelParams& p,
                             const FaceField& grad_phi, const TestFunctions& tf);

}  // namespace ksns::diagnostics
