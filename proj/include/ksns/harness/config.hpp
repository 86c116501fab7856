#pragma once

#include "ksns/core/grid.hpp"
#include "ksns/diagnostics/diagnostics.hpp"
#include "ksns/flow/flow.hpp"
#include "ksns/model/expression.hpp"
#include "ksns/model/params.hpp"
#include "ksns/transport/transport.hpp"

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ksns::harness {

/// Rejected configuration. `line` is 0 when the problem is not tied to one line.
struct ConfigError : std::runtime_error {
    ConfigError(const std::string& source, int line, const std::string& message);
    std::string source;
    int line;
};

struct GridSpec {
    int dim = 2;
    std::array<int, 3> cells{64, 64, 1};
    std::array<double, 3> lengths{1.0, 1.0, 1.0};
    std::size_t max_cells = core::kDefaultMaxCells;

    core::Grid make() const;
    bool operator==(const GridSpec&) const = default;
};

struct InitialSpec {
    model::Expression n1 = model::Expression::constant(1.0);
    model::Expression n2 = model::Expression::constant(1.0);
    model::Expression c = model::Expression::constant(1.0);
    std::vector<model::Expression> u;  ///< one per axis; empty means rest

    bool operator==(const InitialSpec&) const = default;
};

struct RunPolicy {
    double t_end = 1.0;
    double dt_fixed = 0.0;  ///< 0 selects the adaptive controller
    double blowup_ceiling = 1e6;
    double w1q_exponent = 4.0;
    std::uint64_t seed = 1;

    bool operator==(const RunPolicy&) const = default;
};

struct OutputPolicy {
    double cadence = 0.1;
    bool snapshots = false;
    bool vtk = false;
    std::string dir = "out";

    bool operator==(const OutputPolicy&) const = default;
};

struct ScenarioConfig {
    std::string name = "scenario";
    GridSpec grid;
    model::ModelParams model;
    InitialSpec init;
    model::Expression potential;
    diagnostics::EnergyConfig energy;
    flow::FlowSettings flow;
    transport::TransportSettings transport;
    RunPolicy run;
    OutputPolicy output;

    bool operator==(const ScenarioConfig&) const = default;
};

/// Parses the flat `section.key = value` format. '#' starts a comment,
/// strings are double-quoted, lists separate items by spaces or commas.
/// Keys not given keep their defaults; unknown keys are rejected.
ScenarioConfig parse_config(const std::string& text, const std::string& source = "<config>");
ScenarioConfig load_config(const std::string& path);

/// Applies `key = value` lines on top of an existing configuration.
ScenarioConfig apply_overrides(ScenarioConfig cfg, const std::vector<std::string>& lines);

/// Every key in a fixed order, reals printed with 17 significant digits,
/// so that parse(serialize(c)) == c.
std::string serialize_config(const ScenarioConfig& cfg);

/// Semantic checks that do not depend on the text (called by the parser).
void validate_config(const ScenarioConfig& cfg, const std::string& source = "<config>");

/// 64-bit FNV-1a of the serialized configuration, as 16 hex digits.
std::string config_hash(const ScenarioConfig& cfg);

/// All recognised keys, in serialization order.
const std::vector<std::string>& config_keys();

}  // namespace ksns::harness
