// Command-line driver: runs scenarios and the verification experiments.
//
// Exit codes: 0 pass, 1 verdict fail, 2 configuration error, 3 numerical failure.

#include "ksns/core/errors.hpp"
#include "ksns/harness/config.hpp"
#include "ksns/harness/simulation.hpp"
#include "ksns/harness/verification.hpp"
#include "ksns/model/fields.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace ksns;
using namespace ksns::harness;
using json = nlohmann::json;

namespace {

enum Exit { kPass = 0, kFail = 1, kConfig = 2, kNumerical = 3 };

struct Flags {
    std::string out;
    bool snapshots = false;
    bool quiet = false;
};

fs::path out_dir(const Flags& f, const std::string& fallback)
{
    return f.out.empty() ? fs::path(fallback) : fs::path(f.out);
}

void write_json(const fs::path& dir, const std::string& file, const json& j)
{
    fs::create_directories(dir);
    std::ofstream(dir / file) << j.dump(2) << '\n';
}

int run_exit(const RunSummary& s)
{
    switch (s.status) {
    case RunStatus::completed: return s.invariants.ok() ? kPass : kFail;
    case RunStatus::blow_up: return kFail;
    default: return kNumerical;
    }
}

void report_run(const RunSummary& s)
{
    std::printf("%s: %s at t=%.6g after %ld steps", s.name.c_str(), to_string(s.status), s.final_time, s.steps);
    if (!s.message.empty()) std::printf(" (%s)", s.message.c_str());
    std::printf("\n  distances n1=%.3e n2=%.3e c=%.3e u=%.3e%s\n", s.final_distances.n1, s.final_distances.n2,
                s.final_distances.c, s.final_distances.u, s.limit_asserted ? "" : " (no asserted limit)");
    for (const auto& v : s.invariants.violations) std::printf("  invariant violated: %s\n", v.c_str());
}

RunOptions options(const Flags& f, const fs::path& dir)
{
    RunOptions o;
    o.out_dir = dir;
    if (f.snapshots) o.snapshots = true;
    o.quiet = f.quiet;
    return o;
}

int cmd_run(const std::string& path, const Flags& f)
{
    const ScenarioConfig cfg = load_config(path);
    const RunResult r = run_scenario(cfg, options(f, out_dir(f, cfg.output.dir)));
    report_run(r.summary);
    return run_exit(r.summary);
}

int cmd_validate(const std::string& path, const Flags& f)
{
    const ScenarioConfig cfg = load_config(path);
    const Simulation sim(cfg);  // checks the initial data too
    if (!f.quiet) std::cout << serialize_config(cfg);
    std::printf("%s: valid (hash %s, %zu cells)\n", cfg.name.c_str(), config_hash(cfg).c_str(),
                sim.grid().cell_count());
    return kPass;
}

int cmd_oracle(const std::string& path, const Flags& f)
{
    const ScenarioConfig cfg = load_config(path);
    const UniformEquivalence u = uniform_equivalence_test(cfg);
    const bool ok = u.summary.passed() && u.max_relative_deviation <= 1e-4 && u.max_u <= 1e-12;
    json j = {{"name", cfg.name},
              {"dt", u.dt},
              {"max_relative_deviation", u.max_relative_deviation},
              {"deviation", {{"n1", u.deviation[0]}, {"n2", u.deviation[1]}, {"c", u.deviation[2]}}},
              {"max_u", u.max_u},
              {"status", to_string(u.summary.status)},
              {"passed", ok}};
    write_json(out_dir(f, cfg.output.dir), "oracle.json", j);
    std::printf("oracle %s: relative deviation %.3e (n1 %.3e, n2 %.3e, c %.3e), max|u| %.3e -> %s\n",
                cfg.name.c_str(), u.max_relative_deviation, u.deviation[0], u.deviation[1], u.deviation[2], u.max_u,
                ok ? "pass" : "fail");
    if (!u.summary.passed() && u.summary.status != RunStatus::completed) return kNumerical;
    return ok ? kPass : kFail;
}

int cmd_mms(const std::string& suite, const Flags& f)
{
    std::vector<std::string> suites;
    if (suite == "all")
        suites = mms_suites();
    else
        suites.push_back(suite);
    bool ok = true;
    json all = json::array();
    for (const auto& s : suites) {
        MmsResult r;
        try {
            r = mms_convergence(s);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("<mms>", 0, e.what());
        }
        ok = ok && r.passed;
        json levels = json::array();
        for (const auto& l : r.levels) {
            levels.push_back({{"cells", l.cells}, {"h", l.h}, {"dt", l.dt}, {"error", l.error}});
            if (!f.quiet) std::printf("  %-10s N=%4d h=%.4g dt=%.4g error=%.6e\n", s.c_str(), l.cells, l.h, l.dt, l.error);
        }
        all.push_back({{"suite", r.suite},
                       {"variable", r.variable},
                       {"order", r.order},
                       {"expected_min", r.expected_min},
                       {"expected_max", std::isfinite(r.expected_max) ? json(r.expected_max) : json(nullptr)},
                       {"levels", levels},
                       {"passed", r.passed}});
        std::printf("mms %s: order %.3f in %s -> %s\n", s.c_str(), r.order, r.variable.c_str(),
                    r.passed ? "pass" : "fail");
    }
    write_json(out_dir(f, "out/mms"), "mms.json", all);
    return ok ? kPass : kFail;
}

int cmd_sweep(const std::string& path, const std::vector<double>& eps, const Flags& f)
{
    const ScenarioConfig cfg = load_config(path);
    const EpsSweep s = eps_consistency_sweep(cfg, eps);
    json pairs = json::array();
    for (const auto& d : s.pairs) {
        pairs.push_back({{"eps_a", d.eps_a}, {"eps_b", d.eps_b}, {"n1", d.n1}, {"n2", d.n2}, {"c", d.c}, {"u", d.u}});
        std::printf("eps %.3g vs %.3g: n1 %.3e n2 %.3e c %.3e u %.3e\n", d.eps_a, d.eps_b, d.n1, d.n2, d.c, d.u);
    }
    const bool ok = s.complete && s.cauchy();
    write_json(out_dir(f, cfg.output.dir), "eps_sweep.json",
               {{"eps", s.eps}, {"pairs", pairs}, {"complete", s.complete}, {"message", s.message},
                {"cauchy", s.cauchy()}, {"passed", ok}});
    if (!s.complete) {
        std::printf("sweep incomplete: %s\n", s.message.c_str());
        return kNumerical;
    }
    std::printf("sweep: distances %s\n", s.cauchy() ? "strictly decreasing" : "not strictly decreasing");
    return ok ? kPass : kFail;
}

int cmd_stabilize(const std::string& name, const std::vector<std::string>& overrides, const Flags& f)
{
    const StabilizationCase c = parse_case(name);
    const ScenarioConfig cfg = apply_overrides(canonical_scenario(c), overrides);
    const StabilizationResult r = evaluate_stabilization(run_scenario(cfg, options(f, out_dir(f, cfg.output.dir))));
    report_run(r.run.summary);
    std::printf("%s\n", r.verdict.c_str());
    if (r.run.summary.status != RunStatus::completed && r.run.summary.status != RunStatus::blow_up)
        return kNumerical;
    return r.passed ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Two-species chemotaxis-fluid solver"};
    app.require_subcommand(1);
    Flags flags;
    app.add_option("--out", flags.out, "Output directory (defaults to output.dir of the config)");
    app.add_flag("--snapshots", flags.snapshots, "Write field snapshots at every output time");
    app.add_flag("--quiet", flags.quiet, "Suppress progress output");

    std::string config, suite, case_name;
    std::vector<double> eps;
    std::vector<std::string> overrides;

    auto* run = app.add_subcommand("run", "Run a scenario");
    run->add_option("config", config)->required();
    auto* oracle = app.add_subcommand("oracle", "Compare a uniform scenario with the kinetics ODE");
    oracle->add_option("config", config)->required();
    auto* mms = app.add_subcommand("mms", "Manufactured-solution convergence study");
    mms->add_option("suite", suite, "diffusion, advection, chemotaxis, composite, stokes, zero or all")->required();
    auto* sweep = app.add_subcommand("sweep-eps", "Regularisation consistency sweep");
    sweep->add_option("config", config)->required();
    sweep->add_option("--eps", eps, "Strictly decreasing eps values")->required()->delimiter(',');
    auto* stab = app.add_subcommand("stabilize", "Large-time stabilization experiment");
    stab->add_option("case", case_name, "coexistence or exclusion")->required();
    stab->add_option("overrides", overrides, "key=value overrides");
    auto* validate = app.add_subcommand("validate", "Parse and check a configuration");
    validate->add_option("config", config)->required();
    for (auto* s : {run, oracle, mms, sweep, stab, validate}) s->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kConfig;
    }

    try {
        if (*run) return cmd_run(config, flags);
        if (*oracle) return cmd_oracle(config, flags);
        if (*mms) return cmd_mms(suite, flags);
        if (*sweep) return cmd_sweep(config, eps, flags);
        if (*stab) return cmd_stabilize(case_name, overrides, flags);
        if (*validate) return cmd_validate(config, flags);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfig;
    } catch (const model::InitialDataError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kNumerical;
    }
    return kConfig;
}
