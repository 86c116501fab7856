#include "ksns/harness/simulation.hpp"

#include "ksns/core/errors.hpp"
#include "ksns/model/fields.hpp"

#include "json.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>

namespace ksns::harness {

namespace fs = std::filesystem;
using core::ScalarField;
using core::VelocityField;

const char* to_string(RunStatus s)
{
    switch (s) {
    case RunStatus::completed: return "completed";
    case RunStatus::blow_up: return "blow_up";
    case RunStatus::scheme_failure: return "scheme_failure";
    case RunStatus::solver_failure: return "solver_failure";
    case RunStatus::step_failure: return "step_failure";
    case RunStatus::non_finite: return "non_finite";
    }
    return "unknown";
}

State initial_state(const ScenarioConfig& cfg, const flow::PressureSolver& pressure)
{
    const core::Grid& g = pressure.grid();
    const ScalarField n1 = model::sample_cells(g, cfg.init.n1);
    const ScalarField n2 = model::sample_cells(g, cfg.init.n2);
    const ScalarField c = model::sample_cells(g, cfg.init.c);
    const VelocityField u = cfg.init.u.empty() ? VelocityField(g) : model::sample_faces(g, cfg.init.u);
    model::InitialData d = model::validate_initial_data(n1, n2, c, u, pressure);
    return {0.0, std::move(d.n1), std::move(d.n2), std::move(d.c), std::move(d.u), ScalarField(g)};
}

Simulation::Simulation(const ScenarioConfig& cfg)
    : cfg_(cfg),
      grid_(cfg.grid.make()),
      flow_(grid_),
      diffusion_(grid_),
      grad_phi_(model::potential_gradient(grid_, cfg.potential)),
      state_(initial_state(cfg, flow_.pressure))
{
}

double Simulation::step_limit() const
{
    const auto& tr = cfg_.transport;
    return std::min({tr.dt_max, transport::donor_cell_dt_limit(state_.u, tr.cfl_safety),
                     transport::chemotactic_dt_limit(state_.c, cfg_.model, tr.cfl_safety),
                     transport::reaction_dt_limit(state_.n1, state_.n2, cfg_.model, tr.cfl_safety),
                     flow::advective_dt_limit(state_.u, cfg_.flow.cfl_safety)});
}

transport::MassLedger Simulation::step_to(double t_new)
{
    const double dt = t_new - state_.t;
    transport::ScalarStep s = transport::scalar_step(diffusion_, state_, cfg_.model, dt, cfg_.transport);
    State mid{state_.t, std::move(s.n1), std::move(s.n2), std::move(s.c), state_.u, state_.p};
    const core::FaceField force = model::buoyancy_force(mid.n1, mid.n2, grad_phi_, cfg_.model);
    flow::VelocityStep v = flow::velocity_step(flow_, mid, force, cfg_.model, dt, cfg_.flow);
    mid.t = t_new;
    mid.u = std::move(v.u);
    mid.p = std::move(v.p);
    state_ = std::move(mid);
    return s.ledger;
}

namespace {

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

class InvariantMonitor {
public:
    InvariantMonitor(const State& s0, InvariantReport& r) : report_(r)
    {
        r.min_n1 = s0.n1.min();
        r.min_n2 = s0.n2.min();
        r.min_c = s0.c.min();
        const double vol = s0.grid().domain_volume();
        bound_[0] = std::max(core::integrate(s0.n1), vol) + 1e-8;
        bound_[1] = std::max(core::integrate(s0.n2), vol) + 1e-8;
        vol_ = vol;
        mass0_[0] = bound_[0] - 1e-8;
        mass0_[1] = bound_[1] - 1e-8;
    }

    void check(long step, const State& s, double max_c_before, const transport::MassLedger& ledger)
    {
        InvariantReport& r = report_;
        const std::string where = "step " + std::to_string(step) + " t=" + fmt("%.9g", s.t) + ": ";
        r.min_n1 = std::min(r.min_n1, s.n1.min());
        r.min_n2 = std::min(r.min_n2, s.n2.min());
        r.min_c = std::min(r.min_c, s.c.min());
        if (!(s.n1.min() > 0.0)) flag("n1", where + "min n1 = " + fmt("%.3e", s.n1.min()));
        if (!(s.n2.min() > 0.0)) flag("n2", where + "min n2 = " + fmt("%.3e", s.n2.min()));
        if (!(s.c.min() >= 0.0)) flag("c", where + "min c = " + fmt("%.3e", s.c.min()));

        const double growth = s.c.max() - max_c_before;
        r.max_c_increase = std::max(r.max_c_increase, growth);
        if (growth > 1e-12) {
            r.max_c_monotone = false;
            flag("maxc", where + "max c grew by " + fmt("%.3e", growth));
        }
        const double div = core::max_abs_divergence(s.u);
        r.max_divergence = std::max(r.max_divergence, div);
        if (!(div <= 1e-10)) flag("div", where + "max |div u| = " + fmt("%.3e", div));
        const double led = ledger.relative_error();
        r.max_ledger_error = std::max(r.max_ledger_error, led);
        if (!(led <= 1e-10)) flag("ledger", where + "mass ledger error " + fmt("%.3e", led));
        const double m[2] = {ledger.mass_after[0], ledger.mass_after[1]};
        for (int i = 0; i < 2; ++i) {
            const double excess = m[i] - std::max(mass0_[i], vol_);
            r.max_l1_excess[i] = std::max(r.max_l1_excess[i], excess);
            if (m[i] > bound_[i])
                flag(i == 0 ? "l1a" : "l1b", where + "int n" + std::to_string(i + 1) + " exceeds its bound");
        }
    }

private:
    void flag(const std::string& kind, const std::string& msg)
    {
        if (seen_.insert(kind).second) report_.violations.push_back(msg);
    }

    InvariantReport& report_;
    double bound_[2] = {0.0, 0.0};
    double mass0_[2] = {0.0, 0.0};
    double vol_ = 0.0;
    std::set<std::string> seen_;
};

void write_all_snapshots(const fs::path& dir, int index, const State& s, bool vtk)
{
    fs::create_directories(dir);
    const core::Grid& g = s.grid();
    char stem[32];
    std::snprintf(stem, sizeof stem, "snap_%06d_", index);
    const std::pair<const char*, const ScalarField*> cells[] = {{"n1", &s.n1}, {"n2", &s.n2}, {"c", &s.c}, {"p", &s.p}};
    for (const auto& [name, f] : cells) write_snapshot(dir / (std::string(stem) + name + ".bin"), name, s.t, g.cells(), f->values());
    static const char* comps[] = {"ux", "uy", "uz"};
    for (int a = 0; a < g.dim(); ++a)
        write_snapshot(dir / (std::string(stem) + comps[a] + ".bin"), comps[a], s.t, g.face_extent(a), s.u.component(a));
    if (vtk) {
        char name[32];
        std::snprintf(name, sizeof name, "snap_%06d.vtk", index);
        write_vtk(dir / name, s);
    }
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& cfg, const RunOptions& opts)
{
    const auto start = std::chrono::steady_clock::now();
    Simulation sim(cfg);
    RunResult res;
    RunSummary& sum = res.summary;
    sum.name = cfg.name;
    sum.config_hash = config_hash(cfg);
    sum.target = model::steady_states(cfg.model);
    sum.limit_asserted = sum.target.regime != model::Regime::out_of_scope;

    const bool snapshots = opts.snapshots.value_or(cfg.output.snapshots);
    std::ofstream csv;
    if (opts.out_dir) {
        fs::create_directories(*opts.out_dir);
        csv.open(*opts.out_dir / "diagnostics.csv");
        if (!csv) throw std::runtime_error("cannot write " + (*opts.out_dir / "diagnostics.csv").string());
        csv << diagnostics::csv_header() << '\n';
    }

    const double q = cfg.run.w1q_exponent;
    int output_index = 0;
    auto emit = [&](const State& s, double dt, const diagnostics::Accumulators& acc) {
        diagnostics::DiagnosticsRecord rec = diagnostics::evaluate(s, dt, cfg.energy, sum.target, q);
        rec.acc = acc;
        sum.signal_underflow = sum.signal_underflow || rec.signal_underflow;
        sum.F_max = std::max(sum.F_max, rec.F);
        if (csv.is_open()) csv << diagnostics::csv_row(rec) << '\n';
        if (snapshots && opts.out_dir) write_all_snapshots(*opts.out_dir / "snapshots", output_index, s, cfg.output.vtk);
        if (opts.on_output) opts.on_output(s, rec);
        if (!opts.quiet)
            std::fprintf(stderr, "t=%-10.5g dt=%-10.3g dist=%.3e blowup=%.3e\n", rec.t, rec.dt, rec.dist.max(),
                         rec.blow_up);
        ++output_index;
        res.records.push_back(rec);
    };

    {
        const diagnostics::DiagnosticsRecord first = diagnostics::evaluate(sim.state(), 0.0, cfg.energy, sum.target, q);
        sum.F_initial = sum.F_max = first.F;
        sum.G_initial = first.G;
        sum.blow_up_max = first.blow_up;
    }
    emit(sim.state(), 0.0, {});

    InvariantMonitor monitor(sim.state(), sum.invariants);
    diagnostics::DiagnosticsRecord running;
    const double t_end = cfg.run.t_end;
    const bool fixed = cfg.run.dt_fixed > 0.0;
    const long fixed_steps = fixed ? std::lround(t_end / cfg.run.dt_fixed) : 0;
    const long steps_per_output = fixed ? std::max(1L, std::lround(cfg.output.cadence / cfg.run.dt_fixed)) : 0;
    long k_out = 1;
    double next_output = std::min(cfg.output.cadence, t_end);
    sum.dt_smallest = std::numeric_limits<double>::infinity();

    while (true) {
        const State& cur = sim.state();
        if (fixed ? sum.steps >= fixed_steps : cur.t >= t_end) break;
        double t_new;
        bool at_output = false;
        if (fixed) {
            t_new = sum.steps + 1 == fixed_steps ? t_end : static_cast<double>(sum.steps + 1) * cfg.run.dt_fixed;
            at_output = (sum.steps + 1) % steps_per_output == 0 || sum.steps + 1 == fixed_steps;
        } else {
            const double limit = sim.step_limit();
            if (limit < cfg.transport.dt_min) {
                sum.status = RunStatus::step_failure;
                sum.message = "step bound " + fmt("%.3e", limit) + " fell below transport.dt_min at t=" + fmt("%.9g", cur.t);
                break;
            }
            const double gap = next_output - cur.t;
            if (limit >= gap) {
                t_new = next_output;
                at_output = true;
            } else if (limit >= 0.5 * gap) {
                t_new = cur.t + 0.5 * gap;  // two equal steps instead of a sliver
            } else {
                t_new = cur.t + limit;
            }
        }
        const double dt = t_new - cur.t;
        const double max_c_before = cur.c.max();
        std::optional<State> before;
        if (opts.on_step) before = cur;
        transport::MassLedger ledger;
        try {
            ledger = sim.step_to(t_new);
        } catch (const CflError& e) {
            sum.status = RunStatus::step_failure;
            sum.message = e.what();
        } catch (const SchemeError& e) {
            sum.status = RunStatus::scheme_failure;
            sum.message = e.what();
        } catch (const SolverError& e) {
            sum.status = RunStatus::solver_failure;
            sum.message = e.what();
        } catch (const NonFiniteError& e) {
            sum.status = RunStatus::non_finite;
            sum.message = e.what();
        }
        if (sum.status != RunStatus::completed) break;
        ++sum.steps;
        sum.dt_smallest = std::min(sum.dt_smallest, dt);
        sum.dt_largest = std::max(sum.dt_largest, dt);
        const State& s = sim.state();
        monitor.check(sum.steps, s, max_c_before, ledger);
        running = diagnostics::update_accumulators(running, s, dt, sum.target);
        if (opts.on_step) opts.on_step(*before, s, dt);

        const diagnostics::BlowUp b = diagnostics::blow_up_indicator(s, q, cfg.run.blowup_ceiling);
        sum.blow_up_max = std::max(sum.blow_up_max, b.value);
        if (b.flagged) {
            sum.status = RunStatus::blow_up;
            sum.message = "numerical blow-up: indicator " + fmt("%.6e", b.value) + " exceeds the ceiling at t=" +
                          fmt("%.9g", s.t);
            emit(s, dt, running.acc);
            break;
        }
        if (at_output) {
            emit(s, dt, running.acc);
            ++k_out;
            next_output = std::min(static_cast<double>(k_out) * cfg.output.cadence, t_end);
        }
    }

    const State& fin = sim.state();
    sum.final_time = fin.t;
    sum.final_distances = diagnostics::distance_to_limit(fin, sum.target);
    sum.accumulators = running.acc;
    if (sum.steps == 0) sum.dt_smallest = 0.0;
    if (sum.limit_asserted && fin.n1.min() > 0.0 && fin.n2.min() > 0.0)
        sum.G_final = diagnostics::energy_G(fin, cfg.energy, sum.target);
    sum.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (opts.out_dir) {
        std::ofstream(*opts.out_dir / "summary.json") << summary_json(sum) << '\n';
        nlohmann::json timing = {{"wall_clock_seconds", sum.wall_clock_seconds}, {"steps", sum.steps}};
        std::ofstream(*opts.out_dir / "timing.json") << timing.dump(2) << '\n';
    }
    return res;
}

std::string summary_json(const RunSummary& s)
{
    using nlohmann::json;
    auto finite = [](double v) -> json { return std::isfinite(v) ? json(v) : json(nullptr); };
    json j;
    j["name"] = s.name;
    j["config_hash"] = s.config_hash;
    j["status"] = to_string(s.status);
    j["verdict"] = s.passed() ? "pass" : "fail";
    j["message"] = s.message;
    j["regime"] = model::to_string(s.target.regime);
    j["limit_asserted"] = s.limit_asserted;
    j["limits"] = {{"n1", s.target.n1_limit}, {"n2", s.target.n2_limit}, {"c", 0.0}, {"u", 0.0}};
    j["final_time"] = s.final_time;
    j["steps"] = s.steps;
    j["dt"] = {{"smallest", s.dt_smallest}, {"largest", s.dt_largest}};
    j["final_distances"] = {{"n1", s.final_distances.n1},
                            {"n2", s.final_distances.n2},
                            {"c", s.final_distances.c},
                            {"u", s.final_distances.u}};
    j["accumulators"] = {{"A1", s.accumulators.A1}, {"A2", s.accumulators.A2}, {"A_u", s.accumulators.Au},
                         {"A_c", s.accumulators.Ac}};
    j["energy"] = {{"F_initial", s.F_initial}, {"F_max", s.F_max}, {"K", s.energy_growth()},
                   {"G_initial", s.G_initial}, {"G_final", s.G_final}};
    const InvariantReport& r = s.invariants;
    j["positivity"] = {{"min_n1", r.min_n1}, {"min_n2", r.min_n2}, {"min_c", r.min_c}};
    j["invariants"] = {{"ok", r.ok()},
                       {"max_c_monotone", r.max_c_monotone},
                       {"max_c_increase", r.max_c_increase},
                       {"max_divergence", r.max_divergence},
                       {"max_ledger_error", r.max_ledger_error},
                       {"max_l1_excess", {r.max_l1_excess[0], r.max_l1_excess[1]}},
                       {"violations", r.violations}};
    j["blow_up"] = {{"flag", s.status == RunStatus::blow_up},
                    {"max_indicator", finite(s.blow_up_max)},
                    {"velocity_norm", "L2 norm of the discrete velocity gradient (stands in for the fractional Stokes power)"}};
    j["flags"] = {{"signal_underflow", s.signal_underflow}};
    return j.dump(2);
}

void write_snapshot(const fs::path& path, const std::string& field, double t, const std::array<int, 3>& dims,
                    std::span<const double> values)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "ksns-snapshot 1\n"
        << "field " << field << "\n"
        << "time " << fmt("%.17g", t) << "\n"
        << "dims " << dims[0] << ' ' << dims[1] << ' ' << dims[2] << "\n"
        << "encoding float64 little-endian, x fastest then y then z\n"
        << "end\n";
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
    } else {
        for (double v : values) {
            auto bits = std::bit_cast<std::uint64_t>(v);
            for (int b = 0; b < 8; ++b) out.put(static_cast<char>((bits >> (8 * b)) & 0xff));
        }
    }
}

Snapshot read_snapshot(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    Snapshot s;
    std::string line;
    bool ended = false;
    while (std::getline(in, line)) {
        if (line == "end") {
            ended = true;
            break;
        }
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "field") ls >> s.field;
        else if (key == "time") ls >> s.t;
        else if (key == "dims") ls >> s.dims[0] >> s.dims[1] >> s.dims[2];
    }
    if (!ended) throw std::runtime_error(path.string() + ": snapshot header has no end marker");
    const std::size_t n = static_cast<std::size_t>(s.dims[0]) * s.dims[1] * s.dims[2];
    s.values.resize(n);
    std::vector<unsigned char> raw(n * 8);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) throw std::runtime_error(path.string() + ": truncated snapshot");
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(raw[i * 8 + b]) << (8 * b);
        s.values[i] = std::bit_cast<double>(bits);
    }
    return s;
}

void write_vtk(const fs::path& path, const State& s)
{
    const core::Grid& g = s.grid();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "# vtk DataFile Version 3.0\nksns t=" << fmt("%.17g", s.t) << "\nASCII\nDATASET STRUCTURED_POINTS\n";
    out << "DIMENSIONS " << g.cells(0) << ' ' << g.cells(1) << ' ' << g.cells(2) << "\n";
    out << "ORIGIN " << fmt("%.17g", 0.5 * g.spacing(0)) << ' ' << fmt("%.17g", 0.5 * g.spacing(1)) << ' '
        << fmt("%.17g", g.dim() == 3 ? 0.5 * g.spacing(2) : 0.0) << "\n";
    out << "SPACING " << fmt("%.17g", g.spacing(0)) << ' ' << fmt("%.17g", g.spacing(1)) << ' '
        << fmt("%.17g", g.dim() == 3 ? g.spacing(2) : 1.0) << "\n";
    out << "POINT_DATA " << g.cell_count() << "\n";
    const std::pair<const char*, const ScalarField*> fields[] = {{"n1", &s.n1}, {"n2", &s.n2}, {"c", &s.c}, {"p", &s.p}};
    for (const auto& [name, f] : fields) {
        out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (double v : f->values()) out << fmt("%.17g", v) << '\n';
    }
    out << "VECTORS u double\n";
    core::for_each_cell(g, [&](int i, int j, int k, std::size_t) {
        double u[3] = {0.0, 0.0, 0.0};
        for (int a = 0; a < g.dim(); ++a) {
            const std::size_t lo = g.face_index(a, i, j, k);
            u[a] = 0.5 * (s.u.component(a)[lo] + s.u.component(a)[lo + g.face_stride(a, a)]);
        }
        out << fmt("%.17g", u[0]) << ' ' << fmt("%.17g", u[1]) << ' ' << fmt("%.17g", u[2]) << '\n';
    });
}

}  // namespace ksns::harness
