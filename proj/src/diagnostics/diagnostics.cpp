#include "ksns/diagnostics/diagnostics.hpp"

#include "ksns/core/operators.hpp"
#include "ksns/flow/flow.hpp"
#include "ksns/model/expression.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

namespace ksns::diagnostics {

namespace {

void require_positive(const ScalarField& f, const char* name)
{
    if (!f.all_finite() || !(f.min() > 0.0))
        throw DiagnosticsError(std::string(name) + " must be finite and strictly positive for the energy diagnostics");
}

double n_log_n(const ScalarField& n)
{
    double s = 0.0;
    for (double v : n.values()) s += v * std::log(v);
    return s * n.grid().cell_volume();
}

// int |grad f|^2 / f^p over cells where f is above the floor.
double weighted_gradient(const ScalarField& grad_sq, const ScalarField& f, double power, int exponent_of_grad,
                         bool& underflow)
{
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f[i] < kSignalFloor) {
            underflow = true;
            continue;
        }
        const double g2 = grad_sq[i];
        s += (exponent_of_grad == 2 ? g2 * g2 : g2) / std::pow(f[i], power);
    }
    return s * f.grid().cell_volume();
}

double integral_of_squared_distance(const ScalarField& n, double limit)
{
    double s = 0.0;
    for (double v : n.values()) s += (v - limit) * (v - limit);
    return s * n.grid().cell_volume();
}

std::string format_real(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void EnergyConfig::validate() const
{
    auto ok = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!ok(chi)) throw DiagnosticsError("energy.chi must be > 0");
    if (!ok(kbar)) throw DiagnosticsError("energy.kbar must be > 0");
    if (!ok(B)) throw DiagnosticsError("energy.B must be > 0");
}

EnergyValue energy_F(const State& s, const EnergyConfig& cfg)
{
    require_positive(s.n1, "n1");
    require_positive(s.n2, "n2");
    EnergyValue out;
    double c_term = 0.0;
    if (s.c.min() < kSignalFloor) {
        out.signal_underflow = true;
    } else {
        const ScalarField g2 = core::cell_average_squared(core::gradient_faces(s.c));
        c_term = weighted_gradient(g2, s.c, 1.0, 1, out.signal_underflow);
    }
    out.value = n_log_n(s.n1) + n_log_n(s.n2) + 0.5 * cfg.chi * c_term + cfg.kbar * cfg.chi * core::inner(s.u, s.u);
    return out;
}

ScalarField hessian_density(const ScalarField& c, bool* underflow)
{
    const Grid& g = c.grid();
    const int dim = g.dim();
    std::array<int, 3> e{1, 1, 1};
    for (int a = 0; a < dim; ++a) e[a] = g.cells(a) + 2;
    const std::array<std::size_t, 3> st{1, static_cast<std::size_t>(e[0]), static_cast<std::size_t>(e[0] * e[1])};
    std::vector<double> L(static_cast<std::size_t>(e[0]) * e[1] * e[2], 0.0);
    const int off = 1;
    auto at = [&](int i, int j, int k) -> double& {
        return L[static_cast<std::size_t>(i) * st[0] + static_cast<std::size_t>(j) * st[1] +
                 static_cast<std::size_t>(k) * st[2]];
    };
    const int ko = dim == 3 ? off : 0;
    bool low = false;
    core::for_each_cell(g, [&](int i, int j, int k, std::size_t idx) {
        if (c[idx] < kSignalFloor) low = true;
        at(i + off, j + off, k + ko) = std::log(std::max(c[idx], kSignalFloor));
    });
    // Ghost layers, one axis at a time over the already extended range.
    for (int a = 0; a < dim; ++a) {
        const int n = g.cells(a);
        std::array<int, 3> lo{0, 0, 0}, hi = e;
        for (int b = a + 1; b < dim; ++b) {
            lo[b] = 1;
            hi[b] = e[b] - 1;
        }
        for (int k = lo[2]; k < hi[2]; ++k)
            for (int j = lo[1]; j < hi[1]; ++j)
                for (int i = lo[0]; i < hi[0]; ++i) {
                    std::array<int, 3> p{i, j, k};
                    if (p[a] != 0) continue;
                    auto val = [&](int s) -> double& {
                        std::array<int, 3> q = p;
                        q[a] = s;
                        return at(q[0], q[1], q[2]);
                    };
                    val(0) = 3.0 * val(1) - 3.0 * val(2) + val(3);
                    val(n + 1) = 3.0 * val(n) - 3.0 * val(n - 1) + val(n - 2);
                }
    }
    ScalarField out(g);
    core::for_each_cell(g, [&](int i, int j, int k, std::size_t idx) {
        if (c[idx] < kSignalFloor) return;
        const std::size_t centre = static_cast<std::size_t>(i + off) * st[0] +
                                   static_cast<std::size_t>(j + off) * st[1] +
                                   static_cast<std::size_t>(k + ko) * st[2];
        double sum = 0.0;
        for (int a = 0; a < dim; ++a) {
            const double ha = g.spacing(a);
            const double daa = (L[centre + st[a]] - 2.0 * L[centre] + L[centre - st[a]]) / (ha * ha);
            sum += daa * daa;
            for (int b = a + 1; b < dim; ++b) {
                const double dab = (L[centre + st[a] + st[b]] - L[centre + st[a] - st[b]] -
                                    L[centre - st[a] + st[b]] + L[centre - st[a] - st[b]]) /
                                   (4.0 * ha * g.spacing(b));
                sum += 2.0 * dab * dab;
            }
        }
        out[idx] = c[idx] * sum;
    });
    if (underflow) *underflow = low;
    return out;
}

Dissipation dissipation_terms(const State& s)
{
    require_positive(s.n1, "n1");
    require_positive(s.n2, "n2");
    if (!s.c.all_finite() || s.c.min() < 0.0) throw DiagnosticsError("c must be finite and nonnegative");
    Dissipation d;
    bool flag = false;
    d.n1 = weighted_gradient(core::cell_average_squared(core::gradient_faces(s.n1)), s.n1, 1.0, 1, flag);
    d.n2 = weighted_gradient(core::cell_average_squared(core::gradient_faces(s.n2)), s.n2, 1.0, 1, flag);
    d.c4 = weighted_gradient(core::cell_average_squared(core::gradient_faces(s.c)), s.c, 3.0, 2, flag);
    bool low = false;
    d.hess = core::integrate(hessian_density(s.c, &low));
    d.u = flow::velocity_gradient_energy(s.u);
    d.signal_underflow = flag || low;
    return d;
}

double energy_G(const State& s, const EnergyConfig& cfg, const model::SteadyState& target)
{
    require_positive(s.n1, "n1");
    require_positive(s.n2, "n2");
    const double h3 = s.grid().cell_volume();
    double c2 = 0.0;
    for (double v : s.c.values()) c2 += v * v;
    c2 *= h3;
    double sum = 0.0;
    switch (target.regime) {
    case model::Regime::coexistence: {
        const double N1 = target.n1_limit, N2 = target.n2_limit;
        for (std::size_t i = 0; i < s.n1.size(); ++i)
            sum += s.n1[i] - N1 * std::log(s.n1[i] / N1) + s.n2[i] - N2 * std::log(s.n2[i] / N2);
        break;
    }
    case model::Regime::exclusion:
        for (std::size_t i = 0; i < s.n1.size(); ++i) sum += s.n1[i] + s.n2[i] - std::log(s.n2[i]);
        break;
    case model::Regime::out_of_scope:
        throw DiagnosticsError("the Lyapunov functional needs a coexistence or exclusion regime");
    }
    return sum * h3 + 0.5 * cfg.B * c2;
}

BlowUp blow_up_indicator(const State& s, double q, double ceiling)
{
    if (!(q > 3.0)) throw DiagnosticsError("blow-up exponent q must exceed 3");
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (!s.n1.all_finite() || !s.n2.all_finite() || !s.c.all_finite() || !s.u.all_finite()) return {inf, true};
    const ScalarField g2 = core::cell_average_squared(core::gradient_faces(s.c));
    double w = 0.0;
    for (std::size_t i = 0; i < s.c.size(); ++i) w += std::pow(std::abs(s.c[i]), q) + std::pow(g2[i], 0.5 * q);
    w = std::pow(w * s.grid().cell_volume(), 1.0 / q);
    const double value = s.n1.max() + s.n2.max() + w + std::sqrt(flow::velocity_gradient_energy(s.u));
    return {value, !(value <= ceiling)};
}

double Distances::max() const { return std::max({n1, n2, c, u}); }

Distances distance_to_limit(const State& s, const model::SteadyState& target)
{
    Distances d;
    for (std::size_t i = 0; i < s.n1.size(); ++i) {
        d.n1 = std::max(d.n1, std::abs(s.n1[i] - target.n1_limit));
        d.n2 = std::max(d.n2, std::abs(s.n2[i] - target.n2_limit));
        d.c = std::max(d.c, s.c[i]);
    }
    d.u = s.u.max_abs();
    return d;
}

DiagnosticsRecord evaluate(const State& s, double dt, const EnergyConfig& cfg, const model::SteadyState& target,
                           double q)
{
    DiagnosticsRecord r;
    r.t = s.t;
    r.dt = dt;
    r.mass_n1 = core::integrate(s.n1);
    r.mass_n2 = core::integrate(s.n2);
    r.mass_c = core::integrate(s.c);
    r.max_n1 = s.n1.max();
    r.max_n2 = s.n2.max();
    r.max_c = s.c.max();
    r.max_u = s.u.max_abs();
    const EnergyValue F = energy_F(s, cfg);
    r.F = F.value;
    r.G = target.regime == model::Regime::out_of_scope ? 0.0 : energy_G(s, cfg, target);
    r.D = dissipation_terms(s);
    r.nlogn1 = n_log_n(s.n1);
    r.nlogn2 = n_log_n(s.n2);
    r.dist = distance_to_limit(s, target);
    r.blow_up = blow_up_indicator(s, q, std::numeric_limits<double>::infinity()).value;
    r.signal_underflow = F.signal_underflow || r.D.signal_underflow;
    return r;
}

DiagnosticsRecord update_accumulators(DiagnosticsRecord record, const State& s, double dt,
                                      const model::SteadyState& target)
{
    bool flag = false;
    record.acc.A1 += dt * integral_of_squared_distance(s.n1, target.n1_limit);
    record.acc.A2 += dt * integral_of_squared_distance(s.n2, target.n2_limit);
    record.acc.Au += dt * flow::velocity_gradient_energy(s.u);
    record.acc.Ac +=
        dt * weighted_gradient(core::cell_average_squared(core::gradient_faces(s.c)), s.c, 3.0, 2, flag);
    return record;
}

const std::vector<std::string>& csv_columns()
{
    static const std::vector<std::string> cols = {
        "t",       "dt",      "mass_n1", "mass_n2", "mass_c", "max_n1", "max_n2", "max_c",   "max_u",
        "F",       "G",       "D_n1",    "D_n2",    "D_c4",   "D_hess", "D_u",    "nlogn1",  "nlogn2",
        "A1",      "A2",      "A_u",     "A_c",     "dist_n1", "dist_n2", "dist_c", "dist_u", "blowup_indicator"};
    return cols;
}

std::vector<double> csv_values(const DiagnosticsRecord& r)
{
    return {r.t,      r.dt,     r.mass_n1, r.mass_n2,  r.mass_c,  r.max_n1,  r.max_n2,  r.max_c,  r.max_u,
            r.F,      r.G,      r.D.n1,    r.D.n2,     r.D.c4,    r.D.hess,  r.D.u,     r.nlogn1, r.nlogn2,
            r.acc.A1, r.acc.A2, r.acc.Au,  r.acc.Ac,   r.dist.n1, r.dist.n2, r.dist.c,  r.dist.u, r.blow_up};
}

std::string csv_header()
{
    std::string line;
    for (const auto& c : csv_columns()) {
        if (!line.empty()) line += ',';
        line += c;
    }
    return line;
}

std::string csv_row(const DiagnosticsRecord& r)
{
    std::string line;
    for (double v : csv_values(r)) {
        if (!line.empty()) line += ',';
        line += format_real(v);
    }
    return line;
}

// ---------------------------------------------------------------------------
// Weak identities

double TestFunctions::bump(double t) const
{
    const double tau = 2.0 * (t - t0) / (t1 - t0) - 1.0;
    if (!(std::abs(tau) < 1.0)) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - tau * tau));
}

TestFunctions draw_test_functions(std::uint64_t seed, double t0, double t1)
{
    if (!(t1 > t0)) throw DiagnosticsError("test-function window must have t1 > t0");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> mode(1, 3);
    TestFunctions tf;
    for (int& k : tf.k) k = mode(rng);
    tf.m = mode(rng);
    tf.t0 = t0;
    tf.t1 = t1;
    return tf;
}

double WeakResiduals::max() const { return std::max({n1, n2, c, u}); }

namespace {

std::string scaled_coordinate(int a, double factor, double length)
{
    static const char* names[] = {"x", "y", "z"};
    return format_real(factor / length) + "*" + names[a];
}

}  // namespace

WeakResidualMonitor::WeakResidualMonitor(const Grid& g, const model::ModelParams& p, const FaceField& grad_phi,
                                         const TestFunctions& tf)
    : grid_(g), params_(p), grad_phi_(grad_phi), tf_(tf)
{
    core::require_same_grid(g, grad_phi.grid(), "WeakResidualMonitor");
    using model::Expression;
    const int dim = g.dim();
    const double pi = std::acos(-1.0);

    std::string phi_src = "1", s_src = "1";
    for (int a = 0; a < dim; ++a) {
        phi_src += "*cos(" + scaled_coordinate(a, pi * tf.k[a], g.lengths()[a]) + ")";
        s_src += "*sin(" + scaled_coordinate(a, pi * tf.m, g.lengths()[a]) + ")^2";
    }
    const Expression phi = Expression::parse(phi_src);
    const Expression s = Expression::parse(s_src);
    const std::array<Expression, 3> psi{s.derivative(1), Expression::parse("-(" + s_src + ")").derivative(0),
                                        Expression::constant(0.0)};

    auto laplacian = [dim](const Expression& e) {
        std::string src = "0";
        for (int a = 0; a < dim; ++a) src += "+(" + e.derivative(a).derivative(a).source() + ")";
        return Expression::parse(src);
    };
    const Expression lap_phi = laplacian(phi);

    phi_ = ScalarField(g);
    lap_phi_ = ScalarField(g);
    core::for_each_cell(g, [&](int i, int j, int k, std::size_t idx) {
        const auto x = g.cell_center(i, j, k);
        phi_[idx] = phi(x);
        lap_phi_[idx] = lap_phi(x);
    });
    grad_phi_test_ = FaceField(g);
    psi_ = FaceField(g);
    lap_psi_ = FaceField(g);
    for (int a = 0; a < dim; ++a) {
        const Expression dphi = phi.derivative(a);
        const Expression lp = laplacian(psi[a]);
        core::for_each_face(g, a, [&](int i, int j, int k, std::size_t f) {
            const auto x = g.face_center(a, i, j, k);
            grad_phi_test_.component(a)[f] = dphi(x);
            psi_.component(a)[f] = psi[a](x);
            lap_psi_.component(a)[f] = lp(x);
        });
        for (int b = 0; b < dim; ++b) {
            const Expression d = psi[a].derivative(b);
            ScalarField& out = grad_psi_[static_cast<std::size_t>(a + 3 * b)];
            out = ScalarField(g);
            core::for_each_cell(g, [&](int i, int j, int k, std::size_t idx) { out[idx] = d(g.cell_center(i, j, k)); });
        }
    }
}

void WeakResidualMonitor::add(const State& before, const State& after)
{
    core::require_same_grid(grid_, after.grid(), "WeakResidualMonitor::add");
    if (!started_) {
        first_t_ = before.t;
        started_ = true;
    }
    last_t_ = after.t;
    const double dt = after.t - before.t;
    const double b = tf_.bump(after.t);
    if (b == 0.0) return;
    const Grid& g = grid_;
    const double vol = g.cell_volume();
    const model::ModelParams& p = params_;

    // Face-averaged values of the new scalars.
    const FaceField n1f = core::face_average(after.n1);
    const FaceField n2f = core::face_average(after.n2);
    const FaceField cf = core::face_average(after.c);
    const FaceField grad_c = core::gradient_faces(after.c);

    double t_n1 = 0, t_n2 = 0, t_c = 0;
    double diff_n1 = 0, diff_n2 = 0, diff_c = 0, react_n1 = 0, react_n2 = 0, react_c = 0;
    for (std::size_t i = 0; i < phi_.size(); ++i) {
        const double n1 = after.n1[i], n2 = after.n2[i], c = after.c[i];
        t_n1 += (n1 - before.n1[i]) * phi_[i];
        t_n2 += (n2 - before.n2[i]) * phi_[i];
        t_c += (c - before.c[i]) * phi_[i];
        diff_n1 += n1 * lap_phi_[i];
        diff_n2 += n2 * lap_phi_[i];
        diff_c += c * lap_phi_[i];
        react_n1 += p.mu1 * n1 * (1.0 - n1 - p.a1 * n2) * phi_[i];
        react_n2 += p.mu2 * n2 * (1.0 - p.a2 * n1 - n2) * phi_[i];
        react_c += (p.alpha * n1 + p.beta * n2) * c * phi_[i];
    }
    double adv_n1 = 0, adv_n2 = 0, adv_c = 0, chemo_n1 = 0, chemo_n2 = 0;
    double t_u = 0, visc_u = 0, force_u = 0;
    for (int a = 0; a < g.dim(); ++a) {
        const auto u = after.u.component(a);
        const auto u0 = before.u.component(a);
        const auto dphi = grad_phi_test_.component(a);
        const auto gc = grad_c.component(a);
        const auto psi = psi_.component(a);
        const auto lpsi = lap_psi_.component(a);
        const auto gP = grad_phi_.component(a);
        const auto a1 = n1f.component(a), a2 = n2f.component(a), ac = cf.component(a);
        for (std::size_t f = 0; f < u.size(); ++f) {
            adv_n1 += a1[f] * u[f] * dphi[f];
            adv_n2 += a2[f] * u[f] * dphi[f];
            adv_c += ac[f] * u[f] * dphi[f];
            chemo_n1 += a1[f] * gc[f] * dphi[f];
            chemo_n2 += a2[f] * gc[f] * dphi[f];
            t_u += (u[f] - u0[f]) * psi[f];
            visc_u += u[f] * lpsi[f];
            force_u += (p.gamma * a1[f] + p.delta * a2[f]) * gP[f] * psi[f];
        }
    }
    // u (x) u : grad psi with face velocities averaged to cell centres.
    double conv_u = 0.0;
    if (p.kappa != 0) {
        std::array<ScalarField, 3> uc;
        for (int a = 0; a < g.dim(); ++a) {
            uc[a] = ScalarField(g);
            const std::size_t fs = g.face_stride(a, a);
            const auto u = after.u.component(a);
            core::for_each_cell(g, [&](int i, int j, int k, std::size_t idx) {
                const std::size_t lo = g.face_index(a, i, j, k);
                uc[a][idx] = 0.5 * (u[lo] + u[lo + fs]);
            });
        }
        for (int a = 0; a < g.dim(); ++a)
            for (int bb = 0; bb < g.dim(); ++bb) {
                const ScalarField& d = grad_psi_[static_cast<std::size_t>(a + 3 * bb)];
                for (std::size_t i = 0; i < d.size(); ++i) conv_u += uc[a][i] * uc[bb][i] * d[i];
            }
    }

    sum_[0] += b * vol * (t_n1 - dt * (adv_n1 + diff_n1 + p.chi1 * chemo_n1 + react_n1));
    sum_[1] += b * vol * (t_n2 - dt * (adv_n2 + diff_n2 + p.chi2 * chemo_n2 + react_n2));
    sum_[2] += b * vol * (t_c - dt * (adv_c + diff_c - react_c));
    sum_[3] += b * vol * (t_u - dt * (p.kappa * conv_u + visc_u + force_u));
}

WeakResiduals WeakResidualMonitor::residuals() const
{
    const double slack = 1e-9 * (tf_.t1 - tf_.t0);
    if (!started_ || first_t_ > tf_.t0 + slack || last_t_ < tf_.t1 - slack)
        throw DiagnosticsError("test function support is not contained in the stored time window");
    return {std::abs(sum_[0]), std::abs(sum_[1]), std::abs(sum_[2]), std::abs(sum_[3])};
}

WeakResiduals weak_residuals(std::span<const State> trajectory, const model::ModelParams& p,
                             const FaceField& grad_phi, const TestFunctions& tf)
{
    if (trajectory.size() < 2) throw DiagnosticsError("weak residuals need at least two stored states");
    WeakResidualMonitor monitor(trajectory.front().grid(), p, grad_phi, tf);
    for (std::size_t k = 0; k + 1 < trajectory.size(); ++k) monitor.add(trajectory[k], trajectory[k + 1]);
    return monitor.residuals();
}

}  // namespace ksns::diagnostics
