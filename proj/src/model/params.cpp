#include "ksns/model/params.hpp"

#include <cmath>

namespace ksns::model {

namespace {

void require(bool ok, const char* name, const char* constraint)
{
    if (!ok) throw ParameterError(std::string("model.") + name + " must be " + constraint);
}

}  // namespace

void ModelParams::validate() const
{
    auto nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
    auto pos = [](double v) { return std::isfinite(v) && v > 0.0; };
    require(nonneg(chi1), "chi1", ">= 0");
    require(nonneg(chi2), "chi2", ">= 0");
    require(nonneg(a1), "a1", ">= 0");
    require(nonneg(a2), "a2", ">= 0");
    require(pos(mu1), "mu1", "> 0");
    require(pos(mu2), "mu2", "> 0");
    require(pos(alpha), "alpha", "> 0");
    require(pos(beta), "beta", "> 0");
    require(pos(gamma), "gamma", "> 0");
    require(pos(delta), "delta", "> 0");
    require(kappa == 0 || kappa == 1, "kappa", "0 or 1");
    require(nonneg(eps), "eps", ">= 0");
}

const char* to_string(Regime r)
{
    switch (r) {
    case Regime::coexistence: return "coexistence";
    case Regime::exclusion: return "exclusion";
    case Regime::out_of_scope: return "out_of_scope";
    }
    return "out_of_scope";
}

SteadyState steady_states(const ModelParams& p)
{
    // Zero coefficients are admitted: (0, 0) is the decoupled logistic case.
    if (p.a1 < 1.0 && p.a2 < 1.0) {
        const double det = 1.0 - p.a1 * p.a2;
        return {(1.0 - p.a1) / det, (1.0 - p.a2) / det, Regime::coexistence};
    }
    if (p.a1 >= 1.0 && p.a2 < 1.0) return {0.0, 1.0, Regime::exclusion};
    return {0.0, 0.0, Regime::out_of_scope};
}

std::pair<double, double> lv_reaction(double n1, double n2, const ModelParams& p)
{
    return {p.mu1 * n1 * (1.0 - n1 - p.a1 * n2), p.mu2 * n2 * (1.0 - p.a2 * n1 - n2)};
}

double chemo_mobility(double n, double eps)
{
    if (eps == 0.0) return n;
    return n / (1.0 + eps * n);
}

double consumption_rate(double n1, double n2, const ModelParams& p)
{
    const double linear = p.alpha * n1 + p.beta * n2;
    if (p.eps == 0.0) return linear;
    return std::log1p(p.eps * linear) / p.eps;
}

}  // namespace ksns::model
