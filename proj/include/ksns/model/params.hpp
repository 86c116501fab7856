#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace ksns::model {

struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Physical constants of the coupled system plus the regularisation
/// parameter. eps == 0 is the unregularised system.
struct ModelParams {
    double chi1 = 0.0;   ///< chemotactic sensitivity of species 1
    double chi2 = 0.0;
    double a1 = 0.0;     ///< competition coefficients
    double a2 = 0.0;
    double mu1 = 1.0;    ///< growth rates
    double mu2 = 1.0;
    double alpha = 1.0;  ///< signal consumption rates
    double beta = 1.0;
    double gamma = 1.0;  ///< buoyancy coefficients
    double delta = 1.0;
    int kappa = 1;       ///< 1: Navier-Stokes, 0: Stokes
    double eps = 0.0;

    /// Throws ParameterError naming the first violated sign constraint.
    void validate() const;

    bool operator==(const ModelParams&) const = default;
};

enum class Regime { coexistence, exclusion, out_of_scope };

const char* to_string(Regime r);

/// Large-time limit of (n1, n2) when the competition coefficients select one.
struct SteadyState {
    double n1_limit = 0.0;
    double n2_limit = 0.0;
    Regime regime = Regime::out_of_scope;
};

SteadyState steady_states(const ModelParams& p);

/// Lotka-Volterra competitive kinetics (mu1 n1 (1-n1-a1 n2), mu2 n2 (1-a2 n1-n2)).
std::pair<double, double> lv_reaction(double n1, double n2, const ModelParams& p);

/// n / (1 + eps n); exactly n for eps == 0.
double chemo_mobility(double n, double eps);

/// (1/eps) log(1 + eps (alpha n1 + beta n2)), or alpha n1 + beta n2 for eps == 0.
double consumption_rate(double n1, double n2, const ModelParams& p);

}  // namespace ksns::model
