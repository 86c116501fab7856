#pragma once

#include "ksns/core/grid.hpp"
#include "ksns/model/expression.hpp"
#include "ksns/model/params.hpp"

#include <stdexcept>
#include <vector>

namespace ksns::flow {
class PressureSolver;
}

namespace ksns::model {

using core::FaceField;
using core::Grid;
using core::ScalarField;
using core::VelocityField;

/// Expression sampled at cell centres.
ScalarField sample_cells(const Grid& g, const Expression& e);

/// Per-axis expressions sampled at face centres; wall faces set to 0.
FaceField sample_faces(const Grid& g, const std::vector<Expression>& components);

/// grad(phi) at face centres by symbolic differentiation; wall faces 0.
FaceField potential_gradient(const Grid& g, const Expression& phi);

/// (gamma n1 + delta n2) interpolated to faces, times grad(phi); wall faces 0.
FaceField buoyancy_force(const ScalarField& n1, const ScalarField& n2, const FaceField& grad_phi,
                         const ModelParams& p);

/// Rejection of inadmissible initial data; carries the offending minimum.
struct InitialDataError : std::invalid_argument {
    InitialDataError(const std::string& field, double minimum);
    std::string field;
    double minimum;
};

struct InitialData {
    ScalarField n1;
    ScalarField n2;
    ScalarField c;
    VelocityField u;
};

/// Requires strictly positive n1, n2, c and projects u onto the discretely
/// solenoidal no-slip subspace.
InitialData validate_initial_data(const ScalarField& n1, const ScalarField& n2, const ScalarField& c,
                                  const VelocityField& u, const flow::PressureSolver& pressure);

}  // namespace ksns::model
