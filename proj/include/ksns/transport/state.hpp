#pragma once

#include "ksns/core/grid.hpp"

namespace ksns::transport {

/// One time slice of the coupled system. p follows the "+grad P" sign
/// convention of the momentum equation.
struct State {
    double t = 0.0;
    core::ScalarField n1;
    core::ScalarField n2;
    core::ScalarField c;
    core::VelocityField u;
    core::ScalarField p;

    const core::Grid& grid() const { return n1.grid(); }
};

}  // namespace ksns::transport
