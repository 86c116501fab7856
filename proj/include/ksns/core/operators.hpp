#pragma once

#include "ksns/core/errors.hpp"
#include "ksns/core/grid.hpp"

#include <span>

namespace ksns::core {

void require_finite(const ScalarField& f, const char* what);
void require_finite(const FaceField& f, const char* what);

/// 2*dim+1 point Laplacian with reflected ghosts (homogeneous Neumann).
ScalarField laplacian_neumann(const ScalarField& f);
void laplacian_neumann(const Grid& g, std::span<const double> f, std::span<double> out);

/// Two-point difference across every interior face; wall faces carry 0.
FaceField gradient_faces(const ScalarField& f);

/// Net face flux per cell divided by the cell volume.
ScalarField divergence_faces(const FaceField& g);

/// Conservative donor-cell discretisation of div(u f).
ScalarField advect_upwind(const ScalarField& f, const VelocityField& u);

/// Midpoint rule: sum of cell values times the cell volume.
double integrate(const ScalarField& f);

/// Cell-volume weighted inner products.
double inner(const ScalarField& a, const ScalarField& b);
double inner(const FaceField& a, const FaceField& b);

/// |G|^2 per cell, with the two faces bounding each cell averaged per axis.
ScalarField cell_average_squared(const FaceField& g);

/// Arithmetic mean of the two adjacent cells on interior faces, 0 on walls.
FaceField face_average(const ScalarField& f);

double max_abs_divergence(const FaceField& u);

}  // namespace ksns::core
