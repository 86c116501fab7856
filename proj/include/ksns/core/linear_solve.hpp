#pragma once

#include "ksns/core/errors.hpp"
#include "ksns/core/grid.hpp"

#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace ksns::core {

/// Unknown layouts the box Laplacian is diagonalised on.
enum class Layout {
    cell_neumann,   ///< cell-centred, reflected ghosts on every wall
    face_no_slip,   ///< interior faces normal to one axis, zero on the walls
};

/// Exact inverse of (shift*I + scale*L) on a uniform box, with L the
/// positive semidefinite negative Laplacian of the layout. Cosine/sine
/// transforms (FFTW r2r) diagonalise L per axis.
///
/// Plans are built once and only read afterwards, so one instance may be
/// used from several threads; every call allocates its own workspace.
class FastDiagonalSolver {
public:
    FastDiagonalSolver(const Grid& g, Layout layout, int normal_axis = 0);

    /// Number of unknowns in the compact layout.
    std::size_t size() const { return size_; }
    const std::array<int, 3>& extent() const { return extent_; }
    Layout layout() const { return layout_; }
    int normal_axis() const { return axis_; }

    /// out = (shift + scale*L)^{-1} rhs. With shift == 0 the constant mode is
    /// dropped (mean-zero gauge) and rhs must already be mean-zero.
    void solve(std::span<const double> rhs, std::span<double> out, double shift, double scale) const;

    /// Eigenvalue of L for the multi-index k (for tests).
    double eigenvalue(const std::array<int, 3>& k) const;

private:
    struct Plans;
    Grid grid_;
    Layout layout_;
    int axis_;
    std::array<int, 3> extent_{1, 1, 1};
    std::size_t size_ = 0;
    std::array<std::vector<double>, 3> eig_;
    double norm_ = 1.0;
    std::shared_ptr<const Plans> plans_;
};

using LinearMap = std::function<void(std::span<const double>, std::span<double>)>;

struct SolveReport {
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Preconditioned conjugate gradients for an SPD map. Starts from x = M b,
/// stops at ||b - A x|| <= tol * ||b||, throws SolverError past max_iter.
SolveReport pcg(const LinearMap& apply, const LinearMap& precondition, std::span<const double> b,
                std::span<double> x, double tol, int max_iter, const char* what);

/// Iteration cap 10 * (total cells)^(1/dim).
int default_iteration_cap(const Grid& g);

}  // namespace ksns::core
