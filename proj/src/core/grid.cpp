#include "ksns/core/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ksns::core {

Grid Grid::make(int dim, std::span<const int> cells, std::span<const double> lengths, std::size_t max_cells)
{
    if (dim != 2 && dim != 3) throw GridError("grid dimension must be 2 or 3, got " + std::to_string(dim));
    if (cells.size() != static_cast<std::size_t>(dim) || lengths.size() != static_cast<std::size_t>(dim))
        throw GridError("grid needs exactly " + std::to_string(dim) + " cell counts and lengths");

    Grid g;
    g.dim_ = dim;
    std::size_t total = 1;
    for (int a = 0; a < dim; ++a) {
        if (cells[a] < 4) throw GridError("grid needs at least 4 cells per axis (axis " + std::to_string(a) + ")");
        if (!(lengths[a] > 0.0) || !std::isfinite(lengths[a]))
            throw GridError("grid length must be positive and finite (axis " + std::to_string(a) + ")");
        g.cells_[a] = cells[a];
        g.lengths_[a] = lengths[a];
        g.spacing_[a] = lengths[a] / cells[a];
        if (total > max_cells / static_cast<std::size_t>(cells[a]))
            throw GridError("grid exceeds the cell budget of " + std::to_string(max_cells) + " cells");
        total *= static_cast<std::size_t>(cells[a]);
    }
    if (total > max_cells) throw GridError("grid exceeds the cell budget of " + std::to_string(max_cells) + " cells");

    g.cell_count_ = total;
    g.strides_ = {1, static_cast<std::size_t>(g.cells_[0]),
                  static_cast<std::size_t>(g.cells_[0]) * static_cast<std::size_t>(g.cells_[1])};
    g.cell_volume_ = 1.0;
    for (int a = 0; a < dim; ++a) g.cell_volume_ *= g.spacing_[a];
    return g;
}

double Grid::min_spacing() const
{
    double h = std::numeric_limits<double>::infinity();
    for (int a = 0; a < dim_; ++a) h = std::min(h, spacing_[a]);
    return h;
}

double Grid::domain_volume() const
{
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= lengths_[a];
    return v;
}

std::array<int, 3> Grid::face_extent(int axis) const
{
    auto e = cells_;
    e[axis] += 1;
    return e;
}

std::size_t Grid::face_count(int axis) const
{
    const auto e = face_extent(axis);
    return static_cast<std::size_t>(e[0]) * static_cast<std::size_t>(e[1]) * static_cast<std::size_t>(e[2]);
}

std::size_t Grid::face_stride(int axis, int along) const
{
    const auto e = face_extent(axis);
    if (along == 0) return 1;
    if (along == 1) return static_cast<std::size_t>(e[0]);
    return static_cast<std::size_t>(e[0]) * static_cast<std::size_t>(e[1]);
}

std::array<double, 3> Grid::cell_center(int i, int j, int k) const
{
    std::array<double, 3> x{(i + 0.5) * spacing_[0], (j + 0.5) * spacing_[1], 0.0};
    if (dim_ == 3) x[2] = (k + 0.5) * spacing_[2];
    return x;
}

std::array<double, 3> Grid::face_center(int axis, int i, int j, int k) const
{
    auto x = cell_center(i, j, k);
    x[axis] -= 0.5 * spacing_[axis];
    return x;
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

bool ScalarField::all_finite() const
{
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

FaceField::FaceField(const Grid& g, double fill) : grid_(g)
{
    for (int a = 0; a < g.dim(); ++a) comp_[a].assign(g.face_count(a), fill);
}

void FaceField::zero_boundary()
{
    for (int a = 0; a < grid_.dim(); ++a)
        for_each_face(grid_, a, [&](int i, int j, int k, std::size_t idx) {
            if (is_boundary_face(grid_, a, i, j, k)) comp_[a][idx] = 0.0;
        });
}

bool FaceField::boundary_is_zero() const
{
    bool ok = true;
    for (int a = 0; a < grid_.dim(); ++a)
        for_each_face(grid_, a, [&](int i, int j, int k, std::size_t idx) {
            if (is_boundary_face(grid_, a, i, j, k) && comp_[a][idx] != 0.0) ok = false;
        });
    return ok;
}

bool FaceField::all_finite() const
{
    for (int a = 0; a < grid_.dim(); ++a)
        if (!std::all_of(comp_[a].begin(), comp_[a].end(), [](double v) { return std::isfinite(v); }))
            return false;
    return true;
}

double FaceField::max_abs() const
{
    double m = 0.0;
    for (int a = 0; a < grid_.dim(); ++a)
        for (double v : comp_[a]) m = std::max(m, std::abs(v));
    return m;
}

void require_same_grid(const Grid& a, const Grid& b, const char* what)
{
    if (!(a == b)) throw GridError(std::string("grid mismatch in ") + what);
}

}  // namespace ksns::core
