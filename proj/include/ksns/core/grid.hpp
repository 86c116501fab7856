#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ksns::core {

/// Default ceiling on the total number of cells a grid may hold (2^27).
inline constexpr std::size_t kDefaultMaxCells = std::size_t{1} << 27;

struct GridError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Uniform box grid, cell-centred scalars and MAC faces.
///
/// Indices are (i, j, k) with i fastest. In two dimensions the third axis is
/// degenerate: cells[2] == 1 and it never enters a stencil or a volume.
class Grid {
public:
    Grid() = default;

    static Grid make(int dim, std::span<const int> cells, std::span<const double> lengths,
                     std::size_t max_cells = kDefaultMaxCells);

    int dim() const { return dim_; }
    const std::array<int, 3>& cells() const { return cells_; }
    const std::array<double, 3>& lengths() const { return lengths_; }
    const std::array<double, 3>& spacing() const { return spacing_; }
    int cells(int axis) const { return cells_[axis]; }
    double spacing(int axis) const { return spacing_[axis]; }
    double min_spacing() const;

    std::size_t cell_count() const { return cell_count_; }
    double cell_volume() const { return cell_volume_; }
    double domain_volume() const;

    std::size_t index(int i, int j, int k) const
    {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(cells_[0]) *
                   (static_cast<std::size_t>(j) + static_cast<std::size_t>(cells_[1]) * k);
    }
    std::size_t stride(int axis) const { return strides_[axis]; }

    /// Extent of the face array normal to `axis` (one extra layer along it).
    std::array<int, 3> face_extent(int axis) const;
    std::size_t face_count(int axis) const;
    std::size_t face_index(int axis, int i, int j, int k) const
    {
        const auto e = face_extent(axis);
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(e[0]) *
                   (static_cast<std::size_t>(j) + static_cast<std::size_t>(e[1]) * k);
    }
    std::size_t face_stride(int axis, int along) const;

    std::array<double, 3> cell_center(int i, int j, int k) const;
    std::array<double, 3> face_center(int axis, int i, int j, int k) const;

    bool operator==(const Grid&) const = default;

private:
    int dim_ = 0;
    std::array<int, 3> cells_{1, 1, 1};
    std::array<double, 3> lengths_{1.0, 1.0, 1.0};
    std::array<double, 3> spacing_{1.0, 1.0, 1.0};
    std::array<std::size_t, 3> strides_{1, 1, 1};
    std::size_t cell_count_ = 0;
    double cell_volume_ = 0.0;
};

/// Calls f(i, j, k, idx) for every cell, i fastest.
template <class F>
void for_each_cell(const Grid& g, F&& f)
{
    std::size_t idx = 0;
    for (int k = 0; k < g.cells(2); ++k)
        for (int j = 0; j < g.cells(1); ++j)
            for (int i = 0; i < g.cells(0); ++i, ++idx) f(i, j, k, idx);
}

/// Calls f(i, j, k, idx) for every face normal to `axis`, boundary faces included.
template <class F>
void for_each_face(const Grid& g, int axis, F&& f)
{
    const auto e = g.face_extent(axis);
    std::size_t idx = 0;
    for (int k = 0; k < e[2]; ++k)
        for (int j = 0; j < e[1]; ++j)
            for (int i = 0; i < e[0]; ++i, ++idx) f(i, j, k, idx);
}

inline bool is_boundary_face(const Grid& g, int axis, int i, int j, int k)
{
    const int along = axis == 0 ? i : (axis == 1 ? j : k);
    return along == 0 || along == g.cells(axis);
}

/// One real per cell.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const Grid& g, double fill = 0.0) : grid_(g), values_(g.cell_count(), fill) {}

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }

    double& operator[](std::size_t idx) { return values_[idx]; }
    double operator[](std::size_t idx) const { return values_[idx]; }
    double& operator()(int i, int j, int k) { return values_[grid_.index(i, j, k)]; }
    double operator()(int i, int j, int k) const { return values_[grid_.index(i, j, k)]; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    double min() const;
    double max() const;
    bool all_finite() const;

    bool operator==(const ScalarField&) const = default;

private:
    Grid grid_;
    std::vector<double> values_;
};

/// One real per face per axis (MAC layout). Boundary faces are stored and,
/// for velocities, held at zero.
class FaceField {
public:
    FaceField() = default;
    explicit FaceField(const Grid& g, double fill = 0.0);

    const Grid& grid() const { return grid_; }

    std::span<double> component(int axis) { return comp_[axis]; }
    std::span<const double> component(int axis) const { return comp_[axis]; }
    double& operator()(int axis, int i, int j, int k) { return comp_[axis][grid_.face_index(axis, i, j, k)]; }
    double operator()(int axis, int i, int j, int k) const { return comp_[axis][grid_.face_index(axis, i, j, k)]; }

    void zero_boundary();
    bool boundary_is_zero() const;
    bool all_finite() const;
    /// Largest |component| over all faces.
    double max_abs() const;

    bool operator==(const FaceField&) const = default;

private:
    Grid grid_;
    std::array<std::vector<double>, 3> comp_;
};

/// Velocities live on faces with zero normal component on the walls.
using VelocityField = FaceField;

/// Throws GridError when two fields disagree on their grid.
void require_same_grid(const Grid& a, const Grid& b, const char* what);

}  // namespace ksns::core
