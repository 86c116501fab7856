#include "ksns/core/operators.hpp"

#include <algorithm>
#include <cmath>

namespace ksns::core {

void require_finite(const ScalarField& f, const char* what)
{
    if (!f.all_finite()) throw NonFiniteError(std::string("non-finite value in ") + what);
}

void require_finite(const FaceField& f, const char* what)
{
    if (!f.all_finite()) throw NonFiniteError(std::string("non-finite value in ") + what);
}

ScalarField laplacian_neumann(const ScalarField& f)
{
    require_finite(f, "laplacian_neumann input");
    ScalarField out(f.grid());
    laplacian_neumann(f.grid(), f.values(), out.values());
    return out;
}

void laplacian_neumann(const Grid& g, std::span<const double> f, std::span<double> out)
{
    for_each_cell(g, [&](int i, int j, int k, std::size_t idx) {
        const int ijk[3] = {i, j, k};
        const double fc = f[idx];
        double sum = 0.0;
        for (int a = 0; a < g.dim(); ++a) {
            const std::size_t s = g.stride(a);
            const double lo = ijk[a] > 0 ? f[idx - s] : fc;
            const double hi = ijk[a] < g.cells(a) - 1 ? f[idx + s] : fc;
            const double h = g.spacing(a);
            sum += (hi - 2.0 * fc + lo) / (h * h);
        }
        out[idx] = sum;
    });
}

FaceField gradient_faces(const ScalarField& f)
{
    require_finite(f, "gradient_faces input");
    const Grid& g = f.grid();
    FaceField out(g);
    for (int a = 0; a < g.dim(); ++a) {
        auto comp = out.component(a);
        const double inv_h = 1.0 / g.spacing(a);
        const std::size_t s = g.stride(a);
        for_each_face(g, a, [&](int i, int j, int k, std::size_t fidx) {
            if (is_boundary_face(g, a, i, j, k)) return;
            const std::size_t hi = g.index(i, j, k);
            comp[fidx] = (f[hi] - f[hi - s]) * inv_h;
        });
    }
    return out;
}

ScalarField divergence_faces(const FaceField& gf)
{
    require_finite(gf, "divergence_faces input");
    const Grid& g = gf.grid();
    ScalarField out(g);
    for (int a = 0; a < g.dim(); ++a) {
        const auto comp = gf.component(a);
        const double inv_h = 1.0 / g.spacing(a);
        const std::size_t fs = g.face_stride(a, a);
        for_each_cell(g, [&](int i, int j, int k, std::size_t idx) {
            const std::size_t lo = g.face_index(a, i, j, k);
            out[idx] += (comp[lo + fs] - comp[lo]) * inv_h;
        });
    }
    return out;
}

ScalarField advect_upwind(const ScalarField& f, const VelocityField& u)
{
    require_same_grid(f.grid(), u.grid(), "advect_upwind");
    require_finite(f, "advect_upwind scalar");
    require_finite(u, "advect_upwind velocity");
    const Grid& g = f.grid();
    FaceField flux(g);
    for (int a = 0; a < g.dim(); ++a) {
        const auto vel = u.component(a);
        auto fl = flux.component(a);
        const std::size_t s = g.stride(a);
        for_each_face(g, a, [&](int i, int j, int k, std::size_t fidx) {
            if (is_boundary_face(g, a, i, j, k)) return;
            const std::size_t hi = g.index(i, j, k);
            const double v = vel[fidx];
            fl[fidx] = v * (v > 0.0 ? f[hi - s] : f[hi]);
        });
    }
    return divergence_faces(flux);
}

double integrate(const ScalarField& f)
{
    double sum = 0.0;
    for (double v : f.values()) sum += v;
    return sum * f.grid().cell_volume();
}

double inner(const ScalarField& a, const ScalarField& b)
{
    require_same_grid(a.grid(), b.grid(), "inner");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
    return sum * a.grid().cell_volume();
}

double inner(const FaceField& a, const FaceField& b)
{
    require_same_grid(a.grid(), b.grid(), "inner");
    double sum = 0.0;
    for (int ax = 0; ax < a.grid().dim(); ++ax) {
        const auto ca = a.component(ax);
        const auto cb = b.component(ax);
        for (std::size_t i = 0; i < ca.size(); ++i) sum += ca[i] * cb[i];
    }
    return sum * a.grid().cell_volume();
}

ScalarField cell_average_squared(const FaceField& gf)
{
    const Grid& g = gf.grid();
    ScalarField out(g);
    for (int a = 0; a < g.dim(); ++a) {
        const auto comp = gf.component(a);
        const std::size_t fs = g.face_stride(a, a);
        for_each_cell(g, [&](int i, int j, int k, std::size_t idx) {
            const std::size_t lo = g.face_index(a, i, j, k);
            out[idx] += 0.5 * (comp[lo] * comp[lo] + comp[lo + fs] * comp[lo + fs]);
        });
    }
    return out;
}

FaceField face_average(const ScalarField& f)
{
    const Grid& g = f.grid();
    FaceField out(g);
    for (int a = 0; a < g.dim(); ++a) {
        auto comp = out.component(a);
        const std::size_t s = g.stride(a);
        for_each_face(g, a, [&](int i, int j, int k, std::size_t fidx) {
            if (is_boundary_face(g, a, i, j, k)) return;
            const std::size_t hi = g.index(i, j, k);
            comp[fidx] = 0.5 * (f[hi] + f[hi - s]);
        });
    }
    return out;
}

double max_abs_divergence(const FaceField& u)
{
    const ScalarField d = divergence_faces(u);
    double m = 0.0;
    for (double v : d.values()) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace ksns::core
