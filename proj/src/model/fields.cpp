#include "ksns/model/fields.hpp"

#include "ksns/core/operators.hpp"
#include "ksns/flow/flow.hpp"

#include <cstdio>

namespace ksns::model {

ScalarField sample_cells(const Grid& g, const Expression& e)
{
    ScalarField f(g);
    core::for_each_cell(g, [&](int i, int j, int k, std::size_t idx) { f[idx] = e(g.cell_center(i, j, k)); });
    return f;
}

FaceField sample_faces(const Grid& g, const std::vector<Expression>& components)
{
    if (components.size() != static_cast<std::size_t>(g.dim()))
        throw std::invalid_argument("need one expression per velocity component");
    FaceField f(g);
    for (int a = 0; a < g.dim(); ++a) {
        auto comp = f.component(a);
        core::for_each_face(g, a, [&](int i, int j, int k, std::size_t idx) {
            comp[idx] = core::is_boundary_face(g, a, i, j, k) ? 0.0 : components[a](g.face_center(a, i, j, k));
        });
    }
    return f;
}

FaceField potential_gradient(const Grid& g, const Expression& phi)
{
    std::vector<Expression> grad;
    for (int a = 0; a < g.dim(); ++a) grad.push_back(phi.derivative(a));
    return sample_faces(g, grad);
}

FaceField buoyancy_force(const ScalarField& n1, const ScalarField& n2, const FaceField& grad_phi,
                         const ModelParams& p)
{
    core::require_same_grid(n1.grid(), n2.grid(), "buoyancy_force");
    core::require_same_grid(n1.grid(), grad_phi.grid(), "buoyancy_force");
    const Grid& g = n1.grid();
    FaceField out(g);
    for (int a = 0; a < g.dim(); ++a) {
        auto comp = out.component(a);
        const auto gp = grad_phi.component(a);
        const std::size_t s = g.stride(a);
        core::for_each_face(g, a, [&](int i, int j, int k, std::size_t f) {
            if (core::is_boundary_face(g, a, i, j, k)) return;
            const std::size_t hi = g.index(i, j, k);
            const double weight =
                0.5 * (p.gamma * (n1[hi] + n1[hi - s]) + p.delta * (n2[hi] + n2[hi - s]));
            comp[f] = weight * gp[f];
        });
    }
    return out;
}

namespace {

std::string describe(const std::string& field, double minimum)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", minimum);
    return "initial " + field + " must be strictly positive; minimum is " + buf;
}

}  // namespace

InitialDataError::InitialDataError(const std::string& f, double m)
    : std::invalid_argument(describe(f, m)), field(f), minimum(m)
{
}

InitialData validate_initial_data(const ScalarField& n1, const ScalarField& n2, const ScalarField& c,
                                  const VelocityField& u, const flow::PressureSolver& pressure)
{
    core::require_same_grid(n1.grid(), n2.grid(), "validate_initial_data");
    core::require_same_grid(n1.grid(), c.grid(), "validate_initial_data");
    core::require_same_grid(n1.grid(), u.grid(), "validate_initial_data");
    const std::pair<const char*, const ScalarField*> scalars[] = {{"n1", &n1}, {"n2", &n2}, {"c", &c}};
    for (const auto& [name, f] : scalars) {
        if (!f->all_finite()) throw InitialDataError(name, f->min());
        if (!(f->min() > 0.0)) throw InitialDataError(name, f->min());
    }
    core::require_finite(u, "initial velocity");

    VelocityField walls = u;
    walls.zero_boundary();
    InitialData out{n1, n2, c, std::move(walls)};
    if (out.u.max_abs() > 0.0) out.u = flow::project(pressure, out.u).velocity;
    return out;
}

}  // namespace ksns::model
