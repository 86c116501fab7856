#include "ksns/core/linear_solve.hpp"

#include <fftw3.h>

#include <cmath>
#include <numbers>
#include <string>

namespace ksns::core {

struct FastDiagonalSolver::Plans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
    ~Plans()
    {
        if (forward) fftw_destroy_plan(forward);
        if (backward) fftw_destroy_plan(backward);
    }
};

namespace {

double sin2(double x)
{
    const double s = std::sin(x);
    return s * s;
}

}  // namespace

FastDiagonalSolver::FastDiagonalSolver(const Grid& g, Layout layout, int normal_axis)
    : grid_(g), layout_(layout), axis_(normal_axis)
{
    const int dim = g.dim();
    std::array<fftw_r2r_kind, 3> fwd{};
    std::array<fftw_r2r_kind, 3> bwd{};
    size_ = 1;
    norm_ = 1.0;
    for (int a = 0; a < dim; ++a) {
        const int n = g.cells(a);
        const double h = g.spacing(a);
        const double c = 4.0 / (h * h);
        auto& eig = eig_[a];
        if (layout == Layout::cell_neumann) {
            extent_[a] = n;
            fwd[a] = FFTW_REDFT10;
            bwd[a] = FFTW_REDFT01;
            norm_ *= 2.0 * n;
            for (int k = 0; k < n; ++k) eig.push_back(c * sin2(std::numbers::pi * k / (2.0 * n)));
        } else if (a == normal_axis) {
            // Interior faces 1..n-1 with zero walls: Dirichlet nodes.
            extent_[a] = n - 1;
            fwd[a] = FFTW_RODFT00;
            bwd[a] = FFTW_RODFT00;
            norm_ *= 2.0 * n;
            for (int k = 1; k < n; ++k) eig.push_back(c * sin2(std::numbers::pi * k / (2.0 * n)));
        } else {
            // Cell-centred across the walls with antisymmetric ghosts.
            extent_[a] = n;
            fwd[a] = FFTW_RODFT10;
            bwd[a] = FFTW_RODFT01;
            norm_ *= 2.0 * n;
            for (int k = 1; k <= n; ++k) eig.push_back(c * sin2(std::numbers::pi * k / (2.0 * n)));
        }
        size_ *= static_cast<std::size_t>(extent_[a]);
    }

    // FFTW wants the slowest dimension first; ours is the last axis.
    int dims[3];
    fftw_r2r_kind kf[3];
    fftw_r2r_kind kb[3];
    for (int a = 0; a < dim; ++a) {
        dims[a] = extent_[dim - 1 - a];
        kf[a] = fwd[dim - 1 - a];
        kb[a] = bwd[dim - 1 - a];
    }
    std::vector<double> in(size_), out(size_);
    auto plans = std::make_shared<Plans>();
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    plans->forward = fftw_plan_r2r(dim, dims, in.data(), out.data(), kf, flags);
    plans->backward = fftw_plan_r2r(dim, dims, in.data(), out.data(), kb, flags);
    if (!plans->forward || !plans->backward) throw SolverError("FFTW could not build a transform plan");
    plans_ = std::move(plans);
}

double FastDiagonalSolver::eigenvalue(const std::array<int, 3>& k) const
{
    double lam = 0.0;
    for (int a = 0; a < grid_.dim(); ++a) lam += eig_[a][k[a]];
    return lam;
}

void FastDiagonalSolver::solve(std::span<const double> rhs, std::span<double> out, double shift, double scale) const
{
    if (rhs.size() != size_ || out.size() != size_) throw SolverError("fast solver: size mismatch");
    std::vector<double> in(rhs.begin(), rhs.end());
    std::vector<double> spec(size_);
    fftw_execute_r2r(plans_->forward, in.data(), spec.data());

    const double inv_norm = 1.0 / norm_;
    std::size_t idx = 0;
    for (int k = 0; k < extent_[2]; ++k) {
        const double l2 = grid_.dim() == 3 ? eig_[2][k] : 0.0;
        for (int j = 0; j < extent_[1]; ++j) {
            const double l1 = eig_[1][j] + l2;
            for (int i = 0; i < extent_[0]; ++i, ++idx) {
                const double denom = shift + scale * (eig_[0][i] + l1);
                spec[idx] = denom == 0.0 ? 0.0 : spec[idx] * inv_norm / denom;
            }
        }
    }
    fftw_execute_r2r(plans_->backward, spec.data(), out.data());
}

SolveReport pcg(const LinearMap& apply, const LinearMap& precondition, std::span<const double> b,
                std::span<double> x, double tol, int max_iter, const char* what)
{
    const std::size_t n = b.size();
    auto dot = [n](std::span<const double> p, std::span<const double> q) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += p[i] * q[i];
        return s;
    };

    const double bnorm = std::sqrt(dot(b, b));
    SolveReport rep;
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        return rep;
    }

    std::vector<double> r(n), z(n), p(n), ap(n);
    precondition(b, x);
    apply(x, ap);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
    double rnorm = std::sqrt(dot(r, r));
    rep.relative_residual = rnorm / bnorm;
    if (rep.relative_residual <= tol) return rep;

    precondition(r, z);
    p = z;
    double rz = dot(r, z);
    for (int it = 1; it <= max_iter; ++it) {
        apply(p, ap);
        const double pap = dot(p, ap);
        if (!(pap > 0.0)) break;
        const double alpha = rz / pap;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rnorm = std::sqrt(dot(r, r));
        rep.iterations = it;
        rep.relative_residual = rnorm / bnorm;
        if (rep.relative_residual <= tol) return rep;
        precondition(r, z);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw SolverError(std::string(what) + ": no convergence to relative residual " + std::to_string(tol) +
                      " within " + std::to_string(max_iter) + " iterations (reached " +
                      std::to_string(rep.relative_residual) + ")");
}

int default_iteration_cap(const Grid& g)
{
    const double n = static_cast<double>(g.cell_count());
    return static_cast<int>(std::ceil(10.0 * std::pow(n, 1.0 / g.dim())));
}

}  // namespace ksns::core
