#include "masolve/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "masolve/kernels.hpp"

namespace masolve {

std::array<double, 2> SymmetricMatrix2::eigenvalues() const {
    const double mean = 0.5 * (a11 + a22);
    const double half_diff = 0.5 * (a11 - a22);
    double disc = half_diff * half_diff + a12 * a12;
    if (std::abs(disc) < 1e-14) disc = std::max(disc, 0.0);
    const double r = std::sqrt(disc);
    return {mean - r, mean + r};
}

double det_plus(const SymmetricMatrix2& X) {
    const auto [l1, l2] = X.eigenvalues();
    return std::max(l1, 0.0) * std::max(l2, 0.0) + std::min(l1, 0.0) + std::min(l2, 0.0);
}

double det_plus(double x) { return std::max(x, 0.0) + std::min(x, 0.0); }

GridFunction::GridFunction(std::shared_ptr<const Grid> grid, double fill)
    : grid_(std::move(grid)), values_(grid_->size(), fill) {}

GridFunction::GridFunction(std::shared_ptr<const Grid> grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_->size()) {
        throw std::invalid_argument("grid function size does not match grid");
    }
}

GridFunction GridFunction::sample(std::shared_ptr<const Grid> grid, const ScalarFn& fn) {
    GridFunction u(grid);
    for (NodeIndex k = 0; k < u.size(); ++k) u[k] = fn(grid->point(k));
    return u;
}

double GridFunction::sup_norm() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

bool GridFunction::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double delta2(const GridFunction& u, NodeIndex node, const Offset& dir) {
    const Grid& grid = u.grid();
    const Offset ij = grid.lattice(node);
    const Offset fwd{ij[0] + dir[0], ij[1] + dir[1]};
    const Offset bwd{ij[0] - dir[0], ij[1] - dir[1]};
    if ((grid.dim() == 1 && dir[1] != 0) || !grid.in_lattice(fwd) || !grid.in_lattice(bwd)) {
        throw ClippedStencil("stencil foot outside the domain");
    }
    const double norm2 = grid.dim() == 1 ? dir[0] * dir[0] : dir[0] * dir[0] + dir[1] * dir[1];
    const double h = grid.h();
    return (u[grid.index(fwd)] + u[grid.index(bwd)] - 2.0 * u[node]) / (h * h * norm2);
}

double ma_wide_stencil(const GridFunction& u, NodeIndex node, std::span<const DirectionPair> pairs,
                       std::size_t* chosen_pair) {
    const Grid& grid = u.grid();
    if (grid.dim() == 1) {
        if (chosen_pair) *chosen_pair = 0;
        return delta2(u, node, {1, 0});
    }
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_index = pairs.size();
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& pr = pairs[i];
        if (neighbors_in_domain(grid, node, pr.v) == StencilFit::clipped ||
            neighbors_in_domain(grid, node, pr.w) == StencilFit::clipped) {
            continue;
        }
        const double value = stencil_pair_value(delta2(u, node, pr.v), delta2(u, node, pr.w));
        if (value < best) {
            best = value;
            best_index = i;
        }
    }
    if (best_index == pairs.size()) throw ClippedStencil("no direction pair available at node");
    if (chosen_pair) *chosen_pair = best_index;
    return best;
}

double grad_upwind_1d(const GridFunction& u, NodeIndex node) {
    const Grid& grid = u.grid();
    if (grid.dim() != 1) throw std::invalid_argument("grad_upwind_1d requires a 1-D grid");
    if (grid.is_boundary(node)) throw ClippedStencil("upwind gradient needs an interior node");
    return upwind_gradient(u[node - 1], u[node], u[node + 1], grid.h());
}

GridFunction scheme_residual(const PDEProblem& problem, const GridFunction& u, const SchemeParams& params) {
    const Scheme scheme(problem, u.grid_ptr(), params.stencil_width);
    GridFunction r(u.grid_ptr());
    residual_serial(scheme, u.values(), r.values());
    return r;
}

double envelope_eval(const PDEProblem& problem, const Point& x, double u_val, const Point& p,
                     const SymmetricMatrix2& X, EnvelopeSide side) {
    const double dp = problem.dim() == 1 ? det_plus(X.a11) : det_plus(X);
    const double pde = -dp + problem.f(x, u_val, p);
    if (!problem.domain.on_boundary(x)) return pde;
    const double bc = u_val - problem.g(x);
    return side == EnvelopeSide::lower ? std::min(bc, pde) : std::max(bc, pde);
}

} // namespace masolve
