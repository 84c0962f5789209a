#pragma once

#include <memory>
#include <span>
#include <vector>

#include "masolve/geometry.hpp"
#include "masolve/operators.hpp"

namespace masolve {

enum class Execution { serial, parallel };

/// Per-sweep diagnostics gathered alongside the residual. All fields are
/// max-reductions, so serial and parallel sweeps agree bit for bit.
struct ResidualStats {
    double sup_norm = 0.0;
    /// Largest positive directional second difference seen at interior nodes.
    double max_positive_delta = 0.0;
    /// Largest upwind gradient magnitude (1-D only).
    double max_gradient = 0.0;
    /// Largest |f| evaluated at interior nodes.
    double max_abs_f = 0.0;
};

/// Discretized problem on a fixed grid and stencil. Caches f and g at nodes
/// when they do not depend on the unknown.
class Scheme {
public:
    Scheme(const PDEProblem& problem, std::shared_ptr<const Grid> grid, int stencil_width = 1);

    const PDEProblem& problem() const { return problem_; }
    const Grid& grid() const { return *grid_; }
    const std::shared_ptr<const Grid>& grid_ptr() const { return grid_; }
    std::span<const DirectionPair> pairs() const { return pairs_; }
    int stencil_width() const { return width_; }

    /// Residual at one node, reading u only. Updates `stats` maxima if given.
    double node_residual(std::span<const double> u, NodeIndex k, ResidualStats* stats = nullptr) const;

    /// Bound S on the sum of 2/|d|^2 over the densest stencil group (4 in 2-D, 2 in 1-D).
    double direction_weight() const { return grid_->dim() == 1 ? 2.0 : 4.0; }

private:
    double interior_2d(std::span<const double> u, NodeIndex k, ResidualStats* stats) const;
    double interior_1d(std::span<const double> u, NodeIndex k, ResidualStats* stats) const;

    PDEProblem problem_;
    std::shared_ptr<const Grid> grid_;
    int width_;
    std::vector<DirectionPair> pairs_;
    std::vector<std::ptrdiff_t> v_stride_;
    std::vector<std::ptrdiff_t> w_stride_;
    std::vector<double> v_scale_;
    std::vector<double> w_scale_;
    std::vector<double> f_cache_;
    std::vector<double> g_cache_;
    bool f_cached_ = false;
};

/// Reference implementation: one pass over nodes in index order.
ResidualStats residual_serial(const Scheme& scheme, std::span<const double> u, std::span<double> out);
/// OpenMP implementation; per-node values identical to residual_serial.
ResidualStats residual_parallel(const Scheme& scheme, std::span<const double> u, std::span<double> out);

ResidualStats compute_residual(const Scheme& scheme, std::span<const double> u, std::span<double> out,
                               Execution exec);

/// out = u - dt * r (Jacobi update).
void euler_update_serial(std::span<const double> u, std::span<const double> r, double dt,
                         std::span<double> out);
void euler_update_parallel(std::span<const double> u, std::span<const double> r, double dt,
                           std::span<double> out);
void euler_update(std::span<const double> u, std::span<const double> r, double dt,
                  std::span<double> out, Execution exec);

/// One in-place Gauss-Seidel sweep u(x) -= dt * F_x(u) in node order. Sequential only.
void gauss_seidel_sweep(const Scheme& scheme, std::span<double> u, double dt);

} // namespace masolve
