#include "masolve/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace masolve {

Scheme::Scheme(const PDEProblem& problem, std::shared_ptr<const Grid> grid, int stencil_width)
    : problem_(problem), grid_(std::move(grid)), width_(stencil_width) {
    if (grid_->dim() != problem_.dim()) {
        throw std::invalid_argument("problem '" + problem_.name + "' does not match grid dimension");
    }
    if (grid_->dim() == 2) {
        if (problem_.depends_on_p) {
            throw std::invalid_argument("gradient-dependent f is only supported in 1-D");
        }
        pairs_ = stencil_pairs(stencil_width);
    } else {
        width_ = 1;
        pairs_ = stencil_pairs_1d();
    }
    const auto stride = static_cast<std::ptrdiff_t>(grid_->nodes_per_axis());
    const double h = grid_->h();
    for (const auto& pr : pairs_) {
        v_stride_.push_back(pr.v[0] * (grid_->dim() == 2 ? stride : 1) + pr.v[1]);
        w_stride_.push_back(pr.w[0] * stride + pr.w[1]);
        v_scale_.push_back(h * h * static_cast<double>(pr.v_norm2));
        w_scale_.push_back(h * h * static_cast<double>(pr.w_norm2));
    }

    f_cached_ = !problem_.depends_on_u && !problem_.depends_on_p;
    g_cache_.assign(grid_->size(), 0.0);
    if (f_cached_) f_cache_.assign(grid_->size(), 0.0);
    for (NodeIndex k = 0; k < grid_->size(); ++k) {
        const Point x = grid_->point(k);
        if (grid_->is_boundary(k)) {
            g_cache_[k] = problem_.g(x);
        } else if (f_cached_) {
            f_cache_[k] = problem_.f(x, 0.0, {0.0, 0.0});
        }
    }
}

double Scheme::interior_2d(std::span<const double> u, NodeIndex k, ResidualStats* stats) const {
    const Offset ij = grid_->lattice(k);
    const int n = grid_->n_per_axis();
    // Largest offset that keeps both feet inside, per axis.
    const int room0 = std::min(ij[0], n - ij[0]);
    const int room1 = std::min(ij[1], n - ij[1]);
    const double uk = u[k];
    const auto sk = static_cast<std::ptrdiff_t>(k);

    double best = std::numeric_limits<double>::infinity();
    double max_pos = 0.0;
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
        const auto& pr = pairs_[i];
        if (std::abs(pr.v[0]) > room0 || std::abs(pr.v[1]) > room1 || std::abs(pr.w[0]) > room0 ||
            std::abs(pr.w[1]) > room1) {
            continue;
        }
        const double dv = (u[sk + v_stride_[i]] + u[sk - v_stride_[i]] - 2.0 * uk) / v_scale_[i];
        const double dw = (u[sk + w_stride_[i]] + u[sk - w_stride_[i]] - 2.0 * uk) / w_scale_[i];
        max_pos = std::max(max_pos, std::max(dv, dw));
        best = std::min(best, stencil_pair_value(dv, dw));
    }
    const double fk = f_cached_ ? f_cache_[k] : problem_.f(grid_->point(k), uk, {0.0, 0.0});
    if (stats) {
        stats->max_positive_delta = std::max(stats->max_positive_delta, max_pos);
        stats->max_abs_f = std::max(stats->max_abs_f, std::abs(fk));
    }
    return -best + fk;
}

double Scheme::interior_1d(std::span<const double> u, NodeIndex k, ResidualStats* stats) const {
    const double um = u[k - 1];
    const double u0 = u[k];
    const double up = u[k + 1];
    const double d = (up + um - 2.0 * u0) / v_scale_[0];
    const double grad = upwind_gradient(um, u0, up, grid_->h());
    const double fk = f_cached_ ? f_cache_[k] : problem_.f(grid_->point(k), u0, {grad, 0.0});
    if (stats) {
        stats->max_positive_delta = std::max(stats->max_positive_delta, std::max(d, 0.0));
        stats->max_gradient = std::max(stats->max_gradient, grad);
        stats->max_abs_f = std::max(stats->max_abs_f, std::abs(fk));
    }
    return -d + fk;
}

double Scheme::node_residual(std::span<const double> u, NodeIndex k, ResidualStats* stats) const {
    if (grid_->is_boundary(k)) return u[k] - g_cache_[k];
    return grid_->dim() == 2 ? interior_2d(u, k, stats) : interior_1d(u, k, stats);
}

ResidualStats residual_serial(const Scheme& scheme, std::span<const double> u, std::span<double> out) {
    ResidualStats stats;
    for (NodeIndex k = 0; k < u.size(); ++k) {
        out[k] = scheme.node_residual(u, k, &stats);
        stats.sup_norm = std::max(stats.sup_norm, std::abs(out[k]));
    }
    return stats;
}

ResidualStats residual_parallel(const Scheme& scheme, std::span<const double> u, std::span<double> out) {
    double sup = 0.0;
    double pos = 0.0;
    double grad = 0.0;
    double fmax = 0.0;
    const auto n = static_cast<std::ptrdiff_t>(u.size());
#pragma omp parallel for schedule(static) reduction(max : sup, pos, grad, fmax)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
        ResidualStats local;
        const double r = scheme.node_residual(u, static_cast<NodeIndex>(k), &local);
        out[k] = r;
        sup = std::max(sup, std::abs(r));
        pos = std::max(pos, local.max_positive_delta);
        grad = std::max(grad, local.max_gradient);
        fmax = std::max(fmax, local.max_abs_f);
    }
    return {sup, pos, grad, fmax};
}

ResidualStats compute_residual(const Scheme& scheme, std::span<const double> u, std::span<double> out,
                               Execution exec) {
    return exec == Execution::parallel ? residual_parallel(scheme, u, out)
                                       : residual_serial(scheme, u, out);
}

void euler_update_serial(std::span<const double> u, std::span<const double> r, double dt,
                         std::span<double> out) {
    for (std::size_t k = 0; k < u.size(); ++k) out[k] = u[k] - dt * r[k];
}

void euler_update_parallel(std::span<const double> u, std::span<const double> r, double dt,
                           std::span<double> out) {
    const auto n = static_cast<std::ptrdiff_t>(u.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < n; ++k) out[k] = u[k] - dt * r[k];
}

void euler_update(std::span<const double> u, std::span<const double> r, double dt,
                  std::span<double> out, Execution exec) {
    if (exec == Execution::parallel) {
        euler_update_parallel(u, r, dt, out);
    } else {
        euler_update_serial(u, r, dt, out);
    }
}

void gauss_seidel_sweep(const Scheme& scheme, std::span<double> u, double dt) {
    for (NodeIndex k = 0; k < u.size(); ++k) {
        u[k] -= dt * scheme.node_residual(u, k);
    }
}

} // namespace masolve
