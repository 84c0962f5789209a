#pragma once

#include <algorithm>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "masolve/geometry.hpp"

namespace masolve {

/// Raised when a stencil foot falls outside the closed domain.
class ClippedStencil : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// 2x2 symmetric matrix. In 1-D only a11 is used.
struct SymmetricMatrix2 {
    double a11 = 0.0;
    double a12 = 0.0;
    double a22 = 0.0;

    static SymmetricMatrix2 diag(double d1, double d2) { return {d1, 0.0, d2}; }
    static SymmetricMatrix2 scalar(double d) { return {d, 0.0, 0.0}; }
    /// Eigenvalues (ascending) in closed form.
    std::array<double, 2> eigenvalues() const;
    /// v^T X v for a (not necessarily unit) vector v.
    double quadratic_form(const Point& v) const { return a11 * v[0] * v[0] + 2.0 * a12 * v[0] * v[1] + a22 * v[1] * v[1]; }
    bool operator==(const SymmetricMatrix2&) const = default;
};

/// Elliptic extension of the determinant: prod max(l_i, 0) + sum min(l_i, 0).
/// Equals det(X) on the PSD cone and is strictly negative otherwise.
double det_plus(const SymmetricMatrix2& X);
/// 1-D form of the same extension (reduces to the identity).
double det_plus(double x);

/// Contribution of one direction pair to the wide-stencil det+ approximation.
inline double stencil_pair_value(double dv, double dw) {
    return std::max(dv, 0.0) * std::max(dw, 0.0) + std::min(dv, 0.0) + std::min(dw, 0.0);
}

/// max((u0 - um)/h, (u0 - up)/h, 0)
inline double upwind_gradient(double um, double u0, double up, double h) {
    return std::max(std::max((u0 - um) / h, (u0 - up) / h), 0.0);
}

/// Right-hand side f(x, u, p). In 2-D, p is ignored by every registered problem.
using RhsFn = std::function<double(const Point& x, double u, const Point& p)>;
using ScalarFn = std::function<double(const Point& x)>;

/// Dirichlet Monge-Ampere problem: f, boundary data g and (optionally) the exact solution.
struct PDEProblem {
    std::string name;
    Domain domain = Domain::unit_square();
    RhsFn f;
    bool depends_on_u = false;
    bool depends_on_p = false;
    bool nondecreasing_in_u = true;
    ScalarFn g;
    ScalarFn exact_solution;
    /// Bound on |df/dp| as a function of |p|; required when depends_on_p.
    /// 1-D problems with gradient dependence must be even in p.
    std::function<double(double)> df_dp_bound;

    int dim() const { return domain.dim(); }
    bool has_exact() const { return static_cast<bool>(exact_solution); }
};

/// Real values on the nodes of a shared, immutable grid.
class GridFunction {
public:
    explicit GridFunction(std::shared_ptr<const Grid> grid, double fill = 0.0);
    GridFunction(std::shared_ptr<const Grid> grid, std::vector<double> values);

    /// Samples fn at every node.
    static GridFunction sample(std::shared_ptr<const Grid> grid, const ScalarFn& fn);

    const Grid& grid() const { return *grid_; }
    const std::shared_ptr<const Grid>& grid_ptr() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    double operator[](NodeIndex k) const { return values_[k]; }
    double& operator[](NodeIndex k) { return values_[k]; }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }
    double sup_norm() const;
    bool all_finite() const;

private:
    std::shared_ptr<const Grid> grid_;
    std::vector<double> values_;
};

/// Directional second difference (u(x+dh) + u(x-dh) - 2u(x)) / (h^2 |d|^2).
/// Throws ClippedStencil if a foot leaves the closed domain.
double delta2(const GridFunction& u, NodeIndex node, const Offset& dir);

/// Wide-stencil approximation of det+(D^2 u) at an interior 2-D node:
/// min over unclipped pairs of max(dv,0)max(dw,0) + min(dv,0) + min(dw,0).
/// Ties go to the first pair in enumeration order. In 1-D returns delta2 along +1.
double ma_wide_stencil(const GridFunction& u, NodeIndex node, std::span<const DirectionPair> pairs,
                       std::size_t* chosen_pair = nullptr);

/// Monotone upwind approximation of |u_x|: max(backward, -forward, 0).
double grad_upwind_1d(const GridFunction& u, NodeIndex node);

struct SchemeParams {
    int stencil_width = 1;
};

/// Full scheme residual F^h[u]: interior rows approximate -det+(D^2 u) + f,
/// boundary rows are u - g.
GridFunction scheme_residual(const PDEProblem& problem, const GridFunction& u,
                             const SchemeParams& params = {});

enum class EnvelopeSide { lower, upper };

/// Pointwise lower/upper envelope of the generalized Dirichlet operator.
/// Interior points: -det+(X) + f(x,u,p). Boundary points: min (lower) or max (upper)
/// of u - g(x) and the interior expression.
double envelope_eval(const PDEProblem& problem, const Point& x, double u_val, const Point& p,
                     const SymmetricMatrix2& X, EnvelopeSide side);

} // namespace masolve
