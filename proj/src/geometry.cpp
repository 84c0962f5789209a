#include "masolve/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>

namespace masolve {

Domain Domain::interval(double a, double b) {
    if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) {
        throw std::invalid_argument("degenerate interval bounds");
    }
    return Domain(Kind::interval, {a, 0.0}, {b, 0.0});
}

Domain Domain::square(double a, double b, double c, double d) {
    if (!(a < b) || !(c < d) || !std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) ||
        !std::isfinite(d)) {
        throw std::invalid_argument("degenerate square bounds");
    }
    if (b - a != d - c) {
        throw std::invalid_argument("square axes must have equal length");
    }
    return Domain(Kind::square, {a, c}, {b, d});
}

bool Domain::contains(const Point& x, double tol) const {
    for (int a = 0; a < dim(); ++a) {
        if (x[a] < lower_[a] - tol || x[a] > upper_[a] + tol) return false;
    }
    return true;
}

bool Domain::on_boundary(const Point& x, double tol) const {
    if (!contains(x, tol)) return false;
    for (int a = 0; a < dim(); ++a) {
        if (std::abs(x[a] - lower_[a]) <= tol || std::abs(x[a] - upper_[a]) <= tol) return true;
    }
    return false;
}

bool Domain::is_corner(const Point& x, double tol) const {
    if (kind_ != Kind::square || !contains(x, tol)) return false;
    for (int a = 0; a < 2; ++a) {
        if (std::abs(x[a] - lower_[a]) > tol && std::abs(x[a] - upper_[a]) > tol) return false;
    }
    return true;
}

Grid::Grid(Domain domain, int n_per_axis) : domain_(domain), n_(n_per_axis) {
    if (n_per_axis < 2) {
        throw std::invalid_argument("n_per_axis must be >= 2, got " + std::to_string(n_per_axis));
    }
    h_ = domain_.length() / n_;
    const std::size_t per_axis = static_cast<std::size_t>(n_) + 1;
    const std::size_t count = dim() == 1 ? per_axis : per_axis * per_axis;
    classes_.resize(count);
    for (NodeIndex k = 0; k < count; ++k) {
        const Offset ij = lattice(k);
        bool edge = ij[0] == 0 || ij[0] == n_;
        if (dim() == 2) edge = edge || ij[1] == 0 || ij[1] == n_;
        classes_[k] = edge ? NodeClass::boundary : NodeClass::interior;
        if (edge) ++boundary_count_;
    }
}

Offset Grid::lattice(NodeIndex k) const {
    if (dim() == 1) return {static_cast<int>(k), 0};
    const auto m = static_cast<NodeIndex>(n_ + 1);
    return {static_cast<int>(k / m), static_cast<int>(k % m)};
}

NodeIndex Grid::index(const Offset& ij) const {
    if (dim() == 1) return static_cast<NodeIndex>(ij[0]);
    return static_cast<NodeIndex>(ij[0]) * static_cast<NodeIndex>(n_ + 1) +
           static_cast<NodeIndex>(ij[1]);
}

Point Grid::point(NodeIndex k) const {
    const Offset ij = lattice(k);
    Point x{0.0, 0.0};
    for (int a = 0; a < dim(); ++a) {
        // Pin the far edge to the exact upper bound.
        x[a] = ij[a] == n_ ? domain_.upper(a) : domain_.lower(a) + ij[a] * h_;
    }
    return x;
}

bool Grid::in_lattice(const Offset& ij) const {
    if (ij[0] < 0 || ij[0] > n_) return false;
    if (dim() == 2 && (ij[1] < 0 || ij[1] > n_)) return false;
    return true;
}

NodeIndex Grid::nearest(const Point& x) const {
    Offset ij{0, 0};
    for (int a = 0; a < dim(); ++a) {
        const double s = std::round((x[a] - domain_.lower(a)) / h_);
        ij[a] = static_cast<int>(std::clamp(s, 0.0, static_cast<double>(n_)));
    }
    return index(ij);
}

Grid build_grid(const Domain& domain, int n_per_axis) { return Grid(domain, n_per_axis); }

namespace {

Offset canonical(Offset d) {
    if (d[0] < 0 || (d[0] == 0 && d[1] < 0)) return {-d[0], -d[1]};
    return d;
}

int max_norm(const Offset& d) { return std::max(std::abs(d[0]), std::abs(d[1])); }

} // namespace

std::vector<DirectionPair> stencil_pairs(int width) {
    if (width < 1 || width > 3) {
        throw std::invalid_argument("stencil width must be 1, 2 or 3, got " + std::to_string(width));
    }
    std::vector<DirectionPair> pairs;
    std::set<std::pair<Offset, Offset>> seen;
    for (int m = 1; m <= width; ++m) {
        // Directions with max-norm exactly m, canonical sign, in a fixed sweep order.
        for (int a = m; a >= 0; --a) {
            for (int t = 0; t <= 2 * m; ++t) {
                // b = 0, 1, -1, 2, -2, ...
                const int b = (t % 2 == 1) ? (t + 1) / 2 : -(t / 2);
                const Offset v{a, b};
                if (max_norm(v) != m || canonical(v) != v) continue;
                if (std::gcd(std::abs(a), std::abs(b)) != 1) continue;
                const Offset w = canonical(Offset{-b, a});
                const auto key = std::minmax(v, w);
                if (!seen.insert(key).second) continue;
                pairs.push_back({v, w, v[0] * v[0] + v[1] * v[1], w[0] * w[0] + w[1] * w[1]});
            }
        }
    }
    return pairs;
}

std::vector<DirectionPair> stencil_pairs_1d() { return {{{1, 0}, {0, 0}, 1, 0}}; }

StencilFit neighbors_in_domain(const Grid& grid, NodeIndex node, const Offset& dir) {
    if (grid.is_boundary(node)) return StencilFit::clipped;
    const Offset ij = grid.lattice(node);
    const Offset fwd{ij[0] + dir[0], ij[1] + dir[1]};
    const Offset bwd{ij[0] - dir[0], ij[1] - dir[1]};
    if (grid.dim() == 1 && dir[1] != 0) return StencilFit::clipped;
    return grid.in_lattice(fwd) && grid.in_lattice(bwd) ? StencilFit::both_in : StencilFit::clipped;
}

} // namespace masolve
