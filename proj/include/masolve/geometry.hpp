#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace masolve {

using Point = std::array<double, 2>;
using Offset = std::array<int, 2>;
using NodeIndex = std::size_t;

/// Closed computational domain: an interval in 1-D or an axis-aligned square in 2-D.
/// For intervals only the first component of `lower`/`upper` is meaningful.
class Domain {
public:
    enum class Kind { interval, square };

    static Domain interval(double a, double b);
    /// Square [a,b] x [c,d]; both axes must have the same length.
    static Domain square(double a, double b, double c, double d);
    static Domain unit_square() { return square(0.0, 1.0, 0.0, 1.0); }
    static Domain unit_interval() { return interval(0.0, 1.0); }

    Kind kind() const { return kind_; }
    int dim() const { return kind_ == Kind::interval ? 1 : 2; }
    double lower(int axis) const { return lower_[axis]; }
    double upper(int axis) const { return upper_[axis]; }
    double length() const { return upper_[0] - lower_[0]; }

    bool contains(const Point& x, double tol = 0.0) const;
    /// True iff x lies on the boundary within `tol` (and inside the closed domain).
    bool on_boundary(const Point& x, double tol = 1e-14) const;
    /// True iff x is a boundary corner of the square (never for intervals).
    bool is_corner(const Point& x, double tol = 1e-14) const;

private:
    Domain(Kind kind, Point lower, Point upper) : kind_(kind), lower_(lower), upper_(upper) {}

    Kind kind_;
    Point lower_;
    Point upper_;
};

enum class NodeClass : std::uint8_t { interior, boundary };

/// Uniform lattice over a Domain. Immutable after construction.
///
/// Nodes are indexed row-major with axis 1 fastest:
/// index = i0 * (n + 1) + i1 in 2-D, index = i0 in 1-D.
class Grid {
public:
    Grid(Domain domain, int n_per_axis);

    const Domain& domain() const { return domain_; }
    int dim() const { return domain_.dim(); }
    int n_per_axis() const { return n_; }
    int nodes_per_axis() const { return n_ + 1; }
    double h() const { return h_; }
    std::size_t size() const { return classes_.size(); }

    NodeClass node_class(NodeIndex k) const { return classes_[k]; }
    bool is_boundary(NodeIndex k) const { return classes_[k] == NodeClass::boundary; }
    std::size_t boundary_count() const { return boundary_count_; }
    std::size_t interior_count() const { return size() - boundary_count_; }

    /// Lattice multi-index of node k; second entry is 0 in 1-D.
    Offset lattice(NodeIndex k) const;
    NodeIndex index(const Offset& ij) const;
    Point point(NodeIndex k) const;

    /// True iff the lattice position lies in the closed domain.
    bool in_lattice(const Offset& ij) const;
    /// Node nearest to x (clamped to the lattice).
    NodeIndex nearest(const Point& x) const;

private:
    Domain domain_;
    int n_;
    double h_;
    std::vector<NodeClass> classes_;
    std::size_t boundary_count_ = 0;
};

Grid build_grid(const Domain& domain, int n_per_axis);

/// Orthogonal pair of primitive lattice directions used by the wide stencil.
struct DirectionPair {
    Offset v;
    Offset w;
    int v_norm2;
    int w_norm2;
};

/// All orthogonal primitive direction pairs with max-norm <= width (1, 2 or 3),
/// deduplicated up to sign and swap. Pairs are ordered by increasing max-norm;
/// width 1 gives the axis pair followed by the diagonal pair.
std::vector<DirectionPair> stencil_pairs(int width);

/// The single 1-D direction (+1).
std::vector<DirectionPair> stencil_pairs_1d();

enum class StencilFit { both_in, clipped };

/// Whether node +/- dir lands on lattice nodes of the closed domain.
/// Boundary nodes are always reported as clipped.
StencilFit neighbors_in_domain(const Grid& grid, NodeIndex node, const Offset& dir);

} // namespace masolve
