#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "masolve/geometry.hpp"
#include "masolve/operators.hpp"

namespace masolve {

/// A function on the closed domain probed by the viscosity tests. The optional
/// gradient, where known, centres the slope draws of sample_test_functions.
struct Candidate {
    Domain domain = Domain::unit_square();
    std::function<double(const Point&)> value;
    std::function<std::optional<Point>(const Point&)> gradient;
    std::string label;

    double operator()(const Point& x) const { return value(x); }
    std::optional<Point> slope_at(const Point& x) const {
        return gradient ? gradient(x) : std::nullopt;
    }

    /// Piecewise-linear (1-D) or bilinear (2-D) interpolant of grid values.
    static Candidate from_grid_function(const GridFunction& u, std::string label = "grid");
};

/// phi(x) = c0 + p.(x - x0) + 1/2 (x - x0)^T X (x - x0)
struct QuadraticTestFn {
    Point x0{0.0, 0.0};
    double c0 = 0.0;
    Point p{0.0, 0.0};
    SymmetricMatrix2 X;
    int dim = 2;

    double operator()(const Point& x) const;

    bool operator==(const QuadraticTestFn&) const = default;
};

/// below: phi <= candidate near x0 (supersolution probing).
/// above: phi >= candidate near x0 (subsolution probing).
enum class TouchSide { below, above };

struct TouchOptions {
    double radius = 0.25;
    /// Sub-lattice spacing is radius / sublattice.
    int sublattice = 64;
    /// Allowed mismatch |phi(x0) - candidate(x0)|.
    double equality_tol = 1e-12;
};

struct TouchReport {
    bool touches = false;
    TouchSide side = TouchSide::below;
    /// Max over sampled x != x0 of (phi - candidate) for below, (candidate - phi) for above.
    double worst_violation = 0.0;
    double radius = 0.0;
    std::size_t samples = 0;
};

TouchReport touches(const Candidate& candidate, const QuadraticTestFn& phi, TouchSide side,
                    const TouchOptions& options = {});

struct SampleOptions {
    double slope_radius = 10.0;
    double eigen_bound = 10.0;
    TouchOptions touch;
};

/// Seeded draw of `count` quadratics at x0 with c0 = candidate(x0): slopes from a
/// ball of radius 10 around the candidate's gradient (or 0), each slope component
/// zeroed with probability 1/2, Hessian eigenvalues in [-10, 10] with a random
/// (or, with probability 1/4, axis-aligned) frame. Unfiltered.
std::vector<QuadraticTestFn> draw_test_functions(const Candidate& candidate, const Point& x0,
                                                 std::size_t count, std::uint64_t seed,
                                                 const SampleOptions& options = {});

/// The draws of draw_test_functions that touch the candidate on `side`, in draw order.
std::vector<QuadraticTestFn> sample_test_functions(const Candidate& candidate, const Point& x0,
                                                   TouchSide side, std::size_t count, std::uint64_t seed,
                                                   const SampleOptions& options = {});

struct EnvelopeVerdict {
    bool pass = true;
    std::size_t drawn = 0;
    std::size_t retained = 0;
    bool boundary_point = false;
    /// Largest (subsolution) or smallest (supersolution) envelope value over retained phi.
    std::optional<double> extreme_value;
    std::optional<QuadraticTestFn> witness;
    double witness_value = 0.0;
    std::vector<QuadraticTestFn> retained_functions;
};

/// Violations smaller than this are attributed to rounding.
inline constexpr double kEnvelopeSlack = 1e-12;

/// Semi-decision for the viscosity inequality at x0 over a seeded quadratic family.
/// side=above checks F_*(x0, u(x0), p, X) <= 0; side=below checks F^*(...) >= 0.
/// Pass means no violating test function was found.
EnvelopeVerdict envelope_verdict(const PDEProblem& problem, const Candidate& candidate, const Point& x0,
                                 TouchSide side, std::size_t count, std::uint64_t seed,
                                 const SampleOptions& options = {});

struct SubgradientOptions {
    /// Verification lattice points per axis over the closed domain.
    int grid_resolution = 0; // 0: 65537 in 1-D, 257 in 2-D
    /// Relative tolerance; the absolute tolerance is this times the candidate range.
    double relative_tol = 1e-8;
    /// Slopes are searched in the box |p_i| <= slope_bound.
    double slope_bound = 100.0;
    int starts = 9;
    double min_step = 1e-6;
    std::uint64_t seed = 42;
};

struct SubgradientResult {
    enum class Status { found, empty };
    Status status = Status::empty;
    Point p{0.0, 0.0};
    double max_violation_at_best_p = 0.0;
    double tol_sg = 0.0;
    std::size_t lattice_points = 0;
};

/// Searches for p with candidate(x) >= candidate(x0) + p.(x - x0) on the verification
/// lattice by multi-start coordinate descent on the worst violation, then shrinks the
/// best slope toward 0 while it stays feasible.
SubgradientResult subgradient_probe(const Candidate& candidate, const Point& x0,
                                    const SubgradientOptions& options = {});

struct CounterexampleOptions {
    std::size_t count = 1000;
    std::uint64_t seed = 42;
    SampleOptions sampling;
};

struct PointVerdict {
    Point x;
    std::string role;   // "subsolution" or "supersolution"
    std::string kind;   // "interior", "edge" or "corner"
    EnvelopeVerdict verdict;
};

struct FlatBoundaryReport {
    std::vector<PointVerdict> probes;
    /// Corner probes: reported only.
    std::vector<PointVerdict> corner_probes;
    bool subsolution_pass = false;
    bool supersolution_pass = false;
    double max_boundary_gap = 0.0;
    /// Largest tangential second derivative of any retained supersolution test function at an edge point.
    double max_tangential_curvature = 0.0;
    std::size_t edge_points = 0;
    /// Subsolution values at probed boundary points stay below g + 1e-10.
    bool subsolution_below_data = false;
    bool all_pass = false;
};

/// Flat-boundary counterexample on the unit square with f = 0, g = 0:
/// u = 0 is a subsolution, v (0 inside, -1 on the boundary) a supersolution, u > v on the boundary.
FlatBoundaryReport counterexample_ex1(const CounterexampleOptions& options = {});

struct CurvatureErrorRow {
    int level = 0;
    double h = 0.0;
    double error_at_half = 0.0;
    /// Max error over interior nodes x <= 1/2.
    double error_left_half = 0.0;
    long iterations = 0;
    bool converged = false;
};

struct GradientBlowupReport {
    std::vector<PointVerdict> probes;
    bool subsolution_pass = false;
    bool supersolution_pass = false;
    /// Max |-v'' + (1 + v'^2)^{3/2}| over sampled interior points.
    double classical_residual = 0.0;
    /// Test functions touching v from below at x = 1 over the sampled family.
    std::size_t touching_at_1 = 0;
    SubgradientResult subgradient_at_1;
    double gap_at_1 = 0.0;
    bool subsolution_below_data = false;
    std::vector<CurvatureErrorRow> interior_errors;
    bool interior_error_decreasing = false;
    bool all_pass = false;
};

struct GradientBlowupOptions {
    CounterexampleOptions probing;
    int first_level = 4;
    int last_level = 7;
    long max_iters = 5'000'000;
};

/// Unit-curvature counterexample on [0, 1] with u(0) = -1, u(1) = 1.
GradientBlowupReport counterexample_ex2(const GradientBlowupOptions& options = {});

/// Exact reference branch -sqrt(1 - x^2) of the curvature problem.
double lower_circle(double x);

} // namespace masolve
