#include "masolve/visc_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "masolve/problems.hpp"
#include "masolve/solver.hpp"

namespace masolve {

Candidate Candidate::from_grid_function(const GridFunction& u, std::string label) {
    auto grid = u.grid_ptr();
    auto values = std::make_shared<const std::vector<double>>(u.values().begin(), u.values().end());
    Candidate c;
    c.domain = grid->domain();
    c.label = std::move(label);
    c.value = [grid, values](const Point& x) {
        const int n = grid->n_per_axis();
        const double h = grid->h();
        auto locate = [&](int axis) {
            const double s = (x[axis] - grid->domain().lower(axis)) / h;
            const int i = std::clamp(static_cast<int>(std::floor(s)), 0, n - 1);
            return std::pair{i, std::clamp(s - i, 0.0, 1.0)};
        };
        const auto [i0, t0] = locate(0);
        const auto& v = *values;
        if (grid->dim() == 1) return (1.0 - t0) * v[i0] + t0 * v[i0 + 1];
        const auto [i1, t1] = locate(1);
        const auto at = [&](int a, int b) { return v[grid->index({a, b})]; };
        return (1.0 - t0) * ((1.0 - t1) * at(i0, i1) + t1 * at(i0, i1 + 1)) +
               t0 * ((1.0 - t1) * at(i0 + 1, i1) + t1 * at(i0 + 1, i1 + 1));
    };
    return c;
}

double QuadraticTestFn::operator()(const Point& x) const {
    const double d0 = x[0] - x0[0];
    if (dim == 1) return c0 + p[0] * d0 + 0.5 * X.a11 * d0 * d0;
    const Point d{d0, x[1] - x0[1]};
    return c0 + p[0] * d[0] + p[1] * d[1] + 0.5 * X.quadratic_form(d);
}

namespace {

/// Scans the sub-lattice ball around x0. With stop_early, returns at the first violation.
TouchReport scan_touch(const Candidate& candidate, const QuadraticTestFn& phi, TouchSide side,
                       const TouchOptions& options, bool stop_early) {
    if (!(options.radius > 0.0) || options.sublattice < 1) {
        throw std::invalid_argument("touch radius and sub-lattice factor must be positive");
    }
    TouchReport report;
    report.side = side;
    report.radius = options.radius;
    report.worst_violation = -std::numeric_limits<double>::infinity();

    const double sign = side == TouchSide::below ? 1.0 : -1.0;
    const double at_x0 = candidate(phi.x0);
    const bool equal_at_x0 = std::abs(phi(phi.x0) - at_x0) <= options.equality_tol;

    const int m = options.sublattice;
    const double s = options.radius / m;
    const int m1 = phi.dim == 2 ? m : 0;
    const long long m2 = static_cast<long long>(m) * m;
    for (int k0 = -m; k0 <= m; ++k0) {
        for (int k1 = -m1; k1 <= m1; ++k1) {
            if (k0 == 0 && k1 == 0) continue;
            if (static_cast<long long>(k0) * k0 + static_cast<long long>(k1) * k1 > m2) continue;
            const Point x{phi.x0[0] + s * k0, phi.dim == 2 ? phi.x0[1] + s * k1 : 0.0};
            if (!candidate.domain.contains(x)) continue;
            ++report.samples;
            const double violation = sign * (phi(x) - candidate(x));
            report.worst_violation = std::max(report.worst_violation, violation);
            if (stop_early && violation > 0.0) {
                report.touches = false;
                return report;
            }
        }
    }
    if (report.samples == 0) report.worst_violation = 0.0;
    report.touches = equal_at_x0 && report.worst_violation <= 0.0;
    return report;
}

double uniform01(std::mt19937_64& rng) {
    // 53 random bits, independent of the standard library's distribution algorithms.
    return static_cast<double>(rng() >> 11) * 0x1p-53;
}

} // namespace

TouchReport touches(const Candidate& candidate, const QuadraticTestFn& phi, TouchSide side,
                    const TouchOptions& options) {
    return scan_touch(candidate, phi, side, options, false);
}

std::vector<QuadraticTestFn> draw_test_functions(const Candidate& candidate, const Point& x0,
                                                 std::size_t count, std::uint64_t seed,
                                                 const SampleOptions& options) {
    if (count < 1) throw std::invalid_argument("count must be >= 1");
    const int dim = candidate.domain.dim();
    const Point center = candidate.slope_at(x0).value_or(Point{0.0, 0.0});
    const double c0 = candidate(x0);
    const double R = options.slope_radius;
    const double B = options.eigen_bound;

    std::mt19937_64 rng(seed);
    std::vector<QuadraticTestFn> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        QuadraticTestFn phi;
        phi.x0 = dim == 2 ? x0 : Point{x0[0], 0.0};
        phi.c0 = c0;
        phi.dim = dim;
        if (dim == 1) {
            double q = R * (2.0 * uniform01(rng) - 1.0);
            if (uniform01(rng) < 0.5) q = 0.0;
            phi.p = {center[0] + q, 0.0};
            phi.X = SymmetricMatrix2::scalar(B * (2.0 * uniform01(rng) - 1.0));
        } else {
            const double r = R * std::sqrt(uniform01(rng));
            const double theta = 2.0 * std::numbers::pi * uniform01(rng);
            Point q{r * std::cos(theta), r * std::sin(theta)};
            if (uniform01(rng) < 0.5) q[0] = 0.0;
            if (uniform01(rng) < 0.5) q[1] = 0.0;
            phi.p = {center[0] + q[0], center[1] + q[1]};
            const double l1 = B * (2.0 * uniform01(rng) - 1.0);
            const double l2 = B * (2.0 * uniform01(rng) - 1.0);
            const bool axis_aligned = uniform01(rng) < 0.25;
            const double angle = std::numbers::pi * uniform01(rng);
            if (axis_aligned) {
                phi.X = SymmetricMatrix2::diag(l1, l2);
            } else {
                const double c = std::cos(angle);
                const double s = std::sin(angle);
                phi.X = {l1 * c * c + l2 * s * s, (l1 - l2) * c * s, l1 * s * s + l2 * c * c};
            }
        }
        out.push_back(phi);
    }
    return out;
}

std::vector<QuadraticTestFn> sample_test_functions(const Candidate& candidate, const Point& x0,
                                                   TouchSide side, std::size_t count, std::uint64_t seed,
                                                   const SampleOptions& options) {
    const auto drawn = draw_test_functions(candidate, x0, count, seed, options);
    std::vector<char> keep(drawn.size(), 0);
    const auto n = static_cast<std::ptrdiff_t>(drawn.size());
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        keep[i] = scan_touch(candidate, drawn[i], side, options.touch, true).touches ? 1 : 0;
    }
    std::vector<QuadraticTestFn> retained;
    for (std::size_t i = 0; i < drawn.size(); ++i) {
        if (keep[i]) retained.push_back(drawn[i]);
    }
    return retained;
}

EnvelopeVerdict envelope_verdict(const PDEProblem& problem, const Candidate& candidate, const Point& x0,
                                 TouchSide side, std::size_t count, std::uint64_t seed,
                                 const SampleOptions& options) {
    if (!problem.domain.contains(x0, 1e-14)) throw std::invalid_argument("x0 outside the closed domain");
    EnvelopeVerdict verdict;
    verdict.drawn = count;
    verdict.boundary_point = problem.domain.on_boundary(x0);
    verdict.retained_functions = sample_test_functions(candidate, x0, side, count, seed, options);
    verdict.retained = verdict.retained_functions.size();

    const bool sub = side == TouchSide::above;
    const EnvelopeSide env = sub ? EnvelopeSide::lower : EnvelopeSide::upper;
    const double u0 = candidate(x0);
    for (const auto& phi : verdict.retained_functions) {
        const double value = envelope_eval(problem, x0, u0, phi.p, phi.X, env);
        if (!verdict.extreme_value) {
            verdict.extreme_value = value;
        } else {
            verdict.extreme_value = sub ? std::max(*verdict.extreme_value, value)
                                        : std::min(*verdict.extreme_value, value);
        }
        const bool violated = sub ? value > kEnvelopeSlack : value < -kEnvelopeSlack;
        if (violated && !verdict.witness) {
            verdict.pass = false;
            verdict.witness = phi;
            verdict.witness_value = value;
        }
    }
    return verdict;
}

namespace {

struct SubgradientLattice {
    std::vector<Point> offsets;
    std::vector<double> drop; // candidate(x0) - candidate(x)
    int dim = 1;

    double violation(const Point& p) const {
        double worst = -std::numeric_limits<double>::infinity();
        const auto n = static_cast<std::ptrdiff_t>(drop.size());
        const bool two = dim == 2;
#pragma omp parallel for schedule(static) reduction(max : worst)
        for (std::ptrdiff_t j = 0; j < n; ++j) {
            const double lin = two ? p[0] * offsets[j][0] + p[1] * offsets[j][1] : p[0] * offsets[j][0];
            worst = std::max(worst, drop[j] + lin);
        }
        return worst;
    }
};

} // namespace

SubgradientResult subgradient_probe(const Candidate& candidate, const Point& x0,
                                    const SubgradientOptions& options) {
    const Domain& dom = candidate.domain;
    const int dim = dom.dim();
    const int res = options.grid_resolution > 0 ? options.grid_resolution : (dim == 1 ? 65537 : 257);
    if (res < 2) throw std::invalid_argument("grid_resolution must be >= 2");

    SubgradientLattice lat;
    lat.dim = dim;
    const double c_x0 = candidate(x0);
    double lo = c_x0;
    double hi = c_x0;
    auto add = [&](const Point& x) {
        const double c = candidate(x);
        lo = std::min(lo, c);
        hi = std::max(hi, c);
        lat.offsets.push_back({x[0] - x0[0], dim == 2 ? x[1] - x0[1] : 0.0});
        lat.drop.push_back(c_x0 - c);
    };
    auto coord = [&](int axis, int i) {
        if (i == res - 1) return dom.upper(axis);
        return dom.lower(axis) + (dom.upper(axis) - dom.lower(axis)) * i / (res - 1);
    };
    add(x0);
    for (int i = 0; i < res; ++i) {
        if (dim == 1) {
            add({coord(0, i), 0.0});
        } else {
            for (int j = 0; j < res; ++j) add({coord(0, i), coord(1, j)});
        }
    }

    SubgradientResult result;
    result.lattice_points = lat.drop.size();
    const double range = hi - lo;
    result.tol_sg = options.relative_tol * (range > 0.0 ? range : 1.0);

    const double bound = options.slope_bound;
    auto clamp_p = [&](double v) { return std::clamp(v, -bound, bound); };

    std::mt19937_64 rng(options.seed);
    Point best_p{0.0, 0.0};
    double best_v = std::numeric_limits<double>::infinity();
    for (int start = 0; start < options.starts; ++start) {
        Point p{0.0, 0.0};
        if (start > 0) {
            for (int a = 0; a < dim; ++a) p[a] = clamp_p(10.0 * (2.0 * uniform01(rng) - 1.0));
        }
        double v = lat.violation(p);
        double step = 1.0;
        for (int iter = 0; iter < 100000 && step >= options.min_step; ++iter) {
            bool improved = false;
            for (int a = 0; a < dim && !improved; ++a) {
                for (double sgn : {1.0, -1.0}) {
                    Point q = p;
                    q[a] = clamp_p(p[a] + sgn * step);
                    if (q == p) continue;
                    const double vq = lat.violation(q);
                    if (vq < v) {
                        p = q;
                        v = vq;
                        improved = true;
                        break;
                    }
                }
            }
            step = improved ? std::min(2.0 * step, 2.0 * bound) : 0.5 * step;
        }
        if (v < best_v) {
            best_v = v;
            best_p = p;
        }
    }

    if (best_v <= result.tol_sg) {
        // Shrink toward the minimum-norm feasible slope along the ray.
        const double threshold = std::max(best_v, 0.0) + 1e-14 * (range > 0.0 ? range : 1.0);
        if (lat.violation({0.0, 0.0}) <= threshold) {
            best_p = {0.0, 0.0};
        } else {
            double a = 0.0;
            double b = 1.0;
            for (int i = 0; i < 60; ++i) {
                const double mid = 0.5 * (a + b);
                if (lat.violation({mid * best_p[0], mid * best_p[1]}) <= threshold) {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            best_p = {b * best_p[0], b * best_p[1]};
        }
        best_v = lat.violation(best_p);
    }
    result.p = best_p;
    result.max_violation_at_best_p = best_v;
    result.status = best_v <= result.tol_sg ? SubgradientResult::Status::found
                                            : SubgradientResult::Status::empty;
    return result;
}

double lower_circle(double x) { return -std::sqrt(std::max(0.0, 1.0 - x * x)); }

namespace {

std::optional<Point> circle_slope(const Point& x) {
    if (x[0] >= 1.0) return std::nullopt;
    return Point{x[0] / std::sqrt(1.0 - x[0] * x[0]), 0.0};
}

} // namespace

FlatBoundaryReport counterexample_ex1(const CounterexampleOptions& options) {
    const PDEProblem problem = make_flat_boundary_problem();
    const Domain dom = problem.domain;

    Candidate u;
    u.domain = dom;
    u.label = "u = 0";
    u.value = [](const Point&) { return 0.0; };
    u.gradient = [](const Point&) { return std::optional<Point>{Point{0.0, 0.0}}; };

    Candidate v;
    v.domain = dom;
    v.label = "v = -1 on the boundary, 0 inside";
    v.value = [dom](const Point& x) { return dom.on_boundary(x, 0.0) ? -1.0 : 0.0; };

    std::vector<std::pair<Point, std::string>> points;
    for (double t : {0.25, 0.5, 0.75}) {
        points.push_back({{t, 0.0}, "edge"});
        points.push_back({{1.0, t}, "edge"});
        points.push_back({{t, 1.0}, "edge"});
        points.push_back({{0.0, t}, "edge"});
    }
    for (const Point& x : {Point{0.5, 0.5}, Point{0.4, 0.45}, Point{0.6, 0.55}, Point{0.45, 0.6}}) {
        points.push_back({x, "interior"});
    }
    const std::vector<Point> corners{{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};

    FlatBoundaryReport report;
    report.subsolution_pass = true;
    report.supersolution_pass = true;
    report.subsolution_below_data = true;
    report.max_tangential_curvature = -std::numeric_limits<double>::infinity();
    report.max_boundary_gap = -std::numeric_limits<double>::infinity();

    auto probe = [&](const Point& x, const std::string& kind, std::vector<PointVerdict>& sink) {
        PointVerdict sub{x, "subsolution", kind,
                         envelope_verdict(problem, u, x, TouchSide::above, options.count, options.seed,
                                          options.sampling)};
        PointVerdict super{x, "supersolution", kind,
                           envelope_verdict(problem, v, x, TouchSide::below, options.count, options.seed,
                                            options.sampling)};
        sink.push_back(std::move(sub));
        sink.push_back(std::move(super));
    };

    for (const auto& [x, kind] : points) {
        probe(x, kind, report.probes);
        const auto& sub = report.probes[report.probes.size() - 2].verdict;
        const auto& super = report.probes.back().verdict;
        report.subsolution_pass = report.subsolution_pass && sub.pass;
        report.supersolution_pass = report.supersolution_pass && super.pass;
        if (kind != "edge") continue;
        ++report.edge_points;
        report.max_boundary_gap = std::max(report.max_boundary_gap, u(x) - v(x));
        if (sub.pass && !(u(x) <= problem.g(x) + 1e-10)) report.subsolution_below_data = false;
        // Edges at x = 0 or 1 run along axis 1; the others along axis 0.
        const bool vertical_edge = x[0] == 0.0 || x[0] == 1.0;
        for (const auto& phi : super.retained_functions) {
            report.max_tangential_curvature =
                std::max(report.max_tangential_curvature, vertical_edge ? phi.X.a22 : phi.X.a11);
        }
    }
    for (const Point& x : corners) probe(x, "corner", report.corner_probes);

    report.all_pass = report.subsolution_pass && report.supersolution_pass &&
                      report.max_boundary_gap == 1.0 && report.max_tangential_curvature <= 0.0 &&
                      report.subsolution_below_data;
    return report;
}

GradientBlowupReport counterexample_ex2(const GradientBlowupOptions& options) {
    const PDEProblem problem = make_problem("gauss1d");
    const Domain dom = problem.domain;
    const auto& probing = options.probing;

    Candidate u;
    u.domain = dom;
    u.label = "u = -sqrt(1 - x^2), u(1) = 1";
    u.value = [](const Point& x) { return x[0] < 1.0 ? lower_circle(x[0]) : 1.0; };
    u.gradient = circle_slope;

    Candidate v;
    v.domain = dom;
    v.label = "v = -sqrt(1 - x^2)";
    v.value = [](const Point& x) { return lower_circle(x[0]); };
    v.gradient = circle_slope;

    GradientBlowupReport report;
    report.subsolution_pass = true;
    report.supersolution_pass = true;
    report.subsolution_below_data = true;

    for (double x : {0.0, 0.25, 0.5, 0.6, 1.0}) {
        const Point x0{x, 0.0};
        PointVerdict pv{x0, "subsolution", dom.on_boundary(x0) ? "boundary" : "interior",
                        envelope_verdict(problem, u, x0, TouchSide::above, probing.count, probing.seed,
                                         probing.sampling)};
        report.subsolution_pass = report.subsolution_pass && pv.verdict.pass;
        if (pv.verdict.boundary_point && pv.verdict.pass && !(u(x0) <= problem.g(x0) + 1e-10)) {
            report.subsolution_below_data = false;
        }
        report.probes.push_back(std::move(pv));
    }
    for (double x : {0.0, 0.25, 0.5, 0.6}) {
        const Point x0{x, 0.0};
        PointVerdict pv{x0, "supersolution", dom.on_boundary(x0) ? "boundary" : "interior",
                        envelope_verdict(problem, v, x0, TouchSide::below, probing.count, probing.seed,
                                         probing.sampling)};
        report.supersolution_pass = report.supersolution_pass && pv.verdict.pass;
        report.probes.push_back(std::move(pv));
    }

    // Classical check: -v'' + (1 + v'^2)^{3/2} on (0, 1), relative to v''.
    for (int i = 1; i < 20; ++i) {
        const double x = i / 20.0;
        const double s = 1.0 - x * x;
        const double vx = x / std::sqrt(s);
        const double vxx = 1.0 / (s * std::sqrt(s));
        const double t = 1.0 + vx * vx;
        report.classical_residual = std::max(report.classical_residual, std::abs(-vxx + t * std::sqrt(t)) / vxx);
    }
    report.supersolution_pass = report.supersolution_pass && report.classical_residual <= 1e-10;

    const Point one{1.0, 0.0};
    report.touching_at_1 =
        sample_test_functions(v, one, TouchSide::below, probing.count, probing.seed, probing.sampling).size();
    report.subgradient_at_1 = subgradient_probe(v, one);
    report.gap_at_1 = u(one) - v(one);

    for (int level = options.first_level; level <= options.last_level; ++level) {
        auto grid = std::make_shared<const Grid>(build_grid(dom, 1 << level));
        SolveParams params;
        params.tol = default_tolerance(1);
        params.max_iters = options.max_iters;
        const auto [uh, solve] = euler_solve(problem, initial_iterate(problem, grid), params);
        CurvatureErrorRow row;
        row.level = level;
        row.h = grid->h();
        row.iterations = solve.iterations;
        row.converged = solve.converged;
        row.error_at_half = std::abs(uh[grid->nearest({0.5, 0.0})] - lower_circle(0.5));
        for (NodeIndex k = 1; k + 1 < grid->size(); ++k) {
            const double x = grid->point(k)[0];
            if (x > 0.5) break;
            row.error_left_half = std::max(row.error_left_half, std::abs(uh[k] - lower_circle(x)));
        }
        report.interior_errors.push_back(row);
    }
    report.interior_error_decreasing = !report.interior_errors.empty();
    for (std::size_t i = 1; i < report.interior_errors.size(); ++i) {
        if (!(report.interior_errors[i].error_at_half < report.interior_errors[i - 1].error_at_half)) {
            report.interior_error_decreasing = false;
        }
    }

    const bool empty_at_1 = report.subgradient_at_1.status == SubgradientResult::Status::empty &&
                            report.subgradient_at_1.max_violation_at_best_p > 10.0 * report.subgradient_at_1.tol_sg;
    report.all_pass = report.subsolution_pass && report.supersolution_pass && report.touching_at_1 == 0 &&
                      empty_at_1 && report.gap_at_1 == 1.0 && report.subsolution_below_data &&
                      report.interior_error_decreasing;
    return report;
}

} // namespace masolve
