#include <gtest/gtest.h>

#include <cmath>

#include "masolve/problems.hpp"
#include "masolve/visc_analysis.hpp"

using namespace masolve;

namespace {

Candidate closed_form(Domain d, std::function<double(const Point&)> f) {
    Candidate c;
    c.domain = d;
    c.value = std::move(f);
    return c;
}

Candidate half_norm_squared() {
    Candidate c = closed_form(Domain::unit_square(), [](const Point& x) { return 0.5 * (x[0] * x[0] + x[1] * x[1]); });
    c.gradient = [](const Point& x) { return std::optional<Point>{x}; };
    return c;
}

Candidate flat_boundary_v() {
    const Domain d = Domain::unit_square();
    return closed_form(d, [d](const Point& x) { return d.on_boundary(x, 0.0) ? -1.0 : 0.0; });
}

} // namespace

TEST(QuadraticTestFn, ValueGradientHessian) {
    QuadraticTestFn phi{{0.5, 0.5}, 2.0, {1.0, -1.0}, SymmetricMatrix2::diag(2.0, 4.0), 2};
    EXPECT_EQ(phi({0.5, 0.5}), 2.0);
    EXPECT_DOUBLE_EQ(phi({1.0, 0.5}), 2.0 + 0.5 + 0.25);
    EXPECT_DOUBLE_EQ(phi({0.5, 0.0}), 2.0 + 0.5 + 0.5);
}

TEST(Touches, PlaneUnderBowlAtCorner) {
    const QuadraticTestFn phi{{0.0, 0.0}, 0.0, {0.0, 0.0}, {}, 2};
    const TouchReport r = touches(half_norm_squared(), phi, TouchSide::below);
    EXPECT_TRUE(r.touches);
    EXPECT_LE(r.worst_violation, 0.0);
    EXPECT_GT(r.samples, 0u);
    EXPECT_EQ(r.radius, 0.25);
}

TEST(Touches, SteepInwardPlaneAtMidEdge) {
    const Candidate v = flat_boundary_v();
    const QuadraticTestFn flat{{0.0, 0.5}, -1.0, {3.0, 0.0}, SymmetricMatrix2::diag(0.0, -1.0), 2};
    EXPECT_TRUE(touches(v, flat, TouchSide::below).touches);
    const QuadraticTestFn curved{{0.0, 0.5}, -1.0, {3.0, 0.0}, SymmetricMatrix2::diag(0.0, 1.0), 2};
    const TouchReport r = touches(v, curved, TouchSide::below);
    EXPECT_FALSE(r.touches);
    EXPECT_GT(r.worst_violation, 0.0);
}

TEST(Touches, RequiresEqualityAtBasePoint) {
    const QuadraticTestFn phi{{0.5, 0.5}, -0.1, {0.5, 0.5}, SymmetricMatrix2::diag(1.0, 1.0), 2};
    EXPECT_FALSE(touches(half_norm_squared(), phi, TouchSide::below).touches);
}

TEST(Touches, NoQuadraticTouchesCircleBranchFromBelowAtRightEnd) {
    const Candidate v = closed_form(Domain::unit_interval(), [](const Point& x) { return lower_circle(x[0]); });
    const auto retained = sample_test_functions(v, {1.0, 0.0}, TouchSide::below, 1000, 42);
    EXPECT_TRUE(retained.empty());
}

TEST(Sampling, DeterministicForFixedSeed) {
    const Candidate c = half_norm_squared();
    const auto a = sample_test_functions(c, {0.5, 0.5}, TouchSide::above, 1000, 42);
    const auto b = sample_test_functions(c, {0.5, 0.5}, TouchSide::above, 1000, 42);
    EXPECT_EQ(a, b);
    EXPECT_FALSE(a.empty());
    const auto d = draw_test_functions(c, {0.5, 0.5}, 1000, 43);
    EXPECT_NE(draw_test_functions(c, {0.5, 0.5}, 1000, 42), d);
}

TEST(Sampling, DrawsRespectRadiusAndEigenBounds) {
    const Candidate c = half_norm_squared();
    for (const auto& phi : draw_test_functions(c, {0.25, 0.75}, 1000, 7)) {
        const Point q{phi.p[0] - 0.25, phi.p[1] - 0.75};
        EXPECT_LE(std::hypot(q[0], q[1]), 10.0 + 1e-12);
        for (double l : phi.X.eigenvalues()) EXPECT_LE(std::abs(l), 10.0 + 1e-9);
        EXPECT_EQ(phi.c0, c({0.25, 0.75}));
    }
}

TEST(Sampling, RetainedFunctionsTouchOnTheSample) {
    const Candidate c = half_norm_squared();
    for (TouchSide side : {TouchSide::above, TouchSide::below}) {
        for (const auto& phi : sample_test_functions(c, {0.5, 0.5}, side, 300, 5)) {
            EXPECT_TRUE(touches(c, phi, side).touches);
        }
    }
}

TEST(Sampling, FlatBoundaryRetainedHaveNonpositiveTangentialCurvature) {
    const auto retained = sample_test_functions(flat_boundary_v(), {0.0, 0.5}, TouchSide::below, 1000, 42);
    ASSERT_FALSE(retained.empty());
    for (const auto& phi : retained) {
        EXPECT_LE(phi.X.a22, 0.0);
        EXPECT_EQ(phi.p[1], 0.0);
    }
}

TEST(Sampling, BowlRetainedFromAboveDominateIdentity) {
    // phi >= |x|^2/2 with equal value and slope at x0 forces X - I to be PSD.
    const auto retained = sample_test_functions(half_norm_squared(), {0.5, 0.5}, TouchSide::above, 1000, 42);
    ASSERT_FALSE(retained.empty());
    for (const auto& phi : retained) {
        const auto ev = SymmetricMatrix2{phi.X.a11 - 1.0, phi.X.a12, phi.X.a22 - 1.0}.eigenvalues();
        EXPECT_GE(ev[0], -1e-9);
    }
}

TEST(EnvelopeVerdict, FlatBoundaryPairPasses) {
    const PDEProblem p = make_flat_boundary_problem();
    const Candidate zero = closed_form(p.domain, [](const Point&) { return 0.0; });
    const auto sup = envelope_verdict(p, flat_boundary_v(), {0.5, 0.0}, TouchSide::below, 1000, 42);
    EXPECT_TRUE(sup.pass);
    EXPECT_GT(sup.retained, 0u);
    EXPECT_TRUE(sup.boundary_point);
    for (const Point& x : {Point{0.5, 0.5}, Point{1.0, 0.25}}) {
        EXPECT_TRUE(envelope_verdict(p, zero, x, TouchSide::above, 1000, 42).pass);
    }
}

TEST(EnvelopeVerdict, CurvatureSubsolutionAtRightEnd) {
    const PDEProblem p = make_problem("gauss1d");
    const Candidate u = closed_form(p.domain, [](const Point& x) { return x[0] < 1.0 ? lower_circle(x[0]) : 1.0; });
    const auto r = envelope_verdict(p, u, {1.0, 0.0}, TouchSide::above, 1000, 42);
    EXPECT_TRUE(r.pass);
    EXPECT_GT(r.retained, 0u);
    EXPECT_LE(*r.extreme_value, 0.0);
}

TEST(EnvelopeVerdict, ReportsWitnessForWrongSide) {
    // Touching |x|^2/2 from above forces X >= I, and det+(X) < 50 for many such X.
    PDEProblem p = make_problem("quad2d");
    p.f = [](const Point&, double, const Point&) { return 50.0; };
    Candidate c = half_norm_squared();
    const auto r = envelope_verdict(p, c, {0.5, 0.5}, TouchSide::above, 1000, 42);
    ASSERT_FALSE(r.pass);
    ASSERT_TRUE(r.witness.has_value());
    EXPECT_GT(r.witness_value, kEnvelopeSlack);
    // Re-scan: the witness is the first violating retained function.
    for (const auto& phi : r.retained_functions) {
        const double v = envelope_eval(p, {0.5, 0.5}, c({0.5, 0.5}), phi.p, phi.X, EnvelopeSide::lower);
        if (v > kEnvelopeSlack) {
            EXPECT_EQ(phi, *r.witness);
            break;
        }
    }
}

TEST(Subgradient, AbsoluteValueAtKink) {
    const Candidate c = closed_form(Domain::interval(-1.0, 1.0), [](const Point& x) { return std::abs(x[0]); });
    const SubgradientResult r = subgradient_probe(c, {0.0, 0.0});
    EXPECT_EQ(r.status, SubgradientResult::Status::found);
    EXPECT_EQ(r.p[0], 0.0);
}

TEST(Subgradient, ParabolaAtRightEnd) {
    const Candidate c = closed_form(Domain::unit_interval(), [](const Point& x) { return x[0] * x[0]; });
    const SubgradientResult r = subgradient_probe(c, {1.0, 0.0});
    EXPECT_EQ(r.status, SubgradientResult::Status::found);
    EXPECT_NEAR(r.p[0], 2.0, 1e-4);
    EXPECT_LE(r.max_violation_at_best_p, r.tol_sg);
}

TEST(Subgradient, CircleBranchIsEmptyAtRightEnd) {
    const Candidate c = closed_form(Domain::unit_interval(), [](const Point& x) { return lower_circle(x[0]); });
    const SubgradientResult r = subgradient_probe(c, {1.0, 0.0});
    EXPECT_EQ(r.status, SubgradientResult::Status::empty);
    EXPECT_GT(r.max_violation_at_best_p, 10.0 * r.tol_sg);
}

TEST(Subgradient, FoundSlopeSatisfiesInequalityOnLattice) {
    const Candidate c = half_norm_squared();
    const Point x0{0.25, 0.5};
    SubgradientOptions opts;
    opts.grid_resolution = 65;
    const SubgradientResult r = subgradient_probe(c, x0, opts);
    ASSERT_EQ(r.status, SubgradientResult::Status::found);
    for (int i = 0; i < 65; ++i) {
        for (int j = 0; j < 65; ++j) {
            const Point x{i / 64.0, j / 64.0};
            EXPECT_LE(c(x0) + r.p[0] * (x[0] - x0[0]) + r.p[1] * (x[1] - x0[1]) - c(x), r.tol_sg);
        }
    }
}

TEST(GridCandidate, InterpolatesNodalValues) {
    auto g = std::make_shared<const Grid>(build_grid(Domain::unit_square(), 4));
    const auto u = GridFunction::sample(g, [](const Point& x) { return x[0] + 2.0 * x[1]; });
    const Candidate c = Candidate::from_grid_function(u);
    EXPECT_DOUBLE_EQ(c({0.25, 0.5}), 1.25);
    EXPECT_DOUBLE_EQ(c({0.3, 0.6}), 1.5);
    EXPECT_DOUBLE_EQ(c({1.0, 1.0}), 3.0);
}

TEST(Counterexamples, FlatBoundaryReport) {
    const FlatBoundaryReport r = counterexample_ex1();
    EXPECT_TRUE(r.subsolution_pass);
    EXPECT_TRUE(r.supersolution_pass);
    EXPECT_EQ(r.max_boundary_gap, 1.0);
    EXPECT_GE(r.edge_points, 8u);
    EXPECT_LE(r.max_tangential_curvature, 0.0);
    EXPECT_TRUE(r.subsolution_below_data);
    EXPECT_EQ(r.corner_probes.size(), 8u);
    EXPECT_TRUE(r.all_pass);
}

TEST(Counterexamples, GradientBlowupReportShortTable) {
    GradientBlowupOptions opts;
    opts.last_level = 5;
    const GradientBlowupReport r = counterexample_ex2(opts);
    EXPECT_EQ(r.gap_at_1, 1.0);
    EXPECT_EQ(r.subgradient_at_1.status, SubgradientResult::Status::empty);
    EXPECT_EQ(r.touching_at_1, 0u);
    EXPECT_TRUE(r.subsolution_pass);
    EXPECT_TRUE(r.supersolution_pass);
    EXPECT_LE(r.classical_residual, 1e-10);
    ASSERT_EQ(r.interior_errors.size(), 2u);
    EXPECT_TRUE(r.interior_error_decreasing);
}
