#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

#include "masolve/geometry.hpp"

using namespace masolve;

namespace {

/// Canonical form of a direction up to sign: first nonzero component positive.
Offset canonical(Offset d) {
    if (d[0] < 0 || (d[0] == 0 && d[1] < 0)) return {-d[0], -d[1]};
    return d;
}

std::pair<Offset, Offset> canonical_pair(const DirectionPair& p) {
    const Offset a = canonical(p.v);
    const Offset b = canonical(p.w);
    return a < b ? std::pair{a, b} : std::pair{b, a};
}

/// Exhaustive oracle: orthogonal primitive pairs with max-norm <= width.
std::set<std::pair<Offset, Offset>> brute_force_pairs(int width) {
    std::set<std::pair<Offset, Offset>> out;
    for (int a = -width; a <= width; ++a) {
        for (int b = -width; b <= width; ++b) {
            if ((a == 0 && b == 0) || std::gcd(a, b) != 1) continue;
            const Offset v = canonical({a, b});
            const Offset w = canonical({-b, a});
            if (std::max(std::abs(w[0]), std::abs(w[1])) > width) continue;
            out.insert(v < w ? std::pair{v, w} : std::pair{w, v});
        }
    }
    return out;
}

} // namespace

TEST(Domain, FactoriesAndDimensions) {
    EXPECT_EQ(Domain::unit_square().dim(), 2);
    EXPECT_EQ(Domain::unit_interval().dim(), 1);
    EXPECT_DOUBLE_EQ(Domain::square(-1, 1, -1, 1).length(), 2.0);
}

TEST(Domain, RejectsDegenerateBounds) {
    EXPECT_THROW(Domain::interval(1.0, 1.0), std::invalid_argument);
    EXPECT_THROW(Domain::interval(2.0, 1.0), std::invalid_argument);
    EXPECT_THROW(Domain::square(0, 1, 0, 2), std::invalid_argument);
}

TEST(Domain, BoundaryAndCorners) {
    const Domain d = Domain::unit_square();
    EXPECT_TRUE(d.on_boundary({0.0, 0.3}));
    EXPECT_TRUE(d.on_boundary({0.3, 1.0}));
    EXPECT_FALSE(d.on_boundary({0.5, 0.5}));
    EXPECT_FALSE(d.on_boundary({1.5, 0.0}));
    EXPECT_TRUE(d.is_corner({1.0, 0.0}));
    EXPECT_FALSE(d.is_corner({1.0, 0.5}));
    EXPECT_FALSE(Domain::unit_interval().is_corner({0.0, 0.0}));
    EXPECT_TRUE(Domain::unit_interval().on_boundary({1.0, 0.0}));
}

TEST(Grid, RejectsTooFewIntervals) {
    EXPECT_THROW(Grid(Domain::unit_square(), 1), std::invalid_argument);
    EXPECT_THROW(Grid(Domain::unit_interval(), 0), std::invalid_argument);
}

TEST(Grid, CountsAndSpacing) {
    const Grid g(Domain::unit_square(), 8);
    EXPECT_DOUBLE_EQ(g.h(), 0.125);
    EXPECT_EQ(g.size(), 81u);
    EXPECT_EQ(g.boundary_count(), 32u);
    EXPECT_EQ(g.interior_count(), 49u);

    const Grid g1(Domain::unit_interval(), 16);
    EXPECT_EQ(g1.size(), 17u);
    EXPECT_EQ(g1.boundary_count(), 2u);
}

TEST(Grid, RowMajorIndexingRoundTrips) {
    const Grid g(Domain::unit_square(), 4);
    EXPECT_EQ(g.index({0, 1}), 1u);
    EXPECT_EQ(g.index({1, 0}), 5u);
    for (NodeIndex k = 0; k < g.size(); ++k) EXPECT_EQ(g.index(g.lattice(k)), k);
}

TEST(Grid, FarEdgeIsExact) {
    const Grid g(Domain::square(0.0, 0.7, 0.0, 0.7), 3);
    const Point p = g.point(g.index({3, 3}));
    EXPECT_EQ(p[0], 0.7);
    EXPECT_EQ(p[1], 0.7);
}

TEST(Grid, NearestNode) {
    const Grid g(Domain::unit_square(), 8);
    EXPECT_EQ(g.lattice(g.nearest({0.5, 0.5})), (Offset{4, 4}));
    EXPECT_EQ(g.lattice(g.nearest({-3.0, 0.99})), (Offset{0, 8}));
}

TEST(StencilPairs, WidthOneIsAxesThenDiagonals) {
    const auto pairs = stencil_pairs(1);
    ASSERT_EQ(pairs.size(), 2u);
    EXPECT_EQ(canonical_pair(pairs[0]), (std::pair{Offset{0, 1}, Offset{1, 0}}));
    EXPECT_EQ(canonical_pair(pairs[1]), (std::pair{Offset{1, -1}, Offset{1, 1}}));
}

TEST(StencilPairs, WidthTwoAddsKnightMoves) {
    const auto pairs = stencil_pairs(2);
    ASSERT_EQ(pairs.size(), 4u);
    std::set<std::pair<Offset, Offset>> got;
    for (const auto& p : pairs) got.insert(canonical_pair(p));
    EXPECT_TRUE(got.count({Offset{1, -2}, Offset{2, 1}}));
    EXPECT_TRUE(got.count({Offset{1, 2}, Offset{2, -1}}));
}

TEST(StencilPairs, MatchesExhaustiveEnumeration) {
    for (int w = 1; w <= 3; ++w) {
        std::set<std::pair<Offset, Offset>> got;
        for (const auto& p : stencil_pairs(w)) {
            EXPECT_EQ(p.v[0] * p.w[0] + p.v[1] * p.w[1], 0);
            EXPECT_EQ(p.v_norm2, p.v[0] * p.v[0] + p.v[1] * p.v[1]);
            EXPECT_EQ(p.w_norm2, p.w[0] * p.w[0] + p.w[1] * p.w[1]);
            got.insert(canonical_pair(p));
        }
        EXPECT_EQ(got, brute_force_pairs(w)) << "width " << w;
        EXPECT_EQ(got.size(), stencil_pairs(w).size()) << "duplicates at width " << w;
    }
    EXPECT_EQ(stencil_pairs(3).size(), 8u);
}

TEST(StencilPairs, NestedAcrossWidths) {
    for (int w = 1; w < 3; ++w) {
        std::set<std::pair<Offset, Offset>> small;
        std::set<std::pair<Offset, Offset>> large;
        for (const auto& p : stencil_pairs(w)) small.insert(canonical_pair(p));
        for (const auto& p : stencil_pairs(w + 1)) large.insert(canonical_pair(p));
        EXPECT_TRUE(std::includes(large.begin(), large.end(), small.begin(), small.end()));
    }
}

TEST(StencilPairs, RejectsUnsupportedWidth) {
    EXPECT_THROW(stencil_pairs(0), std::invalid_argument);
    EXPECT_THROW(stencil_pairs(4), std::invalid_argument);
}

TEST(StencilPairs, NeighborsNearTheBoundaryAreClipped) {
    const Grid g(Domain::unit_square(), 8);
    const NodeIndex near_edge = g.index({1, 4});
    EXPECT_EQ(neighbors_in_domain(g, near_edge, {1, 0}), StencilFit::both_in);
    EXPECT_EQ(neighbors_in_domain(g, near_edge, {2, 1}), StencilFit::clipped);
    EXPECT_EQ(neighbors_in_domain(g, g.index({0, 4}), {0, 1}), StencilFit::clipped);
    EXPECT_EQ(neighbors_in_domain(g, g.index({4, 4}), {3, 1}), StencilFit::both_in);
}
