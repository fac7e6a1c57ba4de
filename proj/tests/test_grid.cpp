#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "borglev/grid.hpp"
#include "borglev/potentials.hpp"

using namespace borglev;

TEST(Grid, CountsAndSpacing) {
    const GridSpec g = build_grid(2.0, 1.0, 19, 9);
    EXPECT_EQ(g.interior_count(), 19 * 9);
    EXPECT_EQ(g.boundary_count(), 2 * 19 + 2 * 9);
    EXPECT_DOUBLE_EQ(g.hx(), 0.1);
    EXPECT_DOUBLE_EQ(g.hy(), 0.1);
    EXPECT_DOUBLE_EQ(g.x_of(g.interior_index(3, 4)), 0.4);
    EXPECT_DOUBLE_EQ(g.y_of(g.interior_index(3, 4)), 0.5);
}

TEST(Grid, RejectsDegenerateInput) {
    EXPECT_THROW(build_grid(1.0, 1.0, 7, 10), ValidationError);
    EXPECT_THROW(build_grid(-1.0, 1.0, 10, 10), ValidationError);
    EXPECT_THROW(build_grid(1.0, std::nan(""), 10, 10), ValidationError);
}

TEST(Grid, BoundaryRunsCounterclockwiseWithoutCorners) {
    const GridSpec g = build_grid(1.0, 1.5, 10, 14);
    double prev = -1.0;
    for (const auto& b : g.boundary()) {
        EXPECT_GT(b.arclength, prev);
        prev = b.arclength;
        const bool corner = (b.x == 0.0 || b.x == g.lx()) && (b.y == 0.0 || b.y == g.ly());
        EXPECT_FALSE(corner);
        EXPECT_NEAR(std::hypot(b.normal[0], b.normal[1]), 1.0, 1e-15);
        // the interior neighbour sits one normal step inside
        EXPECT_NEAR(g.x_of(b.interior), b.x - b.normal[0] * b.normal_spacing, 1e-12);
        EXPECT_NEAR(g.y_of(b.interior), b.y - b.normal[1] * b.normal_spacing, 1e-12);
    }
    EXPECT_LT(prev, g.perimeter());
    EXPECT_EQ(g.boundary_node(0).side, Side::Bottom);
    EXPECT_EQ(g.boundary().back().side, Side::Left);
}

TEST(Grid, BoundaryWeightsIntegrateConstantsAndTrigs) {
    const GridSpec g = build_grid(1.0, 1.0, 16, 16);
    EXPECT_NEAR(g.boundary_weights().sum(), g.perimeter(), 1e-12);
    BoundaryField one = BoundaryField::Ones(g.boundary_count());
    EXPECT_NEAR(boundary_l2_norm(one, g), std::sqrt(g.perimeter()), 1e-12);
    // x integrates to 1/2 + 1 + 1/2 + 0 over the unit square boundary
    BoundaryField x(g.boundary_count());
    for (Index b = 0; b < g.boundary_count(); ++b) x[b] = g.boundary_node(b).x;
    EXPECT_NEAR(boundary_inner_product(x, one, g).real(), 2.0, 2e-2);
}

TEST(Grid, InnerProductIsBilinearAndSymmetric) {
    const GridSpec g = build_grid(1.0, 1.0, 12, 12);
    const BoundaryField f = BoundaryField::Random(g.boundary_count());
    const BoundaryField h = BoundaryField::Random(g.boundary_count());
    EXPECT_NEAR(std::abs(boundary_inner_product(f, h, g) - boundary_inner_product(h, f, g)), 0.0, 1e-14);
    const cplx a(0.3, -1.2);
    EXPECT_NEAR(std::abs(boundary_inner_product(a * f, h, g) - a * boundary_inner_product(f, h, g)), 0.0, 1e-13);
}

TEST(Grid, SobolevBasisIsOrthonormal) {
    const GridSpec g = build_grid(1.0, 2.0, 10, 21);
    const BoundarySobolev s(g);
    const ComplexMatrix& B = s.basis();
    const RealVector& w = g.boundary_weights();
    const ComplexMatrix gram = B.adjoint() * w.asDiagonal() * B;
    EXPECT_LT((gram - ComplexMatrix::Identity(gram.rows(), gram.cols())).norm(), 1e-10);
    EXPECT_EQ(s.wavenumbers()[0], 0.0);
}

TEST(Grid, SobolevNormsAreOrdered) {
    const GridSpec g = build_grid(1.0, 1.0, 12, 12);
    const BoundaryField f = BoundaryField::Random(g.boundary_count());
    const double l2 = hs_norm(f, 0.0, g);
    EXPECT_NEAR(l2, boundary_l2_norm(f, g), 1e-10 * l2);
    EXPECT_LE(hs_norm(f, -0.5, g), l2 * (1 + 1e-12));
    EXPECT_GE(hs_norm(f, 0.5, g), l2 * (1 - 1e-12));
}

TEST(Grid, NormsOfZeroExtension) {
    const GridSpec g = build_grid(1.0, 1.0, 40, 40);
    const Potential q = mode_potential(g, 1, 1, 1.0);
    // ||sin(pi x) sin(pi y)||_2 = 1/2, grad norm^2 = pi^2/2
    EXPECT_NEAR(l2_norm(g, q.values), 0.5, 1e-3);
    EXPECT_NEAR(h1_norm_zero_extension(g, q.values), std::sqrt(0.25 + std::numbers::pi * std::numbers::pi / 2.0), 1e-2);
    EXPECT_EQ(support_margin(g, q.values), 1);
    const Potential b = bump_potential(g, {0.5, 0.5}, 0.2, 1.0);
    EXPECT_GE(support_margin(g, b.values), 10);
}

TEST(Potentials, BuiltinsRespectParameters) {
    const GridSpec g = build_grid(1.0, 1.0, 20, 20);
    EXPECT_DOUBLE_EQ(constant_potential(g, 2.5).values.maxCoeff(), 2.5);
    EXPECT_DOUBLE_EQ(zero_potential(g).values.norm(), 0.0);
    const Potential gs = gaussian_potential(g, {0.5, 0.5}, 0.1, 3.0);
    EXPECT_LE(gs.values.maxCoeff(), 3.0);
    EXPECT_GE(gs.sup_bound, gs.values.cwiseAbs().maxCoeff());
    const Potential r1 = random_potential(g, 7, 2.0, 0.8), r2 = random_potential(g, 7, 2.0, 0.8);
    EXPECT_EQ(r1.values, r2.values);
    EXPECT_NEAR(r1.values.cwiseAbs().maxCoeff(), 0.8, 1e-12);
    EXPECT_NE(random_potential(g, 8, 2.0, 0.8).values, r1.values);
    EXPECT_GE(support_margin(g, r1.values), 1);
    EXPECT_THROW(gaussian_potential(g, {0.5, 0.5}, 0.0, 1.0), ValidationError);
    EXPECT_THROW(make_potential(g, RealVector::Ones(5), "short"), ValidationError);
    EXPECT_THROW(make_potential(g, RealVector::Ones(400), "low", 0.5), ValidationError);
}
