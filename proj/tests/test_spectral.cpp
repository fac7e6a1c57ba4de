#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "borglev/potentials.hpp"
#include "borglev/spectral.hpp"

using namespace borglev;

namespace {

const double pi = std::numbers::pi;

std::vector<double> continuum_dirichlet(int count) {
    std::vector<double> v;
    for (int j = 1; j <= 40; ++j)
        for (int k = 1; k <= 40; ++k) v.push_back(pi * pi * (j * j + k * k));
    std::sort(v.begin(), v.end());
    v.resize(std::size_t(count));
    return v;
}

} // namespace

TEST(Spectral, OperatorIsTheFivePointStencil) {
    const GridSpec g = build_grid(1.0, 1.2, 8, 9);
    const double ix = 1.0 / (g.hx() * g.hx()), iy = 1.0 / (g.hy() * g.hy());
    const RealMatrix a = RealMatrix(assemble_operator(constant_potential(g, 0.5), g));
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            const Index r = g.interior_index(i, j);
            EXPECT_DOUBLE_EQ(a(r, r), 2.0 * ix + 2.0 * iy + 0.5);
            if (i + 1 < g.nx()) EXPECT_DOUBLE_EQ(a(r, g.interior_index(i + 1, j)), -ix);
            if (j + 1 < g.ny()) EXPECT_DOUBLE_EQ(a(r, g.interior_index(i, j + 1)), -iy);
            EXPECT_EQ((a.row(r).array() != 0.0).count(), 1 + (i > 0) + (i + 1 < g.nx()) + (j > 0) + (j + 1 < g.ny()));
        }
    EXPECT_EQ(a, a.transpose());
}

TEST(Spectral, ZeroPotentialMatchesDiscreteAndContinuumSpectra) {
    const GridSpec g = build_grid(1.0, 1.0, 20, 20);
    const SpectralData sd = solve_eigen(zero_potential(g), g, 60);
    const double h = g.hx();
    std::vector<double> discrete;
    for (int j = 1; j <= 20; ++j)
        for (int k = 1; k <= 20; ++k) {
            const double a = std::sin(j * pi * h / 2.0), b = std::sin(k * pi * h / 2.0);
            discrete.push_back(4.0 / (h * h) * (a * a + b * b));
        }
    std::sort(discrete.begin(), discrete.end());
    const auto cont = continuum_dirichlet(10);
    for (Index k = 0; k < 60; ++k) EXPECT_NEAR(sd.eigenvalues[k], discrete[std::size_t(k)], 1e-9 * discrete[std::size_t(k)]);
    for (Index k = 0; k < 10; ++k) EXPECT_NEAR(sd.eigenvalues[k] / cont[std::size_t(k)], 1.0, 0.05);
    const RealVector closed = discrete_laplacian_eigenvalues(g, 60);
    for (Index k = 0; k < 60; ++k) EXPECT_NEAR(closed[k], discrete[std::size_t(k)], 1e-9 * discrete[std::size_t(k)]);
}

TEST(Spectral, ConstantShiftMovesEigenvaluesExactly) {
    const GridSpec g = build_grid(1.0, 1.3, 12, 15);
    const Potential q = gaussian_potential(g, {0.3, 0.6}, 0.15, 4.0);
    const Potential qc = combine(q, 1.0, constant_potential(g, 2.75), 1.0, "shifted");
    const SpectralData a = solve_eigen(q, g, 40), b = solve_eigen(qc, g, 40);
    for (Index k = 0; k < 40; ++k) EXPECT_NEAR(b.eigenvalues[k] - a.eigenvalues[k], 2.75, 1e-10);
    EXPECT_LT(trace_distance(a, b), 1e-8);
}

TEST(Spectral, EigenvectorsAreOrthonormalWithCellWeights) {
    const GridSpec g = build_grid(1.0, 1.0, 10, 12);
    const SpectralData sd = solve_eigen(random_potential(g, 3, 2.0, 5.0), g, 30);
    ASSERT_TRUE(sd.has_vectors());
    const RealMatrix gram = sd.eigenvectors.transpose() * sd.eigenvectors * g.cell_area();
    EXPECT_LT((gram - RealMatrix::Identity(30, 30)).norm(), 1e-10);
    for (Index k = 1; k < sd.count(); ++k) EXPECT_LE(sd.eigenvalues[k - 1], sd.eigenvalues[k]);
}

TEST(Spectral, TracesAreGaugeFixedNormalDerivatives) {
    const GridSpec g = build_grid(1.0, 1.0, 14, 14);
    const SpectralData sd = solve_eigen(gaussian_potential(g, {0.4, 0.55}, 0.2, 3.0), g, 25);
    EXPECT_LT((normal_traces(g, sd.eigenvectors) - sd.traces).norm(), 1e-12);
    for (Index k = 0; k < sd.count(); ++k) {
        Index b = 0;
        while (b < sd.traces.rows() && std::abs(sd.traces(b, k)) < 1e-12) ++b;
        ASSERT_LT(b, sd.traces.rows());
        EXPECT_GT(sd.traces(b, k), 0.0);
    }
    EXPECT_FALSE(solve_eigen(zero_potential(g), g, 5, false).has_vectors());
}

TEST(Spectral, FirstTraceApproachesContinuumNorm) {
    // phi_1 = 2 sin(pi x) sin(pi y): ||d_nu phi_1||^2 = 4 sides * 4 pi^2 * 1/2
    const GridSpec g = build_grid(1.0, 1.0, 24, 24);
    const SpectralData sd = solve_eigen(zero_potential(g), g, 1, false);
    const double norm = boundary_l2_norm(RealVector(sd.traces.col(0)), g);
    EXPECT_NEAR(norm / (2.0 * std::sqrt(2.0) * pi), 1.0, 0.05);
}

TEST(Spectral, RejectsBadK) {
    const GridSpec g = build_grid(1.0, 1.0, 8, 8);
    EXPECT_THROW(solve_eigen(zero_potential(g), g, 0), ValidationError);
    EXPECT_THROW(solve_eigen(zero_potential(g), g, 65), ValidationError);
}

TEST(Spectral, AlignmentRemovesSignAndRotationGauge) {
    const GridSpec g = build_grid(1.0, 1.0, 12, 12);
    const SpectralData sd = solve_eigen(zero_potential(g), g, 30, false);
    SpectralData flipped = sd;
    for (Index k = 0; k < sd.count(); k += 3) flipped.traces.col(k) *= -1.0;
    // the unit square has double eigenvalues; rotate inside one cluster
    const auto clusters = eigen_clusters(sd.eigenvalues, 1e-6);
    bool rotated = false;
    for (auto [b, e] : clusters)
        if (e - b == 2 && !rotated) {
            const double c = std::cos(0.7), s = std::sin(0.7);
            const RealVector u = flipped.traces.col(b), v = flipped.traces.col(b + 1);
            flipped.traces.col(b) = c * u + s * v;
            flipped.traces.col(b + 1) = -s * u + c * v;
            rotated = true;
        }
    ASSERT_TRUE(rotated);
    EXPECT_GT(trace_distance(sd, flipped), 1.0);
    const auto [a, b] = align_traces(sd, flipped);
    EXPECT_LT(trace_distance(a, b), 1e-9);
}

TEST(Spectral, WeylReportIsConsistent) {
    const GridSpec g = build_grid(1.0, 1.0, 20, 20);
    const SpectralData sd = solve_eigen(gaussian_potential(g, {0.5, 0.5}, 0.1, 2.0), g, 80, false);
    const WeylReport w = weyl_validate(sd, 2, 0.25);
    EXPECT_LE(w.c_star, w.c_upper);
    EXPECT_GT(w.c_star, 0.0);
    EXPECT_TRUE(std::isfinite(w.A_n));
    EXPECT_TRUE(std::isfinite(w.trace_constant));
    EXPECT_GT(w.c_n, 0.0);
    for (Index k = w.fit_begin; k <= w.fit_end; ++k) {
        const double tn = boundary_l2_norm(RealVector(sd.traces.col(k - 1)), g);
        EXPECT_LE(tn, w.trace_constant * std::pow(sd.eigenvalues[k - 1], 0.75 + 0.125) * (1 + 1e-12));
    }
    EXPECT_THROW(weyl_validate(solve_eigen(zero_potential(g), g, 20, false), 2, 0.25), ValidationError);
}
