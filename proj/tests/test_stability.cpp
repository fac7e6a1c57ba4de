#include <gtest/gtest.h>

#include <cmath>

#include "borglev/potentials.hpp"
#include "borglev/stability.hpp"

using namespace borglev;

namespace {

struct Trio {
    GridSpec grid = build_grid(1.0, 1.0, 10, 10);
    SpectralData a = solve_eigen(bump_potential(grid, {0.5, 0.5}, 0.3, 2.0), grid, 100, false);
    SpectralData b = solve_eigen(gaussian_potential(grid, {0.4, 0.6}, 0.1, 1.0), grid, 100, false);
    SpectralData c = solve_eigen(zero_potential(grid), grid, 100, false);
};

const Trio& trio() {
    static const Trio t;
    return t;
}

} // namespace

TEST(Stability, ExponentBundleForThePlane) {
    const ExponentBundle e = gamma_of(2, 2, 0.25);
    EXPECT_NEAR(e.gamma, 1.0 / 94.0, 1e-15);
    EXPECT_NEAR(e.gamma_alt, 1.0 / 100.0, 1e-15);
    EXPECT_DOUBLE_EQ(e.alpha_threshold, 1.75);
    EXPECT_DOUBLE_EQ(e.sigma, 0.125);
    EXPECT_DOUBLE_EQ(e.kappa, 4.0);
    EXPECT_THROW(gamma_of(2, 1, 0.25), ValidationError);
    EXPECT_THROW(gamma_of(2, 2, 0.5), ValidationError);
    double prev_m = 1.0;
    for (int m = 2; m <= 6; ++m) {
        double prev_eps = 1.0;
        for (double eps : {0.05, 0.15, 0.25, 0.35, 0.45, 0.499}) {
            const ExponentBundle b = gamma_of(2, m, eps);
            EXPECT_GT(b.gamma, 0.0);
            EXPECT_LT(b.gamma, prev_eps);
            EXPECT_GT(b.kappa, 1.0);
            prev_eps = b.gamma;
        }
        EXPECT_LT(gamma_of(2, m, 0.25).gamma, prev_m);
        prev_m = gamma_of(2, m, 0.25).gamma;
    }
}

TEST(Stability, DeltaVanishesOnIdenticalData) {
    const Trio& t = trio();
    const DeltaMetrics d = compute_delta(t.a, t.a, 0, 2);
    EXPECT_EQ(d.delta0, 0.0);
    EXPECT_LT(d.delta1, 1e-12);
    EXPECT_EQ(d.tail_bound, 0.0);
}

// traces of b and c brought to the gauge of a once; pairwise deltas then skip re-alignment
struct SharedGauge {
    SpectralData a, b, c;
};

static const SharedGauge& shared() {
    static const SharedGauge s{trio().a, align_traces(trio().a, trio().b).second, align_traces(trio().a, trio().c).second};
    return s;
}

static DeltaMetrics fixed(const SpectralData& x, const SpectralData& y, Index N) {
    DeltaOptions o;
    o.align = false;
    return compute_delta(x, y, N, 2, o);
}

TEST(Stability, DeltaIsSymmetricAfterSharedAlignment) {
    const SharedGauge& s = shared();
    for (Index N : {0, 3, 7}) {
        const DeltaMetrics ab = fixed(s.a, s.b, N), ba = fixed(s.b, s.a, N);
        EXPECT_NEAR(ab.delta0, ba.delta0, 1e-12);
        EXPECT_NEAR(ab.delta1, ba.delta1, 1e-12);
        EXPECT_EQ(ab.delta, ab.delta0 + ab.delta1);
    }
}

TEST(Stability, DeltaSatisfiesTriangleInequalityAfterSharedAlignment) {
    const SharedGauge& s = shared();
    for (Index N : {0, 2, 5}) {
        const double ab = fixed(s.a, s.b, N).delta, bc = fixed(s.b, s.c, N).delta, ac = fixed(s.a, s.c, N).delta;
        EXPECT_LE(ac, ab + bc + 1e-12);
        EXPECT_LE(ab, ac + bc + 1e-12);
        EXPECT_LE(bc, ab + ac + 1e-12);
    }
}

TEST(Stability, SignFlipsDoNotChangeAlignedDelta) {
    const Trio& t = trio();
    SpectralData flipped = t.b;
    for (Index k = 1; k < flipped.count(); k += 4) flipped.traces.col(k) *= -1.0;
    const DeltaMetrics d = compute_delta(t.a, t.b, 0, 2), e = compute_delta(t.a, flipped, 0, 2);
    EXPECT_NEAR(d.delta1, e.delta1, 1e-10);
    EXPECT_EQ(d.delta0, e.delta0);
}

TEST(Stability, EigenvalueShiftGivesExactDelta0) {
    const Trio& t = trio();
    SpectralData shifted = t.a;
    shifted.eigenvalues.array() += 0.125;
    const DeltaMetrics d = compute_delta(t.a, shifted, 0, 2);
    EXPECT_EQ(d.delta0, 0.125);
    EXPECT_LT(d.delta1, 1e-12);
}

TEST(Stability, DeltaIsLinearForSmallPerturbations) {
    const GridSpec g = build_grid(1.0, 1.0, 10, 10);
    const Potential base = gaussian_potential(g, {0.45, 0.55}, 0.15, 1.0);
    const Potential bump = bump_potential(g, {0.5, 0.5}, 0.3, 1.0);
    const SpectralData s0 = solve_eigen(base, g, 100, false);
    std::vector<double> ratio;
    for (double t : {1e-3, 1e-2, 1e-1}) {
        const SpectralData st = solve_eigen(combine(base, 1.0, bump, t, "p"), g, 100, false);
        ratio.push_back(compute_delta(s0, st, 0, 2).delta / t);
    }
    EXPECT_NEAR(ratio[1] / ratio[0], 1.0, 0.1);
    EXPECT_NEAR(ratio[2] / ratio[0], 1.0, 0.1);
}

TEST(Stability, EigenvalueDistanceIsNonincreasingInN) {
    const Trio& t = trio();
    double prev = std::numeric_limits<double>::infinity();
    for (Index N = 0; N < 20; ++N) {
        const double d0 = compute_delta(t.a, t.c, N, 2).delta0;
        EXPECT_LE(d0, prev + 1e-10);
        prev = d0;
    }
}

TEST(Stability, IncompleteSpectraCarryTailBounds) {
    const GridSpec g = build_grid(1.0, 1.0, 10, 10);
    const SpectralData a = solve_eigen(zero_potential(g), g, 30, false);
    const SpectralData b = solve_eigen(bump_potential(g, {0.5, 0.5}, 0.3, 1.0), g, 30, false);
    EXPECT_THROW(compute_delta(a, b, 0, 2), NumericalError);
    DeltaOptions loose;
    loose.max_tail_fraction = 10.0;
    const DeltaMetrics d = compute_delta(a, b, 0, 2, loose);
    EXPECT_GT(d.tail_bound, 0.0);
    EXPECT_THROW(compute_delta(a, b, 15, 2, loose), ValidationError);
}

TEST(Stability, CorruptionFollowsTheNoiseModel) {
    const Trio& t = trio();
    const double delta = 0.03, A = 1.0, alpha = 2.0;
    const SpectralData clean = corrupt_spectral_data(t.c, 0.0, 0.0, alpha, 2);
    EXPECT_EQ(clean.eigenvalues, t.c.eigenvalues);
    EXPECT_EQ(clean.traces, t.c.traces);
    const SpectralData n = corrupt_spectral_data(t.c, delta, A, alpha, 2);
    for (Index j = 0; j < n.count(); ++j) {
        const double k = double(j + 1), e = delta + A * std::pow(k, -alpha);
        EXPECT_NEAR(n.eigenvalues[j] - t.c.eigenvalues[j], e, 1e-12 * (1 + t.c.eigenvalues[j]));
        const double dt = boundary_l2_norm(RealVector(n.traces.col(j) - t.c.traces.col(j)), t.c.grid);
        EXPECT_NEAR(dt, e * k, 1e-9 * e * k);
    }
}

TEST(Stability, HolderFitOnAScaledFamily) {
    const GridSpec g = build_grid(1.0, 1.0, 12, 12);
    const Potential bump = bump_potential(g, {0.5, 0.5}, 0.3, -1.0), zero = zero_potential(g);
    std::vector<std::pair<Potential, Potential>> fam;
    for (double t : {0.05, 0.1, 0.2, 0.4, 0.8}) fam.emplace_back(scaled(bump, t, "t" + std::to_string(t)), zero);
    const HolderReport r = holder_experiment(fam, 0, 2, g, 0);
    ASSERT_EQ(r.points.size(), 5u);
    EXPECT_FALSE(r.degenerate);
    EXPECT_GT(r.gamma_emp, 0.0);
    EXPECT_NEAR(r.gamma_emp, 1.0, 0.05);
    EXPECT_EQ(r.K, g.interior_count());
    EXPECT_EQ(r.tail_bound, 0.0);
    for (std::size_t i = 1; i < r.points.size(); ++i) EXPECT_GT(r.points[i].l2_diff, r.points[i - 1].l2_diff);
    fam.pop_back();
    EXPECT_THROW(holder_experiment(fam, 0, 2, g, 0), ValidationError);
}

TEST(Stability, HolderFitIsDegenerateForIdenticalPairs) {
    const GridSpec g = build_grid(1.0, 1.0, 9, 9);
    const Potential zero = zero_potential(g);
    std::vector<std::pair<Potential, Potential>> fam(5, {zero, zero});
    const HolderReport r = holder_experiment(fam, 0, 2, g, 0);
    EXPECT_TRUE(r.degenerate);
    EXPECT_TRUE(std::isnan(r.gamma_emp));
    EXPECT_FALSE(r.pass);
}

TEST(Stability, NoiseExperimentRejectsSubcriticalDecay) {
    const GridSpec g = build_grid(1.0, 1.0, 10, 10);
    const Potential q = mode_potential(g, 1, 1, 1.0);
    EXPECT_THROW(asymptotic_noise_experiment(q, zero_potential(g), {0.1}, 1.0, 1.75, 2, g, 0), ValidationError);
    EXPECT_THROW(asymptotic_noise_experiment(q, zero_potential(g), {}, 1.0, 2.0, 2, g, 0), ValidationError);
}
