#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "borglev/estimates.hpp"

using namespace borglev;

namespace {

LemmaQuery unit_query(double mu, double nu) {
    LemmaQuery q;
    q.mu = mu;
    q.nu = nu;
    q.c = 1.0;  // lambda_j = j
    return q;
}

std::vector<double> sweep() { return geometric_range(8.0, 256.0, 11); }

} // namespace

TEST(Estimates, BaselSeriesWithinTailBound) {
    const SeriesValue v = eval_series_I(unit_query(-2.0, 0.0), cplx(-3.0, 0.0), 2000);
    const double exact = std::numbers::pi * std::numbers::pi / 6.0;
    EXPECT_LE(exact - v.partial, v.tail_bound);
    EXPECT_GE(exact - v.partial, 0.0);
    EXPECT_NEAR(v.value(), exact, 1e-8);
}

TEST(Estimates, SeriesMatchesHighPrecisionSummation) {
    const SeriesValue a = eval_series_I(unit_query(0.0, 2.0), cplx(2.0, 1.0) * cplx(2.0, 1.0), 20000);
    EXPECT_NEAR(a.value(), 0.53277261112004052499, 1e-8);
    const SeriesValue b = eval_series_I(unit_query(-0.5, 1.0), cplx(3.0, 1.0) * cplx(3.0, 1.0), 20000);
    EXPECT_NEAR(b.value(), 1.4828184144267834415, 1e-8);
    LemmaQuery mixed = unit_query(0.0, 2.0);
    mixed.nu1 = 1.0;
    EXPECT_NEAR(eval_series_I(mixed, cplx(-5.0, 0.0), 20000).value(), 1.0 / 6.0, 1e-8);
}

TEST(Estimates, TailBoundHalvesWhenTheCutDoubles) {
    const LemmaQuery q = unit_query(0.0, 2.0);
    double prev = eval_series_I(q, cplx(-4.0, 0.0), 200).tail_bound;
    for (Index K : {400, 800, 1600}) {
        const double t = eval_series_I(q, cplx(-4.0, 0.0), K).tail_bound;
        EXPECT_LE(t, 0.5 * prev * (1 + 1e-12));
        prev = t;
    }
}

TEST(Estimates, SeriesIsMonotoneInMuAndAntitoneInNu) {
    const cplx lam(-7.0, 0.0);
    double prev = 0.0;
    for (double mu : {-3.0, -2.0, -1.0, -0.5}) {
        const double v = eval_series_I(unit_query(mu, 2.0), lam, 0).value();
        EXPECT_GT(v, prev);
        prev = v;
    }
    prev = std::numeric_limits<double>::infinity();
    for (double nu : {1.5, 2.0, 3.0, 4.0}) {
        const double v = eval_series_I(unit_query(0.0, nu), lam, 0).value();
        EXPECT_LT(v, prev);
        prev = v;
    }
}

TEST(Estimates, SeriesTracksIntegralSurrogate) {
    LemmaQuery q;
    q.mu = 0.0;
    q.nu = 2.0;
    for (double tau : {4.0, 16.0}) {
        const SurrogateCheck s = compare_with_surrogate(q, cplx(tau, 1.0) * cplx(tau, 1.0));
        EXPECT_TRUE(s.within) << tau << " gap " << s.gap << " bound " << s.variation_bound;
    }
}

TEST(Estimates, RejectsDivergentParameters) {
    EXPECT_THROW(eval_series_I(unit_query(0.0, 1.0), cplx(-1.0, 0.0), 0), ValidationError);
    EXPECT_THROW(eval_series_I(unit_query(0.0, 2.0), cplx(3.0, 0.0), 0), ValidationError);
    EXPECT_THROW(sharp_integral(0.5, 1.0, 10.0), ValidationError);
    EXPECT_THROW(check_lemma1(unit_query(0.0, 2.0), {8.0, 10.0, 12.0}), ValidationError);
    EXPECT_THROW(check_lemma3(unit_query(-2.0, 1.0), {cplx(1.0, -5.0), cplx(-4.0), cplx(-8.0)}), ValidationError);
}

TEST(Estimates, RegimeClassification) {
    EXPECT_EQ(classify_b(0.0), Regime::Upper);
    EXPECT_EQ(classify_b(-0.5), Regime::Middle);
    EXPECT_EQ(classify_b(-1.0), Regime::Middle);
    EXPECT_EQ(classify_b(-1.5), Regime::Lower);
    LemmaQuery q;
    q.mu = -2.0;
    EXPECT_DOUBLE_EQ(q.b(), -2.0);
}

TEST(Estimates, SharpIntegralMatchesOracles) {
    EXPECT_NEAR(sharp_integral(-0.5, 1.0, 10.0), 0.71512645546187306761, 1e-9);
    EXPECT_NEAR(sharp_integral(0.5, 2.0, 20.0), 1.5727495805909179279, 1e-9);
    EXPECT_NEAR(sharp_integral(-2.0, 1.0, 16.0), 0.0040117206742470483631, 1e-12);
    EXPECT_NEAR(sharp_integral_closed_form(7.0), 0.20412846745581895663, 1e-14);
    for (double tau : {3.0, 30.0, 200.0}) {
        EXPECT_NEAR(sharp_integral(0.0, 2.0, tau), sharp_integral_closed_form(tau), 1e-9 * sharp_integral_closed_form(tau));
        EXPECT_NEAR(sharp_integral_substituted(0.3, 2.0, tau), sharp_integral(0.3, 2.0, tau),
                    1e-8 * sharp_integral(0.3, 2.0, tau));
    }
}

TEST(Estimates, SeriesBoundsInEachRegime) {
    for (auto [mu, nu] : {std::pair{0.0, 2.0}, std::pair{-2.0, 1.0}, std::pair{-0.1, 1.0}}) {
        LemmaQuery q;
        q.mu = mu;
        q.nu = nu;
        const BoundReport r = check_lemma1(q, sweep());
        EXPECT_TRUE(r.pass) << mu << "," << nu << " slope " << r.fitted_slope << " vs " << r.predicted_slope;
        EXPECT_EQ(r.pass, r.fitted_slope <= r.predicted_slope + r.tolerance);
        EXPECT_EQ(r.values.size(), 11u);
    }
}

TEST(Estimates, JitteredEigenvaluesKeepTheBound) {
    LemmaQuery q;
    q.mu = 0.0;
    q.nu = 2.0;
    q.jitter = 0.5;
    EXPECT_TRUE(check_lemma1(q, sweep()).pass);
}

TEST(Estimates, IntegralBoundsInEachRegime) {
    for (auto [b, nu] : {std::pair{0.0, 2.0}, std::pair{-0.5, 1.0}, std::pair{-2.0, 1.0}}) {
        const Lemma2Report r = check_lemma2(b, nu, sweep());
        EXPECT_TRUE(r.bound.pass) << b << "," << nu << " slope " << r.bound.fitted_slope;
        EXPECT_LT(r.max_substitution_gap, 1e-8);
    }
    const Lemma2Report closed = check_lemma2(0.0, 2.0, sweep());
    ASSERT_TRUE(closed.max_closed_form_gap.has_value());
    EXPECT_LT(*closed.max_closed_form_gap, 1e-9);
    EXPECT_NEAR(closed.bound.fitted_slope, -1.0, 0.15);
}

TEST(Estimates, HalfPlaneSweepReportsBothExponents) {
    std::vector<cplx> ls;
    for (double t : sweep()) ls.emplace_back(-t * t, 0.0);
    LemmaQuery q;
    q.mu = -2.0;
    q.nu = 1.0;
    const BoundReport r = check_lemma3(q, ls);
    ASSERT_TRUE(r.derived_slope.has_value());
    EXPECT_TRUE(*r.pass_derived);
    EXPECT_NEAR(r.fitted_slope, -1.0, 0.15);
    LemmaQuery flat;
    flat.mu = -2.0;
    flat.nu = 0.0;
    EXPECT_NEAR(check_lemma3(flat, ls).fitted_slope, 0.0, 1e-10);
    LemmaQuery single, mixed;
    single.nu = mixed.nu = 2.0;
    mixed.nu1 = 1.0;
    EXPECT_NEAR(check_lemma3(single, ls).fitted_slope, check_lemma3(mixed, ls).fitted_slope, 0.05);
}

TEST(Estimates, SharpnessProbes) {
    const auto res = probe_sharpness({{0.5, 2.0}, {-0.25, 1.0}}, sweep());
    ASSERT_EQ(res.size(), 2u);
    EXPECT_NEAR(res[0].lower_slope, res[0].sharp_exponent, 0.1);
    EXPECT_NEAR(res[0].upper_slope, res[0].sharp_exponent, 0.1);
    EXPECT_DOUBLE_EQ(res[1].sharp_exponent, 2 * -0.25 + 1 - 1);
    EXPECT_DOUBLE_EQ(res[1].middle_exponent, -0.25 + 1 - 1);
    EXPECT_LE(res[1].lower_slope, res[1].upper_slope);
}

TEST(Estimates, GeometricRange) {
    const auto g = geometric_range(8.0, 256.0, 6);
    ASSERT_EQ(g.size(), 6u);
    EXPECT_DOUBLE_EQ(g.front(), 8.0);
    EXPECT_NEAR(g.back(), 256.0, 1e-12);
    EXPECT_NEAR(g[1] / g[0], 2.0, 1e-12);
}
