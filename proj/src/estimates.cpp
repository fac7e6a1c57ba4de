#include "borglev/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "borglev/fitting.hpp"

namespace borglev {

namespace {

using boost::math::quadrature::gauss_kronrod;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTolerance = 0.15;

struct Piece {
    double value = 0.0;
    double error = 0.0;
};

template <class F>
Piece integrate_split(F f, std::vector<double> points, double tol) {
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    Piece total;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        double err = 0.0;
        total.value += gauss_kronrod<double, 31>::integrate(f, points[i], points[i + 1], 12, tol, &err);
        total.error += err;
    }
    return total;
}

void check_quadrature(const Piece& p, double tol, const std::string& what) {
    if (!std::isfinite(p.value) || p.error > std::max(100.0 * tol * std::abs(p.value), 1e-300))
        throw NumericalError(what + ": quadrature tolerance not met (estimate " + std::to_string(p.error) +
                             ", value " + std::to_string(p.value) + ")");
}

void validate(const LemmaQuery& q) {
    require(q.n >= 1, "dimension must be positive");
    require(q.nu >= 0.0, "nu must be nonnegative");
    require(q.mu < 2.0 * q.nu / q.n - 1.0, "series diverges: need mu < 2 nu / n - 1");
    require(q.c > 0.0, "synthetic Weyl constant must be positive");
    require(q.jitter >= 0.0 && q.A_n > 0.0, "jitter must be nonnegative and A_n positive");
    require(q.eps > 0.0, "eps must be positive");
    if (q.nu1) require(*q.nu1 >= 0.0 && *q.nu1 <= q.nu, "nu1 must lie in [0, nu]");
    if (q.data) require(q.data->count() >= 2, "eigendata needs at least two eigenvalues");
}

double term(const LemmaQuery& q, Index j, cplx lambda) {
    const double jm = std::pow(double(j), q.mu);
    if (q.nu == 0.0) return jm;
    const double d1 = std::abs(lambda - q.lambda_j(j));
    if (!q.nu1) return jm / std::pow(d1, q.nu);
    const double d2 = std::abs(lambda - q.lambda_j_second(j));
    return jm / (std::pow(d1, *q.nu1) * std::pow(d2, q.nu - *q.nu1));
}

double smooth_term(const LemmaQuery& q, double x, cplx lambda, double c) {
    const double jm = std::pow(x, q.mu);
    if (q.nu == 0.0) return jm;
    const double l = c * std::pow(x, 2.0 / q.n);
    const double d1 = std::abs(lambda - l);
    if (!q.nu1) return jm / std::pow(d1, q.nu);
    const double d2 = std::abs(lambda - (l + q.second_shift));
    return jm / (std::pow(d1, *q.nu1) * std::pow(d2, q.nu - *q.nu1));
}

// int_start^inf f for f ~ coef x^power beyond X: doubling pieces up to X plus the power-law remainder.
template <class F>
Piece semi_infinite(F f, double start, double X, std::vector<double> points, double coef, double power, double tol) {
    X = std::max(X, 4.0 * start);
    points.push_back(start);
    for (double x = 2.0 * std::max(start, 1e-3); x < X; x *= 2.0) points.push_back(x);
    points.push_back(X);
    points.erase(std::remove_if(points.begin(), points.end(), [&](double x) { return x < start || x > X; }),
                 points.end());
    Piece p = integrate_split(f, points, tol);
    p.value += coef * std::pow(X, power + 1.0) / (-power - 1.0);
    return p;
}

Piece power_tail_integral(const LemmaQuery& q, cplx lambda, double c, double start, std::vector<double> points) {
    auto f = [&](double x) { return smooth_term(q, x, lambda, c); };
    const double shift = q.nu1 ? std::abs(q.second_shift) : 0.0;
    const double scale = std::max({std::abs(lambda) + shift, c, 1.0});
    // relative error of the power law beyond X is below 1e-13
    const double X = std::pow(1e13 * std::max(q.nu, 1.0) * scale / c, q.n / 2.0);
    return semi_infinite(f, start, X, std::move(points), std::pow(c, -q.nu), q.mu - 2.0 * q.nu / q.n, q.quad_tol);
}

double weyl_constant(const LemmaQuery& q) {
    if (!q.data) return q.c;
    const Index K = q.data->count();
    return q.data->eigenvalues[K - 1] / std::pow(double(K), 2.0 / q.n);
}

double lower_weyl_constant(const LemmaQuery& q) {
    if (!q.data) return q.c;
    double c = kInf;
    for (Index k = 0; k < q.data->count(); ++k)
        c = std::min(c, q.data->eigenvalues[k] / std::pow(double(k + 1), 2.0 / q.n));
    return c;
}

double predicted_by_b(Regime r, double b, double nu, double eps) {
    switch (r) {
    case Regime::Upper: return 2.0 * b + 1.0 - nu;
    case Regime::Middle: return eps + b + 1.0 - nu;
    case Regime::Lower: return -nu;
    }
    return 0.0;
}

void finish(BoundReport& rep) {
    rep.fitted_slope = fit_loglog(rep.abscissae, rep.values).slope;
    rep.smallest_C = 0.0;
    for (std::size_t i = 0; i < rep.values.size(); ++i)
        rep.smallest_C = std::max(rep.smallest_C, rep.values[i] / std::pow(rep.abscissae[i], rep.predicted_slope));
    rep.tolerance = kTolerance;
    rep.pass = rep.fitted_slope <= rep.predicted_slope + rep.tolerance;
}

} // namespace

double LemmaQuery::lambda_j(Index j) const {
    if (data) {
        require(j >= 1 && j <= data->count(), "eigenvalue index beyond the available data");
        return data->eigenvalues[j - 1];
    }
    return c * std::pow(double(j), 2.0 / n) + jitter * std::sin(double(j));
}

double LemmaQuery::lambda_j_second(Index j) const { return lambda_j(j) + second_shift; }

std::string to_string(Regime r) {
    switch (r) {
    case Regime::Upper: return "b>=0";
    case Regime::Middle: return "-1<=b<0";
    case Regime::Lower: return "b<-1";
    }
    return "?";
}

Regime classify_b(double b) {
    if (b >= 0.0) return Regime::Upper;
    if (b >= -1.0) return Regime::Middle;
    return Regime::Lower;
}

SeriesValue eval_series_I(const LemmaQuery& query, cplx lambda, Index K_cut) {
    validate(query);
    require(K_cut >= 0, "K_cut must be nonnegative");
    SeriesValue out;
    out.lambda = lambda;
    const double p = query.mu - 2.0 * query.nu / query.n;
    const double slack = query.jitter + std::max(0.0, -query.second_shift);

    Index K = std::max<Index>(K_cut, 1);
    if (query.data) {
        K = std::min<Index>(K_cut > 0 ? K_cut : query.data->count(), query.data->count());
    } else if (query.nu > 0.0) {
        // explicit terms until lambda_j - slack >= 2 |lambda|
        const double need = (2.0 * std::abs(lambda) + slack) / query.c;
        K = std::max<Index>(K, Index(std::ceil(std::pow(need, query.n / 2.0))) + 1);
    }
    if (K_cut == 0 && !query.data) K = std::max<Index>(K, 100);

    CompensatedSum sum;
    for (Index j = 1; j <= K; ++j) {
        const double t = term(query, j, lambda);
        if (!std::isfinite(t)) throw ValidationError("lambda coincides with an eigenvalue");
        sum.add(t);
    }
    out.partial = sum.value();
    out.K_used = K;

    const double c_lo = lower_weyl_constant(query);
    const double lam_K = c_lo * std::pow(double(K), 2.0 / query.n) - slack;
    if (query.nu == 0.0) {
        out.tail_bound = std::pow(double(K), query.mu + 1.0) / (-query.mu - 1.0);
    } else if (lam_K >= 2.0 * std::abs(lambda) && lam_K > 0.0) {
        const double kappa = lam_K / (c_lo * std::pow(double(K), 2.0 / query.n));
        out.tail_bound = std::pow(2.0 / (kappa * c_lo), query.nu) * std::pow(double(K), p + 1.0) / (-p - 1.0);
    } else {
        out.tail_bound = kInf;
    }

    const double c = weyl_constant(query);
    const double a = double(K) + 0.5;
    const double peak = lambda.real() > 0.0 ? std::pow(lambda.real() / c, query.n / 2.0) : 0.0;
    const Piece tail = query.nu == 0.0 ? Piece{std::pow(a, query.mu + 1.0) / (-query.mu - 1.0), 0.0}
                                       : power_tail_integral(query, lambda, c, a, {peak, 0.9 * peak, 1.1 * peak});
    check_quadrature(tail, query.quad_tol, "series tail");
    out.tail_estimate = tail.value;
    return out;
}

double integral_surrogate(const LemmaQuery& query, cplx lambda) {
    validate(query);
    std::vector<double> pts;
    if (lambda.real() > 0.0) {
        const double peak = std::pow(lambda.real() / query.c, query.n / 2.0);
        for (double s : {0.5, 0.9, 1.0, 1.1, 2.0}) pts.push_back(s * peak);
    }
    const Piece p = query.nu == 0.0 ? Piece{1.0 / (-query.mu - 1.0), 0.0}
                                    : power_tail_integral(query, lambda, query.c, 1.0, pts);
    check_quadrature(p, query.quad_tol, "integral surrogate");
    return p.value;
}

SurrogateCheck compare_with_surrogate(const LemmaQuery& query, cplx lambda) {
    validate(query);
    require(!query.data && query.jitter == 0.0, "surrogate comparison needs jitter-free synthetic eigenvalues");
    SurrogateCheck out;
    const SeriesValue sv = eval_series_I(query, lambda, 0);
    out.series = sv.value();
    out.integral = integral_surrogate(query, lambda);
    out.gap = std::abs(out.series - out.integral);
    // sampled variation up to K_used; beyond it the summand is monotone and contributes f(K_used)
    const double c = query.c;
    double prev = smooth_term(query, 1.0, lambda, c);
    CompensatedSum tv;
    const Index steps = 8 * sv.K_used;
    for (Index i = 1; i <= steps; ++i) {
        const double x = 1.0 + double(i) / 8.0;
        const double v = smooth_term(query, x, lambda, c);
        tv.add(std::abs(v - prev));
        prev = v;
    }
    out.variation_bound = tv.value() + std::abs(prev);
    out.within = out.gap <= out.variation_bound;
    return out;
}

BoundReport check_lemma1(const LemmaQuery& query, const std::vector<double>& taus, Index K_cut) {
    validate(query);
    require(taus.size() >= 3, "need at least three tau values");
    for (double t : taus) require(t > 1.0, "tau must exceed 1");
    const auto [tmin, tmax] = std::minmax_element(taus.begin(), taus.end());
    require(*tmax >= 10.0 * *tmin, "tau range must span at least one decade");

    BoundReport rep;
    rep.lemma = "series";
    rep.mu = query.mu;
    rep.nu = query.nu;
    rep.b = query.b();
    const double crit = 2.0 / query.n - 1.0;
    const Regime by_mu = query.mu >= crit ? Regime::Upper : (query.mu >= -1.0 ? Regime::Middle : Regime::Lower);
    rep.regime = classify_b(rep.b);
    if (by_mu != rep.regime) throw NumericalError("regime misclassification for mu=" + std::to_string(query.mu));
    switch (rep.regime) {
    case Regime::Upper: rep.predicted_slope = (query.mu + 1.0) * query.n - 1.0 - query.nu; break;
    case Regime::Middle: rep.predicted_slope = query.eps + (query.mu + 1.0) * query.n / 2.0 - query.nu; break;
    case Regime::Lower: rep.predicted_slope = -query.nu; break;
    }
    rep.band_predicted = query.n - 1.0 + query.n * query.mu - query.nu;

    std::vector<double> band_x;
    for (double tau : taus) {
        const cplx lambda = cplx(tau, 1.0) * cplx(tau, 1.0);
        rep.abscissae.push_back(tau);
        rep.values.push_back(eval_series_I(query, lambda, K_cut).value());

        const double lo = std::max(0.0, tau - 2.0 * query.A_n), hi = tau + 2.0 * query.A_n;
        const double c = weyl_constant(query);
        Index j0 = std::max<Index>(1, Index(std::floor(std::pow(std::max(0.0, lo * lo - query.jitter) / c, query.n / 2.0))) - 1);
        Index j1 = Index(std::ceil(std::pow((hi * hi + query.jitter) / c, query.n / 2.0))) + 1;
        if (query.data) j1 = std::min<Index>(j1, query.data->count());
        CompensatedSum band;
        for (Index j = j0; j <= j1; ++j) {
            const double r = std::sqrt(std::max(0.0, query.lambda_j(j)));
            if (r >= lo && r <= hi) band.add(term(query, j, lambda));
        }
        if (band.value() > 0.0) {
            band_x.push_back(tau);
            rep.band_values.push_back(band.value());
        } else {
            rep.band_values.push_back(0.0);
        }
    }
    std::vector<double> band_y;
    for (double v : rep.band_values)
        if (v > 0.0) band_y.push_back(v);
    rep.band_slope = band_x.size() >= 2 ? fit_loglog(band_x, band_y).slope : std::numeric_limits<double>::quiet_NaN();
    finish(rep);
    return rep;
}

double sharp_integral(double b, double nu, double tau, double tol) {
    require(b - nu < -1.0, "I# diverges: need b - nu < -1");
    require(tau > 1.0, "tau must exceed 1");
    const double t2 = tau * tau;
    auto f = [&](double t) { return std::pow(t, b) / std::pow((t - t2) * (t - t2) + 4.0 * t2, nu / 2.0); };
    std::vector<double> pts{t2, 2.0 * t2};
    for (double s : {-10.0, -1.0, 1.0, 10.0}) pts.push_back(t2 + s * tau);
    const double X = 1e13 * std::max({nu, std::abs(b), 1.0}) * t2;
    const Piece p = semi_infinite(f, 1.0, X, pts, 1.0, b - nu, tol);
    check_quadrature(p, tol, "I#");
    return p.value;
}

double sharp_integral_substituted(double b, double nu, double tau, double tol) {
    require(b - nu < -1.0, "I# diverges: need b - nu < -1");
    require(tau > 1.0, "tau must exceed 1");
    // u = s - (1/tau - tau) keeps s/tau + 1 = u/tau + 1/tau^2 free of cancellation
    const double a = 1.0 / tau - tau;
    auto f = [&](double u) {
        const double s = a + u;
        return std::pow(u / tau + 1.0 / (tau * tau), b) / std::pow(s * s + 4.0, nu / 2.0);
    };
    std::vector<double> pts{-a - 10.0, -a - 1.0, -a, -a + 1.0, -a + 10.0};
    for (double d = 0.25 / tau; d < -a; d *= 2.0) pts.push_back(d);
    const double X = 1e13 * std::max({nu, std::abs(b), 1.0}) * (tau + 4.0);
    const Piece p = semi_infinite(f, 0.0, X, pts, std::pow(tau, -b), b - nu, tol);
    check_quadrature(p, tol, "substituted I#");
    return std::pow(tau, 2.0 * b + 1.0 - nu) * p.value;
}

double sharp_integral_closed_form(double tau) {
    require(tau > 0.0, "tau must be positive");
    return (std::numbers::pi / 2.0 + std::atan((tau * tau - 1.0) / (2.0 * tau))) / (2.0 * tau);
}

Lemma2Report check_lemma2(double b, double nu, const std::vector<double>& taus, double eps, double tol) {
    require(b - nu < -1.0, "I# diverges: need b - nu < -1");
    require(taus.size() >= 3, "need at least three tau values");
    require(eps > 0.0, "eps must be positive");
    Lemma2Report out;
    BoundReport& rep = out.bound;
    rep.lemma = "integral";
    rep.b = b;
    rep.nu = nu;
    rep.mu = b;  // n = 2
    rep.regime = classify_b(b);
    rep.predicted_slope = predicted_by_b(rep.regime, b, nu, eps);
    const bool closed = b == 0.0 && nu == 2.0;
    if (closed) out.max_closed_form_gap = 0.0;
    for (double tau : taus) {
        const double v = sharp_integral(b, nu, tau, tol);
        const double s = sharp_integral_substituted(b, nu, tau, tol);
        rep.abscissae.push_back(tau);
        rep.values.push_back(v);
        out.max_substitution_gap = std::max(out.max_substitution_gap, std::abs(v - s) / std::abs(v));
        if (closed) {
            const double cf = sharp_integral_closed_form(tau);
            out.max_closed_form_gap = std::max(*out.max_closed_form_gap, std::abs(v - cf) / cf);
        }
    }
    finish(rep);
    return out;
}

BoundReport check_lemma3(const LemmaQuery& query, const std::vector<cplx>& lambdas, Index K_cut) {
    validate(query);
    require(lambdas.size() >= 3, "need at least three frequencies");
    const double lambda1 = query.lambda_j(1);
    BoundReport rep;
    rep.lemma = "half-plane";
    rep.mu = query.mu;
    rep.nu = query.nu;
    rep.b = query.b();
    rep.regime = classify_b(rep.b);
    rep.predicted_slope = (query.mu + 1.0) * query.n / 2.0 - 1.0 - query.nu;
    rep.derived_slope = query.mu < -1.0 ? -query.nu : (query.mu + 1.0) * query.n / 2.0 - query.nu;
    for (cplx l : lambdas) {
        require(l.real() < 0.0, "half-plane check needs Re lambda < 0");
        require(std::abs(l) >= 1.0, "half-plane check needs |lambda| >= 1");
        const double dist = l.real() <= lambda1 ? std::abs(l - lambda1) : std::abs(l.imag());
        rep.abscissae.push_back(dist);
        rep.values.push_back(eval_series_I(query, l, K_cut).value());
    }
    finish(rep);
    rep.pass_derived = rep.fitted_slope <= *rep.derived_slope + rep.tolerance;
    return rep;
}

std::vector<SharpnessResult> probe_sharpness(const std::vector<SharpnessCase>& cases, const std::vector<double>& taus,
                                             double eps) {
    require(taus.size() >= 3, "need at least three tau values");
    std::vector<SharpnessResult> out;
    for (const auto& c : cases) {
        SharpnessResult r;
        r.params = c;
        r.taus = taus;
        for (double tau : taus) r.values.push_back(sharp_integral(c.b, c.nu, tau));
        r.fitted_slope = fit_loglog(taus, r.values).slope;
        const auto secants = secant_slopes(taus, r.values);
        r.lower_slope = *std::min_element(secants.begin(), secants.end());
        r.upper_slope = *std::max_element(secants.begin(), secants.end());
        std::tie(r.slope_with_log, r.log_coefficient) = fit_loglog_with_log(taus, r.values);
        r.sharp_exponent = 2.0 * c.b + 1.0 - c.nu;
        r.middle_exponent = c.b + 1.0 - c.nu;
        r.regime_exponent = predicted_by_b(classify_b(c.b), c.b, c.nu, eps);
        r.lower_matches_sharp =
            std::abs(r.lower_slope - r.sharp_exponent) < std::abs(r.lower_slope - r.middle_exponent);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<double> geometric_range(double a, double b, int count) {
    require(a > 0.0 && b > a && count >= 2, "geometric range needs 0 < a < b and count >= 2");
    std::vector<double> out;
    for (int i = 0; i < count; ++i) out.push_back(a * std::pow(b / a, double(i) / (count - 1)));
    return out;
}

} // namespace borglev
