#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "borglev/spectral.hpp"

namespace borglev {

/// Parameters of I(lambda) = sum_j j^mu / |lambda - lambda_j|^nu.
struct LemmaQuery {
    double mu = 0.0;
    double nu = 2.0;
    std::optional<double> nu1;  // mixed denominators |.-lambda_j|^nu1 |.-lambda_j'|^(nu-nu1)
    double second_shift = 1.0;  // lambda_j' = lambda_j + second_shift
    int n = 2;
    double c = 12.566370614359172;  // synthetic lambda_j = c j^{2/n}
    double jitter = 0.0;            // adds jitter * sin(j), bounded by jitter
    double A_n = 1.0;               // Weyl band half-width in sqrt(lambda)
    double eps = 0.05;              // epsilon of the middle regime
    double quad_tol = 1e-10;
    std::shared_ptr<const SpectralData> data;  // real eigenvalues instead of the synthetic law

    double b() const { return (mu + 1.0) * n / 2.0 - 1.0; }
    double lambda_j(Index j) const;        // 1-based
    double lambda_j_second(Index j) const; // 1-based
};

struct SeriesValue {
    cplx lambda;
    double partial = 0.0;        // sum over j <= K_used
    Index K_used = 0;
    double tail_bound = 0.0;     // rigorous bound on sum_{j > K_used}
    double tail_estimate = 0.0;  // integral from K_used + 1/2
    double value() const { return partial + tail_estimate; }
};

SeriesValue eval_series_I(const LemmaQuery& query, cplx lambda, Index K_cut);

/// int_1^inf x^mu / |lambda - c x^{2/n}|^nu dx
double integral_surrogate(const LemmaQuery& query, cplx lambda);

struct SurrogateCheck {
    double series = 0.0;
    double integral = 0.0;
    double gap = 0.0;
    double variation_bound = 0.0;  // total variation of the summand on [1, inf), bounds |series - integral|
    bool within = false;
};

/// Series with synthetic eigenvalues against its integral surrogate.
SurrogateCheck compare_with_surrogate(const LemmaQuery& query, cplx lambda);

enum class Regime { Upper, Middle, Lower };  // b >= 0, -1 <= b < 0, b < -1
std::string to_string(Regime r);
Regime classify_b(double b);

struct BoundReport {
    std::string lemma;
    double mu = 0.0, nu = 0.0, b = 0.0;
    Regime regime = Regime::Upper;
    std::vector<double> abscissae;  // tau, or |lambda| scale for the half-plane check
    std::vector<double> values;
    double fitted_slope = 0.0;
    double predicted_slope = 0.0;
    double smallest_C = 0.0;        // max value / abscissa^predicted
    double tolerance = 0.15;
    bool pass = false;              // fitted <= predicted + tolerance
    // Weyl band replay (series check only)
    std::vector<double> band_values;
    double band_slope = 0.0;
    double band_predicted = 0.0;
    // corrected exponent (half-plane check only)
    std::optional<double> derived_slope;
    std::optional<bool> pass_derived;
};

BoundReport check_lemma1(const LemmaQuery& query, const std::vector<double>& taus, Index K_cut = 0);

/// I#(tau) = int_1^inf t^b / ((t - tau^2)^2 + 4 tau^2)^{nu/2} dt by adaptive quadrature split at tau^2.
double sharp_integral(double b, double nu, double tau, double tol = 1e-10);
/// Same quantity through s = (t - tau^2)/tau.
double sharp_integral_substituted(double b, double nu, double tau, double tol = 1e-10);
/// Antiderivative closed form for b = 0, nu = 2.
double sharp_integral_closed_form(double tau);

struct Lemma2Report {
    BoundReport bound;
    double max_substitution_gap = 0.0;  // relative, over the tau range
    std::optional<double> max_closed_form_gap;
};

Lemma2Report check_lemma2(double b, double nu, const std::vector<double>& taus, double eps = 0.05,
                          double tol = 1e-10);

/// Ray lambda = -t; the abscissa is dist(lambda, [lambda_1, inf)).
BoundReport check_lemma3(const LemmaQuery& query, const std::vector<cplx>& lambdas, Index K_cut = 0);

struct SharpnessCase {
    double b = 0.0;
    double nu = 1.0;
};

struct SharpnessResult {
    SharpnessCase params;
    std::vector<double> taus, values;
    double fitted_slope = 0.0;
    double lower_slope = 0.0;   // smallest local secant slope
    double upper_slope = 0.0;   // largest local secant slope
    double slope_with_log = 0.0;
    double log_coefficient = 0.0;
    double sharp_exponent = 0.0;   // 2b + 1 - nu
    double regime_exponent = 0.0;  // bound of the regime of b
    double middle_exponent = 0.0;  // b + 1 - nu
    bool lower_matches_sharp = false;  // lower slope closer to 2b+1-nu than to b+1-nu
};

std::vector<SharpnessResult> probe_sharpness(const std::vector<SharpnessCase>& cases, const std::vector<double>& taus,
                                             double eps = 0.05);

/// Geometric grid of `count` points from a to b.
std::vector<double> geometric_range(double a, double b, int count);

} // namespace borglev
