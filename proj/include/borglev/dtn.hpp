#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/SparseLU>

#include "borglev/spectral.hpp"

namespace borglev {

enum class DtnKind { Direct, Spectral, SeriesDerivative, SeriesDifference, LowRankHat };
std::string to_string(DtnKind kind);

/// Discrete Dirichlet-to-Neumann map: boundary values -> outward normal derivatives.
struct DtnMatrix {
    GridSpec grid;
    ComplexMatrix entries;
    cplx lambda;
    std::string potential_id;
    DtnKind kind = DtnKind::Direct;
    int m = 0;
    Index K = 0;
    Index N = 0;
    double tail_bound = 0.0;

    BoundaryField apply(const BoundaryField& f) const { return entries * f; }
};

struct OperatorNorms {
    double l2_to_l2 = 0.0;
    double h12_to_l2 = 0.0;
};

double l2_operator_norm(const ComplexMatrix& op, const GridSpec& grid);
double h12_operator_norm(const ComplexMatrix& op, const GridSpec& grid);
OperatorNorms operator_norms(const ComplexMatrix& op, const GridSpec& grid);

/// sup |<Lf,g> - <Lg,f>| / (||f|| ||g||) over the trapezoid L^2 pairing, divided by ||L||.
double symmetry_residual(const ComplexMatrix& op, const GridSpec& grid);

/// Factorized (-Delta_h + q - lambda) with Dirichlet data on the boundary nodes.
class BvpSolver {
public:
    BvpSolver(const Potential& q, const GridSpec& grid, cplx lambda);

    /// Interior solution with boundary values f.
    ComplexVector solve(const BoundaryField& f) const;
    /// Columns of solutions for the columns of f.
    ComplexMatrix solve_many(const ComplexMatrix& f, int threads = 1) const;
    /// (A(q) - lambda)^{-1} rhs on interior nodes.
    ComplexVector resolvent(const ComplexVector& rhs) const;
    /// One-sided normal derivative of the solution u with boundary values f.
    BoundaryField normal_derivative(const BoundaryField& f, const ComplexVector& u) const;
    BoundaryField dtn_apply(const BoundaryField& f) const { return normal_derivative(f, solve(f)); }

    cplx lambda() const { return lambda_; }
    const GridSpec& grid() const { return grid_; }

private:
    ComplexVector checked_solve(const ComplexVector& rhs) const;

    GridSpec grid_;
    cplx lambda_;
    Eigen::SparseMatrix<cplx> op_;
    Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu_;
};

ComplexVector solve_bvp(const Potential& q, cplx lambda, const BoundaryField& f, const GridSpec& grid);
DtnMatrix dtn_direct(const Potential& q, cplx lambda, const GridSpec& grid, int threads = 1);

/// Bounds used for the neglected k > K part of spectral series.
struct TailModel {
    /// When set, ||t_k|| <= trace_constant * lambda_k^{3/4+eps/2} (fitted law);
    /// otherwise the exact discrete bound ||t_k||^2 <= max_i sum_{b->i} w_b c_b^2 / (h_b^2 hx hy).
    std::optional<double> trace_constant;
    double eps = 0.25;
};

struct SeriesOptions {
    TailModel tail;
    std::optional<double> tail_tolerance;
    bool allow_low_order = false;  // permit m below the convergence order (diagnostics only)
};

/// Square of the exact discrete bound on ||t_k||_{L^2(Gamma)} for normalized eigenvectors.
double discrete_trace_bound_sq(const GridSpec& grid);

/// D + sum_{k<=K} t_k <t_k, .> / (lambda - lambda_k); exact when K = n_int.
DtnMatrix dtn_from_spectrum(const SpectralData& sd, cplx lambda);

/// -m! sum_{N<k<=K} (lambda_k - lambda)^{-(m+1)} t_k <t_k, .>, with the tail bound for k > K.
DtnMatrix dtn_derivative_series(const SpectralData& sd, cplx lambda, int m, Index N_shift,
                                const SeriesOptions& options = {});

/// Upper bound on the operator norm of the neglected k > K terms of the m-th derivative series.
double derivative_tail_bound(const SpectralData& sd, cplx lambda, int m, const TailModel& model);

struct DifferenceSeries {
    DtnMatrix total;
    DtnMatrix i1;  // eigenvalue-difference part
    DtnMatrix i2;  // first-trace-difference part
    DtnMatrix i3;  // second-trace-difference part
};

/// Truncated Lambda(q1) - Lambda(q2) over N < k <= K split into three addends.
DifferenceSeries dtn_difference_series(const SpectralData& sd1, const SpectralData& sd2, cplx lambda, Index N_shift,
                                       const SeriesOptions& options = {});

/// Scalar pairing <(Lambda(q1) - Lambda(q2)) f, g> from the truncated series.
cplx difference_pairing(const SpectralData& sd1, const SpectralData& sd2, cplx lambda, Index N_shift,
                        const BoundaryField& f, const BoundaryField& g);

struct DecayOrder {
    int j = 0;
    std::vector<double> norms;
    double fitted_slope = 0.0;
    double bound_slope = 0.0;   // -j - sigma_eps
    double smallest_C = 0.0;
    bool degenerate = false;    // all norms vanish
    bool pass = false;
};

struct DecayReport {
    std::vector<cplx> lambdas;
    double eps = 0.25;
    double sigma = 0.125;
    std::vector<DecayOrder> orders;
    bool pass = false;
};

/// Divided differences of direct DtN differences along a left half-plane sweep.
DecayReport verify_dtn_decay(const Potential& q1, const Potential& q2, const GridSpec& grid, int m, double eps,
                             const std::vector<cplx>& lambdas, int threads = 1);

struct IntegralFormulaReport {
    cplx lambda;
    double R_cut = 0.0;
    int m = 2;
    double residual = 0.0;           // ||quadrature - series difference||
    double reference_norm = 0.0;     // ||series difference at lambda||
    double tail_estimate = 0.0;      // neglected Taylor terms at the start point
    double analytic_tail = 0.0;      // R_cut^{-sigma} with eps = 1/4
    double quadrature_error = 0.0;   // accumulated error estimate
    bool pass = false;
};

/// Repeated integration of the m-th derivative series difference along Im z = Im lambda
/// from Re z = -R_cut, compared with the difference series at lambda.
IntegralFormulaReport verify_integral_formula(const SpectralData& sd1, const SpectralData& sd2, cplx lambda, int m,
                                              double R_cut);

/// Access to the high part (k > N) of a spectral series through differences and derivatives.
class TildeHandle {
public:
    TildeHandle(std::shared_ptr<const SpectralData> sd, Index N) : sd_(std::move(sd)), N_(N) {}
    DifferenceSeries difference(const TildeHandle& other, cplx lambda) const;
    DtnMatrix derivative(cplx lambda, int m) const;
    Index N() const { return N_; }
    const SpectralData& data() const { return *sd_; }

private:
    std::shared_ptr<const SpectralData> sd_;
    Index N_;
};

struct HatTildeSplit {
    DtnMatrix hat;  // sum_{k<=N} t_k <t_k, .> / (lambda - lambda_k), rank <= N
    TildeHandle tilde;
};

HatTildeSplit split_hat_tilde(std::shared_ptr<const SpectralData> sd, cplx lambda, Index N);
DtnMatrix hat_matrix(const SpectralData& sd, cplx lambda, Index N);

struct SlopeSweep {
    std::vector<double> abscissae;
    std::vector<double> norms;
    double fitted_slope = 0.0;
    double smallest_C = 0.0;  // max norm * abscissa^{-expected}
    double tau0 = 0.0;
};

/// ||hat(q, (tau+i)^2)|| over tau; smallest_C uses the 1/tau^2 law.
SlopeSweep hat_decay_tau(const SpectralData& sd, Index N, const std::vector<double>& taus);
/// ||hat(q, -t)|| over t > 0; smallest_C uses the 1/t law.
SlopeSweep hat_decay_left(const SpectralData& sd, Index N, const std::vector<double>& ts);

} // namespace borglev
