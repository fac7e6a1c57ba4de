#pragma once

#include <string>
#include <utility>

#include <Eigen/Sparse>

#include "borglev/grid.hpp"

namespace borglev {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Dirichlet eigenpairs of -Delta_h + q with boundary normal-derivative traces.
struct SpectralData {
    GridSpec grid;
    std::string potential_id;
    double sup_bound = 0.0;
    RealVector eigenvalues;   // nondecreasing, length K
    RealMatrix traces;        // n_bd x K; column k is the outward normal derivative of phi_k
    RealMatrix eigenvectors;  // n_int x K, orthonormal with hx*hy weights; may be empty

    Index count() const { return eigenvalues.size(); }
    bool has_vectors() const { return eigenvectors.cols() == eigenvalues.size() && eigenvectors.size() > 0; }
};

/// 5-point Dirichlet Laplacian plus diag(q) on interior nodes.
SparseMatrix assemble_operator(const Potential& q, const GridSpec& grid);

/// Outward normal derivative traces of interior fields (columns), one-sided difference
/// -c_b * phi(interior(b)) / h_normal with the corner flux scale c_b.
RealMatrix normal_traces(const GridSpec& grid, const RealMatrix& fields);

/// First K eigenpairs of the dense symmetric operator. Traces are gauge-fixed so that the first
/// nonzero entry is positive.
SpectralData solve_eigen(const Potential& q, const GridSpec& grid, Index K, bool keep_vectors = true);

/// Exact eigenvalues of the q=0 discrete operator, ascending, first `count` of them.
RealVector discrete_laplacian_eigenvalues(const GridSpec& grid, Index count);

struct WeylReport {
    double c_star = 0.0;          // min lambda_k / k^{2/n}
    double c_upper = 0.0;         // max lambda_k / k^{2/n}
    double c_n = 0.0;             // N(r) ~ c_n r^2
    double c_boundary = 0.0;      // coefficient of the r term in the counting fit
    double A_n = 0.0;             // max |sqrt(lambda_k) - c_n^{-1/2} k^{1/2}|
    double trace_constant = 0.0;  // smallest C with ||t_k|| <= C lambda_k^{3/4+eps/2}
    double eps = 0.0;
    int m = 2;
    Index fit_begin = 1;          // 1-based inclusive window
    Index fit_end = 1;
};

WeylReport weyl_validate(const SpectralData& sd, int m, double eps);

/// Gauge alignment of sd2 against sd1: Procrustes rotation of trace blocks inside
/// eigenvalue clusters (relative gap below cluster_tol), sign flips elsewhere.
std::pair<SpectralData, SpectralData> align_traces(const SpectralData& sd1, const SpectralData& sd2,
                                                   double cluster_tol = 1e-6);

/// Weighted distance sqrt(sum_k ||t1_k - t2_k||^2) over all traces.
double trace_distance(const SpectralData& sd1, const SpectralData& sd2);

/// Index ranges [begin, end) of eigenvalue clusters.
std::vector<std::pair<Index, Index>> eigen_clusters(const RealVector& lambda, double cluster_tol);

} // namespace borglev
