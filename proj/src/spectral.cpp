#include "borglev/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "borglev/fitting.hpp"

namespace borglev {

SparseMatrix assemble_operator(const Potential& q, const GridSpec& grid) {
    require(q.values.size() == grid.interior_count(), "potential size does not match grid");
    const int nx = grid.nx(), ny = grid.ny();
    const double ax = 1.0 / (grid.hx() * grid.hx()), ay = 1.0 / (grid.hy() * grid.hy());
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(std::size_t(5 * grid.interior_count()));
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const Index k = grid.interior_index(i, j);
            t.emplace_back(k, k, 2.0 * ax + 2.0 * ay + q.values[k]);
            if (i > 0) t.emplace_back(k, grid.interior_index(i - 1, j), -ax);
            if (i + 1 < nx) t.emplace_back(k, grid.interior_index(i + 1, j), -ax);
            if (j > 0) t.emplace_back(k, grid.interior_index(i, j - 1), -ay);
            if (j + 1 < ny) t.emplace_back(k, grid.interior_index(i, j + 1), -ay);
        }
    SparseMatrix a(grid.interior_count(), grid.interior_count());
    a.setFromTriplets(t.begin(), t.end());
    return a;
}

RealMatrix normal_traces(const GridSpec& grid, const RealMatrix& fields) {
    require(fields.rows() == grid.interior_count(), "field size does not match grid");
    RealMatrix t(grid.boundary_count(), fields.cols());
    for (Index b = 0; b < grid.boundary_count(); ++b) {
        const BoundaryNode& node = grid.boundary_node(b);
        t.row(b) = (-node.flux_scale / node.normal_spacing) * fields.row(node.interior);
    }
    return t;
}

namespace {

void fix_gauge(RealMatrix& traces, RealMatrix& vectors) {
    for (Index k = 0; k < traces.cols(); ++k) {
        const double scale = traces.col(k).cwiseAbs().maxCoeff();
        for (Index b = 0; b < traces.rows(); ++b) {
            if (std::abs(traces(b, k)) > 1e-12 * scale) {
                if (traces(b, k) < 0.0) {
                    traces.col(k) *= -1.0;
                    if (vectors.cols() > k) vectors.col(k) *= -1.0;
                }
                break;
            }
        }
    }
}

} // namespace

SpectralData solve_eigen(const Potential& q, const GridSpec& grid, Index K, bool keep_vectors) {
    const Index n = grid.interior_count();
    require(K >= 1 && K <= n, "K must satisfy 1 <= K <= n_int");
    const SparseMatrix a = assemble_operator(q, grid);
    RealMatrix dense = RealMatrix(a);

    Eigen::SelfAdjointEigenSolver<RealMatrix> es(dense);
    if (es.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
    const RealMatrix z = es.eigenvectors().leftCols(K);
    dense.resize(0, 0);
    RealVector lambda = es.eigenvalues().head(K);
    for (Index k = 0; k < K; ++k) {
        const double res = (a * z.col(k) - lambda[k] * z.col(k)).norm();
        if (!(res <= 1e-8 * z.col(k).norm()))
            throw NumericalError("eigenpair " + std::to_string(k + 1) + " residual " + std::to_string(res) +
                                 " exceeds 1e-8");
        if (k > 0 && lambda[k] < lambda[k - 1]) throw NumericalError("eigenvalues not ordered");
    }

    RealMatrix phi = z / std::sqrt(grid.cell_area());
    RealMatrix traces = normal_traces(grid, phi);
    fix_gauge(traces, phi);

    SpectralData sd{grid, q.id, q.sup_bound, std::move(lambda), std::move(traces), RealMatrix()};
    if (keep_vectors) sd.eigenvectors = std::move(phi);
    return sd;
}

RealVector discrete_laplacian_eigenvalues(const GridSpec& grid, Index count) {
    require(count >= 1 && count <= grid.interior_count(), "count must satisfy 1 <= count <= n_int");
    const double pi = std::numbers::pi;
    std::vector<double> ex(std::size_t(grid.nx())), ey(std::size_t(grid.ny()));
    for (int j = 1; j <= grid.nx(); ++j) {
        const double s = std::sin(j * pi / (2.0 * (grid.nx() + 1)));
        ex[std::size_t(j - 1)] = 4.0 / (grid.hx() * grid.hx()) * s * s;
    }
    for (int k = 1; k <= grid.ny(); ++k) {
        const double s = std::sin(k * pi / (2.0 * (grid.ny() + 1)));
        ey[std::size_t(k - 1)] = 4.0 / (grid.hy() * grid.hy()) * s * s;
    }
    std::vector<double> all;
    all.reserve(std::size_t(grid.interior_count()));
    for (double a : ex)
        for (double b : ey) all.push_back(a + b);
    std::partial_sort(all.begin(), all.begin() + count, all.end());
    return Eigen::Map<RealVector>(all.data(), count);
}

WeylReport weyl_validate(const SpectralData& sd, int m, double eps) {
    const Index K = sd.count();
    require(K >= 50, "Weyl fit needs K >= 50");
    require(eps > 0.0 && eps < 0.5, "eps must lie in (0, 1/2)");
    WeylReport r;
    r.m = m;
    r.eps = eps;
    r.fit_begin = 1;
    r.fit_end = Index(std::floor(0.8 * double(K)));
    const RealVector& lam = sd.eigenvalues;

    r.c_star = std::numeric_limits<double>::infinity();
    r.c_upper = -std::numeric_limits<double>::infinity();
    RealMatrix design(r.fit_end, 2);
    RealVector counts(r.fit_end);
    for (Index k = 1; k <= r.fit_end; ++k) {
        const double l = lam[k - 1];
        if (!(l > 0.0)) throw NumericalError("Weyl fit needs positive eigenvalues in the window");
        r.c_star = std::min(r.c_star, l / double(k));
        r.c_upper = std::max(r.c_upper, l / double(k));
        // counting function at a jump: midpoint of the left and right limits
        Index last = k, first = k;
        while (last < K && lam[last] <= l) ++last;
        while (first > 1 && lam[first - 2] >= l) --first;
        const double count = 0.5 * double(first - 1 + last);
        const double rr = std::sqrt(l);
        design(k - 1, 0) = rr * rr;
        design(k - 1, 1) = rr;
        counts[k - 1] = count;
    }
    const RealVector c = least_squares(design, counts);
    r.c_n = c[0];
    r.c_boundary = c[1];
    if (!(r.c_n > 0.0)) throw NumericalError("nonpositive Weyl coefficient fit");
    const double ct = 1.0 / std::sqrt(r.c_n);
    const RealVector& w = sd.grid.boundary_weights();
    for (Index k = 1; k <= r.fit_end; ++k) {
        const double l = lam[k - 1];
        r.A_n = std::max(r.A_n, std::abs(std::sqrt(l) - ct * std::sqrt(double(k))));
        const double tn = std::sqrt((w.array() * sd.traces.col(k - 1).array().square()).sum());
        r.trace_constant = std::max(r.trace_constant, tn / std::pow(l, 0.75 + 0.5 * eps));
    }
    return r;
}

std::vector<std::pair<Index, Index>> eigen_clusters(const RealVector& lambda, double cluster_tol) {
    std::vector<std::pair<Index, Index>> out;
    Index begin = 0;
    for (Index k = 1; k <= lambda.size(); ++k) {
        const bool split = k == lambda.size() ||
                           std::abs(lambda[k] - lambda[k - 1]) >= cluster_tol * std::max(1.0, std::abs(lambda[k]));
        if (split) {
            out.emplace_back(begin, k);
            begin = k;
        }
    }
    return out;
}

std::pair<SpectralData, SpectralData> align_traces(const SpectralData& sd1, const SpectralData& sd2,
                                                   double cluster_tol) {
    require(sd1.grid == sd2.grid, "spectral data live on different grids");
    require(sd1.count() == sd2.count(), "spectral data have different K");
    require(cluster_tol >= 0.0, "cluster tolerance must be nonnegative");
    SpectralData out = sd2;
    const RealVector& w = sd1.grid.boundary_weights();
    const auto c1 = eigen_clusters(sd1.eigenvalues, cluster_tol);
    const auto c2 = eigen_clusters(sd2.eigenvalues, cluster_tol);
    // merge both partitions into the coarsest common one
    std::vector<char> cut(std::size_t(sd1.count() + 1), 0);
    std::vector<char> cut1(cut.size(), 0), cut2(cut.size(), 0);
    for (auto [b, e] : c1) cut1[std::size_t(e)] = 1;
    for (auto [b, e] : c2) cut2[std::size_t(e)] = 1;
    const bool vectors = sd2.has_vectors();
    Index begin = 0;
    for (Index k = 1; k <= sd1.count(); ++k) {
        if (!(cut1[std::size_t(k)] && cut2[std::size_t(k)])) continue;
        const Index size = k - begin;
        const RealMatrix t1 = sd1.traces.middleCols(begin, size);
        const RealMatrix t2 = sd2.traces.middleCols(begin, size);
        const RealMatrix mm = t2.transpose() * w.asDiagonal() * t1;
        RealMatrix o;
        if (size == 1) {
            o = RealMatrix::Identity(1, 1);
            if (mm(0, 0) < 0.0) o(0, 0) = -1.0;
        } else {
            Eigen::JacobiSVD<RealMatrix> svd(mm, Eigen::ComputeFullU | Eigen::ComputeFullV);
            o = svd.matrixU() * svd.matrixV().transpose();
        }
        out.traces.middleCols(begin, size) = t2 * o;
        if (vectors) out.eigenvectors.middleCols(begin, size) = sd2.eigenvectors.middleCols(begin, size) * o;
        begin = k;
    }
    return {sd1, std::move(out)};
}

double trace_distance(const SpectralData& sd1, const SpectralData& sd2) {
    require(sd1.grid == sd2.grid && sd1.count() == sd2.count(), "spectral data are not comparable");
    const RealVector& w = sd1.grid.boundary_weights();
    const RealMatrix d = sd1.traces - sd2.traces;
    return std::sqrt((d.array().square().colwise() * w.array()).sum());
}

} // namespace borglev
