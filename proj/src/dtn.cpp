#include "borglev/dtn.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include <Eigen/SVD>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "borglev/fitting.hpp"
#include "borglev/parallel.hpp"

namespace borglev {

std::string to_string(DtnKind kind) {
    switch (kind) {
        case DtnKind::Direct: return "direct";
        case DtnKind::Spectral: return "spectral";
        case DtnKind::SeriesDerivative: return "series-derivative";
        case DtnKind::SeriesDifference: return "series-difference";
        case DtnKind::LowRankHat: return "low-rank-hat";
    }
    return "unknown";
}

namespace {

std::string str(cplx z) {
    std::ostringstream os;
    os.precision(10);
    os << "(" << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i)";
    return os.str();
}

double largest_singular_value(const ComplexMatrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::BDCSVD<ComplexMatrix> svd(m);
    return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

/// Entrywise Neumaier accumulation of real rank-one updates with complex coefficients.
class MatrixAccumulator {
public:
    explicit MatrixAccumulator(Index n)
        : sr_(RealMatrix::Zero(n, n)), cr_(RealMatrix::Zero(n, n)), si_(RealMatrix::Zero(n, n)),
          ci_(RealMatrix::Zero(n, n)) {}

    /// Adds coef * u * v^T.
    void add(cplx coef, const RealVector& u, const RealVector& v) {
        const Index n = sr_.rows();
        for (Index c = 0; c < n; ++c) {
            const double vr = coef.real() * v[c], vi = coef.imag() * v[c];
            for (Index r = 0; r < n; ++r) {
                accumulate(sr_(r, c), cr_(r, c), vr * u[r]);
                accumulate(si_(r, c), ci_(r, c), vi * u[r]);
            }
        }
    }

    ComplexMatrix value() const {
        ComplexMatrix out(sr_.rows(), sr_.cols());
        out.real() = sr_ + cr_;
        out.imag() = si_ + ci_;
        return out;
    }

private:
    static void accumulate(double& s, double& c, double x) {
        const double t = s + x;
        c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
        s = t;
    }
    RealMatrix sr_, cr_, si_, ci_;
};

double factorial(int m) {
    double f = 1.0;
    for (int i = 2; i <= m; ++i) f *= i;
    return f;
}

cplx ipow(cplx z, int p) {
    cplx r = 1.0;
    for (int i = 0; i < p; ++i) r *= z;
    return r;
}

double distance_to_interval(cplx z, double lo, double hi) {
    const double x = std::clamp(z.real(), lo, hi);
    return std::abs(z - cplx(x, 0.0));
}

/// Upper bounds of the operator norms of the individual k > K terms of the m-th derivative series.
std::vector<double> tail_terms(const SpectralData& sd, cplx lambda, int m, const TailModel& model) {
    const Index n = sd.grid.interior_count();
    std::vector<double> terms;
    if (sd.count() >= n) return terms;
    const RealVector l0 = discrete_laplacian_eigenvalues(sd.grid, n);
    const double bh = discrete_trace_bound_sq(sd.grid);
    const double mf = factorial(m);
    const double M = sd.sup_bound;
    for (Index k = sd.count(); k < n; ++k) {
        const double lo = l0[k] - M, hi = l0[k] + M;
        const double d = distance_to_interval(lambda, lo, hi);
        double tsq = bh;
        if (model.trace_constant) {
            const double c = *model.trace_constant;
            tsq = std::min(bh, c * c * std::pow(std::max(hi, 1.0), 1.5 + model.eps));
        }
        terms.push_back(d > 0.0 ? mf * tsq / std::pow(d, m + 1) : std::numeric_limits<double>::infinity());
    }
    return terms;
}

double sum_from(const std::vector<double>& v, std::size_t start) {
    CompensatedSum s;
    for (std::size_t i = start; i < v.size(); ++i) s.add(v[i]);
    return s.value();
}

void check_off_spectrum(const RealVector& lam, cplx lambda) {
    for (Index k = 0; k < lam.size(); ++k)
        if (lambda == cplx(lam[k], 0.0))
            throw NumericalError("frequency " + str(lambda) + " coincides with eigenvalue " + std::to_string(k + 1));
}

DtnMatrix blank(const SpectralData& sd, cplx lambda, DtnKind kind) {
    return DtnMatrix{sd.grid, ComplexMatrix::Zero(sd.grid.boundary_count(), sd.grid.boundary_count()), lambda,
                     sd.potential_id, kind};
}

DtnMatrix derivative_series_impl(const SpectralData& sd, cplx lambda, int m, Index N_shift) {
    check_off_spectrum(sd.eigenvalues, lambda);
    const RealVector& w = sd.grid.boundary_weights();
    const double mf = factorial(m);
    MatrixAccumulator acc(sd.grid.boundary_count());
    for (Index k = N_shift; k < sd.count(); ++k) {
        const cplx inv = 1.0 / (sd.eigenvalues[k] - lambda);
        const RealVector t = sd.traces.col(k);
        acc.add(-mf * ipow(inv, m + 1), t, w.cwiseProduct(t));
    }
    DtnMatrix out = blank(sd, lambda, DtnKind::SeriesDerivative);
    out.entries = acc.value();
    out.m = m;
    out.K = sd.count();
    out.N = N_shift;
    return out;
}

} // namespace

double l2_operator_norm(const ComplexMatrix& op, const GridSpec& grid) {
    const RealVector sw = grid.boundary_weights().cwiseSqrt();
    return largest_singular_value(sw.asDiagonal() * op * sw.cwiseInverse().asDiagonal());
}

double h12_operator_norm(const ComplexMatrix& op, const GridSpec& grid) {
    const BoundarySobolev sob(grid);
    return largest_singular_value(sob.sqrt_weights().asDiagonal() * op * sob.weighted_synthesis(0.5));
}

OperatorNorms operator_norms(const ComplexMatrix& op, const GridSpec& grid) {
    return {l2_operator_norm(op, grid), h12_operator_norm(op, grid)};
}

double symmetry_residual(const ComplexMatrix& op, const GridSpec& grid) {
    const RealVector& w = grid.boundary_weights();
    const ComplexMatrix s = w.asDiagonal() * op - op.transpose() * w.asDiagonal();
    const RealVector isw = w.cwiseSqrt().cwiseInverse();
    const double norm = l2_operator_norm(op, grid);
    if (norm == 0.0) return 0.0;
    return largest_singular_value(isw.asDiagonal() * s * isw.asDiagonal()) / norm;
}

BvpSolver::BvpSolver(const Potential& q, const GridSpec& grid, cplx lambda) : grid_(grid), lambda_(lambda) {
    require(std::isfinite(lambda.real()) && std::isfinite(lambda.imag()), "frequency must be finite");
    const SparseMatrix a = assemble_operator(q, grid);
    op_ = a.cast<cplx>();
    for (Index k = 0; k < op_.rows(); ++k) op_.coeffRef(k, k) -= lambda;
    op_.makeCompressed();
    lu_.analyzePattern(op_);
    lu_.factorize(op_);
    if (lu_.info() != Eigen::Success)
        throw NumericalError("boundary value operator is singular at lambda=" + str(lambda) +
                             " (frequency on the discrete spectrum)");

    const double lowest = discrete_laplacian_eigenvalues(grid, 1)[0] - q.values.cwiseAbs().maxCoeff();
    if (std::abs(lambda.imag()) >= 1e-6 || lambda.real() < lowest - 1e-6) return;

    // inverse iteration for the eigenvalue nearest to lambda
    ComplexVector x(op_.rows());
    for (Index i = 0; i < x.size(); ++i) x[i] = 1.0 + 0.1 * std::sin(1.0 + double(i));
    x.normalize();
    cplx nearest = lambda;
    for (int it = 0; it < 200; ++it) {
        const ComplexVector y = lu_.solve(x);
        const cplx est = lambda + x.squaredNorm() / x.dot(y);
        const bool done = it > 0 && std::abs(est - nearest) <= 1e-13 * std::max(1.0, std::abs(est));
        nearest = est;
        x = y.normalized();
        if (done) break;
    }
    if (std::abs(nearest - lambda) < 1e-6)
        throw NumericalError("frequency lambda=" + str(lambda) + " is within 1e-6 of the discrete eigenvalue " +
                             str(nearest));
}

ComplexVector BvpSolver::checked_solve(const ComplexVector& rhs) const {
    ComplexVector u = lu_.solve(rhs);
    const double scale = rhs.norm();
    ComplexVector r = rhs - op_ * u;
    if (r.norm() > 1e-10 * scale) {
        u += lu_.solve(r);
        r = rhs - op_ * u;
        if (r.norm() > 1e-10 * scale)
            throw NumericalError("linear solve residual " + std::to_string(r.norm() / scale) + " at lambda=" +
                                 str(lambda_));
    }
    return u;
}

ComplexVector BvpSolver::solve(const BoundaryField& f) const {
    require(f.size() == grid_.boundary_count(), "boundary field length does not match grid");
    ComplexVector g = ComplexVector::Zero(grid_.interior_count());
    for (Index b = 0; b < f.size(); ++b) {
        const BoundaryNode& node = grid_.boundary_node(b);
        g[node.interior] += f[b] / (node.normal_spacing * node.normal_spacing);
    }
    if (g.norm() == 0.0) return g;
    return checked_solve(g);
}

ComplexMatrix BvpSolver::solve_many(const ComplexMatrix& f, int threads) const {
    require(f.rows() == grid_.boundary_count(), "boundary field length does not match grid");
    ComplexMatrix u(grid_.interior_count(), f.cols());
    parallel_for(std::size_t(f.cols()), threads, [&](std::size_t c) { u.col(Index(c)) = solve(f.col(Index(c))); });
    return u;
}

ComplexVector BvpSolver::resolvent(const ComplexVector& rhs) const {
    require(rhs.size() == grid_.interior_count(), "interior field length does not match grid");
    if (rhs.norm() == 0.0) return rhs;
    return checked_solve(rhs);
}

BoundaryField BvpSolver::normal_derivative(const BoundaryField& f, const ComplexVector& u) const {
    BoundaryField out(f.size());
    for (Index b = 0; b < f.size(); ++b) {
        const BoundaryNode& node = grid_.boundary_node(b);
        out[b] = node.flux_scale * (f[b] - u[node.interior]) / node.normal_spacing;
    }
    return out;
}

ComplexVector solve_bvp(const Potential& q, cplx lambda, const BoundaryField& f, const GridSpec& grid) {
    return BvpSolver(q, grid, lambda).solve(f);
}

DtnMatrix dtn_direct(const Potential& q, cplx lambda, const GridSpec& grid, int threads) {
    const BvpSolver solver(q, grid, lambda);
    const Index nb = grid.boundary_count();
    const ComplexMatrix u = solver.solve_many(ComplexMatrix::Identity(nb, nb), threads);
    ComplexMatrix entries(nb, nb);
    for (Index b = 0; b < nb; ++b) {
        const BoundaryNode& node = grid.boundary_node(b);
        const double s = node.flux_scale / node.normal_spacing;
        entries.row(b) = -s * u.row(node.interior);
        entries(b, b) += s;
    }
    return DtnMatrix{grid, std::move(entries), lambda, q.id, DtnKind::Direct};
}

double discrete_trace_bound_sq(const GridSpec& grid) {
    RealVector acc = RealVector::Zero(grid.interior_count());
    for (const BoundaryNode& node : grid.boundary()) {
        const double c = node.flux_scale / node.normal_spacing;
        acc[node.interior] += node.weight * c * c / grid.cell_area();
    }
    return acc.maxCoeff();
}

double derivative_tail_bound(const SpectralData& sd, cplx lambda, int m, const TailModel& model) {
    return sum_from(tail_terms(sd, lambda, m, model), 0);
}

DtnMatrix dtn_from_spectrum(const SpectralData& sd, cplx lambda) {
    check_off_spectrum(sd.eigenvalues, lambda);
    const RealVector& w = sd.grid.boundary_weights();
    ComplexVector coef(sd.count());
    for (Index k = 0; k < sd.count(); ++k) coef[k] = 1.0 / (lambda - sd.eigenvalues[k]);
    DtnMatrix out = blank(sd, lambda, DtnKind::Spectral);
    const ComplexMatrix t = sd.traces.cast<cplx>();
    out.entries = t * coef.asDiagonal() * t.transpose() * w.asDiagonal();
    for (Index b = 0; b < sd.grid.boundary_count(); ++b) {
        const BoundaryNode& node = sd.grid.boundary_node(b);
        out.entries(b, b) += node.flux_scale / node.normal_spacing;
    }
    out.K = sd.count();
    out.tail_bound = derivative_tail_bound(sd, lambda, 0, TailModel{});
    return out;
}

DtnMatrix dtn_derivative_series(const SpectralData& sd, cplx lambda, int m, Index N_shift,
                                const SeriesOptions& options) {
    require(m >= (options.allow_low_order ? 0 : 2), "derivative order must satisfy m >= 2 for n = 2");
    require(N_shift >= 0 && N_shift <= sd.count(), "shift must satisfy 0 <= N <= K");
    const std::vector<double> terms = tail_terms(sd, lambda, m, options.tail);
    const double tail = sum_from(terms, 0);
    if (options.tail_tolerance && !(tail <= *options.tail_tolerance)) {
        std::size_t need = 0;
        while (need < terms.size() && !(sum_from(terms, need) <= *options.tail_tolerance)) ++need;
        std::ostringstream os;
        os << "truncation tail bound " << tail << " exceeds tolerance " << *options.tail_tolerance;
        if (need < terms.size())
            os << "; K >= " << sd.count() + Index(need) << " required";
        else
            os << "; requires all " << sd.grid.interior_count() << " eigenpairs";
        throw NumericalError(os.str());
    }
    DtnMatrix out = derivative_series_impl(sd, lambda, m, N_shift);
    out.tail_bound = tail;
    return out;
}

DifferenceSeries dtn_difference_series(const SpectralData& sd1, const SpectralData& sd2, cplx lambda, Index N_shift,
                                       const SeriesOptions& options) {
    require(sd1.grid == sd2.grid, "spectral data live on different grids");
    require(sd1.count() == sd2.count(), "spectral data have different K");
    require(N_shift >= 0 && N_shift <= sd1.count(), "shift must satisfy 0 <= N <= K");
    check_off_spectrum(sd1.eigenvalues, lambda);
    check_off_spectrum(sd2.eigenvalues, lambda);
    const RealVector& w = sd1.grid.boundary_weights();
    const Index nb = sd1.grid.boundary_count();
    MatrixAccumulator a1(nb), a2(nb), a3(nb);
    for (Index k = N_shift; k < sd1.count(); ++k) {
        const double l1 = sd1.eigenvalues[k], l2 = sd2.eigenvalues[k];
        const cplx ia = 1.0 / (lambda - l1), ib = 1.0 / (lambda - l2);
        const RealVector t1 = sd1.traces.col(k), t2 = sd2.traces.col(k);
        const RealVector d = t1 - t2;
        const RealVector wt1 = w.cwiseProduct(t1);
        if (l1 != l2) a1.add((l1 - l2) * ia * ib, t1, wt1);
        if (d.any()) {
            a2.add(ib, d, wt1);
            a3.add(ib, t2, w.cwiseProduct(d));
        }
    }
    const double tail = derivative_tail_bound(sd1, lambda, 0, options.tail) +
                        derivative_tail_bound(sd2, lambda, 0, options.tail);
    if (options.tail_tolerance && !(tail <= *options.tail_tolerance))
        throw NumericalError("difference series tail bound " + std::to_string(tail) + " exceeds tolerance");
    auto make = [&](ComplexMatrix e) {
        DtnMatrix d = blank(sd1, lambda, DtnKind::SeriesDifference);
        d.potential_id = sd1.potential_id + " - " + sd2.potential_id;
        d.entries = std::move(e);
        d.K = sd1.count();
        d.N = N_shift;
        d.tail_bound = tail;
        return d;
    };
    const ComplexMatrix e1 = a1.value(), e2 = a2.value(), e3 = a3.value();
    DifferenceSeries out{make(e1 + e2 + e3), make(e1), make(e2), make(e3)};
    return out;
}

cplx difference_pairing(const SpectralData& sd1, const SpectralData& sd2, cplx lambda, Index N_shift,
                        const BoundaryField& f, const BoundaryField& g) {
    require(sd1.grid == sd2.grid && sd1.count() == sd2.count(), "spectral data are not comparable");
    require(N_shift >= 0 && N_shift <= sd1.count(), "shift must satisfy 0 <= N <= K");
    const RealVector& w = sd1.grid.boundary_weights();
    const ComplexVector wf = w.cast<cplx>().cwiseProduct(f), wg = w.cast<cplx>().cwiseProduct(g);
    const ComplexVector p1f = sd1.traces.transpose() * wf, p1g = sd1.traces.transpose() * wg;
    const ComplexVector p2f = sd2.traces.transpose() * wf, p2g = sd2.traces.transpose() * wg;
    cplx sum = 0.0;
    for (Index k = N_shift; k < sd1.count(); ++k)
        sum += p1f[k] * p1g[k] / (lambda - sd1.eigenvalues[k]) - p2f[k] * p2g[k] / (lambda - sd2.eigenvalues[k]);
    return sum;
}

DecayReport verify_dtn_decay(const Potential& q1, const Potential& q2, const GridSpec& grid, int m, double eps,
                             const std::vector<cplx>& lambdas, int threads) {
    require(eps > 0.0 && eps < 0.5, "eps must lie in (0, 1/2)");
    require(m >= 0 && m <= 4, "decay check supports derivative orders 0..4");
    require(lambdas.size() >= 2, "decay check needs at least two frequencies");
    const double bound = 2.0 * std::max(q1.sup_bound, q2.sup_bound);
    for (cplx l : lambdas)
        require(l.real() <= -bound && l.real() < 0.0, "frequency " + str(l) + " violates Re lambda <= -2 max sup|q|");

    DecayReport rep;
    rep.lambdas = lambdas;
    rep.eps = eps;
    rep.sigma = (1.0 - 2.0 * eps) / 4.0;
    rep.orders.resize(std::size_t(m + 1));
    for (int j = 0; j <= m; ++j) {
        rep.orders[std::size_t(j)].j = j;
        rep.orders[std::size_t(j)].bound_slope = -j - rep.sigma;
    }
    // 5-point stencils in lambda
    static const double stencil[5][5] = {{0, 0, 1, 0, 0},
                                         {1.0 / 12, -8.0 / 12, 0, 8.0 / 12, -1.0 / 12},
                                         {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12},
                                         {-0.5, 1.0, 0, -1.0, 0.5},
                                         {1, -4, 6, -4, 1}};
    std::vector<double> abscissae;
    for (cplx l : lambdas) {
        const double h = 0.01 * std::abs(l.real());
        std::vector<ComplexMatrix> diff(5);
        for (int s = 0; s < 5; ++s) {
            if (m == 0 && s != 2) continue;
            const cplx z = l + double(s - 2) * h;
            diff[std::size_t(s)] = dtn_direct(q1, z, grid, threads).entries - dtn_direct(q2, z, grid, threads).entries;
        }
        for (int j = 0; j <= m; ++j) {
            ComplexMatrix d = ComplexMatrix::Zero(grid.boundary_count(), grid.boundary_count());
            for (int s = 0; s < 5; ++s)
                if (stencil[j][s] != 0.0) d += stencil[j][s] * diff[std::size_t(s)];
            d /= std::pow(h, j);
            rep.orders[std::size_t(j)].norms.push_back(h12_operator_norm(d, grid));
        }
        abscissae.push_back(std::abs(l.real()));
    }
    rep.pass = true;
    for (auto& o : rep.orders) {
        const bool zero = std::all_of(o.norms.begin(), o.norms.end(), [](double v) { return v == 0.0; });
        if (zero) {
            o.degenerate = true;
            o.pass = true;
            continue;
        }
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < o.norms.size(); ++i) {
            o.smallest_C = std::max(o.smallest_C, o.norms[i] * std::pow(abscissae[i], -o.bound_slope));
            if (o.norms[i] > 0.0) {
                xs.push_back(abscissae[i]);
                ys.push_back(o.norms[i]);
            }
        }
        if (xs.size() >= 2) {
            o.fitted_slope = fit_loglog(xs, ys).slope;
            o.pass = o.fitted_slope <= o.bound_slope + 0.1;
        }
        rep.pass = rep.pass && o.pass;
    }
    return rep;
}

IntegralFormulaReport verify_integral_formula(const SpectralData& sd1, const SpectralData& sd2, cplx lambda, int m,
                                              double R_cut) {
    require(m == 2, "integral formula check supports m = 2");
    require(lambda.imag() > 0.0, "integral formula check needs Im lambda > 0");
    require(R_cut > 0.0 && -R_cut < lambda.real(), "R_cut must place the start point left of lambda");
    require(sd1.grid == sd2.grid && sd1.count() == sd2.count(), "spectral data are not comparable");
    using boost::math::quadrature::gauss_kronrod;

    IntegralFormulaReport rep;
    rep.lambda = lambda;
    rep.R_cut = R_cut;
    rep.m = m;
    const double y = lambda.imag();
    const double x0 = -R_cut, x1 = lambda.real();
    const double mf = factorial(m), mf1 = factorial(m - 1);
    double qerr = 0.0;

    auto coefficients = [&](const SpectralData& sd) {
        ComplexVector c(sd.count());
        for (Index k = 0; k < sd.count(); ++k) {
            const double mu = sd.eigenvalues[k];
            auto f = [&](double x) {
                const cplx z(x, y);
                return ipow(lambda - z, m - 1) / mf1 * (-mf) / ipow(mu - z, m + 1);
            };
            std::vector<double> cuts{x0};
            if (mu > x0 && mu < x1) cuts.push_back(mu);
            cuts.push_back(x1);
            cplx val = 0.0;
            for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
                double er = 0.0, ei = 0.0;
                const double re = gauss_kronrod<double, 31>::integrate([&](double x) { return f(x).real(); },
                                                                       cuts[p], cuts[p + 1], 20, 1e-12, &er);
                const double im = gauss_kronrod<double, 31>::integrate([&](double x) { return f(x).imag(); },
                                                                       cuts[p], cuts[p + 1], 20, 1e-12, &ei);
                val += cplx(re, im);
                const double err = std::hypot(er, ei);
                if (!(err <= 1e-8 * std::abs(cplx(re, im)) + 1e-14))
                    throw NumericalError("quadrature did not converge for mode " + std::to_string(k + 1));
                const double tn = (sd.grid.boundary_weights().array() * sd.traces.col(k).array().square()).sum();
                qerr += err * tn;
            }
            c[k] = val;
        }
        return c;
    };
    const RealVector& w = sd1.grid.boundary_weights();
    const ComplexMatrix t1 = sd1.traces.cast<cplx>(), t2 = sd2.traces.cast<cplx>();
    const ComplexVector c1 = coefficients(sd1), c2 = coefficients(sd2);
    const ComplexMatrix integral = t1 * c1.asDiagonal() * t1.transpose() * w.asDiagonal() -
                                   t2 * c2.asDiagonal() * t2.transpose() * w.asDiagonal();
    const ComplexMatrix series = dtn_difference_series(sd1, sd2, lambda, 0).total.entries;
    rep.residual = h12_operator_norm(integral - series, sd1.grid);
    rep.reference_norm = h12_operator_norm(series, sd1.grid);
    rep.quadrature_error = qerr;

    const cplx z0(x0, y);
    double tail = h12_operator_norm(dtn_difference_series(sd1, sd2, z0, 0).total.entries, sd1.grid);
    for (int j = 1; j < m; ++j) {
        const ComplexMatrix dj = derivative_series_impl(sd1, z0, j, 0).entries -
                                 derivative_series_impl(sd2, z0, j, 0).entries;
        tail += std::pow(std::abs(lambda - z0), j) / factorial(j) * h12_operator_norm(dj, sd1.grid);
    }
    rep.tail_estimate = tail;
    rep.analytic_tail = std::pow(R_cut, -0.125);
    rep.pass = rep.residual <= rep.tail_estimate + 5e-2 * rep.reference_norm;
    return rep;
}

DifferenceSeries TildeHandle::difference(const TildeHandle& other, cplx lambda) const {
    require(N_ == other.N_, "tilde handles use different N");
    return dtn_difference_series(*sd_, *other.sd_, lambda, N_);
}

DtnMatrix TildeHandle::derivative(cplx lambda, int m) const { return dtn_derivative_series(*sd_, lambda, m, N_); }

DtnMatrix hat_matrix(const SpectralData& sd, cplx lambda, Index N) {
    require(N >= 0 && N < sd.count(), "hat split needs 0 <= N < K");
    check_off_spectrum(sd.eigenvalues.head(N), lambda);
    const RealVector& w = sd.grid.boundary_weights();
    DtnMatrix out = blank(sd, lambda, DtnKind::LowRankHat);
    out.N = N;
    out.K = sd.count();
    if (N == 0) return out;
    ComplexVector coef(N);
    for (Index k = 0; k < N; ++k) coef[k] = 1.0 / (lambda - sd.eigenvalues[k]);
    const ComplexMatrix t = sd.traces.leftCols(N).cast<cplx>();
    out.entries = t * coef.asDiagonal() * t.transpose() * w.asDiagonal();
    return out;
}

HatTildeSplit split_hat_tilde(std::shared_ptr<const SpectralData> sd, cplx lambda, Index N) {
    require(sd != nullptr, "missing spectral data");
    DtnMatrix hat = hat_matrix(*sd, lambda, N);
    return HatTildeSplit{std::move(hat), TildeHandle(std::move(sd), N)};
}

namespace {

SlopeSweep sweep(const SpectralData& sd, Index N, const std::vector<double>& xs, double law,
                 const std::function<cplx(double)>& freq) {
    require(xs.size() >= 2, "sweep needs at least two points");
    SlopeSweep s;
    s.abscissae = xs;
    for (double x : xs) {
        const double n = h12_operator_norm(hat_matrix(sd, freq(x), N).entries, sd.grid);
        s.norms.push_back(n);
        s.smallest_C = std::max(s.smallest_C, n * std::pow(x, law));
    }
    const bool positive = std::all_of(s.norms.begin(), s.norms.end(), [](double v) { return v > 0.0; });
    s.fitted_slope = positive ? fit_loglog(xs, s.norms).slope : 0.0;
    s.tau0 = N > 0 ? std::sqrt(2.0 * std::max(sd.eigenvalues[N - 1], 0.0)) : 0.0;
    return s;
}

} // namespace

SlopeSweep hat_decay_tau(const SpectralData& sd, Index N, const std::vector<double>& taus) {
    return sweep(sd, N, taus, 2.0, [](double t) { return cplx(t, 1.0) * cplx(t, 1.0); });
}

SlopeSweep hat_decay_left(const SpectralData& sd, Index N, const std::vector<double>& ts) {
    for (double t : ts) require(t > 0.0, "left half-plane sweep needs t > 0");
    return sweep(sd, N, ts, 1.0, [](double t) { return cplx(-t, 0.0); });
}

} // namespace borglev
