#include "borglev/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "borglev/dtn.hpp"
#include "borglev/fitting.hpp"
#include "borglev/parallel.hpp"
#include "borglev/potentials.hpp"

namespace borglev {

namespace {

constexpr int kDim = 2;

double weight_power(int m) { return 2.0 * m / kDim; }

} // namespace

DeltaMetrics compute_delta(const SpectralData& sd1, const SpectralData& sd2, Index N, int m,
                           const DeltaOptions& options) {
    require(sd1.grid == sd2.grid, "spectral data live on different grids");
    require(sd1.count() == sd2.count(), "spectral data have different truncations");
    require(m >= 1, "weight exponent m must be positive");
    require(N >= 0, "N must be nonnegative");
    const Index K = sd1.count();
    const bool complete = K == sd1.grid.interior_count();
    require(complete || K > N + 20, "delta needs K > N + 20 (K=" + std::to_string(K) + ", N=" + std::to_string(N) + ")");
    require(N < K, "N must be smaller than K");

    SpectralData a = sd1, b = sd2;
    if (options.align) std::tie(a, b) = align_traces(sd1, sd2);

    DeltaMetrics d;
    d.N = N;
    d.m = m;
    d.K = K;
    const double p = weight_power(m);
    CompensatedSum d1, scale;
    for (Index j = N; j < K; ++j) {
        const double k = double(j - N + 1);
        d.delta0 = std::max(d.delta0, std::abs(a.eigenvalues[j] - b.eigenvalues[j]));
        const double wk = std::pow(k, -p);
        d1.add(wk * boundary_l2_norm(RealVector(a.traces.col(j) - b.traces.col(j)), a.grid));
        scale.add(wk * (boundary_l2_norm(RealVector(a.traces.col(j)), a.grid) +
                        boundary_l2_norm(RealVector(b.traces.col(j)), b.grid)));
    }
    d.delta1 = d1.value();
    if (!complete) {
        // sum_{k > K-N} k^{-p} <= (K-N)^{1-p}/(p-1) for p > 1
        require(p > 1.0, "an incomplete spectrum needs 2m/n > 1 for a finite tail");
        const double kmax = double(K - N);
        d.tail_bound = 2.0 * std::sqrt(discrete_trace_bound_sq(sd1.grid)) * std::pow(kmax, 1.0 - p) / (p - 1.0);
        d.tail_fraction = scale.value() > 0.0 ? d.tail_bound / scale.value() : std::numeric_limits<double>::infinity();
        if (d.tail_fraction > options.max_tail_fraction) {
            const double target = options.max_tail_fraction * scale.value();
            const double need = std::pow(2.0 * std::sqrt(discrete_trace_bound_sq(sd1.grid)) / ((p - 1.0) * target),
                                          1.0 / (p - 1.0));
            throw NumericalError("delta1 tail fraction " + std::to_string(d.tail_fraction) + " exceeds " +
                                 std::to_string(options.max_tail_fraction) + "; need K >= " +
                                 std::to_string(Index(std::ceil(need)) + N) + " or the complete spectrum (K=" +
                                 std::to_string(sd1.grid.interior_count()) + ")");
        }
    }
    d.delta = d.delta0 + d.delta1;
    return d;
}

ExponentBundle gamma_of(int n, int m, double eps) {
    require(n >= 1, "dimension must be positive");
    require(eps > 0.0 && eps < 0.5, "eps must lie in (0, 1/2)");
    require(m > n / 2.0 + 0.75, "m must exceed n/2 + 3/4");
    ExponentBundle e;
    e.n = n;
    e.m = m;
    e.eps = eps;
    e.sigma = (1.0 - 2.0 * eps) / 4.0;
    e.kappa = 1.0 / (2.0 * e.sigma);
    e.gamma = 1.0 / (n + 2 + 2.0 * (n + 2) * (e.kappa * m + m + 1.25));
    e.gamma_alt = 1.0 / (n + 2 + 2.0 * (n + 2) * (e.kappa * m + m + 2.0));
    e.alpha_threshold = (4.0 * m - 1.0) / (2.0 * n);
    return e;
}

namespace {

struct SpectrumMemo {
    std::vector<const Potential*> keys;
    std::vector<std::size_t> slot;  // per key, index of the distinct potential
    std::vector<const Potential*> distinct;
};

SpectrumMemo dedupe(const std::vector<const Potential*>& ps) {
    SpectrumMemo memo;
    memo.keys = ps;
    for (const Potential* p : ps) {
        std::size_t s = memo.distinct.size();
        for (std::size_t i = 0; i < memo.distinct.size(); ++i)
            if (memo.distinct[i]->values == p->values) {
                s = i;
                break;
            }
        if (s == memo.distinct.size()) memo.distinct.push_back(p);
        memo.slot.push_back(s);
    }
    return memo;
}

} // namespace

HolderReport holder_experiment(const std::vector<std::pair<Potential, Potential>>& family, Index N, int m,
                               const GridSpec& grid, Index K, const HolderOptions& options) {
    require(family.size() >= 5, "Holder fit needs at least 5 pairs");
    const Index n_int = grid.interior_count();
    if (K <= 0) K = n_int;
    require(K <= n_int, "K exceeds the number of interior nodes");

    HolderReport rep;
    rep.exponents = gamma_of(kDim, m, options.eps);
    rep.gamma_paper = rep.exponents.gamma;
    rep.N = N;
    rep.m = m;
    rep.K = K;

    std::vector<const Potential*> all;
    for (const auto& [q1, q2] : family) {
        require(q1.values.size() == n_int && q2.values.size() == n_int, "potential size does not match grid");
        const RealVector diff = q1.values - q2.values;
        require(support_margin(grid, diff) >= 2, "q1 - q2 must vanish within two nodes of the boundary");
        rep.M = std::max(rep.M, q1.sup_bound + q2.sup_bound + h1_norm_zero_extension(grid, diff));
        all.push_back(&q1);
        all.push_back(&q2);
    }
    const SpectrumMemo memo = dedupe(all);
    std::vector<std::optional<SpectralData>> spectra(memo.distinct.size());
    parallel_for(spectra.size(), options.threads,
                 [&](std::size_t i) { spectra[i] = solve_eigen(*memo.distinct[i], grid, K, false); });

    rep.points.resize(family.size());
    for (std::size_t p = 0; p < family.size(); ++p) {
        const SpectralData& s1 = *spectra[memo.slot[2 * p]];
        const SpectralData& s2 = *spectra[memo.slot[2 * p + 1]];
        const DeltaMetrics d = compute_delta(s1, s2, N, m, options.delta);
        HolderPoint& pt = rep.points[p];
        pt.pair_id = family[p].first.id + "|" + family[p].second.id;
        pt.delta0 = d.delta0;
        pt.delta1 = d.delta1;
        pt.delta = d.delta;
        pt.tail_bound = d.tail_bound;
        pt.l2_diff = l2_norm(grid, family[p].first.values - family[p].second.values);
        rep.tail_bound = std::max(rep.tail_bound, d.tail_bound);
    }

    std::vector<double> xs, ys, xs_all, ys_all;
    for (const auto& pt : rep.points) {
        if (!(pt.delta > 0.0) || !(pt.l2_diff > 0.0)) continue;
        xs_all.push_back(pt.delta);
        ys_all.push_back(pt.l2_diff);
        if (pt.delta < 0.5) {
            xs.push_back(pt.delta);
            ys.push_back(pt.l2_diff);
        }
    }
    if (xs.size() < 2) {
        rep.asymptotic_window = false;
        xs = xs_all;
        ys = ys_all;
    }
    if (xs.size() < 2) {
        rep.degenerate = true;
        rep.gamma_emp = std::numeric_limits<double>::quiet_NaN();
        rep.C_fit = std::numeric_limits<double>::quiet_NaN();
        return rep;
    }
    rep.fit_points = Index(xs.size());
    rep.gamma_emp = fit_loglog(xs, ys).slope;
    for (std::size_t i = 0; i < xs.size(); ++i) rep.C_fit = std::max(rep.C_fit, ys[i] / std::pow(xs[i], rep.gamma_emp));
    rep.pass = rep.gamma_emp > 0.0 && rep.gamma_emp <= 1.0 && rep.gamma_emp >= rep.gamma_paper;
    return rep;
}

SpectralData corrupt_spectral_data(const SpectralData& sd, double delta, double A, double alpha, int m) {
    require(delta >= 0.0 && A >= 0.0, "delta and A must be nonnegative");
    require(alpha > 0.0, "alpha must be positive");
    SpectralData out = sd;
    const double p = weight_power(m) - 1.0;
    for (Index j = 0; j < sd.count(); ++j) {
        const double k = double(j + 1);
        const double e = delta + A * std::pow(k, -alpha);
        out.eigenvalues[j] += e;
        const double norm = boundary_l2_norm(RealVector(sd.traces.col(j)), sd.grid);
        if (norm > 0.0) out.traces.col(j) += (e * std::pow(k, p) / norm) * sd.traces.col(j);
    }
    out.potential_id = sd.potential_id + "+noise(" + std::to_string(delta) + "," + std::to_string(A) + "," +
                       std::to_string(alpha) + ")";
    out.eigenvectors.resize(0, 0);
    return out;
}

NoiseReport asymptotic_noise_experiment(const Potential& q1, const Potential& q2, const std::vector<double>& deltas,
                                        double A, double alpha, int m, const GridSpec& grid, Index K,
                                        const NoiseOptions& options) {
    const ExponentBundle e = gamma_of(kDim, m, 0.25);
    require(alpha > e.alpha_threshold, "alpha must exceed (4m-1)/(2n) = " + std::to_string(e.alpha_threshold));
    require(!deltas.empty(), "delta sweep is empty");
    for (double d : deltas) require(d > 0.0 && d < 1.0, "delta values must lie in (0, 1)");
    require(A >= 0.0, "A must be nonnegative");
    const Index n_int = grid.interior_count();
    if (K <= 0) K = n_int;
    require(K <= n_int, "K exceeds the number of interior nodes");
    require(options.N_drop >= 0 && options.N_drop < K, "N_drop must satisfy 0 <= N < K");

    NoiseReport rep;
    rep.A = A;
    rep.alpha = alpha;
    rep.alpha_threshold = e.alpha_threshold;
    rep.m = m;
    rep.K = K;
    rep.tau = options.tau;
    rep.cutoff_multiplier = options.reconstruction.cutoff_multiplier;
    rep.N_drop = options.N_drop;

    auto sd1 = std::make_shared<const SpectralData>(solve_eigen(q1, grid, K, false));
    auto sd2 = std::make_shared<const SpectralData>(solve_eigen(q2, grid, K, false));
    const Potential diff = combine(q1, 1.0, q2, -1.0, q1.id + "-" + q2.id);

    auto error_with = [&](std::shared_ptr<const SpectralData> data, Index drop) {
        return reconstruct_potential(diff, options.tau, grid, FourierSource::spectral(data, sd2, drop),
                                     options.reconstruction)
            .l2_error;
    };
    rep.baseline_error = error_with(sd1, 0);
    rep.dropped_error = error_with(sd1, options.N_drop);
    rep.drop_within_factor = rep.dropped_error <= 2.0 * rep.baseline_error;

    const double p = weight_power(m) - 1.0;
    for (double delta : deltas) {
        NoiseRun run;
        run.delta = delta;
        const double n_exact = std::pow(delta, -1.0 / alpha);
        run.N_delta = Index(std::ceil(n_exact - 1e-9));
        auto noisy = std::make_shared<const SpectralData>(corrupt_spectral_data(*sd1, delta, A, alpha, m));
        run.small_index_bound = true;
        run.large_index_bound = true;
        for (Index j = 0; j < K; ++j) {
            const double k = double(j + 1);
            const double shift = std::abs(noisy->eigenvalues[j] - sd1->eigenvalues[j]);
            const double trace_shift =
                std::pow(k, -p) * boundary_l2_norm(RealVector(noisy->traces.col(j) - sd1->traces.col(j)), grid);
            const double worst = std::max(shift, trace_shift);
            const double slack = 1e-12 * (1.0 + worst);
            if (k <= n_exact + 1e-9 && worst > (1.0 + A) * std::pow(k, -alpha) + slack) run.small_index_bound = false;
            if (j + 1 >= run.N_delta && worst > (1.0 + A) * delta + slack) run.large_index_bound = false;
        }
        DeltaOptions dopt;
        dopt.align = false;
        run.data_distance = compute_delta(*noisy, *sd1, 0, m, dopt);
        run.l2_error = error_with(noisy, 0);
        rep.runs.push_back(run);
    }

    std::vector<NoiseRun> sorted = rep.runs;
    std::sort(sorted.begin(), sorted.end(), [](const NoiseRun& a, const NoiseRun& b) { return a.delta > b.delta; });
    rep.monotone = true;
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i].l2_error > sorted[i - 1].l2_error) rep.monotone = false;

    std::vector<double> xs, ys;
    for (const auto& r : sorted) {
        const double excess = r.l2_error - rep.baseline_error;
        if (excess > 0.0) {
            xs.push_back(r.delta);
            ys.push_back(excess);
        }
    }
    rep.gamma_emp = xs.size() >= 2 ? fit_loglog(xs, ys).slope : std::numeric_limits<double>::quiet_NaN();
    return rep;
}

} // namespace borglev
