#pragma once

#include <string>
#include <utility>
#include <vector>

#include "borglev/probe.hpp"
#include "borglev/spectral.hpp"

namespace borglev {

/// Distances between two spectral data sets with the first N pairs ignored.
struct DeltaMetrics {
    double delta0 = 0.0;      // sup_k |lambda_{k+N}(q1) - lambda_{k+N}(q2)|
    double delta1 = 0.0;      // sum_k k^{-2m/n} ||t_{k+N}(q1) - t_{k+N}(q2)||, truncated at K
    double delta = 0.0;       // delta0 + delta1
    Index N = 0;
    int m = 2;
    Index K = 0;
    double tail_bound = 0.0;  // bound on the neglected k > K - N part of delta1
    double tail_fraction = 0.0;
};

struct DeltaOptions {
    bool align = true;               // gauge-align sd2 against sd1 first
    double max_tail_fraction = 0.01; // tail relative to sum_k k^{-2m/n} (||t1|| + ||t2||)
};

DeltaMetrics compute_delta(const SpectralData& sd1, const SpectralData& sd2, Index N, int m,
                           const DeltaOptions& options = {});

struct ExponentBundle {
    int n = 2;
    int m = 2;
    double eps = 0.25;
    double sigma = 0.0;
    double kappa = 0.0;
    double gamma = 0.0;           // 1/(n+2+2(n+2)(kappa m + m + 5/4))
    double gamma_alt = 0.0;       // same with m + 2 in place of m + 5/4
    double alpha_threshold = 0.0; // (4m-1)/(2n)
};

ExponentBundle gamma_of(int n, int m, double eps);

struct HolderPoint {
    std::string pair_id;
    double delta0 = 0.0;
    double delta1 = 0.0;
    double delta = 0.0;
    double l2_diff = 0.0;
    double tail_bound = 0.0;
};

struct HolderReport {
    std::vector<HolderPoint> points;
    ExponentBundle exponents;
    double gamma_paper = 0.0;
    double gamma_emp = 0.0;   // NaN when degenerate
    double C_fit = 0.0;
    Index fit_points = 0;
    bool degenerate = false;
    bool asymptotic_window = true;  // false when the fit had to use points with delta >= 0.5
    double M = 0.0;           // shared bound on sup|q1| + sup|q2| + ||q1-q2||_{H^1}
    Index N = 0;
    int m = 2;
    Index K = 0;
    double tail_bound = 0.0;  // largest tail over the family
    bool pass = false;        // gamma_paper <= gamma_emp <= 1 and gamma_emp > 0
};

struct HolderOptions {
    double eps = 0.25;
    int threads = 1;
    DeltaOptions delta;
};

/// Spectral data are computed for every member; K = 0 means the complete discrete spectrum.
HolderReport holder_experiment(const std::vector<std::pair<Potential, Potential>>& family, Index N, int m,
                               const GridSpec& grid, Index K, const HolderOptions& options = {});

/// Corrupted copy of sd with eigenvalue shifts e_k = delta + A k^{-alpha} and trace perturbations
/// of norm e_k k^{2m/n-1} along t_k.
SpectralData corrupt_spectral_data(const SpectralData& sd, double delta, double A, double alpha, int m);

struct NoiseRun {
    double delta = 0.0;
    Index N_delta = 0;           // ceil(delta^{-1/alpha})
    bool small_index_bound = false;  // e_j <= (1+A) j^{-alpha} for j <= delta^{-1/alpha}
    bool large_index_bound = false;  // e_j <= (1+A) delta for j >= N
    DeltaMetrics data_distance;  // corrupted vs clean data of q1
    double l2_error = 0.0;       // reconstruction of q1 - q2 from corrupted data
};

struct NoiseReport {
    std::vector<NoiseRun> runs;   // in the order of the delta sweep
    double A = 0.0;
    double alpha = 0.0;
    double alpha_threshold = 0.0;
    int m = 2;
    Index K = 0;
    double tau = 0.0;
    double cutoff_multiplier = 0.0;
    double baseline_error = 0.0;  // clean data, no pairs dropped
    Index N_drop = 5;
    double dropped_error = 0.0;   // clean data, first N_drop pairs dropped
    double gamma_emp = 0.0;       // log-log slope of error excess over baseline vs delta, NaN if degenerate
    bool monotone = false;        // error nonincreasing as delta decreases
    bool drop_within_factor = false;  // dropped_error <= 2 baseline_error
};

struct NoiseOptions {
    double tau = 10.0;
    Index N_drop = 5;
    ReconstructionOptions reconstruction{6.0, 2.0, 1};
};

NoiseReport asymptotic_noise_experiment(const Potential& q1, const Potential& q2, const std::vector<double>& deltas,
                                        double A, double alpha, int m, const GridSpec& grid, Index K,
                                        const NoiseOptions& options = {});

} // namespace borglev
