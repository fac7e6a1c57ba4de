#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "borglev/common.hpp"

namespace borglev {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Ordinary least squares y = slope*x + intercept; needs at least two distinct x.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Fit of log(y) against log(x); all entries must be positive.
LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

/// Fit of log(y) = slope*log(x) + beta*log(log(x)) + c. Returns {slope, beta}.
std::pair<double, double> fit_loglog_with_log(const std::vector<double>& x, const std::vector<double>& y);

/// Slopes of successive log-log secants.
std::vector<double> secant_slopes(const std::vector<double>& x, const std::vector<double>& y);

/// Least squares solution of a small dense system.
RealVector least_squares(const RealMatrix& a, const RealVector& b);

/// Neumaier compensated accumulator.
class CompensatedSum {
public:
    void add(double v) {
        const double t = sum_ + v;
        comp_ += std::abs(sum_) >= std::abs(v) ? (sum_ - t) + v : (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

} // namespace borglev
