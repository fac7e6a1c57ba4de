#include "borglev/fitting.hpp"

#include <cmath>

#include <Eigen/QR>

namespace borglev {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    require(x.size() == y.size() && x.size() >= 2, "line fit needs at least two points");
    const double n = double(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    require(sxx > 0.0, "line fit needs distinct abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        require(x[i] > 0.0 && y[i] > 0.0, "log-log fit needs positive data");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    return fit_line(lx, ly);
}

std::pair<double, double> fit_loglog_with_log(const std::vector<double>& x, const std::vector<double>& y) {
    require(x.size() == y.size() && x.size() >= 3, "fit needs at least three points");
    RealMatrix a(x.size(), 3);
    RealVector b(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        require(x[i] > 1.0 && y[i] > 0.0, "log-corrected fit needs x > 1 and y > 0");
        a(i, 0) = std::log(x[i]);
        a(i, 1) = std::log(std::log(x[i]));
        a(i, 2) = 1.0;
        b[i] = std::log(y[i]);
    }
    const RealVector c = least_squares(a, b);
    return {c[0], c[1]};
}

std::vector<double> secant_slopes(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> s;
    for (std::size_t i = 1; i < x.size(); ++i)
        s.push_back((std::log(y[i]) - std::log(y[i - 1])) / (std::log(x[i]) - std::log(x[i - 1])));
    return s;
}

RealVector least_squares(const RealMatrix& a, const RealVector& b) {
    require(a.rows() == b.size() && a.rows() >= a.cols(), "least squares shape mismatch");
    return a.colPivHouseholderQr().solve(b);
}

} // namespace borglev
