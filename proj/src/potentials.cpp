#include "borglev/potentials.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace borglev {

namespace {

template <class F>
RealVector sample(const GridSpec& grid, F&& f) {
    RealVector v(grid.interior_count());
    for (Index k = 0; k < v.size(); ++k) v[k] = f(grid.x_of(k), grid.y_of(k));
    return v;
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

double smooth_step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

} // namespace

Potential zero_potential(const GridSpec& grid) {
    return make_potential(grid, RealVector::Zero(grid.interior_count()), "zero");
}

Potential zero_like(const Potential& q) {
    Potential z;
    z.values = RealVector::Zero(q.values.size());
    z.h1_bound = 0.0;
    z.id = "zero";
    return z;
}

Potential constant_potential(const GridSpec& grid, double c) {
    require(std::isfinite(c), "constant potential must be finite");
    return make_potential(grid, RealVector::Constant(grid.interior_count(), c), "constant(" + fmt(c) + ")");
}

Potential gaussian_potential(const GridSpec& grid, std::array<double, 2> center, double width, double amp) {
    require(width > 0.0, "gaussian width must be positive");
    auto v = sample(grid, [&](double x, double y) {
        const double r2 = (x - center[0]) * (x - center[0]) + (y - center[1]) * (y - center[1]);
        return amp * std::exp(-r2 / (2.0 * width * width));
    });
    return make_potential(grid, std::move(v),
                          "gaussian(" + fmt(center[0]) + "," + fmt(center[1]) + "," + fmt(width) + "," + fmt(amp) + ")");
}

Potential mode_potential(const GridSpec& grid, int jx, int jy, double amp) {
    require(jx >= 1 && jy >= 1, "mode indices must be positive");
    const double pi = std::numbers::pi;
    auto v = sample(grid, [&](double x, double y) {
        return amp * std::sin(jx * pi * x / grid.lx()) * std::sin(jy * pi * y / grid.ly());
    });
    return make_potential(grid, std::move(v),
                          "mode(" + std::to_string(jx) + "," + std::to_string(jy) + "," + fmt(amp) + ")");
}

Potential bump_potential(const GridSpec& grid, std::array<double, 2> center, double radius, double amp) {
    require(radius > 0.0, "bump radius must be positive");
    auto v = sample(grid, [&](double x, double y) {
        const double r2 = ((x - center[0]) * (x - center[0]) + (y - center[1]) * (y - center[1])) / (radius * radius);
        return r2 < 1.0 ? amp * std::exp(1.0 - 1.0 / (1.0 - r2)) : 0.0;
    });
    return make_potential(grid, std::move(v),
                          "bump(" + fmt(center[0]) + "," + fmt(center[1]) + "," + fmt(radius) + "," + fmt(amp) + ")");
}

Potential random_potential(const GridSpec& grid, std::uint64_t seed, double smoothness, double amp) {
    require(smoothness >= 0.0, "smoothness must be nonnegative");
    constexpr int modes = 8;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    double coef[modes][modes];
    for (int a = 0; a < modes; ++a)
        for (int b = 0; b < modes; ++b)
            coef[a][b] = normal(rng) * std::pow(1.0 + (a + 1) * (a + 1) + (b + 1) * (b + 1), -0.5 * smoothness);
    const double pi = std::numbers::pi;
    auto v = sample(grid, [&](double x, double y) {
        const double u = x / grid.lx(), w = y / grid.ly();
        double s = 0.0;
        for (int a = 0; a < modes; ++a)
            for (int b = 0; b < modes; ++b)
                s += coef[a][b] * std::sin((a + 1) * pi * u) * std::sin((b + 1) * pi * w);
        auto window = [](double t) { return smooth_step((t - 0.1) / 0.15) * smooth_step((0.9 - t) / 0.15); };
        return s * window(u) * window(w);
    });
    const double peak = v.cwiseAbs().maxCoeff();
    if (peak > 0.0) v *= amp / peak;
    return make_potential(grid, std::move(v),
                          "random(" + std::to_string(seed) + "," + fmt(smoothness) + "," + fmt(amp) + ")");
}

Potential combine(const Potential& p, double a, const Potential& q, double b, std::string id) {
    require(p.values.size() == q.values.size(), "potentials live on different grids");
    Potential r;
    r.values = a * p.values + b * q.values;
    r.sup_bound = std::abs(a) * p.sup_bound + std::abs(b) * q.sup_bound;
    r.id = std::move(id);
    return r;
}

Potential scaled(const Potential& p, double t, std::string id) {
    Potential r;
    r.values = t * p.values;
    r.sup_bound = std::abs(t) * p.sup_bound;
    if (p.h1_bound) r.h1_bound = std::abs(t) * *p.h1_bound;
    r.id = std::move(id);
    return r;
}

} // namespace borglev
