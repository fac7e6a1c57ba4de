#include "borglev/grid.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/QR>

namespace borglev {

GridSpec::GridSpec(double lx, double ly, int nx, int ny)
    : lx_(lx), ly_(ly), nx_(nx), ny_(ny) {
    require(std::isfinite(lx) && lx > 0.0 && std::isfinite(ly) && ly > 0.0,
            "grid side lengths must be positive");
    require(nx >= 8 && ny >= 8, "grid needs at least 8 interior nodes per axis");
    hx_ = lx / (nx + 1);
    hy_ = ly / (ny + 1);

    boundary_.reserve(std::size_t(2 * nx + 2 * ny));
    for (int i = 0; i < nx; ++i) {
        BoundaryNode n;
        n.x = (i + 1) * hx_;
        n.y = 0.0;
        n.arclength = (i + 1) * hx_;
        n.side = Side::Bottom;
        n.interior = interior_index(i, 0);
        n.normal_spacing = hy_;
        n.tangential_spacing = hx_;
        n.normal = {0.0, -1.0};
        boundary_.push_back(n);
    }
    for (int j = 0; j < ny; ++j) {
        BoundaryNode n;
        n.x = lx;
        n.y = (j + 1) * hy_;
        n.arclength = lx + (j + 1) * hy_;
        n.side = Side::Right;
        n.interior = interior_index(nx - 1, j);
        n.normal_spacing = hx_;
        n.tangential_spacing = hy_;
        n.normal = {1.0, 0.0};
        boundary_.push_back(n);
    }
    for (int i = 0; i < nx; ++i) {
        BoundaryNode n;
        n.x = (nx - i) * hx_;
        n.y = ly;
        n.arclength = lx + ly + (i + 1) * hx_;
        n.side = Side::Top;
        n.interior = interior_index(nx - 1 - i, ny - 1);
        n.normal_spacing = hy_;
        n.tangential_spacing = hx_;
        n.normal = {0.0, 1.0};
        boundary_.push_back(n);
    }
    for (int j = 0; j < ny; ++j) {
        BoundaryNode n;
        n.x = 0.0;
        n.y = (ny - j) * hy_;
        n.arclength = 2.0 * lx + ly + (j + 1) * hy_;
        n.side = Side::Left;
        n.interior = interior_index(0, ny - 1 - j);
        n.normal_spacing = hx_;
        n.tangential_spacing = hy_;
        n.normal = {-1.0, 0.0};
        boundary_.push_back(n);
    }

    const double P = perimeter();
    const Index nb = Index(boundary_.size());
    weights_.resize(nb);
    for (Index b = 0; b < nb; ++b) {
        double prev = boundary_[std::size_t((b + nb - 1) % nb)].arclength;
        double next = boundary_[std::size_t((b + 1) % nb)].arclength;
        if (b == 0) prev -= P;
        if (b == nb - 1) next += P;
        weights_[b] = 0.5 * (next - prev);
        auto& node = boundary_[std::size_t(b)];
        node.weight = weights_[b];
        node.flux_scale = node.tangential_spacing / node.weight;
    }
}

GridSpec build_grid(double lx, double ly, int nx, int ny) { return GridSpec(lx, ly, nx, ny); }

Potential make_potential(const GridSpec& grid, RealVector values, std::string id,
                         std::optional<double> sup_bound) {
    require(values.size() == grid.interior_count(), "potential size does not match grid");
    require(values.allFinite(), "potential values must be finite");
    const double sup = values.size() ? values.cwiseAbs().maxCoeff() : 0.0;
    Potential q;
    q.sup_bound = sup_bound.value_or(sup);
    require(q.sup_bound >= sup, "sup_bound is smaller than max|q|");
    q.h1_bound = h1_norm_zero_extension(grid, values);
    q.values = std::move(values);
    q.id = std::move(id);
    return q;
}

double h1_norm_zero_extension(const GridSpec& grid, const RealVector& v) {
    require(v.size() == grid.interior_count(), "field size does not match grid");
    const int nx = grid.nx(), ny = grid.ny();
    auto at = [&](int i, int j) -> double {
        if (i < 0 || j < 0 || i >= nx || j >= ny) return 0.0;
        return v[grid.interior_index(i, j)];
    };
    double sum = v.squaredNorm();
    for (int j = 0; j < ny; ++j)
        for (int i = -1; i < nx; ++i) {
            const double d = (at(i + 1, j) - at(i, j)) / grid.hx();
            sum += d * d;
        }
    for (int j = -1; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double d = (at(i, j + 1) - at(i, j)) / grid.hy();
            sum += d * d;
        }
    return std::sqrt(sum * grid.cell_area());
}

double l2_norm(const GridSpec& grid, const RealVector& values) {
    require(values.size() == grid.interior_count(), "field size does not match grid");
    return std::sqrt(grid.cell_area()) * values.norm();
}

int support_margin(const GridSpec& grid, const RealVector& values, double zero_tol) {
    require(values.size() == grid.interior_count(), "field size does not match grid");
    int margin = std::numeric_limits<int>::max();
    for (int j = 0; j < grid.ny(); ++j)
        for (int i = 0; i < grid.nx(); ++i) {
            if (std::abs(values[grid.interior_index(i, j)]) <= zero_tol) continue;
            const int d = std::min({i + 1, j + 1, grid.nx() - i, grid.ny() - j});
            margin = std::min(margin, d);
        }
    return margin;
}

cplx boundary_inner_product(const BoundaryField& f, const BoundaryField& g, const GridSpec& grid) {
    require(f.size() == grid.boundary_count() && g.size() == grid.boundary_count(),
            "boundary field length does not match grid");
    const RealVector& w = grid.boundary_weights();
    cplx sum = 0.0;
    for (Index b = 0; b < f.size(); ++b) sum += w[b] * (f[b] * g[b]);
    return sum;
}

double boundary_l2_norm(const BoundaryField& f, const GridSpec& grid) {
    require(f.size() == grid.boundary_count(), "boundary field length does not match grid");
    return std::sqrt((grid.boundary_weights().array() * f.array().abs2()).sum());
}

double boundary_l2_norm(const RealVector& f, const GridSpec& grid) {
    require(f.size() == grid.boundary_count(), "boundary field length does not match grid");
    return std::sqrt((grid.boundary_weights().array() * f.array().square()).sum());
}

BoundarySobolev::BoundarySobolev(const GridSpec& grid) {
    const Index n = grid.boundary_count();
    sqrt_w_ = grid.boundary_weights().cwiseSqrt();
    modes_.resize(n);
    modes_[0] = 0.0;
    for (Index j = 1; j < n; ++j) {
        const double k = double((j + 1) / 2);
        modes_[j] = (j % 2 == 1) ? k : -k;
    }
    const double P = grid.perimeter();
    ComplexMatrix vandermonde(n, n);
    for (Index b = 0; b < n; ++b) {
        const double s = grid.boundary_node(b).arclength;
        for (Index j = 0; j < n; ++j)
            vandermonde(b, j) = sqrt_w_[b] * std::polar(1.0, 2.0 * std::numbers::pi * modes_[j] * s / P);
    }
    Eigen::HouseholderQR<ComplexMatrix> qr(vandermonde);
    ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(n, n);
    // fix the phase of each column so the constant mode is real and positive
    for (Index j = 0; j < n; ++j) {
        const cplx r = qr.matrixQR()(j, j);
        if (std::abs(r) > 0.0) q.col(j) *= std::abs(r) / r;
    }
    basis_ = sqrt_w_.cwiseInverse().asDiagonal() * q;
    analysis_ = q.adjoint() * sqrt_w_.asDiagonal();
}

ComplexVector BoundarySobolev::coefficients(const BoundaryField& f) const {
    require(f.size() == analysis_.cols(), "boundary field length does not match grid");
    return analysis_ * f;
}

double BoundarySobolev::norm(const BoundaryField& f, double s) const {
    require(s >= -1.0 && s <= 1.0, "Sobolev index must satisfy |s| <= 1");
    const ComplexVector c = coefficients(f);
    double sum = 0.0;
    for (Index j = 0; j < c.size(); ++j)
        sum += std::pow(1.0 + modes_[j] * modes_[j], s) * std::norm(c[j]);
    return std::sqrt(sum);
}

ComplexMatrix BoundarySobolev::weighted_synthesis(double s) const {
    RealVector scale(modes_.size());
    for (Index j = 0; j < modes_.size(); ++j) scale[j] = std::pow(1.0 + modes_[j] * modes_[j], -0.5 * s);
    return basis_ * scale.asDiagonal();
}

double hs_norm(const BoundaryField& f, double s, const GridSpec& grid) {
    require(s >= -1.0 && s <= 1.0, "Sobolev index must satisfy |s| <= 1");
    return BoundarySobolev(grid).norm(f, s);
}

} // namespace borglev
