#include "borglev/probe.hpp"

#include <cmath>
#include <numbers>

#include "borglev/parallel.hpp"
#include "borglev/potentials.hpp"

namespace borglev {

ProbeGeometry make_geometry(const Vec2& xi, double tau) {
    require(std::isfinite(tau) && tau > 1.0, "probe needs tau > 1");
    require(xi.allFinite(), "xi must be finite");
    const double r = xi.norm();
    require(r > 0.0, "xi must be nonzero");
    require(r <= 1.98 * tau, "|xi| must not exceed 1.98 tau");
    ProbeGeometry g;
    g.xi = xi;
    g.tau = tau;
    g.eta = Vec2(-xi[1], xi[0]) / r;
    g.c_tau = std::sqrt(1.0 - r * r / (4.0 * tau * tau));
    g.theta = g.c_tau * g.eta + xi / (2.0 * tau);
    g.omega = g.c_tau * g.eta - xi / (2.0 * tau);
    g.sqrt_lambda = cplx(tau, 1.0);
    g.lambda_tau = g.sqrt_lambda * g.sqrt_lambda;
    return g;
}

namespace {

Vec2 direction(const ProbeGeometry& geom, int sign) {
    require(sign == 1 || sign == -1, "plane wave sign must be +1 or -1");
    return sign > 0 ? geom.omega : Vec2(-geom.theta);
}

} // namespace

BoundaryField plane_wave_trace(const ProbeGeometry& geom, int sign, const GridSpec& grid) {
    const Vec2 d = direction(geom, sign);
    BoundaryField f(grid.boundary_count());
    for (Index b = 0; b < f.size(); ++b) {
        const BoundaryNode& n = grid.boundary_node(b);
        f[b] = std::exp(cplx(0.0, 1.0) * geom.sqrt_lambda * (d[0] * n.x + d[1] * n.y));
    }
    return f;
}

ComplexVector plane_wave_interior(const ProbeGeometry& geom, int sign, const GridSpec& grid) {
    const Vec2 d = direction(geom, sign);
    ComplexVector f(grid.interior_count());
    for (Index k = 0; k < f.size(); ++k)
        f[k] = std::exp(cplx(0.0, 1.0) * geom.sqrt_lambda * (d[0] * grid.x_of(k) + d[1] * grid.y_of(k)));
    return f;
}

cplx scattering_S(const ProbeGeometry& geom, const GridSpec& grid, const DtnMatrix& dtn) {
    require(dtn.grid == grid, "DtN matrix lives on a different grid");
    require(std::abs(dtn.lambda - geom.lambda_tau) <= 1e-12 * std::abs(geom.lambda_tau),
            "DtN frequency does not match the probe frequency");
    return boundary_inner_product(dtn.apply(plane_wave_trace(geom, 1, grid)), plane_wave_trace(geom, -1, grid), grid);
}

cplx scattering_S(const Potential& q, const ProbeGeometry& geom, const GridSpec& grid) {
    const BvpSolver solver(q, grid, geom.lambda_tau);
    return boundary_inner_product(solver.dtn_apply(plane_wave_trace(geom, 1, grid)), plane_wave_trace(geom, -1, grid),
                                  grid);
}

cplx fourier_riemann(const Potential& q, const GridSpec& grid, const CVec2& zeta) {
    require(q.values.size() == grid.interior_count(), "potential size does not match grid");
    cplx s = 0.0;
    for (Index k = 0; k < q.values.size(); ++k) {
        if (q.values[k] == 0.0) continue;
        s += q.values[k] * std::exp(cplx(0.0, -1.0) * (zeta[0] * grid.x_of(k) + zeta[1] * grid.y_of(k)));
    }
    return s * grid.cell_area();
}

cplx background_first_term(const ProbeGeometry& geom, const GridSpec& grid) {
    const cplx z1 = geom.sqrt_lambda * (geom.theta[0] - geom.omega[0]);
    const cplx z2 = geom.sqrt_lambda * (geom.theta[1] - geom.omega[1]);
    auto side = [](cplx z, double l) {
        if (std::abs(z) < 1e-14) return cplx(l, 0.0);
        return (1.0 - std::exp(cplx(0.0, -1.0) * z * l)) / (cplx(0.0, 1.0) * z);
    };
    const double d2 = (geom.theta - geom.omega).squaredNorm();
    return -0.5 * geom.lambda_tau * d2 * side(z1, grid.lx()) * side(z2, grid.ly());
}

IdentityReport verify_identity_3_1(const Potential& q, const ProbeGeometry& geom, const GridSpec& grid) {
    require(q.values.size() == grid.interior_count(), "potential size does not match grid");
    const BvpSolver sq(q, grid, geom.lambda_tau);
    const BvpSolver s0(zero_like(q), grid, geom.lambda_tau);
    const BoundaryField f = plane_wave_trace(geom, 1, grid), g = plane_wave_trace(geom, -1, grid);
    const double area = grid.cell_area();

    IdentityReport r;
    r.lhs = boundary_inner_product(sq.dtn_apply(f), g, grid);
    r.background = boundary_inner_product(s0.dtn_apply(f), g, grid);
    r.background_closed = background_first_term(geom, grid);
    r.background_gap = std::abs(r.background - r.background_closed) / std::abs(r.background_closed);

    const ComplexVector pw = plane_wave_interior(geom, 1, grid), mw = plane_wave_interior(geom, -1, grid);
    const ComplexVector qv = q.values.cast<cplx>();
    r.fourier_term = area * (qv.cwiseProduct(pw).cwiseProduct(mw)).sum();
    const ComplexVector w = sq.resolvent(qv.cwiseProduct(pw));
    r.remainder = area * (w.cwiseProduct(qv).cwiseProduct(mw)).sum();
    r.rhs = r.background + r.fourier_term - r.remainder;
    const double scale = std::abs(r.lhs);
    r.residual = scale > 0.0 ? std::abs(r.lhs - r.rhs) / scale : std::abs(r.lhs - r.rhs);

    const ComplexVector u0 = s0.solve(f), psi0 = s0.solve(g);
    const ComplexVector w0 = sq.resolvent(qv.cwiseProduct(u0));
    const cplx exact = r.background + area * (qv.cwiseProduct(u0).cwiseProduct(psi0)).sum() -
                       area * (w0.cwiseProduct(qv).cwiseProduct(psi0)).sum();
    r.discrete_residual = scale > 0.0 ? std::abs(r.lhs - exact) / scale : std::abs(r.lhs - exact);
    return r;
}

FourierSource FourierSource::spectral(std::shared_ptr<const SpectralData> data,
                                      std::shared_ptr<const SpectralData> background, Index N_drop) {
    FourierSource s;
    s.kind = Kind::Spectral;
    s.data = std::move(data);
    s.background_data = std::move(background);
    s.N_drop = N_drop;
    return s;
}

std::string FourierSource::name() const {
    return kind == Kind::Direct ? "direct" : "spectral(N_drop=" + std::to_string(N_drop) + ")";
}

FourierProbe::FourierProbe(const Potential& q, const GridSpec& grid, double tau, FourierSource source)
    : grid_(grid), tau_(tau), source_(std::move(source)) {
    require(tau > 1.0, "probe needs tau > 1");
    const cplx lambda = cplx(tau, 1.0) * cplx(tau, 1.0);
    if (source_.kind == FourierSource::Kind::Direct) {
        require(q.values.size() == grid.interior_count(), "potential size does not match grid");
        const Potential bg = source_.background ? *source_.background : zero_like(q);
        solver_q_ = std::make_unique<BvpSolver>(q, grid, lambda);
        solver_bg_ = std::make_unique<BvpSolver>(bg, grid, lambda);
    } else {
        require(source_.data && source_.background_data, "spectral source needs both data sets");
        require(source_.data->grid == grid && source_.background_data->grid == grid,
                "spectral data live on a different grid");
        require(source_.data->count() == source_.background_data->count(), "spectral data have different K");
        require(source_.N_drop >= 0 && source_.N_drop < source_.data->count(), "N_drop must satisfy 0 <= N < K");
    }
}

FourierSample FourierProbe::sample(const Vec2& xi) const {
    const ProbeGeometry geom = make_geometry(xi, tau_);
    const BoundaryField f = plane_wave_trace(geom, 1, grid_), g = plane_wave_trace(geom, -1, grid_);
    FourierSample s;
    s.xi = xi;
    s.tau_used = tau_;
    s.zeta = xi.cast<cplx>() * cplx(1.0, 1.0 / tau_);
    s.source = source_.name();
    if (source_.kind == FourierSource::Kind::Direct) {
        s.value = boundary_inner_product(solver_q_->dtn_apply(f) - solver_bg_->dtn_apply(f), g, grid_);
    } else {
        s.value = difference_pairing(*source_.data, *source_.background_data, geom.lambda_tau, source_.N_drop, f, g);
    }
    return s;
}

FourierSample recover_fourier(const Potential& q, const Vec2& xi, double tau, const GridSpec& grid,
                              const FourierSource& source) {
    make_geometry(xi, tau);
    return FourierProbe(q, grid, tau, source).sample(xi);
}

Reconstruction reconstruct_potential(const Potential& q_true, double tau, const GridSpec& grid,
                                     const FourierSource& source, const ReconstructionOptions& options) {
    require(q_true.values.size() == grid.interior_count(), "potential size does not match grid");
    require(options.cutoff_multiplier > 0.0, "cutoff multiplier must be positive");
    require(options.period_factor >= 1.0, "period factor must be at least 1");
    require(tau > 1.0, "probe needs tau > 1");
    const double pi = std::numbers::pi;
    const double Lx = options.period_factor * grid.lx(), Ly = options.period_factor * grid.ly();
    Reconstruction rec;
    rec.tau = tau;
    rec.cutoff_multiplier = options.cutoff_multiplier;
    rec.theoretical_radius = std::pow(tau, 0.25);
    rec.radius = options.cutoff_multiplier * rec.theoretical_radius;
    const double kx = 2.0 * pi / Lx, ky = 2.0 * pi / Ly;
    require(rec.radius >= 2.0 * kx && rec.radius >= 2.0 * ky,
            "cutoff ball holds fewer than 5 lattice modes per axis; increase tau or the cutoff multiplier");
    require(rec.radius <= 1.98 * tau, "cutoff ball exceeds the probe range |xi| <= 1.98 tau");

    std::vector<Vec2> lattice;
    const int mx = int(std::floor(rec.radius / kx)), my = int(std::floor(rec.radius / ky));
    for (int b = -my; b <= my; ++b)
        for (int a = -mx; a <= mx; ++a) {
            const Vec2 xi(a * kx, b * ky);
            if (xi.norm() <= rec.radius) lattice.push_back(xi);
        }

    const FourierProbe probe(q_true, grid, tau, source);
    rec.samples.resize(lattice.size());
    rec.exact.resize(lattice.size());
    parallel_for(lattice.size(), options.threads, [&](std::size_t i) {
        // the origin has no probe direction; use the continuous limit at a tiny offset
        const bool origin = lattice[i].isZero();
        rec.samples[i] = probe.sample(origin ? Vec2(1e-6 * kx, 0.0) : lattice[i]);
        if (origin) {
            rec.samples[i].xi = Vec2::Zero();
            rec.samples[i].zeta = CVec2::Zero();
        }
        rec.exact[i] = fourier_riemann(q_true, grid, lattice[i].cast<cplx>());
    });

    RealVector est = RealVector::Zero(grid.interior_count());
    double low = 0.0, captured = 0.0;
    for (std::size_t i = 0; i < lattice.size(); ++i) {
        const cplx v = rec.samples[i].value;
        for (Index k = 0; k < est.size(); ++k)
            est[k] += (v * std::exp(cplx(0.0, 1.0) * (lattice[i][0] * grid.x_of(k) + lattice[i][1] * grid.y_of(k))))
                          .real();
        low += std::norm(v - rec.exact[i]);
        captured += std::norm(rec.exact[i]);
    }
    est /= (Lx * Ly);
    rec.lowfreq_residual = std::sqrt(low / (Lx * Ly));
    const double total = std::pow(l2_norm(grid, q_true.values), 2);
    rec.highfreq_truncation = std::sqrt(std::max(0.0, total - captured / (Lx * Ly)));
    rec.l2_error = l2_norm(grid, est - q_true.values);
    rec.estimate = make_potential(grid, std::move(est), "reconstruction(" + q_true.id + ")");
    return rec;
}

} // namespace borglev
