#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "borglev/dtn.hpp"

namespace borglev {

using Vec2 = Eigen::Vector2d;
using CVec2 = Eigen::Vector2cd;

/// Directions and frequency of the high-frequency probe for a target Fourier vector xi.
struct ProbeGeometry {
    Vec2 xi;
    Vec2 eta;      // xi/|xi| rotated by +90 degrees
    double tau = 0.0;
    double c_tau = 0.0;
    Vec2 theta;
    Vec2 omega;
    cplx lambda_tau;
    cplx sqrt_lambda;
};

/// theta = c eta + xi/(2 tau), omega = c eta - xi/(2 tau), lambda = (tau+i)^2.
ProbeGeometry make_geometry(const Vec2& xi, double tau);

/// exp(i sqrt(lambda) d.x) on boundary nodes with d = omega (sign > 0) or d = -theta (sign < 0).
BoundaryField plane_wave_trace(const ProbeGeometry& geom, int sign, const GridSpec& grid);
/// Same plane wave on interior nodes.
ComplexVector plane_wave_interior(const ProbeGeometry& geom, int sign, const GridSpec& grid);

/// <Lambda phi_omega, phi_{-theta}> with a DtN matrix at geom.lambda_tau.
cplx scattering_S(const ProbeGeometry& geom, const GridSpec& grid, const DtnMatrix& dtn);
/// Same pairing computed with a single boundary value solve.
cplx scattering_S(const Potential& q, const ProbeGeometry& geom, const GridSpec& grid);

/// Riemann sum sum_x q(x) exp(-i zeta.x) hx hy.
cplx fourier_riemann(const Potential& q, const GridSpec& grid, const CVec2& zeta);

/// -(lambda/2)|theta-omega|^2 int_Omega exp(-i sqrt(lambda)(theta-omega).x) dx in closed form.
cplx background_first_term(const ProbeGeometry& geom, const GridSpec& grid);

struct IdentityReport {
    cplx lhs;                    // S_h(q)
    cplx rhs;                    // S_h(0) + fourier_term - remainder
    double residual = 0.0;       // |lhs - rhs| / |lhs|
    cplx background;             // S_h(0)
    cplx background_closed;      // closed-form continuum first term
    double background_gap = 0.0; // |S_h(0) - closed form| / |closed form|
    cplx fourier_term;           // sum q exp(-i zeta.x) hx hy
    cplx remainder;              // sum (R(q,lambda)(q phi_omega)) q phi_{-theta} hx hy
    double discrete_residual = 0.0;  // same identity with discrete q=0 extensions instead of plane waves
};

IdentityReport verify_identity_3_1(const Potential& q, const ProbeGeometry& geom, const GridSpec& grid);

struct FourierSample {
    CVec2 zeta;        // xi (1 + i/tau)
    cplx value;
    double tau_used = 0.0;
    Vec2 xi;
    std::string source;
};

/// Where S(q) - S(background) comes from.
struct FourierSource {
    enum class Kind { Direct, Spectral };
    Kind kind = Kind::Direct;
    std::optional<Potential> background;              // direct: known background, zero if unset
    std::shared_ptr<const SpectralData> data;         // spectral: data of the unknown potential
    std::shared_ptr<const SpectralData> background_data;  // spectral: data of the background
    Index N_drop = 0;                                 // spectral: pairs k <= N_drop ignored

    static FourierSource direct() { return {}; }
    static FourierSource spectral(std::shared_ptr<const SpectralData> data,
                                  std::shared_ptr<const SpectralData> background, Index N_drop);
    std::string name() const;
};

/// Probe at a fixed tau; the factorizations are shared by all xi.
class FourierProbe {
public:
    FourierProbe(const Potential& q, const GridSpec& grid, double tau, FourierSource source);
    FourierSample sample(const Vec2& xi) const;
    double tau() const { return tau_; }

private:
    GridSpec grid_;
    double tau_;
    FourierSource source_;
    std::unique_ptr<BvpSolver> solver_q_, solver_bg_;
};

FourierSample recover_fourier(const Potential& q, const Vec2& xi, double tau, const GridSpec& grid,
                              const FourierSource& source = FourierSource::direct());

struct ReconstructionOptions {
    double cutoff_multiplier = 3.0;  // radius = multiplier * tau^{1/(n+2)}
    double period_factor = 2.0;      // lattice period box = factor * side lengths
    int threads = 1;
};

struct Reconstruction {
    Potential estimate;
    double tau = 0.0;
    double theoretical_radius = 0.0;
    double radius = 0.0;
    double cutoff_multiplier = 0.0;
    double l2_error = 0.0;
    double lowfreq_residual = 0.0;
    double highfreq_truncation = 0.0;
    std::vector<FourierSample> samples;
    std::vector<cplx> exact;  // Riemann-sum transform at the lattice points
};

/// Low-pass Fourier synthesis of probe estimates on the lattice 2 pi k / L inside the cutoff ball.
Reconstruction reconstruct_potential(const Potential& q_true, double tau, const GridSpec& grid,
                                     const FourierSource& source = FourierSource::direct(),
                                     const ReconstructionOptions& options = {});

} // namespace borglev
