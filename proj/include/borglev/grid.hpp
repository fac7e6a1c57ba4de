#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "borglev/common.hpp"

namespace borglev {

enum class Side { Bottom, Right, Top, Left };

/// One boundary sample point of the rectangle. Corners are never nodes.
struct BoundaryNode {
    double x = 0.0;
    double y = 0.0;
    double arclength = 0.0;         // counterclockwise from the corner (0,0)
    Side side = Side::Bottom;
    Index interior = 0;             // nearest interior node along the inward normal
    double normal_spacing = 0.0;    // distance to that interior node
    double tangential_spacing = 0.0;
    double weight = 0.0;            // periodic trapezoid weight
    double flux_scale = 1.0;        // tangential_spacing / weight
    std::array<double, 2> normal{}; // outward unit normal
};

/// Uniform node lattice on [0,lx]x[0,ly]. Interior nodes are row-major
/// (index = j*nx + i at x=(i+1)hx, y=(j+1)hy); boundary nodes run
/// counterclockwise by arclength starting on the bottom side.
class GridSpec {
public:
    GridSpec(double lx, double ly, int nx, int ny);

    double lx() const { return lx_; }
    double ly() const { return ly_; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double hx() const { return hx_; }
    double hy() const { return hy_; }
    double cell_area() const { return hx_ * hy_; }
    double area() const { return lx_ * ly_; }
    double perimeter() const { return 2.0 * (lx_ + ly_); }

    Index interior_count() const { return Index(nx_) * ny_; }
    Index boundary_count() const { return Index(boundary_.size()); }

    Index interior_index(int i, int j) const { return Index(j) * nx_ + i; }
    double x_of(Index k) const { return double(k % nx_ + 1) * hx_; }
    double y_of(Index k) const { return double(k / nx_ + 1) * hy_; }

    const std::vector<BoundaryNode>& boundary() const { return boundary_; }
    const BoundaryNode& boundary_node(Index b) const { return boundary_[std::size_t(b)]; }

    /// Quadrature weights of boundary_inner_product, one per boundary node.
    const RealVector& boundary_weights() const { return weights_; }

    bool operator==(const GridSpec& other) const {
        return lx_ == other.lx_ && ly_ == other.ly_ && nx_ == other.nx_ && ny_ == other.ny_;
    }

private:
    double lx_, ly_;
    int nx_, ny_;
    double hx_, hy_;
    std::vector<BoundaryNode> boundary_;
    RealVector weights_;
};

GridSpec build_grid(double lx, double ly, int nx, int ny);

/// Real potential sampled on interior nodes. The zero extension outside the
/// rectangle is implicit.
struct Potential {
    RealVector values;
    double sup_bound = 0.0;
    std::optional<double> h1_bound;
    std::string id;
};

/// Wraps values into a Potential; sup_bound defaults to max|values| and must dominate it.
Potential make_potential(const GridSpec& grid, RealVector values, std::string id,
                         std::optional<double> sup_bound = std::nullopt);

/// Discrete H^1 norm of the zero extension (forward differences, boundary edges included).
double h1_norm_zero_extension(const GridSpec& grid, const RealVector& values);

/// Discrete L^2(Omega) norm with hx*hy weights.
double l2_norm(const GridSpec& grid, const RealVector& values);

/// Smallest distance, in nodes, from the support of `values` to the boundary.
/// Returns a large number for identically zero fields.
int support_margin(const GridSpec& grid, const RealVector& values, double zero_tol = 0.0);

using BoundaryField = ComplexVector;

/// Bilinear (unconjugated) trapezoid pairing of two boundary fields.
cplx boundary_inner_product(const BoundaryField& f, const BoundaryField& g, const GridSpec& grid);

/// Trapezoid L^2(Gamma) norm.
double boundary_l2_norm(const BoundaryField& f, const GridSpec& grid);
double boundary_l2_norm(const RealVector& f, const GridSpec& grid);

/// Periodic arclength Fourier basis on the boundary nodes, orthonormalized in the
/// trapezoid inner product. Mode order is 0, 1, -1, 2, -2, ...; the first mode is
/// the normalized constant.
class BoundarySobolev {
public:
    explicit BoundarySobolev(const GridSpec& grid);

    /// Surrogate H^s(Gamma) norm with weights (1+k^2)^{s/2}, -1 <= s <= 1.
    double norm(const BoundaryField& f, double s) const;

    /// Coefficients of f in the orthonormal basis.
    ComplexVector coefficients(const BoundaryField& f) const;

    /// Orthonormal basis functions as columns (node samples).
    const ComplexMatrix& basis() const { return basis_; }
    const RealVector& wavenumbers() const { return modes_; }

    /// Column j of the basis scaled by (1+k_j^2)^{-s/2}, i.e. the map from
    /// coefficient space with the H^s weight removed back to node samples.
    ComplexMatrix weighted_synthesis(double s) const;

    const RealVector& sqrt_weights() const { return sqrt_w_; }

private:
    RealVector sqrt_w_;
    RealVector modes_;
    ComplexMatrix basis_;     // node samples of the orthonormal functions
    ComplexMatrix analysis_;  // coefficients = analysis_ * f
};

double hs_norm(const BoundaryField& f, double s, const GridSpec& grid);

} // namespace borglev
