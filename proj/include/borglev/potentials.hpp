#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "borglev/grid.hpp"

namespace borglev {

Potential zero_potential(const GridSpec& grid);
/// Zero potential with the size of q.
Potential zero_like(const Potential& q);
Potential constant_potential(const GridSpec& grid, double c);

/// amp * exp(-|x-center|^2 / (2 width^2))
Potential gaussian_potential(const GridSpec& grid, std::array<double, 2> center, double width, double amp);

/// amp * sin(jx pi x / lx) sin(jy pi y / ly)
Potential mode_potential(const GridSpec& grid, int jx, int jy, double amp);

/// Smooth compactly supported bump amp * exp(1 - 1/(1 - r^2/radius^2)), r < radius.
Potential bump_potential(const GridSpec& grid, std::array<double, 2> center, double radius, double amp);

/// Random sine series with coefficients decaying like (1+jx^2+jy^2)^(-smoothness/2),
/// multiplied by a smooth window that vanishes within 10% of the boundary and
/// scaled so that max|q| = amp.
Potential random_potential(const GridSpec& grid, std::uint64_t seed, double smoothness, double amp);

/// Pointwise a*p + b*q on the same grid.
Potential combine(const Potential& p, double a, const Potential& q, double b, std::string id);
Potential scaled(const Potential& p, double t, std::string id);

} // namespace borglev
