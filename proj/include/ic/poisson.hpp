#pragma once

#include "ic/geometry.hpp"

namespace ic {

/// Forward-difference gradients on the staggered lattice: gx[y][x] =
/// h[y][x+1] - h[y][x], gy[y][x] = h[y+1][x] - h[y][x]. Padding column/row
/// are zero. This is the discretization integrate_gradients_dct inverts
/// exactly (up to the mean).
GradientField gradient_of(const HeightMap& hm);

/// Least-squares height from a gradient field: solves the Poisson equation
/// with Neumann boundaries via a 2-D DCT, i.e. the exact normal-equations
/// inverse of gradient_of. The additive constant is fixed to zero mean.
/// Throws std::invalid_argument for dims < 2x2 or non-finite input.
HeightMap integrate_gradients_dct(const GradientField& g);

/// Orthonormal DCT-II / inverse (DCT-III) along both axes, row-major H x W.
/// Exposed for tests; the Poisson solve is their only in-library consumer.
void dct2(const double* in, double* out, int width, int height);
void idct2(const double* in, double* out, int width, int height);

}  // namespace ic
