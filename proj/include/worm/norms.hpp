#pragma once

// Grid norms: L2 and H^{±1} through the multiplier (1 + ξ² + τ²)^{±1/2}
// on a zero-padded periodic extension of the box.

#include "worm/common.hpp"
#include "worm/grid.hpp"

namespace worm::norms {

double l2(const VectorXc& u, const GridSpec& g);

// order in {-1, 0, 1}. Linear t-axes pad both directions twofold; on a
// frequency axis τ is already diagonal and only x is padded. Log axes
// support order 0 only.
double sobolev(const VectorXc& u, const GridSpec& g, int order);

// sqrt(h Σ |f_i|²) for nodal samples with spacing h.
double interval_l2(const VectorXc& f, double h);

}  // namespace worm::norms
