#pragma once

// Discretized model operators on (x, t) grids:
//   Lbar = ∂x + i a (t∂t + sign_s s) + κ t²∂t,   L = its formal conjugate,
//   calL_s = Lbar L + (β1 + A) Lbar + (β2 + A) L + (β3 + A),
// the microlocal cutoff Q and the exact symbol of Λ^{-s}[t, Λ^s]∂t.

#include <iosfwd>
#include <string>

#include "worm/common.hpp"
#include "worm/grid.hpp"

namespace worm {

struct OdeCoefficients {
  Polynomial a = Polynomial::constant(1.0);
  Polynomial beta1, beta2, beta3;
  int sign_s = 1;      // +1: t∂t + s, -1: t∂t - s
  double r = 1.0;      // I = [-r, r]
  double kappa = 0.0;  // optional κ t²∂t term in Lbar

  // Throws std::invalid_argument if a vanishes somewhere on I, sign_s is not
  // ±1 or r <= 0.
  void validate() const;

  static OdeCoefficients model(double a = 1.0, double r = 1.0);
};

// Order <= 0 perturbations whose principal symbol vanishes on t = 0.
enum class AChoice { kZero, kMultiplyT, kSmoothedT };

std::string to_string(AChoice a);
AChoice parse_achoice(const std::string& s);

struct DiscreteOperator {
  SpMat matrix;
  int order = 0;
  GridSpec grid;

  VectorXc apply(const VectorXc& u) const;
  // Adjoint in the weighted L2 of the grid: W^{-1} M^H W.
  DiscreteOperator adjoint() const;
};

// t-axis building blocks (nt x nt).
SpMat t_generator(const GridSpec& g);   // t∂t
SpMat t_multiplier(const GridSpec& g);  // multiplication by t

DiscreteOperator assemble_Lbar(double s, const OdeCoefficients& c, const GridSpec& g);
DiscreteOperator assemble_L(double s, const OdeCoefficients& c, const GridSpec& g);
DiscreteOperator assemble_A(AChoice choice, const GridSpec& g);

// The compact three-point ∂x² replaces the wide (D1)² inside Lbar L.
DiscreteOperator assemble_calL(double s, const OdeCoefficients& c, const GridSpec& g,
                               AChoice choice);

// Exact τ-symbol of Λ^{-s}[t, Λ^s]∂t with m(τ) = (1 + τ²)^{1/2}: -s τ²/(1 + τ²).
double lambda_conjugation_symbol(double s, double tau);

// q = 1 for τ <= -1, q = 0 for τ >= -1/2, quintic smoothstep in between.
double q_cutoff_profile(double tau);

// Fourier multiplier q(τ) in t. Needs a periodic linear or frequency t-axis.
DiscreteOperator build_Q_cutoff(const GridSpec& g);

// One line per stored entry: "row col re im".
void export_coo(const DiscreteOperator& op, std::ostream& os);

}  // namespace worm
