#pragma once

// Partial Mellin transform in t on log-spaced nodes:
//   F(γ + iσ) = ∫ f(t) t^{-iγ + σ} dt/t,   f(t) = (1/2π) ∫ F t^{iγ - σ} dγ.
// Trapezoid in y = log t, trapezoid in γ.

#include <vector>

#include "worm/common.hpp"
#include "worm/grid.hpp"
#include "worm/operators.hpp"

namespace worm::mellin {

struct MellinGrid {
  double t_min = 1e-16;
  double t_max = 60.0;
  int n_t = 1024;
  double gamma_max = 30.0;
  int n_gamma = 1024;

  // n_t >= 32, 0 < t_min < t_max, and Δγ <= π / log-span.
  void validate() const;

  double span() const;
  double dy() const;
  double dgamma() const;
  std::vector<double> t_nodes() const;
  std::vector<double> y_nodes() const;
  // γ_m = -Γ + m Δγ, m = 0 .. n_gamma - 1, Δγ = 2Γ / n_gamma.
  std::vector<double> gamma_nodes() const;

  // One full period of γ: Γ = π / dy, n_gamma = 2 n_t. The discrete
  // Plancherel identity is exact on such a grid.
  static MellinGrid full_band(double t_min, double t_max, int n_t);
  // Same t nodes as a kLog grid spec.
  static MellinGrid from_grid(const GridSpec& g, double gamma_max, int n_gamma);
};

struct MellinSample {
  std::vector<double> gamma;
  VectorXc values;
  double offset = 0.0;
  double dgamma = 0.0;
  double error_estimate = 0.0;  // sup |F - F_{2dy}| over γ
};

enum class Window { kNone, kCosineTaper };

// Rejects (std::invalid_argument) integrands whose end values exceed 1e-8 of
// their maximum unless a window is requested.
MellinSample mellin_forward(const MellinGrid& g, const VectorXc& f, double offset,
                            Window w = Window::kNone);

// Same quadrature at a single γ (no γ grid, same decay check).
cplx mellin_at(const MellinGrid& g, const VectorXc& f, double offset, double gamma);

VectorXc mellin_inverse(const MellinGrid& g, const MellinSample& F);

struct PlancherelDefect {
  double dt_over_t = 0.0;  // offset 0
  double dt = 0.0;         // offset 1/2
};

PlancherelDefect plancherel_defect(const MellinGrid& g, const VectorXc& f);
double tdt_symbol_defect(const MellinGrid& g, const VectorXc& f);
double shift_identity_defect(const MellinGrid& g, const VectorXc& f);
double round_trip_defect(const MellinGrid& g, const VectorXc& f);

// sup over γ nodes (with ‖û(·,γ)‖ >= 1e-6 of its max) of
// ‖(calL_s u)^(·,γ) - H_{ζ} û(·,γ)‖ / ‖û(·,γ)‖, ζ = sign_s s + iγ.
// grid must have a kLog t-axis matching mg.
double conjugation_defect(const GridSpec& grid, const MellinGrid& mg, const VectorXc& u, double s,
                          const OdeCoefficients& c);

// Transform every x-row of a 2-D sample array.
std::vector<MellinSample> mellin_forward_rows(const MellinGrid& g, const VectorXc& u, int nx,
                                              double offset, Window w = Window::kNone);

}  // namespace worm::mellin
