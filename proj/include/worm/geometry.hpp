#pragma once

// Boundary geometry of a Diederich–Fornæss worm domain near its Levi-flat
// annulus: the defining function, the (x, θ, t) boundary chart, the CR field
// Lbar = ∂x + i∂θ + γ∂t and the Levi coefficient μ of [Lbar, L].

#include <utility>
#include <vector>

#include "worm/common.hpp"

namespace worm::geometry {

// φ(u) = M exp(-σ / (|u| - 2 r_flat)^2) for |u| > 2 r_flat, zero otherwise.
struct PhiProfile {
  double M = 0.5;
  double sigma = 1.0;
};

struct WormConfig {
  double r_flat = 0.5;  // Levi-flat segment is |x| <= r_flat in the chart
  double delta = 0.4;   // chart half-thickness in t
  PhiProfile phi;

  // Throws std::invalid_argument on r_flat <= 0, delta outside (0, π),
  // M outside (0, 1) or sigma <= 0.
  void validate() const;
};

struct ChartPoint {
  double x = 0.0;
  double theta = 0.0;
  double t = 0.0;
};

struct LeviData {
  double mu = 0.0;
  double nu = 0.0;
};

struct PhiValue {
  double phi = 0.0;
  double dphi = 0.0;
};

struct PhiJet {
  double phi = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

PhiValue eval_phi(const WormConfig& cfg, double u);
PhiJet phi_jet(const WormConfig& cfg, double u);

// Profile used by the chart: ψ = 1 - sqrt(1 - φ), so |z1 + e^{2ix}| = 1 - ψ
// traces ρ = 0 exactly. Vanishes on the same flat set as φ.
PhiJet chart_profile_jet(const WormConfig& cfg, double u);

// ρ = 1 - φ(log|z2|^2) - |z1 + exp(i log|z2|^2)|^2, positive inside.
double defining_function(const WormConfig& cfg, cplx z1, cplx z2);

bool in_chart(const WormConfig& cfg, const ChartPoint& p);

std::pair<cplx, cplx> boundary_chart(const WormConfig& cfg, const ChartPoint& p);

cplx gamma_coefficient(const WormConfig& cfg, double x, double t);

// ∂x γ and ∂t γ in closed form.
std::pair<cplx, cplx> gamma_gradient(const WormConfig& cfg, double x, double t);

// α(t) = 2(e^{-it} - 1)/(it), Taylor branch for |t| < 1e-3.
cplx alpha_coefficient(double t);

// max(|Lbar z1|, |Lbar z2|) with central differences of step h. The field
// used is (1, i, γ + gamma_shift); a nonzero shift is a negative control.
double cr_annihilation_residual(const WormConfig& cfg, const ChartPoint& p, double h,
                                cplx gamma_shift = 0.0);

// [Lbar, L] = (Lbar γ̄ - L γ) ∂t, so ν = 0 and μ = -2 Im ∂xγ - 2 Im(γ̄ ∂tγ).
LeviData levi_coefficients(const WormConfig& cfg, double x, double t);

struct ScanGrid {
  double x_min = 0.0, x_max = 0.0;
  double t_min = 0.0, t_max = 0.0;
  int nx = 101, nt = 101;

  // Whole chart, shrunk by a relative margin so every node is interior.
  static ScanGrid full_chart(const WormConfig& cfg, int nx, int nt, double margin = 1e-3);
  static ScanGrid flat_region(const WormConfig& cfg, int nx, int nt);
};

struct ScanSample {
  double x, t, mu, nu;
};

struct ScanReport {
  double min_mu = 0.0;
  double argmin_x = 0.0, argmin_t = 0.0;
  int violations = 0;
  double tolerance = 1e-10;
  double max_abs_nu = 0.0;
  double flat_max_deviation = 0.0;  // sup |μ - 8(1 - cos t)| over |x| <= r_flat
  double flat_t0_max_abs_mu = 0.0;  // sup |μ| over the segment t = 0, |x| <= r_flat
  double chart_max_residual = 0.0;  // sup |ρ∘chart| / (1 + |z|^2)
  std::vector<ScanSample> samples;

  bool passed() const { return violations == 0 && flat_t0_max_abs_mu == 0.0; }
};

ScanReport pseudoconvexity_scan(const WormConfig& cfg, const ScanGrid& grid, double tol = 1e-10);

}  // namespace worm::geometry
