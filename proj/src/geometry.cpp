#include "worm/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace worm::geometry {

namespace {
// e^{it} - 1 without cancellation for small t.
cplx expm1_i(double t) {
  const double h = std::sin(0.5 * t);
  return {-2.0 * h * h, std::sin(t)};
}
}  // namespace

void WormConfig::validate() const {
  if (!(r_flat > 0.0)) throw std::invalid_argument("r_flat must be positive");
  if (!(delta > 0.0) || !(delta < kPi)) throw std::invalid_argument("delta must lie in (0, pi)");
  if (!(phi.M > 0.0) || !(phi.M < 1.0)) throw std::invalid_argument("phi.M must lie in (0, 1)");
  if (!(phi.sigma > 0.0)) throw std::invalid_argument("phi.sigma must be positive");
}

PhiJet phi_jet(const WormConfig& cfg, double u) {
  const double v = std::abs(u) - 2.0 * cfg.r_flat;
  if (v <= 0.0) return {};
  const double s = cfg.phi.sigma;
  const double g = std::exp(-s / (v * v));
  if (g == 0.0) return {};
  const double v2 = v * v;
  const double v3 = v2 * v;
  const double dg = 2.0 * s / v3 * g;
  const double d2g = (4.0 * s * s / (v3 * v3) - 6.0 * s / (v2 * v2)) * g;
  const double sgn = u > 0.0 ? 1.0 : -1.0;
  return {cfg.phi.M * g, cfg.phi.M * sgn * dg, cfg.phi.M * d2g};
}

PhiValue eval_phi(const WormConfig& cfg, double u) {
  const PhiJet j = phi_jet(cfg, u);
  return {j.phi, j.d1};
}

PhiJet chart_profile_jet(const WormConfig& cfg, double u) {
  const PhiJet f = phi_jet(cfg, u);
  if (f.phi == 0.0 && f.d1 == 0.0 && f.d2 == 0.0) return {};
  const double q = std::sqrt(1.0 - f.phi);
  return {
      f.phi / (1.0 + q),  // 1 - q without cancellation
      f.d1 / (2.0 * q),
      f.d2 / (2.0 * q) + f.d1 * f.d1 / (4.0 * q * q * q),
  };
}

double defining_function(const WormConfig& cfg, cplx z1, cplx z2) {
  if (z2 == 0.0) throw std::invalid_argument("defining_function: z2 must be nonzero");
  const double l = std::log(std::norm(z2));
  const double phi = eval_phi(cfg, l).phi;
  return 1.0 - phi - std::norm(z1 + std::polar(1.0, l));
}

bool in_chart(const WormConfig& cfg, const ChartPoint& p) {
  return std::abs(p.x) < cfg.r_flat + cfg.delta && std::abs(p.t) < cfg.delta;
}

std::pair<cplx, cplx> boundary_chart(const WormConfig& cfg, const ChartPoint& p) {
  const double psi = chart_profile_jet(cfg, 2.0 * p.x).phi;
  const cplx z2 = std::exp(cplx(p.x, p.theta));
  // e^{it}(1-ψ) - 1 written to avoid cancellation near t = 0, ψ = 0.
  const cplx inner = expm1_i(p.t) * (1.0 - psi) - psi;
  const cplx z1 = std::polar(1.0, 2.0 * p.x) * inner;
  return {z1, z2};
}

namespace {

struct GammaParts {
  cplx numer;  // e^{-it} - 1 + ψ - iψ'
  double denom;
};

GammaParts gamma_parts(double t, const PhiJet& psi) {
  const double d = 1.0 - psi.phi;
  if (!(d > 0.0)) throw std::domain_error("gamma_coefficient: 1 - phi(2x) must be positive");
  return {expm1_i(-t) + psi.phi - kI * psi.d1, d};
}

}  // namespace

cplx gamma_coefficient(const WormConfig& cfg, double x, double t) {
  const PhiJet psi = chart_profile_jet(cfg, 2.0 * x);
  const GammaParts g = gamma_parts(t, psi);
  return 2.0 * g.numer / g.denom;
}

std::pair<cplx, cplx> gamma_gradient(const WormConfig& cfg, double x, double t) {
  const PhiJet psi = chart_profile_jet(cfg, 2.0 * x);
  const GammaParts g = gamma_parts(t, psi);
  // d/dx of ψ(2x) carries the chain factor 2.
  const cplx dn = 2.0 * psi.d1 - 2.0 * kI * psi.d2;
  const double dd = -2.0 * psi.d1;
  const cplx gx = 2.0 * (dn * g.denom - g.numer * dd) / (g.denom * g.denom);
  const cplx gt = -2.0 * kI * std::exp(-kI * t) / g.denom;
  return {gx, gt};
}

cplx alpha_coefficient(double t) {
  if (std::abs(t) < 1e-3) {
    // 2(e^{-it} - 1)/(it) = -2 Σ_{k>=0} (-it)^k / (k+1)!
    const cplx z = -kI * t;
    cplx term = 1.0;
    cplx sum = 0.0;
    for (int k = 0; k < 8; ++k) {
      sum += term / static_cast<double>(k + 1);
      term *= z / static_cast<double>(k + 1);
    }
    return -2.0 * sum;
  }
  return 2.0 * expm1_i(-t) / (kI * t);
}

double cr_annihilation_residual(const WormConfig& cfg, const ChartPoint& p, double h,
                                cplx gamma_shift) {
  if (!(h > 0.0)) throw std::invalid_argument("cr_annihilation_residual: step must be positive");
  const ChartPoint probes[] = {{p.x - h, p.theta, p.t}, {p.x + h, p.theta, p.t},
                               {p.x, p.theta, p.t - h}, {p.x, p.theta, p.t + h}};
  for (const auto& q : probes)
    if (!in_chart(cfg, q)) throw std::invalid_argument("cr_annihilation_residual: step leaves the chart");

  auto z = [&](double x, double th, double t) { return boundary_chart(cfg, {x, th, t}); };
  const auto xp = z(p.x + h, p.theta, p.t), xm = z(p.x - h, p.theta, p.t);
  const auto hp = z(p.x, p.theta + h, p.t), hm = z(p.x, p.theta - h, p.t);
  const auto tp = z(p.x, p.theta, p.t + h), tm = z(p.x, p.theta, p.t - h);
  const cplx g = gamma_coefficient(cfg, p.x, p.t) + gamma_shift;
  const double inv = 1.0 / (2.0 * h);

  const cplx l1 = (xp.first - xm.first) * inv + kI * (hp.first - hm.first) * inv +
                  g * (tp.first - tm.first) * inv;
  const cplx l2 = (xp.second - xm.second) * inv + kI * (hp.second - hm.second) * inv +
                  g * (tp.second - tm.second) * inv;
  return std::max(std::abs(l1), std::abs(l2));
}

LeviData levi_coefficients(const WormConfig& cfg, double x, double t) {
  const cplx g = gamma_coefficient(cfg, x, t);
  const auto [gx, gt] = gamma_gradient(cfg, x, t);
  return {-2.0 * gx.imag() - 2.0 * (std::conj(g) * gt).imag(), 0.0};
}

ScanGrid ScanGrid::full_chart(const WormConfig& cfg, int nx, int nt, double margin) {
  const double xs = (cfg.r_flat + cfg.delta) * (1.0 - margin);
  const double ts = cfg.delta * (1.0 - margin);
  return {-xs, xs, -ts, ts, nx, nt};
}

ScanGrid ScanGrid::flat_region(const WormConfig& cfg, int nx, int nt) {
  const double ts = cfg.delta * (1.0 - 1e-3);
  return {-cfg.r_flat, cfg.r_flat, -ts, ts, nx, nt};
}

namespace {
double node(double lo, double hi, int n, int i) {
  if (n == 1) return 0.5 * (lo + hi);
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}
}  // namespace

ScanReport pseudoconvexity_scan(const WormConfig& cfg, const ScanGrid& grid, double tol) {
  if (grid.nx < 1 || grid.nt < 1) throw std::invalid_argument("pseudoconvexity_scan: empty grid");
  ScanReport rep;
  rep.tolerance = tol;
  rep.min_mu = std::numeric_limits<double>::infinity();
  rep.samples.reserve(static_cast<std::size_t>(grid.nx) * grid.nt);
  const double thetas[] = {0.0, 1.0, -2.5};

  for (int i = 0; i < grid.nx; ++i) {
    const double x = node(grid.x_min, grid.x_max, grid.nx, i);
    for (int j = 0; j < grid.nt; ++j) {
      const double t = node(grid.t_min, grid.t_max, grid.nt, j);
      const LeviData L = levi_coefficients(cfg, x, t);
      rep.samples.push_back({x, t, L.mu, L.nu});
      if (L.mu < rep.min_mu) {
        rep.min_mu = L.mu;
        rep.argmin_x = x;
        rep.argmin_t = t;
      }
      if (L.mu < -tol) ++rep.violations;
      rep.max_abs_nu = std::max(rep.max_abs_nu, std::abs(L.nu));
      if (std::abs(x) <= cfg.r_flat) {
        rep.flat_max_deviation =
            std::max(rep.flat_max_deviation, std::abs(L.mu - 8.0 * (1.0 - std::cos(t))));
        if (t == 0.0) rep.flat_t0_max_abs_mu = std::max(rep.flat_t0_max_abs_mu, std::abs(L.mu));
      }
      for (double th : thetas) {
        const auto [z1, z2] = boundary_chart(cfg, {x, th, t});
        const double scale = 1.0 + std::norm(z1) + std::norm(z2);
        rep.chart_max_residual =
            std::max(rep.chart_max_residual, std::abs(defining_function(cfg, z1, z2)) / scale);
      }
    }
  }
  // The flat segment itself: μ must vanish exactly there.
  for (int i = 0; i < grid.nx; ++i) {
    const double x = node(-cfg.r_flat, cfg.r_flat, grid.nx, i);
    rep.flat_t0_max_abs_mu =
        std::max(rep.flat_t0_max_abs_mu, std::abs(levi_coefficients(cfg, x, 0.0).mu));
  }
  return rep;
}

}  // namespace worm::geometry
