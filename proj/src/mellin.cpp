#include "worm/mellin.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/FFT>

#include "worm/spectral.hpp"

namespace worm::mellin {

void MellinGrid::validate() const {
  if (n_t < 32) throw std::invalid_argument("mellin grid: n_t must be >= 32");
  if (!(t_min > 0.0) || !(t_max > t_min)) throw std::invalid_argument("mellin grid: need 0 < t_min < t_max");
  if (!(gamma_max > 0.0) || n_gamma < 2) throw std::invalid_argument("mellin grid: empty gamma range");
  if (dgamma() > kPi / span() * (1.0 + 1e-12))
    throw std::invalid_argument("mellin grid: gamma spacing exceeds pi / log-span (too sparse)");
}

double MellinGrid::span() const { return std::log(t_max / t_min); }
double MellinGrid::dy() const { return span() / (n_t - 1); }
double MellinGrid::dgamma() const { return 2.0 * gamma_max / n_gamma; }

std::vector<double> MellinGrid::y_nodes() const {
  std::vector<double> y(n_t);
  const double y0 = std::log(t_min), d = dy();
  for (int j = 0; j < n_t; ++j) y[j] = y0 + j * d;
  return y;
}

std::vector<double> MellinGrid::t_nodes() const {
  auto y = y_nodes();
  for (auto& v : y) v = std::exp(v);
  y.back() = t_max;
  return y;
}

std::vector<double> MellinGrid::gamma_nodes() const {
  std::vector<double> g(n_gamma);
  const double d = dgamma();
  for (int m = 0; m < n_gamma; ++m) g[m] = -gamma_max + m * d;
  return g;
}

MellinGrid MellinGrid::full_band(double t_min, double t_max, int n_t) {
  MellinGrid g;
  g.t_min = t_min;
  g.t_max = t_max;
  g.n_t = n_t;
  g.gamma_max = kPi / g.dy();
  g.n_gamma = 2 * n_t;
  return g;
}

MellinGrid MellinGrid::from_grid(const GridSpec& gs, double gamma_max, int n_gamma) {
  if (gs.t_axis != TAxis::kLog) throw std::invalid_argument("mellin grid: needs a log t-axis");
  MellinGrid g;
  g.t_min = gs.t_min;
  g.t_max = gs.t_max;
  g.n_t = gs.nt;
  g.gamma_max = gamma_max;
  g.n_gamma = n_gamma;
  return g;
}

namespace {

double taper(double t, double t_min, double t_max) {
  const double lo = std::log10(t / t_min), hi = std::log10(t_max / t);
  double w = 1.0;
  if (lo < 1.0) w *= 0.5 * (1.0 - std::cos(kPi * std::max(lo, 0.0)));
  if (hi < 1.0) w *= 0.5 * (1.0 - std::cos(kPi * std::max(hi, 0.0)));
  return w;
}

}  // namespace

MellinSample mellin_forward(const MellinGrid& g, const VectorXc& f, double offset, Window w) {
  g.validate();
  if (f.size() != g.n_t) throw std::invalid_argument("mellin_forward: sample count mismatch");
  if (w == Window::kCosineTaper && g.span() < 2.0 * std::log(10.0))
    throw std::invalid_argument("mellin_forward: taper needs at least two decades");
  const auto t = g.t_nodes();
  const auto y = g.y_nodes();
  VectorXc h(g.n_t);
  double peak = 0.0;
  for (int j = 0; j < g.n_t; ++j) {
    h[j] = f[j] * std::pow(t[j], offset);
    if (w == Window::kCosineTaper) h[j] *= taper(t[j], g.t_min, g.t_max);
    peak = std::max(peak, std::abs(h[j]));
  }
  if (w == Window::kNone && peak > 0.0) {
    const double ends = std::max(std::abs(h[0]), std::abs(h[g.n_t - 1]));
    if (ends > 1e-8 * peak)
      throw std::invalid_argument("mellin_forward: integrand does not decay at the grid ends (use a window)");
  }

  const auto gam = g.gamma_nodes();
  const int m = g.n_gamma;
  const double dy = g.dy(), dg = g.dgamma();
  std::vector<cplx> acc(m, 0.0), even(m, 0.0);
  for (int j = 0; j < g.n_t; ++j) {
    if (h[j] == 0.0) continue;
    cplx z = h[j] * std::polar(1.0, -gam[0] * y[j]);
    const cplx step = std::polar(1.0, -dg * y[j]);
    const bool is_even = j % 2 == 0;
    for (int k = 0; k < m; ++k) {
      acc[k] += z;
      if (is_even) even[k] += z;
      z *= step;
    }
  }
  MellinSample out;
  out.gamma = gam;
  out.offset = offset;
  out.dgamma = dg;
  out.values.resize(m);
  for (int k = 0; k < m; ++k) {
    out.values[k] = acc[k] * dy;
    out.error_estimate = std::max(out.error_estimate, std::abs(acc[k] * dy - even[k] * (2.0 * dy)));
  }
  return out;
}

cplx mellin_at(const MellinGrid& g, const VectorXc& f, double offset, double gamma) {
  g.validate();
  if (f.size() != g.n_t) throw std::invalid_argument("mellin_at: sample count mismatch");
  const auto t = g.t_nodes();
  const auto y = g.y_nodes();
  double peak = 0.0;
  cplx acc = 0.0;
  for (int j = 0; j < g.n_t; ++j) {
    const cplx h = f[j] * std::pow(t[j], offset);
    peak = std::max(peak, std::abs(h));
    acc += h * std::polar(1.0, -gamma * y[j]);
  }
  const double ends = std::max(std::abs(f[0]) * std::pow(t[0], offset),
                               std::abs(f[g.n_t - 1]) * std::pow(t[g.n_t - 1], offset));
  if (peak > 0.0 && ends > 1e-8 * peak)
    throw std::invalid_argument("mellin_at: integrand does not decay at the grid ends");
  return acc * g.dy();
}

VectorXc mellin_inverse(const MellinGrid& g, const MellinSample& F) {
  g.validate();
  if (static_cast<int>(F.gamma.size()) != F.values.size() || F.gamma.empty())
    throw std::invalid_argument("mellin_inverse: malformed sample");
  const double span = g.span();
  if (F.dgamma > kPi / span * (1.0 + 1e-12))
    throw std::invalid_argument("mellin_inverse: gamma grid too sparse for the log-t span");
  const auto t = g.t_nodes();
  const auto y = g.y_nodes();
  VectorXc f(g.n_t);
  const double dg = F.dgamma;
  for (int j = 0; j < g.n_t; ++j) {
    cplx z = std::polar(1.0, F.gamma[0] * y[j]);
    const cplx step = std::polar(1.0, dg * y[j]);
    cplx acc = 0.0;
    for (std::size_t k = 0; k < F.gamma.size(); ++k) {
      acc += F.values[static_cast<Eigen::Index>(k)] * z;
      z *= step;
    }
    f[j] = acc * dg / (2.0 * kPi) * std::pow(t[j], -F.offset);
  }
  return f;
}

namespace {

double weighted_sq(const VectorXc& f, const std::vector<double>& t, double power, double dy) {
  double acc = 0.0;
  for (int j = 0; j < f.size(); ++j) acc += std::norm(f[j]) * std::pow(t[j], power);
  return acc * dy;
}

double spectral_sq(const MellinSample& F) {
  double acc = 0.0;
  for (int k = 0; k < F.values.size(); ++k) acc += std::norm(F.values[k]);
  return acc * F.dgamma / (2.0 * kPi);
}

}  // namespace

PlancherelDefect plancherel_defect(const MellinGrid& g, const VectorXc& f) {
  PlancherelDefect d;
  const auto t = g.t_nodes();
  const double l0 = weighted_sq(f, t, 0.0, g.dy());
  const double l1 = weighted_sq(f, t, 1.0, g.dy());
  if (l0 > 0.0) d.dt_over_t = std::abs(l0 - spectral_sq(mellin_forward(g, f, 0.0))) / l0;
  if (l1 > 0.0) d.dt = std::abs(l1 - spectral_sq(mellin_forward(g, f, 0.5))) / l1;
  return d;
}

double tdt_symbol_defect(const MellinGrid& g, const VectorXc& f) {
  g.validate();
  if (f.size() != g.n_t) throw std::invalid_argument("tdt_symbol_defect: sample count mismatch");
  if (f.norm() == 0.0) return 0.0;
  const int n = g.n_t;
  Eigen::FFT<double> fft;
  std::vector<cplx> in(f.data(), f.data() + n), spec;
  fft.fwd(spec, in);
  const double L = n * g.dy();
  for (int k = 0; k < n; ++k) {
    const int kk = k < n / 2 ? k : k - n;
    spec[k] *= (2 * k == n) ? cplx(0.0) : kI * (2.0 * kPi * kk / L);
  }
  std::vector<cplx> df;
  fft.inv(df, spec);
  const VectorXc dfv = Eigen::Map<const VectorXc>(df.data(), n);
  const MellinSample lhs = mellin_forward(g, dfv, 0.0);
  const MellinSample F = mellin_forward(g, f, 0.0);
  double num = 0.0, den = 0.0;
  for (int k = 0; k < F.values.size(); ++k) {
    num += std::norm(lhs.values[k] - kI * F.gamma[k] * F.values[k]);
    den += std::norm(F.values[k]);
  }
  return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

double shift_identity_defect(const MellinGrid& g, const VectorXc& f) {
  const auto t = g.t_nodes();
  VectorXc hf(f.size());
  for (int j = 0; j < f.size(); ++j) hf[j] = std::sqrt(t[j]) * f[j];
  const MellinSample a = mellin_forward(g, hf, 0.0);
  const MellinSample b = mellin_forward(g, f, 0.5);
  const double scale = b.values.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (a.values - b.values).cwiseAbs().maxCoeff() / scale;
}

double round_trip_defect(const MellinGrid& g, const VectorXc& f) {
  const double nf = f.norm();
  if (nf == 0.0) return mellin_inverse(g, mellin_forward(g, f, 0.0)).norm();
  return (mellin_inverse(g, mellin_forward(g, f, 0.0)) - f).norm() / nf;
}

std::vector<MellinSample> mellin_forward_rows(const MellinGrid& g, const VectorXc& u, int nx,
                                              double offset, Window w) {
  if (u.size() != static_cast<Eigen::Index>(nx) * g.n_t)
    throw std::invalid_argument("mellin_forward_rows: size mismatch");
  std::vector<MellinSample> rows;
  rows.reserve(nx);
  for (int i = 0; i < nx; ++i)
    rows.push_back(mellin_forward(g, u.segment(static_cast<Eigen::Index>(i) * g.n_t, g.n_t), offset, w));
  return rows;
}

double conjugation_defect(const GridSpec& grid, const MellinGrid& mg, const VectorXc& u, double s,
                          const OdeCoefficients& c) {
  if (grid.t_axis != TAxis::kLog || grid.nt != mg.n_t || grid.t_min != mg.t_min ||
      grid.t_max != mg.t_max)
    throw std::invalid_argument("conjugation_defect: grid mismatch between operator and Mellin grids");
  if (u.size() != grid.size()) throw std::invalid_argument("conjugation_defect: grid mismatch");
  if (c.kappa != 0.0) throw std::invalid_argument("conjugation_defect: needs kappa = 0");
  if (u.norm() == 0.0) return 0.0;
  const VectorXc Lu = assemble_calL(s, c, grid, AChoice::kZero).apply(u);
  const auto lhs = mellin_forward_rows(mg, Lu, grid.nx, 0.0);
  const auto uh = mellin_forward_rows(mg, u, grid.nx, 0.0);
  const auto xs = grid.x_nodes();
  const double hx = grid.hx();

  std::vector<double> norms(mg.n_gamma, 0.0);
  for (int k = 0; k < mg.n_gamma; ++k)
    for (int i = 0; i < grid.nx; ++i) norms[k] += std::norm(uh[i].values[k]);
  const double top = *std::max_element(norms.begin(), norms.end());

  double worst = 0.0;
  VectorXc col(grid.nx), ref(grid.nx);
  for (int k = 0; k < mg.n_gamma; ++k) {
    if (norms[k] < 1e-12 * top) continue;  // ‖û‖ >= 1e-6 of its max
    for (int i = 0; i < grid.nx; ++i) {
      col[i] = uh[i].values[k];
      ref[i] = lhs[i].values[k];
    }
    const cplx zeta(c.sign_s * s, uh[0].gamma[k]);
    const VectorXc Hu = spectral::apply_H(spectral::assemble_H(zeta, c), xs, hx, col);
    worst = std::max(worst, (ref - Hu).norm() / col.norm());
  }
  return worst;
}

}  // namespace worm::mellin
