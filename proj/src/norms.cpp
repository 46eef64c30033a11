#include "worm/norms.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace worm::norms {

double l2(const VectorXc& u, const GridSpec& g) { return l2_norm(u, g); }

double interval_l2(const VectorXc& f, double h) { return std::sqrt(h) * f.norm(); }

namespace {

double signed_freq(int k, int n, double h) {
  const int kk = k < n / 2 ? k : k - n;
  return 2.0 * kPi * kk / (n * h);
}

double multiplier(double xi, double tau, int order) {
  const double m2 = 1.0 + xi * xi + tau * tau;
  if (order == 1) return m2;
  if (order == -1) return 1.0 / m2;
  return 1.0;
}

}  // namespace

double sobolev(const VectorXc& u, const GridSpec& g, int order) {
  if (order < -1 || order > 1) throw std::invalid_argument("sobolev: order must be -1, 0 or 1");
  if (u.size() != g.size()) throw std::invalid_argument("sobolev: size mismatch");
  if (order == 0) return l2(u, g);
  Eigen::FFT<double> fft;
  const int px = 2 * (g.nx + 1);
  const double hx = g.hx();

  if (g.t_axis == TAxis::kLogFrequency) {
    const auto tau = g.t_nodes();
    const auto wt = g.t_weights();
    std::vector<cplx> in(px), out;
    double acc = 0.0;
    for (int j = 0; j < g.nt; ++j) {
      std::fill(in.begin(), in.end(), cplx(0.0));
      for (int i = 0; i < g.nx; ++i) in[i] = u[g.index(i, j)];
      fft.fwd(out, in);
      double col = 0.0;
      for (int k = 0; k < px; ++k) col += std::norm(out[k]) * multiplier(signed_freq(k, px, hx), tau[j], order);
      acc += wt[j] * hx / px * col;
    }
    return std::sqrt(acc);
  }
  if (g.t_axis != TAxis::kLinear)
    throw std::invalid_argument("sobolev: H^{-1}/H^1 need a linear or frequency t-axis");

  const int pt = g.periodic_t() ? 2 * g.nt : 2 * (g.nt + 1);
  const double ht = g.ht();
  // Transform along t, then along x.
  std::vector<std::vector<cplx>> rows(px, std::vector<cplx>(pt, 0.0));
  std::vector<cplx> in(pt), out;
  for (int i = 0; i < g.nx; ++i) {
    std::fill(in.begin(), in.end(), cplx(0.0));
    for (int j = 0; j < g.nt; ++j) in[j] = u[g.index(i, j)];
    fft.fwd(out, in);
    rows[i] = out;
  }
  std::vector<cplx> colin(px), colout;
  double acc = 0.0;
  for (int l = 0; l < pt; ++l) {
    for (int i = 0; i < px; ++i) colin[i] = rows[i][l];
    fft.fwd(colout, colin);
    const double tau = signed_freq(l, pt, ht);
    for (int k = 0; k < px; ++k) acc += std::norm(colout[k]) * multiplier(signed_freq(k, px, hx), tau, order);
  }
  return std::sqrt(acc * hx * ht / (static_cast<double>(px) * pt));
}

}  // namespace worm::norms
