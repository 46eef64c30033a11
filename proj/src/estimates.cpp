#include "worm/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include <Eigen/SparseLU>

#include "worm/mellin.hpp"
#include "worm/norms.hpp"
#include "worm/parallel.hpp"
#include "worm/spectral.hpp"

namespace worm::estimates {

namespace {

constexpr double kViolationSlack = 1e-6;
constexpr double kInf = std::numeric_limits<double>::infinity();

double lookup(const KeyValues& kv, const std::string& key) {
  for (const auto& [k, v] : kv)
    if (k == key) return v;
  throw std::out_of_range("no key '" + key + "'");
}

void finish_ratio(EstimateRecord& r) {
  if (r.rhs == 0.0) {
    r.ratio = 0.0;
    r.flag = "N/A";
    return;
  }
  r.ratio = r.lhs / r.rhs;
  if (r.ratio > 1.0 + kViolationSlack && r.flag.empty()) r.flag = "violation";
}

cplx complex_normal(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

double trapezoid_sq(const VectorXc& f, int a, int b, double h) {
  double acc = 0.0;
  for (int i = a; i <= b; ++i) acc += std::norm(f[i]);
  acc -= 0.5 * (std::norm(f[a]) + std::norm(f[b]));
  return h * acc;
}

VectorXc gradient(const VectorXc& f, double h) {
  const int n = static_cast<int>(f.size());
  VectorXc d(n);
  for (int i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
  d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
  d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
  return d;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

double EstimateRecord::param(const std::string& key) const { return lookup(params, key); }
double EstimateRecord::extra_value(const std::string& key) const { return lookup(extra, key); }

void EstimateReport::add(EstimateRecord r) {
  if (r.flag == "violation") ++violations;
  if (!std::isnan(r.ratio)) {
    if (argmax < 0 || r.ratio > best_ratio) {
      best_ratio = std::max(best_ratio, r.ratio);
      argmax = static_cast<int>(records.size());
    }
  }
  records.push_back(std::move(r));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 over the pair
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------- lemma 2

std::vector<EstimateRecord> lemma2_check(const std::vector<double>& xs, const VectorXc& f,
                                         double eps) {
  const int n = static_cast<int>(xs.size());
  if (n < 3 || f.size() != n) throw std::invalid_argument("lemma2: need >= 3 samples of matching size");
  if (!(eps > 0.0)) throw std::invalid_argument("lemma2: eps must be positive");
  const double h = (xs.back() - xs.front()) / (n - 1);
  for (int i = 1; i < n; ++i)
    if (std::abs(xs[i] - xs[i - 1] - h) > 1e-9 * h) throw std::invalid_argument("lemma2: grid must be uniform");
  int i0 = -1;
  for (int i = 0; i < n; ++i)
    if (std::abs(xs[i]) <= 1e-9 * h) i0 = i;
  if (i0 < 0) throw std::invalid_argument("lemma2: 0 must be a grid node");
  const double ratio = eps / h;
  const int m = static_cast<int>(std::lround(ratio));
  if (std::abs(ratio - m) > 1e-6 * std::max(1.0, ratio))
    throw std::invalid_argument("lemma2: eps must be a multiple of the grid spacing");
  if (m < 8) throw std::invalid_argument("lemma2: eps under-resolved (fewer than 8 cells)");
  if (i0 - 2 * m < 0 || i0 + 2 * m >= n) throw std::invalid_argument("lemma2: ±2eps outside the grid");

  const VectorXc df = gradient(f, h);
  const double dnorm = std::sqrt(trapezoid_sq(df, 0, n - 1, h));
  const double right = std::sqrt(trapezoid_sq(f, i0 + m, i0 + 2 * m, h));
  const double left = std::sqrt(trapezoid_sq(f, i0 - 2 * m, i0 - m, h));

  EstimateRecord first;
  first.id = "lemma2";
  first.family = "interval";
  first.params = {{"eps", eps}};
  first.lhs = right;
  first.rhs = 2.0 * (left + eps * dnorm);
  first.extra = {{"f_left", left}, {"df_norm", dnorm}};
  finish_ratio(first);

  EstimateRecord second;
  second.id = "lemma2";
  second.family = "trace";
  second.params = {{"eps", eps}};
  second.lhs = std::abs(f[i0] - f[i0 - m]);
  second.rhs = std::sqrt(eps) * dnorm;
  second.extra = {{"df_norm", dnorm}};
  finish_ratio(second);
  return {first, second};
}

EstimateReport lemma2_sweep(const Lemma2Params& p, int jobs) {
  if (p.trials < 1 || p.n < 33 || p.n % 2 == 0) throw std::invalid_argument("lemma2: need trials >= 1 and odd n >= 33");
  if (!(p.half_width > 0.0) || p.modes < 1 || !(p.max_frequency > 0.0))
    throw std::invalid_argument("lemma2: half_width, modes and max_frequency must be positive");
  std::vector<double> xs(p.n);
  const double h = 2.0 * p.half_width / (p.n - 1);
  const int mid = (p.n - 1) / 2;
  for (int i = 0; i < p.n; ++i) xs[i] = (i - mid) * h;
  const int m_max = mid / 2;
  if (m_max < 8) throw std::invalid_argument("lemma2: grid too coarse for eps >= 8 cells");

  std::vector<std::vector<EstimateRecord>> slots(p.trials);
  parallel_for(p.trials, jobs, [&](int k) {
    std::mt19937_64 rng(derive_seed(p.seed, static_cast<std::uint64_t>(k)));
    std::uniform_real_distribution<double> freq(0.0, p.max_frequency);
    std::uniform_int_distribution<int> cells(8, m_max);
    std::vector<double> w(p.modes);
    std::vector<cplx> a(p.modes), b(p.modes);
    for (int j = 0; j < p.modes; ++j) {
      w[j] = freq(rng);
      a[j] = complex_normal(rng);
      b[j] = complex_normal(rng);
    }
    const cplx c0 = complex_normal(rng);
    const int m = cells(rng);
    VectorXc f(p.n);
    for (int i = 0; i < p.n; ++i) {
      cplx acc = c0;
      for (int j = 0; j < p.modes; ++j) acc += a[j] * std::cos(w[j] * xs[i]) + b[j] * std::sin(w[j] * xs[i]);
      f[i] = acc;
    }
    auto recs = lemma2_check(xs, f, m * h);
    for (auto& r : recs) r.params.emplace_back("trial", k);
    slots[k] = std::move(recs);
  });

  EstimateReport rep;
  rep.id = "lemma2";
  rep.seed = p.seed;
  for (auto& s : slots)
    for (auto& r : s) rep.add(std::move(r));
  return rep;
}

// ------------------------------------------------------------ large |γ|

double bound_5_2_anchor(const OdeCoefficients& c, double s, double gamma) {
  if (!c.a.is_constant() || !c.beta1.is_zero() || !c.beta2.is_zero() || !c.beta3.is_zero())
    throw std::invalid_argument("bound_5_2_anchor: needs constant a and vanishing betas");
  const double k0 = kPi / (2.0 * c.r);
  const cplx zeta(static_cast<double>(c.sign_s) * s, gamma);
  const double a = c.a(0.0);
  const double den = std::abs(zeta * zeta * a * a - k0 * k0);
  return (gamma * gamma + std::abs(gamma) * k0) / den;
}

namespace {

struct SineSeries {
  std::vector<cplx> coef;  // coefficient of sin(kπ(x + r)/2r), k = 1..
  double r = 1.0;
  void jet(double x, cplx& f, cplx& df, cplx& d2f) const {
    f = df = d2f = 0.0;
    for (std::size_t k = 0; k < coef.size(); ++k) {
      const double w = (k + 1) * kPi / (2.0 * r);
      const double arg = w * (x + r);
      f += coef[k] * std::sin(arg);
      df += coef[k] * w * std::cos(arg);
      d2f -= coef[k] * w * w * std::sin(arg);
    }
  }
};

// (γ²‖f‖ + |γ|‖f'‖) / ‖H_ζ f‖ on a uniform closed grid of n + 2 nodes.
double large_gamma_ratio(const spectral::HCoefficients& H, const SineSeries& f, double gamma, int n) {
  const double r = f.r;
  const double h = 2.0 * r / (n + 1);
  VectorXc v(n + 2), dv(n + 2), hv(n + 2);
  for (int i = 0; i < n + 2; ++i) {
    const double x = -r + i * h;
    cplx a, b, c;
    f.jet(x, a, b, c);
    v[i] = a;
    dv[i] = b;
    hv[i] = spectral::apply_H_expanded(H, x, a, b, c);
  }
  const double nf = std::sqrt(trapezoid_sq(v, 0, n + 1, h));
  const double ndf = std::sqrt(trapezoid_sq(dv, 0, n + 1, h));
  const double nh = std::sqrt(trapezoid_sq(hv, 0, n + 1, h));
  if (nh == 0.0) return kInf;
  return (gamma * gamma * nf + std::abs(gamma) * ndf) / nh;
}

}  // namespace

EstimateReport bound_5_2_sweep(const OdeCoefficients& c, const Bound52Params& p, int jobs) {
  c.validate();
  if (p.gammas.empty()) throw std::invalid_argument("bound_5_2: empty gamma list");
  if (p.trials < 1 || p.n < 16 || p.modes < 1) throw std::invalid_argument("bound_5_2: need trials >= 1, n >= 16, modes >= 1");
  const int ng = static_cast<int>(p.gammas.size());
  std::vector<EstimateRecord> slots(ng);
  parallel_for(ng, jobs, [&](int k) {
    const double gamma = p.gammas[k];
    const cplx zeta(static_cast<double>(c.sign_s) * p.s, gamma);
    const auto H = spectral::assemble_H(zeta, c);
    EstimateRecord rec;
    rec.id = "bound_large_gamma";
    rec.family = "sine_series";
    rec.params = {{"s", p.s}, {"gamma", gamma}};
    if (gamma == 0.0) {
      rec.flag = "N/A";
      rec.extra = {{"trials", 0}};
      slots[k] = rec;
      return;
    }
    SineSeries first{{cplx(1.0)}, c.r};
    const double measured_anchor = large_gamma_ratio(H, first, gamma, p.n);
    double best = measured_anchor;
    std::mt19937_64 rng(derive_seed(p.seed, static_cast<std::uint64_t>(k)));
    for (int t = 0; t < p.trials; ++t) {
      SineSeries f;
      f.r = c.r;
      for (int j = 0; j < p.modes; ++j) f.coef.push_back(complex_normal(rng) / double(j + 1));
      best = std::max(best, large_gamma_ratio(H, f, gamma, p.n));
    }
    rec.lhs = best;
    rec.rhs = 1.0;
    rec.ratio = best;
    rec.extra = {{"anchor_measured", measured_anchor}, {"trials", p.trials}};
    if (c.a.is_constant() && c.beta1.is_zero() && c.beta2.is_zero() && c.beta3.is_zero())
      rec.extra.emplace_back("anchor_closed_form", bound_5_2_anchor(c, p.s, gamma));
    slots[k] = rec;
  });
  EstimateReport rep;
  rep.id = "bound_large_gamma";
  rep.seed = p.seed;
  for (auto& r : slots) rep.add(std::move(r));
  return rep;
}

double bound_5_2_flatness(const EstimateReport& r, double lo, double hi) {
  double mx = 0.0, mn = kInf;
  int count = 0;
  for (const auto& rec : r.records) {
    if (rec.flag == "N/A") continue;
    const double g = std::abs(rec.param("gamma"));
    if (g < lo || g > hi) continue;
    mx = std::max(mx, rec.ratio);
    mn = std::min(mn, rec.ratio);
    ++count;
  }
  if (count == 0) throw std::invalid_argument("bound_5_2_flatness: no records in range");
  return mx / mn;
}

// --------------------------------------------------------- line estimate

EstimateRecord bound_5_1_point(const OdeCoefficients& c, double s, double gamma, int n, int trials,
                               int modes, std::uint64_t seed) {
  c.validate();
  if (n < 64) throw std::invalid_argument("bound_5_1: n must be >= 64");
  if (trials < 1 || modes < 1) throw std::invalid_argument("bound_5_1: trials and modes must be >= 1");
  using ColMat = Eigen::SparseMatrix<cplx, Eigen::ColMajor>;
  const cplx zeta(static_cast<double>(c.sign_s) * s, gamma);
  const double J = std::sqrt(1.0 + std::norm(zeta));
  const double r = c.r;
  const double h = 2.0 * r / (n + 1);
  const auto H = spectral::assemble_H(zeta, c);
  const auto xs = spectral::dirichlet_nodes(c, n);
  const ColMat M = spectral::dirichlet_H_matrix(zeta, c, n);

  EstimateRecord rec;
  rec.id = "bound_line";
  rec.family = "dirichlet_fd";
  rec.params = {{"s", s}, {"gamma", gamma}};
  rec.rhs = 1.0;

  const auto sm = spectral::dirichlet_sigma_min(zeta, c, n);
  Eigen::SparseLU<ColMat> lu;
  lu.compute(M);
  if (sm.singular || lu.info() != Eigen::Success) {
    rec.lhs = kInf;
    rec.ratio = kInf;
    rec.flag = "singular-expected";
    rec.extra = {{"J", J}, {"sigma_min", 0.0}};
    return rec;
  }

  // closed-grid vector [f(-r), f_1 .. f_n, f(r)]
  auto lhs_of = [&](const VectorXc& F) {
    const double nf = std::sqrt(trapezoid_sq(F, 0, n + 1, h));
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) acc += std::norm((F[i + 1] - F[i]) / h);
    return nf + std::sqrt(h * acc) / J;
  };
  auto embed = [&](const VectorXc& f, cplx b0, cplx b1) {
    VectorXc F(n + 2);
    F[0] = b0;
    F.segment(1, n) = f;
    F[n + 1] = b1;
    return F;
  };
  auto interior_norm = [&](const VectorXc& v) { return std::sqrt(h) * v.norm(); };

  // homogeneous solutions with boundary data (1, 0) and (0, 1)
  VectorXc e0 = VectorXc::Zero(n), e1 = VectorXc::Zero(n);
  e0[0] = -(1.0 / (h * h) - H.p(xs[0]) / (2.0 * h));
  e1[n - 1] = -(1.0 / (h * h) + H.p(xs[n - 1]) / (2.0 * h));
  const VectorXc F0 = embed(lu.solve(e0), 1.0, 0.0);
  const VectorXc F1 = embed(lu.solve(e1), 0.0, 1.0);
  double homogeneous = 0.0;
  for (int a = 0; a <= 16; ++a) {
    const double th = a * (kPi / 2.0) / 16.0;
    for (int b = 0; b < 16; ++b) {
      const cplx ph = std::polar(1.0, 2.0 * kPi * b / 16.0);
      const double ca = std::cos(th), sa = std::sin(th);
      const VectorXc F = ca * F0 + (sa * ph) * F1;
      const double data = std::pow(J, -0.5) * (std::abs(ca) + std::abs(sa));
      homogeneous = std::max(homogeneous, lhs_of(F) / data);
    }
  }
  const double anchor = lhs_of(F1) / std::pow(J, -0.5);

  std::mt19937_64 rng(seed);
  double phi_best = 0.0;
  for (int t = 0; t < trials; ++t) {
    VectorXc phi(n);
    std::vector<cplx> co(modes), ce(modes);
    for (int j = 0; j < modes; ++j) {
      co[j] = complex_normal(rng) / double(j + 1);
      ce[j] = complex_normal(rng) / double(j + 1);
    }
    for (int i = 0; i < n; ++i) {
      cplx acc = 0.0;
      for (int j = 0; j < modes; ++j)
        acc += co[j] * std::sin((j + 1) * kPi * (xs[i] + r) / (2.0 * r)) +
               ce[j] * std::cos(j * kPi * xs[i] / (2.0 * r));
      phi[i] = acc;
    }
    const VectorXc f = lu.solve(phi);
    phi_best = std::max(phi_best, lhs_of(embed(f, 0.0, 0.0)) / (std::pow(J, -2.0) * interior_norm(phi)));
  }
  const VectorXc hv = M * sm.right_vector;
  const double worst =
      lhs_of(embed(sm.right_vector, 0.0, 0.0)) / (std::pow(J, -2.0) * interior_norm(hv));

  double psi_best = 0.0;
  for (int t = 0; t < trials; ++t) {
    VectorXc psi(n + 2);
    std::vector<cplx> co(modes);
    for (int j = 0; j < modes; ++j) co[j] = complex_normal(rng) / double(j + 1);
    for (int i = 0; i < n + 2; ++i) {
      const double x = -r + i * h;
      cplx acc = 0.0;
      for (int j = 0; j < modes; ++j) acc += co[j] * std::cos(j * kPi * (x + r) / (2.0 * r));
      psi[i] = acc;
    }
    VectorXc dpsi(n);
    for (int i = 0; i < n; ++i) dpsi[i] = (psi[i + 2] - psi[i]) / (2.0 * h);
    const VectorXc f = lu.solve(dpsi);
    const double den = std::pow(J, -1.0) * std::sqrt(trapezoid_sq(psi, 0, n + 1, h));
    psi_best = std::max(psi_best, lhs_of(embed(f, 0.0, 0.0)) / den);
  }

  rec.lhs = std::max({homogeneous, phi_best, worst, psi_best});
  rec.ratio = rec.lhs;
  const double sigma = sm.value;
  if (sigma / (J * J) < 1e-3) rec.flag = "singular-expected";
  rec.extra = {{"J", J},
               {"sigma_min", sigma},
               {"homogeneous_max", homogeneous},
               {"phi_max", phi_best},
               {"worst_vector", worst},
               {"psi_max", psi_best},
               {"anchor_homogeneous", anchor}};
  return rec;
}

EstimateReport bound_5_1_constant(const OdeCoefficients& c, const Bound51Params& p, int jobs) {
  if (p.gammas.empty()) throw std::invalid_argument("bound_5_1: empty gamma list");
  const int ng = static_cast<int>(p.gammas.size());
  std::vector<EstimateRecord> slots(ng);
  parallel_for(ng, jobs, [&](int k) {
    slots[k] = bound_5_1_point(c, p.s, p.gammas[k], p.n, p.trials, p.modes,
                               derive_seed(p.seed, static_cast<std::uint64_t>(k)));
  });
  EstimateReport rep;
  rep.id = "bound_line";
  rep.seed = p.seed;
  for (auto& r : slots) rep.add(std::move(r));
  return rep;
}

// ------------------------------------------------------ weighted integrals

Field lemma5_packet(double r, double delta, double tau0) {
  const double R = r + delta;
  return [R, delta, tau0](double x, double t) -> cplx {
    if (std::abs(x) >= R) return 0.0;
    const double cx = std::cos(kPi * x / (2.0 * R));
    const double z = 5.0 * t / delta;
    return cx * cx * std::exp(-z * z) * std::polar(1.0, tau0 * t);
  };
}

EstimateRecord lemma5_weighted_integrals(const Field& u, const OdeCoefficients& c,
                                         const Lemma5Params& p) {
  c.validate();
  if (c.kappa != 0.0) throw std::invalid_argument("lemma5: needs kappa = 0");
  if (!(p.delta > 0.0) || p.nx < 8 || p.nt_log < 32 || p.nt_linear < 8)
    throw std::invalid_argument("lemma5: need delta > 0, nx >= 8, nt_log >= 32, nt_linear >= 8");
  if (!(p.t_min > 0.0 && p.t_min < p.delta)) throw std::invalid_argument("lemma5: need 0 < t_min < delta");

  GridSpec glin;
  glin.nx = p.nx;
  glin.nt = p.nt_linear;
  glin.r = c.r;
  glin.delta = p.delta;
  glin.t_axis = TAxis::kLinear;
  glin.bc = BoundaryCondition::kPeriodicT;
  glin.validate();
  const VectorXc ulin = sample(glin, u);

  // support check on the closed box boundary
  {
    const double R = glin.x_half();
    double inner_max = ulin.cwiseAbs().maxCoeff(), edge = 0.0;
    for (int k = 0; k <= 64; ++k) {
      const double a = -R + 2.0 * R * k / 64.0, b = -p.delta + 2.0 * p.delta * k / 64.0;
      edge = std::max({edge, std::abs(u(a, -p.delta)), std::abs(u(a, p.delta)), std::abs(u(-R, b)),
                       std::abs(u(R, b))});
    }
    if (edge > 1e-8 * std::max(inner_max, 1e-300) && edge > 0.0)
      throw std::invalid_argument("lemma5: u is not supported in W");
  }

  GridSpec glog;
  glog.nx = p.nx;
  glog.nt = p.nt_log;
  glog.r = c.r;
  glog.delta = p.delta;
  glog.t_axis = TAxis::kLog;
  glog.t_min = p.t_min;
  glog.t_max = 1.5 * p.delta;  // covers the Gaussian tail beyond |t| = δ
  glog.validate();
  const VectorXc ulog = sample(glog, u);
  const SpMat A = assemble_A(p.achoice, glog).matrix;
  const VectorXc Lu = assemble_calL(p.s, c, glog, p.achoice).apply(ulog);
  const VectorXc Au = A * ulog;
  const VectorXc Phi = Lu - Au;
  const VectorXc Psi = -2.0 * Au;

  const auto mg = mellin::MellinGrid::full_band(glog.t_min, glog.t_max, glog.nt);
  const auto phi_rows = mellin::mellin_forward_rows(mg, Phi, glog.nx, 0.5);
  const bool has_psi = Psi.cwiseAbs().maxCoeff() > 0.0;
  std::vector<mellin::MellinSample> psi_rows;
  if (has_psi) psi_rows = mellin::mellin_forward_rows(mg, Psi, glog.nx, 0.5);

  const auto xs = glog.x_nodes();
  const auto ts = glog.t_nodes();
  const double hx = glog.hx(), dy = glog.dy();
  const double cprime = 1.0 / (2.0 * kPi);
  double lhs1 = 0.0, lhs2 = 0.0, unweighted = 0.0, direct = 0.0, calL_sq = 0.0;
  for (int i = 0; i < glog.nx; ++i) {
    if (std::abs(xs[i]) > c.r) continue;
    const auto& F = phi_rows[i];
    for (std::size_t m = 0; m < F.gamma.size(); ++m) {
      const double g2 = 1.0 + F.gamma[m] * F.gamma[m];
      const double w = hx * F.dgamma * cprime;
      const double a = std::norm(F.values[m]);
      lhs1 += w * a / (g2 * g2);
      unweighted += w * a;
      if (has_psi) lhs2 += w * std::norm(psi_rows[i].values[m]) / g2;
    }
    for (int j = 0; j < glog.nt; ++j) {
      direct += hx * dy * ts[j] * std::norm(Phi[glog.index(i, j)]);
      calL_sq += hx * dy * ts[j] * std::norm(Lu[glog.index(i, j)]);
    }
  }

  const ModelEvaluator ev(p.s, c, glin, p.achoice);
  const auto parts = ev.parts(ulin);
  const double B = parts.frak_b();
  const double rhs1 = p.delta * p.delta * parts.u * parts.u + B * B;
  const double rhs2 = p.delta * p.delta * parts.dx * parts.dx + B * B;

  EstimateRecord rec;
  rec.id = "lemma5";
  rec.family = to_string(p.achoice);
  rec.params = {{"s", p.s}, {"delta", p.delta}};
  rec.lhs = lhs1;
  rec.rhs = rhs1;
  finish_ratio(rec);
  const double ratio2 = rhs2 > 0.0 ? lhs2 / rhs2 : 0.0;
  if (ratio2 > 1.0 + kViolationSlack && rec.flag.empty()) rec.flag = "violation";
  rec.extra = {{"lhs2", lhs2},
               {"rhs2", rhs2},
               {"ratio2", ratio2},
               {"frak_b", B},
               {"calL_norm", parts.calL},
               {"h_minus1", parts.h_minus1},
               {"q_h1", parts.q_h1},
               {"u_norm", parts.u},
               {"dxu_norm", parts.dx},
               {"delta2_u2", p.delta * p.delta * parts.u * parts.u},
               {"direct_phi_sq", direct},
               {"unweighted_phi_sq", unweighted},
               {"plancherel_consistency", direct > 0.0 ? std::abs(unweighted - direct) / direct : 0.0},
               {"calL_half_sq", calL_sq}};
  return rec;
}

// ------------------------------------------------- model operator constants

ModelEvaluator::ModelEvaluator(double s, const OdeCoefficients& c, const GridSpec& g, AChoice a)
    : g_(g),
      calL_(assemble_calL(s, c, g, a)),
      lbar_(assemble_Lbar(s, c, g)),
      l_(assemble_L(s, c, g)),
      q_(build_Q_cutoff(g)),
      dx_(stencil::kron(stencil::d1(g.nx, g.hx()), stencil::identity(g.nt))) {}

ModelEvaluator::Parts ModelEvaluator::parts(const VectorXc& u) const {
  if (u.size() != g_.size()) throw std::invalid_argument("ModelEvaluator: size mismatch");
  Parts p;
  p.u = norms::l2(u, g_);
  p.lbar = norms::l2(lbar_.apply(u), g_);
  p.l = norms::l2(l_.apply(u), g_);
  p.calL = norms::l2(calL_.apply(u), g_);
  p.h_minus1 = norms::sobolev(u, g_, -1);
  p.q_h1 = norms::sobolev(q_.apply(u), g_, 1);
  p.dx = norms::l2(dx_ * u, g_);
  return p;
}

double ModelEvaluator::prop2_ratio(const VectorXc& u) const {
  const Parts p = parts(u);
  const double den = p.frak_b();
  if (den == 0.0) return 0.0;
  return (p.u + p.lbar + p.l) / den;
}

double ModelEvaluator::lemma1_ratio(const VectorXc& u) const {
  const Parts p = parts(u);
  const double den = p.u + p.calL + p.q_h1;
  if (den == 0.0) return 0.0;
  return p.dx / den;
}

namespace {

void require_frequency(const GridSpec& g) {
  g.validate();
  if (g.t_axis != TAxis::kLogFrequency) throw std::invalid_argument("needs a frequency t-axis");
}

// y = log|τ| per node
std::vector<double> frequency_y(const GridSpec& g) {
  const auto tau = g.t_nodes();
  std::vector<double> y(tau.size());
  for (std::size_t j = 0; j < tau.size(); ++j) y[j] = std::log(std::abs(tau[j]));
  return y;
}

}  // namespace

VectorXc frequency_packet(const GridSpec& g, const PacketParams& p) {
  require_frequency(g);
  if (p.sign != 1 && p.sign != -1) throw std::invalid_argument("packet: sign must be ±1");
  if (!(p.ell > 0.0)) throw std::invalid_argument("packet: ell must be positive");
  const double R = g.x_half();
  const auto tau = g.t_nodes();
  const auto y = frequency_y(g);
  const auto xs = g.x_nodes();
  VectorXc u = VectorXc::Zero(g.size());
  for (int j = 0; j < g.nt; ++j) {
    if ((tau[j] > 0) != (p.sign > 0)) continue;
    const double d = y[j] - p.y0;
    if (std::abs(d) >= p.ell) continue;
    const double cw = std::cos(kPi * d / (2.0 * p.ell));
    const cplx wt = cw * cw * std::polar(1.0, -p.eta * y[j]) / std::sqrt(std::abs(tau[j]));
    for (int i = 0; i < g.nx; ++i)
      u[g.index(i, j)] = std::cos(kPi * xs[i] / (2.0 * R)) * std::polar(1.0, p.xi * xs[i]) * wt;
  }
  return u;
}

VectorXc frequency_random_field(const GridSpec& g, std::uint64_t seed) {
  require_frequency(g);
  std::mt19937_64 rng(seed);
  const double R = g.x_half();
  const auto tau = g.t_nodes();
  const auto y = frequency_y(g);
  const auto xs = g.x_nodes();
  const double ylo = -std::log(g.delta), yhi = ylo + g.log_span;
  VectorXc u = VectorXc::Zero(g.size());
  for (int sign : {-1, 1}) {
    std::vector<cplx> cx(4), cy(4);
    for (int k = 0; k < 4; ++k) {
      cx[k] = complex_normal(rng) / double(k + 1);
      cy[k] = complex_normal(rng) / double(k + 1);
    }
    for (int j = 0; j < g.nt; ++j) {
      if ((tau[j] > 0) != (sign > 0)) continue;
      const double z = (y[j] - ylo) / (yhi - ylo);
      const double env = std::pow(std::sin(kPi * z), 2);
      cplx wt = 0.0;
      for (int k = 0; k < 4; ++k) wt += cy[k] * std::polar(1.0, 2.0 * kPi * k * z);
      wt *= env / std::sqrt(std::abs(tau[j]));
      for (int i = 0; i < g.nx; ++i) {
        cplx xv = 0.0;
        for (int k = 0; k < 4; ++k) xv += cx[k] * std::sin((k + 1) * kPi * (xs[i] + R) / (2.0 * R));
        u[g.index(i, j)] = xv * wt;
      }
    }
  }
  return u;
}

EstimateRecord prop2_constant(double s, const OdeCoefficients& c, const GridSpec& g,
                              const Prop2Params& p, std::uint64_t stream) {
  require_frequency(g);
  if (p.trials < 0 || p.nm_evals < 0) throw std::invalid_argument("prop2: trials and nm_evals must be >= 0");
  const ModelEvaluator ev(s, c, g, p.achoice);
  const std::uint64_t seed = derive_seed(p.seed, stream);

  double random_best = 0.0;
  for (int t = 0; t < p.trials; ++t)
    random_best = std::max(random_best, ev.prop2_ratio(frequency_random_field(g, derive_seed(seed, t))));

  const double ylo = -std::log(g.delta), span = g.log_span, yhi = ylo + span;
  const double dy = g.dy();
  auto packet_of = [&](const std::vector<double>& v) {
    PacketParams pk;
    pk.y0 = v[0];
    pk.ell = v[1];
    pk.eta = v[2];
    pk.xi = v[3];
    pk.sign = 1;
    return pk;
  };
  auto feasible = [&](const std::vector<double>& v) {
    return v[1] >= 4.0 * dy && v[0] - v[1] >= ylo && v[0] + v[1] <= yhi && std::abs(v[2]) <= 0.3 &&
           std::abs(v[3]) <= 20.0;
  };
  auto objective = [&](const std::vector<double>& v) {
    if (!feasible(v)) return kInf;
    return -ev.prop2_ratio(frequency_packet(g, packet_of(v)));
  };
  const std::vector<double> x0{ylo + 0.5 * span, 0.45 * span, 0.0, 0.0};
  const std::vector<double> step{0.02 * span, 0.04 * span, 0.05, 2.0};
  NelderMeadResult nm{x0, objective(x0), 1};
  if (p.nm_evals > 0) nm = nelder_mead(objective, x0, step, p.nm_evals);
  const double packet_best = -nm.value;

  EstimateRecord rec;
  rec.id = "prop2";
  rec.params = {{"s", s}};
  rec.lhs = std::max(packet_best, random_best);
  rec.rhs = 1.0;
  rec.ratio = rec.lhs;
  rec.family = packet_best >= random_best ? "packet" : "random";
  rec.extra = {{"packet_best", packet_best},
               {"random_best", random_best},
               {"y0", nm.x[0]},
               {"ell", nm.x[1]},
               {"eta", nm.x[2]},
               {"xi", nm.x[3]},
               {"nm_evals", nm.evaluations}};
  return rec;
}

EstimateReport prop2_sweep(const std::vector<double>& s_grid, const OdeCoefficients& c,
                           const GridSpec& g, const Prop2Params& p, int jobs) {
  if (s_grid.empty()) throw std::invalid_argument("prop2: empty s grid");
  const int n = static_cast<int>(s_grid.size());
  std::vector<EstimateRecord> slots(n);
  parallel_for(n, jobs, [&](int k) { slots[k] = prop2_constant(s_grid[k], c, g, p, k); });
  EstimateReport rep;
  rep.id = "prop2";
  rep.seed = p.seed;
  for (auto& r : slots) rep.add(std::move(r));
  return rep;
}

BlowupSummary blowup_summary(const EstimateReport& r, double exclusion) {
  if (r.records.empty() || r.argmax < 0) throw std::invalid_argument("blowup_summary: empty report");
  BlowupSummary b;
  const auto& top = r.records[r.argmax];
  b.argmax_s = top.param("s");
  b.peak = top.ratio;
  std::vector<double> rest;
  for (const auto& rec : r.records)
    if (std::abs(rec.param("s") - b.argmax_s) > exclusion + 1e-9) rest.push_back(rec.ratio);
  b.plateau = median(rest);
  b.ratio = b.plateau > 0.0 ? b.peak / b.plateau : kInf;
  return b;
}

EstimateRecord lemma1_check(const VectorXc& u, double s, const OdeCoefficients& c,
                            const GridSpec& g) {
  const ModelEvaluator ev(s, c, g, AChoice::kZero);
  const auto parts = ev.parts(u);
  EstimateRecord rec;
  rec.id = "lemma1";
  rec.params = {{"s", s}};
  rec.lhs = parts.dx;
  rec.rhs = parts.u + parts.calL + parts.q_h1;
  rec.ratio = rec.rhs > 0.0 ? rec.lhs / rec.rhs : 0.0;
  if (rec.rhs == 0.0) rec.flag = "N/A";
  rec.extra = {{"u_norm", parts.u}, {"calL_norm", parts.calL}, {"q_h1", parts.q_h1}};
  return rec;
}

EstimateReport lemma1_sweep(const std::vector<double>& s_grid, const OdeCoefficients& c,
                            const GridSpec& g, const Lemma1Params& p, int jobs) {
  require_frequency(g);
  if (s_grid.empty()) throw std::invalid_argument("lemma1: empty s grid");
  const int n = static_cast<int>(s_grid.size());
  std::vector<EstimateRecord> slots(n);
  const double ylo = -std::log(g.delta), span = g.log_span;
  parallel_for(n, jobs, [&](int k) {
    const double s = s_grid[k];
    const ModelEvaluator ev(s, c, g, AChoice::kZero);
    const std::uint64_t seed = derive_seed(p.seed, static_cast<std::uint64_t>(k));
    double random_best = 0.0, packet_best = 0.0;
    for (int t = 0; t < p.trials; ++t)
      random_best = std::max(random_best, ev.lemma1_ratio(frequency_random_field(g, derive_seed(seed, t))));
    for (double xi : p.xis)
      for (double f : p.y0_fractions)
        for (int sign : {-1, 1}) {
          PacketParams pk;
          pk.y0 = ylo + f * span;
          pk.ell = 0.2 * span * std::min(f, 1.0 - f) / 0.25;
          pk.ell = std::min(pk.ell, 0.2 * span);
          pk.xi = xi;
          pk.sign = sign;
          packet_best = std::max(packet_best, ev.lemma1_ratio(frequency_packet(g, pk)));
        }
    EstimateRecord rec;
    rec.id = "lemma1";
    rec.params = {{"s", s}};
    rec.lhs = std::max(random_best, packet_best);
    rec.rhs = 1.0;
    rec.ratio = rec.lhs;
    rec.family = packet_best >= random_best ? "packet" : "random";
    rec.extra = {{"random_best", random_best}, {"packet_best", packet_best}};
    slots[k] = rec;
  });
  EstimateReport rep;
  rep.id = "lemma1";
  rep.seed = p.seed;
  for (auto& r : slots) rep.add(std::move(r));
  return rep;
}

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, const std::vector<double>& step, int max_evals) {
  const std::size_t d = x0.size();
  if (d == 0 || step.size() != d) throw std::invalid_argument("nelder_mead: bad dimensions");
  std::vector<std::vector<double>> pts(d + 1, x0);
  for (std::size_t k = 0; k < d; ++k) pts[k + 1][k] += step[k];
  std::vector<double> val(d + 1);
  int evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    return f(x);
  };
  for (std::size_t k = 0; k <= d; ++k) val[k] = eval(pts[k]);
  std::vector<std::size_t> order(d + 1);
  // A step costs at most two evaluations before a shrink.
  while (evals + 2 <= max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return val[a] < val[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[d - 1];
    if (std::isfinite(val[best]) && std::abs(val[worst] - val[best]) <= 1e-10 * (1.0 + std::abs(val[best])))
      break;
    std::vector<double> centroid(d, 0.0);
    for (std::size_t k = 0; k <= d; ++k)
      if (k != worst)
        for (std::size_t i = 0; i < d; ++i) centroid[i] += pts[k][i] / double(d);
    auto along = [&](double t) {
      std::vector<double> x(d);
      for (std::size_t i = 0; i < d; ++i) x[i] = centroid[i] + t * (pts[worst][i] - centroid[i]);
      return x;
    };
    const auto xr = along(-1.0);
    const double fr = eval(xr);
    if (fr < val[best]) {
      const auto xe = along(-2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe;
        val[worst] = fe;
      } else {
        pts[worst] = xr;
        val[worst] = fr;
      }
      continue;
    }
    if (fr < val[second]) {
      pts[worst] = xr;
      val[worst] = fr;
      continue;
    }
    const auto xc = fr < val[worst] ? along(-0.5) : along(0.5);
    const double fc = eval(xc);
    if (fc < std::min(fr, val[worst])) {
      pts[worst] = xc;
      val[worst] = fc;
      continue;
    }
    for (std::size_t k = 0; k <= d && evals < max_evals; ++k) {
      if (k == best) continue;
      for (std::size_t i = 0; i < d; ++i) pts[k][i] = pts[best][i] + 0.5 * (pts[k][i] - pts[best][i]);
      val[k] = eval(pts[k]);
    }
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k <= d; ++k)
    if (val[k] < val[best]) best = k;
  return {pts[best], val[best], evals};
}

}  // namespace worm::estimates
