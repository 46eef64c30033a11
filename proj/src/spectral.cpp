#include "worm/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include <Eigen/SparseLU>
#include <fmt/format.h>

#include "worm/ode.hpp"

namespace worm::spectral {

cplx HCoefficients::p(double x) const { return c.beta1(x) + c.beta2(x); }

cplx HCoefficients::q(double x) const {
  const double a = c.a(x);
  return zeta * zeta * a * a - kI * zeta * c.a.derivative(x) +
         kI * zeta * a * (c.beta1(x) - c.beta2(x)) + c.beta3(x);
}

cplx HCoefficients::dq_dzeta(double x) const {
  const double a = c.a(x);
  return 2.0 * zeta * a * a - kI * c.a.derivative(x) + kI * a * (c.beta1(x) - c.beta2(x));
}

HCoefficients assemble_H(cplx zeta, const OdeCoefficients& c) {
  c.validate();
  return {zeta, c};
}

cplx apply_H_expanded(const HCoefficients& h, double x, cplx f, cplx df, cplx d2f) {
  return d2f + h.p(x) * df + h.q(x) * f;
}

cplx apply_H_factored(const HCoefficients& h, double x, cplx f, cplx df, cplx d2f) {
  const double a = h.c.a(x), da = h.c.a.derivative(x);
  const cplx iza = kI * h.zeta * a;
  const cplx g = df - iza * f;                                // (∂x - iζa) f
  const cplx dg = d2f - kI * h.zeta * (da * f + a * df);
  return dg + iza * g + h.c.beta1(x) * (df + iza * f) + h.c.beta2(x) * g + h.c.beta3(x) * f;
}

VectorXc apply_H(const HCoefficients& h, const std::vector<double>& xs, double hx,
                 const VectorXc& f) {
  const int n = static_cast<int>(xs.size());
  if (f.size() != n) throw std::invalid_argument("apply_H: size mismatch");
  VectorXc out(n);
  for (int i = 0; i < n; ++i) {
    const cplx fm = i > 0 ? f[i - 1] : cplx(0.0);
    const cplx fp = i + 1 < n ? f[i + 1] : cplx(0.0);
    const cplx d2 = (fp - 2.0 * f[i] + fm) / (hx * hx);
    const cplx d1 = (fp - fm) / (2.0 * hx);
    out[i] = d2 + h.p(xs[i]) * d1 + h.q(xs[i]) * f[i];
  }
  return out;
}

std::vector<double> dirichlet_nodes(const OdeCoefficients& c, int n) {
  std::vector<double> x(n);
  const double h = 2.0 * c.r / (n + 1);
  for (int i = 0; i < n; ++i) x[i] = -c.r + (i + 1) * h;
  return x;
}

SpMat dirichlet_H_matrix(cplx zeta, const OdeCoefficients& c, int n) {
  const HCoefficients H = assemble_H(zeta, c);
  const double h = 2.0 * c.r / (n + 1);
  const auto x = dirichlet_nodes(c, n);
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(3 * static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const cplx p = H.p(x[i]);
    if (i > 0) trip.emplace_back(i, i - 1, 1.0 / (h * h) - p / (2.0 * h));
    trip.emplace_back(i, i, -2.0 / (h * h) + H.q(x[i]));
    if (i + 1 < n) trip.emplace_back(i, i + 1, 1.0 / (h * h) + p / (2.0 * h));
  }
  SpMat m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

ShootingResult shoot(cplx zeta, const OdeCoefficients& c, double tol) {
  if (!(tol >= 1e-12 && tol <= 1e-6)) throw std::invalid_argument("shoot: tol must lie in [1e-12, 1e-6]");
  const HCoefficients H = assemble_H(zeta, c);
  auto rhs = [&H](double x, const ode::State<4>& y) {
    const cplx p = H.p(x), q = H.q(x), dq = H.dq_dzeta(x);
    return ode::State<4>{y[1], -p * y[1] - q * y[0], y[3], -p * y[3] - q * y[2] - dq * y[0]};
  };
  ode::Options opt;
  opt.atol = tol;
  opt.rtol = tol;
  ode::Stats st;
  const auto y = ode::integrate<4>(rhs, -c.r, c.r, {0.0, 1.0, 0.0, 0.0}, opt, &st);
  return {y[0], y[1], y[2], y[3], st.steps, st.rejected, st.max_local_error};
}

bool Box::contains(cplx z, double pad) const {
  return z.real() >= re_min - pad && z.real() <= re_max + pad && z.imag() >= im_min - pad &&
         z.imag() <= im_max + pad;
}

void Box::validate() const {
  if (!(re_max > re_min) || !(im_max > im_min))
    throw std::invalid_argument("box: need re_min < re_max and im_min < im_max");
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

namespace {

constexpr int kGaussNodes = 32;
constexpr int kMaxDoublings = 7;
constexpr int kMaxNudges = 4;

struct PassResult {
  cplx integral;  // (1/2πi) ∮ Φ'/Φ
  cplx moment;    // (1/2πi) ∮ ζ Φ'/Φ
  double min_abs = std::numeric_limits<double>::infinity();
  double max_abs = 0.0;
  int evaluations = 0;
};

PassResult contour_pass(const Box& b, const OdeCoefficients& c, double tol, double per_unit) {
  static thread_local std::vector<double> gx, gw;
  if (gx.empty()) gauss_legendre(kGaussNodes, gx, gw);
  const cplx corners[4] = {{b.re_min, b.im_min}, {b.re_max, b.im_min}, {b.re_max, b.im_max},
                           {b.re_min, b.im_max}};
  PassResult res;
  cplx acc = 0.0, mom = 0.0;
  for (int e = 0; e < 4; ++e) {
    const cplx za = corners[e], zb = corners[(e + 1) % 4];
    const double len = std::abs(zb - za);
    const int panels = std::max(1, static_cast<int>(std::ceil(len * per_unit)));
    const cplx dz = (zb - za) / static_cast<double>(panels);
    for (int p = 0; p < panels; ++p) {
      const cplx z0 = za + static_cast<double>(p) * dz;
      for (int k = 0; k < kGaussNodes; ++k) {
        const cplx z = z0 + 0.5 * (gx[k] + 1.0) * dz;
        const ShootingResult s = shoot(z, c, tol);
        ++res.evaluations;
        const double a = std::abs(s.phi_end);
        res.min_abs = std::min(res.min_abs, a);
        res.max_abs = std::max(res.max_abs, a);
        if (a == 0.0) continue;
        const cplx g = s.dzeta_phi_end / s.phi_end * (0.5 * gw[k]) * dz;
        acc += g;
        mom += z * g;
      }
    }
  }
  res.integral = acc / (2.0 * kPi * kI);
  res.moment = mom / (2.0 * kPi * kI);
  return res;
}

}  // namespace

ContourCount count_zeros_detail(const Box& box, const OdeCoefficients& c, double tol) {
  box.validate();
  ContourCount out;
  Box b = box;
  const double size = std::max(box.width(), box.height());
  for (int nudge = 0; nudge <= kMaxNudges; ++nudge) {
    if (nudge > 0) {
      const double eps = 1e-3 * size * nudge;
      b = {box.re_min - eps, box.re_max + eps, box.im_min - eps, box.im_max + eps};
    }
    bool too_close = false;
    double per_unit = std::max(2.0, std::ceil(4.0 / size));
    int evaluations = 0;
    PassResult prev;
    bool have_prev = false;
    for (int pass = 0; pass <= kMaxDoublings; ++pass, per_unit *= 2) {
      const PassResult cur = contour_pass(b, c, tol, per_unit);
      evaluations += cur.evaluations;
      if (!(cur.min_abs > 1e-10 * cur.max_abs)) {
        too_close = true;
        break;
      }
      if (have_prev) {
        const double re = cur.integral.real();
        const double near = std::abs(re - std::round(re));
        if (std::abs(cur.integral - prev.integral) < 0.05 && near < 0.25 &&
            std::abs(cur.integral.imag()) < 0.25) {
          out.winding = static_cast<int>(std::lround(re));
          out.raw = re;
          out.raw_imag = cur.integral.imag();
          out.centroid_sum = cur.moment;
          out.box = b;
          out.panels_per_unit = per_unit;
          out.evaluations = evaluations;
          out.nudges = nudge;
          out.min_abs_phi = cur.min_abs;
          return out;
        }
      }
      prev = cur;
      have_prev = true;
    }
    if (!too_close)
      throw NumericalError(fmt::format(
          "count_zeros: winding integral did not settle on [{}, {}] x [{}, {}]", b.re_min,
          b.re_max, b.im_min, b.im_max));
  }
  throw NumericalError(fmt::format("count_zeros: contour stays too close to a zero after {} nudges",
                                   kMaxNudges));
}

int count_zeros(const Box& box, const OdeCoefficients& c, double tol) {
  return count_zeros_detail(box, c, tol).winding;
}

int ZeroCertificate::zero_count() const {
  int n = 0;
  for (const auto& z : zeros) n += z.multiplicity;
  return n;
}

namespace {

struct Locator {
  const OdeCoefficients& c;
  double tol;
  std::vector<RefinedZero> zeros;
  bool multiplicity_flag = false;
  int leaves = 0;

  // min|Φ| / max|Φ| along a segment.
  double line_clearance(cplx a, cplx b) const {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int k = 0; k <= 32; ++k) {
      const double v = std::abs(shoot(a + (b - a) * (k / 32.0), c, tol).phi_end);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    return hi > 0.0 ? lo / hi : 0.0;
  }

  std::pair<Box, Box> split(const Box& b) const {
    static const double fractions[] = {0.5371, 0.4629, 0.5853, 0.4147, 0.6321, 0.3679};
    const bool along_re = b.width() >= b.height();
    double best_f = fractions[0], best_clear = -1.0;
    for (double f : fractions) {
      cplx a, e;
      if (along_re) {
        const double x = b.re_min + f * b.width();
        a = {x, b.im_min};
        e = {x, b.im_max};
      } else {
        const double y = b.im_min + f * b.height();
        a = {b.re_min, y};
        e = {b.re_max, y};
      }
      const double cl = line_clearance(a, e);
      if (cl > best_clear) {
        best_clear = cl;
        best_f = f;
      }
      if (cl > 1e-4) break;
    }
    if (along_re) {
      const double x = b.re_min + best_f * b.width();
      return {{b.re_min, x, b.im_min, b.im_max}, {x, b.re_max, b.im_min, b.im_max}};
    }
    const double y = b.im_min + best_f * b.height();
    return {{b.re_min, b.re_max, b.im_min, y}, {b.re_min, b.re_max, y, b.im_max}};
  }

  bool newton(cplx z0, int m, const Box& b, RefinedZero& out) const {
    cplx z = z0;
    const double pad = 1e-6 * std::max(b.width(), b.height());
    for (int it = 1; it <= 50; ++it) {
      const ShootingResult s = shoot(z, c, tol);
      if (s.dzeta_phi_end == 0.0) return false;
      const cplx step = static_cast<double>(m) * s.phi_end / s.dzeta_phi_end;
      z -= step;
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
      if (std::abs(step) <= 1e-14 * std::max(1.0, std::abs(z))) {
        if (!b.contains(z, pad)) return false;
        const ShootingResult f = shoot(z, c, tol);
        out = {z, std::abs(f.phi_end), std::abs(f.dzeta_phi_end), it, m, "newton"};
        return true;
      }
    }
    return false;
  }

  RefinedZero bisect(Box b) const {
    int it = 0;
    for (; it < 80; ++it) {
      const double size = std::max(b.width(), b.height());
      const cplx mid{0.5 * (b.re_min + b.re_max), 0.5 * (b.im_min + b.im_max)};
      if (size < 1e-11 * std::max(1.0, std::abs(mid))) break;
      auto [lo, hi] = split(b);
      b = count_zeros(lo, c, tol) == 1 ? lo : hi;
    }
    const cplx z{0.5 * (b.re_min + b.re_max), 0.5 * (b.im_min + b.im_max)};
    const ShootingResult f = shoot(z, c, tol);
    return {z, std::abs(f.phi_end), std::abs(f.dzeta_phi_end), it, 1, "bisection"};
  }

  void process(const Box& b, int depth) {
    const ContourCount cc = count_zeros_detail(b, c, tol);
    const Box& bb = cc.box;
    const int w = cc.winding;
    if (w <= 0) return;
    const double size = std::max(bb.width(), bb.height());
    const cplx centre{0.5 * (bb.re_min + bb.re_max), 0.5 * (bb.im_min + bb.im_max)};
    const bool tiny = size < 1e-7 * std::max(1.0, std::abs(centre)) || depth > 60;

    if (w == 1) {
      RefinedZero z;
      if (newton(cc.centroid_sum, 1, bb, z)) {
        zeros.push_back(z);
        ++leaves;
        return;
      }
      if (tiny || depth > 30) {
        zeros.push_back(bisect(bb));
        ++leaves;
        return;
      }
    } else if (tiny) {
      RefinedZero z;
      const cplx start = cc.centroid_sum / static_cast<double>(w);
      if (!newton(start, w, bb, z)) {
        const ShootingResult f = shoot(start, c, tol);
        z = {start, std::abs(f.phi_end), std::abs(f.dzeta_phi_end), 0, w, "bisection"};
      }
      z.multiplicity = w;
      zeros.push_back(z);
      multiplicity_flag = true;
      ++leaves;
      return;
    }
    auto [lo, hi] = split(bb);
    process(lo, depth + 1);
    process(hi, depth + 1);
  }
};

}  // namespace

ZeroCertificate locate_zeros(const Box& box, const OdeCoefficients& c, double tol) {
  box.validate();
  const ContourCount top = count_zeros_detail(box, c, tol);
  ZeroCertificate cert;
  cert.box = top.box;
  cert.winding = top.winding;
  if (top.winding > 0) {
    Locator loc{c, tol, {}, false, 0};
    loc.process(top.box, 0);
    cert.zeros = std::move(loc.zeros);
    cert.multiplicity_flag = loc.multiplicity_flag;
    cert.leaf_boxes = loc.leaves;
  }
  std::sort(cert.zeros.begin(), cert.zeros.end(), [](const RefinedZero& a, const RefinedZero& b) {
    if (a.zeta.real() != b.zeta.real()) return a.zeta.real() < b.zeta.real();
    return a.zeta.imag() < b.zeta.imag();
  });
  if (cert.zero_count() != cert.winding)
    throw NumericalError(fmt::format("locate_zeros: winding {} but {} refined zeros", cert.winding,
                                     cert.zero_count()));
  return cert;
}

ExceptionalExponents exceptional_sobolev(double s_min, double s_max, double gamma_max,
                                         const OdeCoefficients& c, double tol) {
  if (!(s_min >= 0.0)) throw std::invalid_argument("exceptional_sobolev: s_min must be >= 0");
  if (!(s_max > s_min)) throw std::invalid_argument("exceptional_sobolev: need s_min < s_max");
  if (!(gamma_max > 0.0)) throw std::invalid_argument("exceptional_sobolev: gamma_max must be > 0");
  ExceptionalExponents ex;
  ex.s_min = s_min;
  ex.s_max = s_max;
  ex.gamma_max = gamma_max;
  ex.strip = {s_min - 0.5, s_max - 0.5, -gamma_max, gamma_max};
  ex.certificate = locate_zeros(ex.strip, c, tol);
  ex.strip = ex.certificate.box;

  std::vector<ExceptionalEntry> all;
  for (const auto& z : ex.certificate.zeros) {
    const double s = z.zeta.real() + 0.5;
    if (s < s_min || s > s_max) continue;
    all.push_back({s, z.zeta, z.residual});
  }
  std::sort(all.begin(), all.end(), [](const ExceptionalEntry& a, const ExceptionalEntry& b) {
    if (a.s != b.s) return a.s < b.s;
    return std::abs(a.zeta.imag()) < std::abs(b.zeta.imag());
  });
  const double dedupe = std::max(tol, 1e-9);
  for (const auto& e : all) {
    if (!ex.entries.empty() && std::abs(e.s - ex.entries.back().s) <= dedupe) {
      if (std::abs(e.zeta.imag()) < std::abs(ex.entries.back().zeta.imag())) ex.entries.back() = e;
      continue;
    }
    ex.entries.push_back(e);
  }
  return ex;
}

SigmaMin dirichlet_sigma_min(cplx zeta, const OdeCoefficients& c, int n) {
  if (n < 64) throw std::invalid_argument("dirichlet_sigma_min: n must be >= 64");
  using ColMat = Eigen::SparseMatrix<cplx, Eigen::ColMajor>;
  const ColMat H = dirichlet_H_matrix(zeta, c, n);
  const ColMat Hh = H.adjoint();
  Eigen::SparseLU<ColMat> lu, luh;
  SigmaMin out;
  lu.compute(H);
  luh.compute(Hh);
  if (lu.info() != Eigen::Success || luh.info() != Eigen::Success) {
    out.singular = true;
    out.right_vector = VectorXc::Zero(n);
    return out;
  }
  VectorXc v(n);
  for (int i = 0; i < n; ++i) v[i] = 1.0 + 0.25 * std::sin(1.7 * i) + 0.1 * kI * std::cos(0.3 * i);
  v.normalize();
  double sigma = (H * v).norm();
  for (int it = 1; it <= 2000; ++it) {
    VectorXc w = lu.solve(luh.solve(v));
    if (!w.allFinite() || w.norm() == 0.0) {
      out.singular = true;
      out.value = 0.0;
      out.iterations = it;
      out.right_vector = v;
      return out;
    }
    v = w / w.norm();
    const double next = (H * v).norm();
    out.iterations = it;
    const bool done = std::abs(next - sigma) <= 1e-13 * std::max(next, 1e-300);
    sigma = next;
    if (done) break;
  }
  out.value = sigma;
  out.right_vector = v;
  return out;
}

}  // namespace worm::spectral
