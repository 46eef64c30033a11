#include "worm/operators.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

namespace worm {

void OdeCoefficients::validate() const {
  if (sign_s != 1 && sign_s != -1) throw std::invalid_argument("sign_s must be +1 or -1");
  if (!(r > 0.0)) throw std::invalid_argument("r must be positive");
  if (a.c.empty()) throw std::invalid_argument("a must be nonzero on I");
  for (int k = 0; k <= 256; ++k) {
    const double x = -r + 2.0 * r * k / 256.0;
    if (a(x) == 0.0) throw std::invalid_argument("a must be nonzero on I");
  }
  if (!a.is_constant()) {
    // A sign change between samples would also put a zero on I.
    double prev = a(-r);
    for (int k = 1; k <= 256; ++k) {
      const double cur = a(-r + 2.0 * r * k / 256.0);
      if (prev * cur < 0.0) throw std::invalid_argument("a must be nonzero on I");
      prev = cur;
    }
  }
}

OdeCoefficients OdeCoefficients::model(double a, double r) {
  OdeCoefficients c;
  c.a = Polynomial::constant(a);
  c.r = r;
  return c;
}

std::string to_string(AChoice a) {
  switch (a) {
    case AChoice::kZero: return "zero";
    case AChoice::kMultiplyT: return "t";
    case AChoice::kSmoothedT: return "smoothed_t";
  }
  return "zero";
}

AChoice parse_achoice(const std::string& s) {
  if (s == "zero") return AChoice::kZero;
  if (s == "t") return AChoice::kMultiplyT;
  if (s == "smoothed_t") return AChoice::kSmoothedT;
  throw std::invalid_argument("unknown A choice '" + s + "' (expected zero, t or smoothed_t)");
}

VectorXc DiscreteOperator::apply(const VectorXc& u) const {
  if (u.size() != matrix.cols()) throw std::invalid_argument("apply: size mismatch");
  return matrix * u;
}

DiscreteOperator DiscreteOperator::adjoint() const {
  const Eigen::VectorXd w = grid.weights();
  std::vector<double> wi(w.size()), wv(w.size());
  for (int i = 0; i < w.size(); ++i) {
    wv[i] = w[i];
    wi[i] = 1.0 / w[i];
  }
  SpMat mh = matrix.adjoint();
  SpMat adj = stencil::diag(wi) * mh * stencil::diag(wv);
  return {adj, order, grid};
}

namespace {

// d/dy with y = log|τ| on each half of a frequency axis, in index order.
SpMat frequency_dy(const GridSpec& g) {
  const int half = g.nt / 2;
  SpMat pos = stencil::d1_fd8(half, g.dy());
  SpMat neg = -pos;  // |τ| decreases along the index on the negative half
  return stencil::block_diag(neg, pos);
}

// Periodic Fourier multiplier m(τ) on a linear t-axis as a dense matrix.
Eigen::MatrixXcd periodic_multiplier(const GridSpec& g, double (*m)(double)) {
  const int n = g.nt;
  const double h = g.ht();
  const auto t = g.t_nodes();
  std::vector<double> mk(n), tk(n);
  for (int k = 0; k < n; ++k) {
    const int kk = k < n / 2 ? k : k - n;
    tk[k] = 2.0 * kPi * kk / (n * h);
    mk[k] = m(tk[k]);
  }
  Eigen::MatrixXcd out(n, n);
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l) {
      cplx acc = 0.0;
      for (int k = 0; k < n; ++k) acc += mk[k] * std::polar(1.0, tk[k] * (t[j] - t[l]));
      out(j, l) = acc / static_cast<double>(n);
    }
  return out;
}

double inv_bracket(double tau) { return 1.0 / std::sqrt(1.0 + tau * tau); }

SpMat x_diag(const GridSpec& g, const Polynomial& p) {
  const auto x = g.x_nodes();
  std::vector<double> d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = p(x[i]);
  return stencil::diag(d);
}

SpMat x_d1(const GridSpec& g) { return stencil::d1(g.nx, g.hx()); }
SpMat x_d2(const GridSpec& g) { return stencil::d2(g.nx, g.hx()); }

// Lbar (conj = false) or L (conj = true) as a sparse matrix.
SpMat cr_field(double s, const OdeCoefficients& c, const GridSpec& g, bool conj) {
  g.validate();
  c.validate();
  const SpMat ix = stencil::identity(g.nx);
  const SpMat it = stencil::identity(g.nt);
  const SpMat T = t_generator(g);
  const SpMat shifted = T + (static_cast<double>(c.sign_s) * s) * it;
  const cplx ia = conj ? -kI : kI;
  SpMat m = stencil::kron(x_d1(g), it) + stencil::kron(ia * x_diag(g, c.a), shifted);
  if (c.kappa != 0.0) {
    const SpMat t2dt = t_multiplier(g) * T;
    m += stencil::kron(ix, c.kappa * t2dt);
  }
  return m;
}

}  // namespace

SpMat t_generator(const GridSpec& g) {
  switch (g.t_axis) {
    case TAxis::kLinear:
      return stencil::diag(g.t_nodes()) * stencil::d1(g.nt, g.ht(), g.periodic_t());
    case TAxis::kLog:
      return stencil::d1_fd8(g.nt, g.dy());
    case TAxis::kLogFrequency:
      // t∂t ↦ i∂τ ∘ iτ = -(1 + τ∂τ)
      return -(stencil::identity(g.nt) + frequency_dy(g));
  }
  throw std::logic_error("t_generator: unknown axis");
}

SpMat t_multiplier(const GridSpec& g) {
  if (g.t_axis == TAxis::kLogFrequency) {
    const auto tau = g.t_nodes();
    std::vector<cplx> d(tau.size());
    for (std::size_t j = 0; j < tau.size(); ++j) d[j] = kI / tau[j];
    return stencil::diag(d) * frequency_dy(g);
  }
  return stencil::diag(g.t_nodes());
}

DiscreteOperator assemble_Lbar(double s, const OdeCoefficients& c, const GridSpec& g) {
  return {cr_field(s, c, g, false), 1, g};
}

DiscreteOperator assemble_L(double s, const OdeCoefficients& c, const GridSpec& g) {
  return {cr_field(s, c, g, true), 1, g};
}

DiscreteOperator assemble_A(AChoice choice, const GridSpec& g) {
  g.validate();
  const SpMat ix = stencil::identity(g.nx);
  switch (choice) {
    case AChoice::kZero: {
      SpMat z(g.size(), g.size());
      return {z, 0, g};
    }
    case AChoice::kMultiplyT:
      return {stencil::kron(ix, t_multiplier(g)), 0, g};
    case AChoice::kSmoothedT: {
      if (g.t_axis == TAxis::kLogFrequency) {
        const auto tau = g.t_nodes();
        std::vector<double> m(tau.size());
        for (std::size_t j = 0; j < tau.size(); ++j) m[j] = inv_bracket(tau[j]);
        return {stencil::kron(ix, SpMat(t_multiplier(g) * stencil::diag(m))), 0, g};
      }
      if (g.t_axis == TAxis::kLinear && g.periodic_t()) {
        const Eigen::MatrixXcd mt = periodic_multiplier(g, inv_bracket);
        Eigen::MatrixXcd tm = mt;
        const auto t = g.t_nodes();
        for (int j = 0; j < g.nt; ++j) tm.row(j) *= t[j];
        return {stencil::kron(ix, stencil::from_dense(tm)), 0, g};
      }
      throw std::invalid_argument(
          "smoothed_t needs a periodic linear or a frequency t-axis");
    }
  }
  throw std::logic_error("assemble_A: unknown choice");
}

DiscreteOperator assemble_calL(double s, const OdeCoefficients& c, const GridSpec& g,
                               AChoice choice) {
  const SpMat lbar = cr_field(s, c, g, false);
  const SpMat l = cr_field(s, c, g, true);
  const SpMat it = stencil::identity(g.nt);
  const SpMat dx = stencil::kron(x_d1(g), it);
  const SpMat d2x = stencil::kron(x_d2(g), it);
  const SpMat A = assemble_A(choice, g).matrix;
  const SpMat b1 = stencil::kron(x_diag(g, c.beta1), it);
  const SpMat b2 = stencil::kron(x_diag(g, c.beta2), it);
  const SpMat b3 = stencil::kron(x_diag(g, c.beta3), it);

  SpMat m = lbar * l;
  m -= SpMat(dx * dx);
  m += d2x;
  m += SpMat(SpMat(b1 + A) * lbar);
  m += SpMat(SpMat(b2 + A) * l);
  m += SpMat(b3 + A);
  m.prune(cplx(0.0));
  return {m, 2, g};
}

double lambda_conjugation_symbol(double s, double tau) {
  // [t, Λ^s] has symbol i ∂τ m^s = i s τ m^{s-2}; compose with ∂t ↦ iτ and Λ^{-s}.
  const double m2 = 1.0 + tau * tau;
  const double m = std::sqrt(m2);
  const cplx comm = kI * s * tau * std::pow(m, s - 2.0);
  const cplx v = std::pow(m, -s) * comm * (kI * tau);
  return v.real();
}

double q_cutoff_profile(double tau) {
  if (tau <= -1.0) return 1.0;
  if (tau >= -0.5) return 0.0;
  const double z = (tau + 1.0) / 0.5;
  const double s5 = z * z * z * (10.0 - 15.0 * z + 6.0 * z * z);
  return 1.0 - s5;
}

DiscreteOperator build_Q_cutoff(const GridSpec& g) {
  g.validate();
  const SpMat ix = stencil::identity(g.nx);
  if (g.t_axis == TAxis::kLogFrequency) {
    const auto tau = g.t_nodes();
    std::vector<double> q(tau.size());
    for (std::size_t j = 0; j < tau.size(); ++j) q[j] = q_cutoff_profile(tau[j]);
    return {stencil::kron(ix, stencil::diag(q)), 0, g};
  }
  if (g.t_axis == TAxis::kLinear && g.periodic_t())
    return {stencil::kron(ix, stencil::from_dense(periodic_multiplier(g, q_cutoff_profile), 1e-300)),
            0, g};
  throw std::invalid_argument("build_Q_cutoff needs a periodic linear or a frequency t-axis");
}

void export_coo(const DiscreteOperator& op, std::ostream& os) {
  for (int i = 0; i < op.matrix.outerSize(); ++i)
    for (SpMat::InnerIterator it(op.matrix, i); it; ++it)
      os << fmt::format("{} {} {:.17g} {:.17g}\n", it.row(), it.col(), it.value().real(),
                        it.value().imag());
}

}  // namespace worm
