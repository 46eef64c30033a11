#include "worm/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace worm {

void GridSpec::validate() const {
  if (nx < 8 || nt < 8) throw std::invalid_argument("grid too coarse: nx and nt must be >= 8");
  if (!(r > 0.0)) throw std::invalid_argument("grid: r must be positive");
  if (!(delta > 0.0)) throw std::invalid_argument("grid: delta must be positive");
  switch (t_axis) {
    case TAxis::kLinear:
      break;
    case TAxis::kLog:
      if (!(t_min > 0.0) || !(t_max > t_min))
        throw std::invalid_argument("grid: log axis needs 0 < t_min < t_max");
      if (periodic_t()) throw std::invalid_argument("grid: log axis cannot be periodic");
      break;
    case TAxis::kLogFrequency:
      if (nt % 2 != 0) throw std::invalid_argument("grid: frequency axis needs even nt");
      if (!(log_span > 0.0)) throw std::invalid_argument("grid: log_span must be positive");
      if (periodic_t()) throw std::invalid_argument("grid: frequency axis cannot be periodic");
      break;
  }
}

double GridSpec::hx() const { return 2.0 * x_half() / (nx + 1); }

std::vector<double> GridSpec::x_nodes() const {
  std::vector<double> x(nx);
  const double h = hx();
  for (int i = 0; i < nx; ++i) x[i] = -x_half() + (i + 1) * h;
  return x;
}

double GridSpec::ht() const {
  if (t_axis != TAxis::kLinear) throw std::logic_error("ht: not a linear t axis");
  return periodic_t() ? 2.0 * delta / nt : 2.0 * delta / (nt + 1);
}

double GridSpec::dy() const {
  if (t_axis == TAxis::kLog) return std::log(t_max / t_min) / (nt - 1);
  if (t_axis == TAxis::kLogFrequency) return log_span / (nt / 2 - 1);
  throw std::logic_error("dy: not a logarithmic axis");
}

std::vector<double> GridSpec::t_nodes() const {
  std::vector<double> t(nt);
  switch (t_axis) {
    case TAxis::kLinear: {
      const double h = ht();
      const double t0 = periodic_t() ? -delta : -delta + h;
      for (int j = 0; j < nt; ++j) t[j] = t0 + j * h;
      break;
    }
    case TAxis::kLog: {
      const double y0 = std::log(t_min), d = dy();
      for (int j = 0; j < nt; ++j) t[j] = std::exp(y0 + j * d);
      t[nt - 1] = t_max;
      break;
    }
    case TAxis::kLogFrequency: {
      const int half = nt / 2;
      const double y0 = -std::log(delta), d = dy();
      for (int k = 0; k < half; ++k) {
        const double tau = std::exp(y0 + k * d);
        t[half + k] = tau;
        t[half - 1 - k] = -tau;
      }
      break;
    }
  }
  return t;
}

std::vector<double> GridSpec::t_weights() const {
  std::vector<double> w(nt);
  const auto t = t_nodes();
  switch (t_axis) {
    case TAxis::kLinear:
      for (auto& v : w) v = ht();
      break;
    case TAxis::kLog:
      for (int j = 0; j < nt; ++j) w[j] = t[j] * dy();
      break;
    case TAxis::kLogFrequency:
      for (int j = 0; j < nt; ++j) w[j] = std::abs(t[j]) * dy() / (2.0 * kPi);
      break;
  }
  return w;
}

Eigen::VectorXd GridSpec::weights() const {
  const auto wt = t_weights();
  Eigen::VectorXd w(size());
  const double h = hx();
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < nt; ++j) w[index(i, j)] = h * wt[j];
  return w;
}

bool GridSpec::same_shape(const GridSpec& o) const {
  return nx == o.nx && nt == o.nt && r == o.r && delta == o.delta && t_axis == o.t_axis &&
         bc == o.bc && t_min == o.t_min && t_max == o.t_max && log_span == o.log_span;
}

namespace stencil {

namespace {
SpMat banded(int n, const std::vector<double>& c, double scale, bool periodic) {
  const int w = static_cast<int>(c.size()) / 2;
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(static_cast<std::size_t>(n) * c.size());
  for (int i = 0; i < n; ++i)
    for (int k = -w; k <= w; ++k) {
      const double v = c[k + w];
      if (v == 0.0) continue;
      int j = i + k;
      if (periodic) j = ((j % n) + n) % n;
      else if (j < 0 || j >= n) continue;
      trip.emplace_back(i, j, v * scale);
    }
  SpMat m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}
}  // namespace

SpMat d1(int n, double h, bool periodic) { return banded(n, {-0.5, 0.0, 0.5}, 1.0 / h, periodic); }

SpMat d2(int n, double h, bool periodic) {
  return banded(n, {1.0, -2.0, 1.0}, 1.0 / (h * h), periodic);
}

SpMat d1_fd8(int n, double h) {
  return banded(n,
                {1.0 / 280, -4.0 / 105, 1.0 / 5, -4.0 / 5, 0.0, 4.0 / 5, -1.0 / 5, 4.0 / 105,
                 -1.0 / 280},
                1.0 / h, false);
}

SpMat identity(int n) {
  SpMat m(n, n);
  m.setIdentity();
  return m;
}

SpMat diag(const std::vector<cplx>& d) {
  const int n = static_cast<int>(d.size());
  std::vector<Eigen::Triplet<cplx>> trip;
  for (int i = 0; i < n; ++i)
    if (d[i] != 0.0) trip.emplace_back(i, i, d[i]);
  SpMat m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

SpMat diag(const std::vector<double>& d) { return diag(std::vector<cplx>(d.begin(), d.end())); }

SpMat kron(const SpMat& a, const SpMat& b) {
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(static_cast<std::size_t>(a.nonZeros()) * b.nonZeros());
  for (int i = 0; i < a.outerSize(); ++i)
    for (SpMat::InnerIterator ia(a, i); ia; ++ia)
      for (int k = 0; k < b.outerSize(); ++k)
        for (SpMat::InnerIterator ib(b, k); ib; ++ib)
          trip.emplace_back(ia.row() * b.rows() + ib.row(), ia.col() * b.cols() + ib.col(),
                            ia.value() * ib.value());
  SpMat m(a.rows() * b.rows(), a.cols() * b.cols());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

SpMat block_diag(const SpMat& a, const SpMat& b) {
  std::vector<Eigen::Triplet<cplx>> trip;
  for (int i = 0; i < a.outerSize(); ++i)
    for (SpMat::InnerIterator it(a, i); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
  for (int i = 0; i < b.outerSize(); ++i)
    for (SpMat::InnerIterator it(b, i); it; ++it)
      trip.emplace_back(it.row() + a.rows(), it.col() + a.cols(), it.value());
  SpMat m(a.rows() + b.rows(), a.cols() + b.cols());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

SpMat from_dense(const Eigen::MatrixXcd& d, double drop) {
  std::vector<Eigen::Triplet<cplx>> trip;
  for (int i = 0; i < d.rows(); ++i)
    for (int j = 0; j < d.cols(); ++j)
      if (std::abs(d(i, j)) > drop) trip.emplace_back(i, j, d(i, j));
  SpMat m(d.rows(), d.cols());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

}  // namespace stencil

cplx inner(const VectorXc& u, const VectorXc& v, const GridSpec& g) {
  if (u.size() != g.size() || v.size() != g.size()) throw std::invalid_argument("inner: size mismatch");
  const Eigen::VectorXd w = g.weights();
  cplx acc = 0.0;
  for (int i = 0; i < g.size(); ++i) acc += w[i] * u[i] * std::conj(v[i]);
  return acc;
}

double l2_norm(const VectorXc& u, const GridSpec& g) { return std::sqrt(std::abs(inner(u, u, g))); }

}  // namespace worm
