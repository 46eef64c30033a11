#pragma once

// Tensor grids in (x, t) and the one-dimensional stencils used to build
// operators on them. Unknowns are ordered idx = ix * nt + jt.

#include <vector>

#include <Eigen/Sparse>

#include "worm/common.hpp"

namespace worm {

using SpMat = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

// kLinear: t in (-delta, delta), uniform.
// kLog: t in [t_min, t_max] log-spaced (half line); t∂t is d/dy, y = log t.
// kLogFrequency: the Fourier dual of t. Nodes are τ values, nt/2 per sign,
//   log-spaced in |τ| from 1/delta to e^{log_span}/delta.
enum class TAxis { kLinear, kLog, kLogFrequency };

// kSupportInW and kDirichlet both extend by zero outside the box; they differ
// only in intent. kPeriodicT makes a kLinear t-axis periodic with period 2 delta.
enum class BoundaryCondition { kSupportInW, kDirichlet, kPeriodicT };

struct GridSpec {
  int nx = 64;
  int nt = 64;
  double r = 1.0;      // I = [-r, r]
  double delta = 0.1;  // x-box is [-(r + delta), r + delta]
  TAxis t_axis = TAxis::kLinear;
  BoundaryCondition bc = BoundaryCondition::kSupportInW;
  double t_min = 1e-8, t_max = 1.0;
  double log_span = 160.0;

  void validate() const;

  int size() const { return nx * nt; }
  int index(int ix, int jt) const { return ix * nt + jt; }
  bool periodic_t() const { return bc == BoundaryCondition::kPeriodicT; }

  double x_half() const { return r + delta; }
  double hx() const;
  std::vector<double> x_nodes() const;

  // t nodes (τ nodes on kLogFrequency, ascending).
  std::vector<double> t_nodes() const;
  double ht() const;  // kLinear only
  double dy() const;  // log axes only

  // Quadrature weights of the t-axis for the L2 norm in t (dt, or dτ/2π).
  std::vector<double> t_weights() const;
  // Full tensor weights hx * w_t, in index order.
  Eigen::VectorXd weights() const;

  bool same_shape(const GridSpec& o) const;
};

namespace stencil {

// Centered first and second differences; zero extension unless periodic.
SpMat d1(int n, double h, bool periodic = false);
SpMat d2(int n, double h, bool periodic = false);
// Eighth-order centered first difference with zero extension.
SpMat d1_fd8(int n, double h);
SpMat identity(int n);
SpMat diag(const std::vector<cplx>& d);
SpMat diag(const std::vector<double>& d);
SpMat kron(const SpMat& a, const SpMat& b);
SpMat block_diag(const SpMat& a, const SpMat& b);
SpMat from_dense(const Eigen::MatrixXcd& m, double drop = 0.0);

}  // namespace stencil

// Sample a function of (x, t) onto the grid in index order.
template <class F>
VectorXc sample(const GridSpec& g, F&& f) {
  const auto xs = g.x_nodes();
  const auto ts = g.t_nodes();
  VectorXc u(g.size());
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.nt; ++j) u[g.index(i, j)] = f(xs[i], ts[j]);
  return u;
}

// Weighted inner product and norm in L2 of the grid.
cplx inner(const VectorXc& u, const VectorXc& v, const GridSpec& g);
double l2_norm(const VectorXc& u, const GridSpec& g);

}  // namespace worm
