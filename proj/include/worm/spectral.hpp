#pragma once

// The boundary ODE family
//   H_ζ = (∂x + iζa)(∂x - iζa) + β1(∂x + iζa) + β2(∂x - iζa) + β3
// on I = [-r, r], its shooting function Φ(ζ) = φ_ζ(r), argument-principle
// zero location and the exceptional Sobolev exponents.

#include <string>
#include <vector>

#include "worm/common.hpp"
#include "worm/grid.hpp"
#include "worm/operators.hpp"

namespace worm::spectral {

// H_ζ f = f'' + p f' + q f.
struct HCoefficients {
  cplx zeta;
  OdeCoefficients c;

  cplx p(double x) const;
  cplx q(double x) const;
  cplx dq_dzeta(double x) const;
};

HCoefficients assemble_H(cplx zeta, const OdeCoefficients& c);

// Pointwise action given exact jets (f, f', f'').
cplx apply_H_expanded(const HCoefficients& h, double x, cplx f, cplx df, cplx d2f);
cplx apply_H_factored(const HCoefficients& h, double x, cplx f, cplx df, cplx d2f);

// Centered differences on uniform interior nodes with zero extension.
VectorXc apply_H(const HCoefficients& h, const std::vector<double>& xs, double hx,
                 const VectorXc& f);

// n-point Dirichlet discretization on the interior nodes of I.
SpMat dirichlet_H_matrix(cplx zeta, const OdeCoefficients& c, int n);
std::vector<double> dirichlet_nodes(const OdeCoefficients& c, int n);

struct ShootingResult {
  cplx phi_end;
  cplx dphi_end;
  cplx dzeta_phi_end;
  cplx dzeta_dphi_end;
  int steps = 0;
  int rejected = 0;
  double max_local_error = 0.0;
};

// φ(-r) = 0, φ'(-r) = 1 together with the ζ-variational system.
// tol must lie in [1e-12, 1e-6].
ShootingResult shoot(cplx zeta, const OdeCoefficients& c, double tol);

struct Box {
  double re_min = 0.0, re_max = 0.0, im_min = 0.0, im_max = 0.0;

  double width() const { return re_max - re_min; }
  double height() const { return im_max - im_min; }
  bool contains(cplx z, double pad = 0.0) const;
  void validate() const;
};

struct ContourCount {
  int winding = 0;
  double raw = 0.0;        // real part of the quadrature value
  double raw_imag = 0.0;   // should be ~0
  cplx centroid_sum = 0.0; // (1/2πi) ∮ ζ Φ'/Φ
  Box box;                 // the contour actually used (after any nudge)
  double panels_per_unit = 0.0;
  int evaluations = 0;
  int nudges = 0;
  double min_abs_phi = 0.0;
};

// Winding number of Φ around the box boundary. Gauss–Legendre, 32 nodes per
// panel, panels doubled until the value settles within 0.25 of an integer.
ContourCount count_zeros_detail(const Box& box, const OdeCoefficients& c, double tol);
int count_zeros(const Box& box, const OdeCoefficients& c, double tol);

struct RefinedZero {
  cplx zeta;
  double residual = 0.0;  // |Φ(ζ)|
  double scale = 0.0;     // |Φ'(ζ)|, so residual / scale bounds the distance
  int iterations = 0;
  int multiplicity = 1;
  std::string method;     // "newton" or "bisection"
};

struct ZeroCertificate {
  Box box;
  int winding = 0;
  std::vector<RefinedZero> zeros;  // sorted by (Re, Im)
  bool multiplicity_flag = false;
  int leaf_boxes = 0;

  int zero_count() const;  // with multiplicity
};

ZeroCertificate locate_zeros(const Box& box, const OdeCoefficients& c, double tol);

struct ExceptionalEntry {
  double s = 0.0;
  cplx zeta;
  double residual = 0.0;
};

struct ExceptionalExponents {
  double s_min = 0.0, s_max = 0.0, gamma_max = 0.0;
  Box strip;
  std::vector<ExceptionalEntry> entries;  // sorted by s, deduplicated
  ZeroCertificate certificate;
};

ExceptionalExponents exceptional_sobolev(double s_min, double s_max, double gamma_max,
                                         const OdeCoefficients& c, double tol);

struct SigmaMin {
  double value = 0.0;
  bool singular = false;
  int iterations = 0;
  VectorXc right_vector;  // unit, with |H v| = value
};

// Smallest singular value of the n-point Dirichlet matrix by inverse
// iteration on H^H H (sparse LU of H and H^H). n >= 64.
SigmaMin dirichlet_sigma_min(cplx zeta, const OdeCoefficients& c, int n);

// Gauss–Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace worm::spectral
