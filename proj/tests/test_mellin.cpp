#include <cmath>
#include <stdexcept>

#include <gsl/gsl_sf_gamma.h>
#include <gsl/gsl_sf_result.h>

#include "doctest.h"
#include "worm/mellin.hpp"

using namespace worm;
using namespace worm::mellin;

namespace {

cplx gamma_complex(cplx z) {
  gsl_sf_result lnr, arg;
  gsl_sf_lngamma_complex_e(z.real(), z.imag(), &lnr, &arg);
  return std::polar(std::exp(lnr.val), arg.val);
}

VectorXc sample_t(const MellinGrid& g, double (*f)(double)) {
  const auto t = g.t_nodes();
  VectorXc v(g.n_t);
  for (int j = 0; j < g.n_t; ++j) v[j] = f(t[j]);
  return v;
}

double t_exp(double t) { return t * std::exp(-t); }
double t2_exp2(double t) { return t * t * std::exp(-t * t); }

MellinGrid standard(int n = 1024) { return MellinGrid::full_band(1e-16, 60.0, n); }

}  // namespace

TEST_CASE("Gamma-function oracle") {
  const auto g = standard();
  const VectorXc f = sample_t(g, t_exp);
  for (double gam : {0.5, 1.0, 2.0}) {
    const cplx F = mellin_at(g, f, 0.0, gam);
    const cplx exact = gamma_complex({1.0, -gam});
    CHECK(std::abs(F - exact) / std::abs(exact) <= 1e-6);
    CHECK(std::norm(F) == doctest::Approx(kPi * gam / std::sinh(kPi * gam)).epsilon(1e-6));
  }
  CHECK(std::abs(mellin_at(g, f, 0.0, 0.0) - 1.0) <= 1e-10);
}

TEST_CASE("grid forward transform agrees with single-gamma evaluation") {
  MellinGrid g = standard(256);
  g.gamma_max = 9.0;
  g.n_gamma = 256;
  const VectorXc f = sample_t(g, t_exp);
  const auto F = mellin_forward(g, f, 0.0);
  for (int k : {0, 17, 128, 200}) CHECK(std::abs(F.values[k] - mellin_at(g, f, 0.0, F.gamma[k])) <= 1e-12);
  const cplx exact = gamma_complex({1.0, -F.gamma[128]});
  CHECK(std::abs(F.values[128] - exact) <= 1e-10);
}

TEST_CASE("oracle error shrinks under refinement of the log grid") {
  double prev = 0.0;
  for (int n : {48, 64, 96, 128}) {
    const auto g = standard(n);
    const VectorXc f = sample_t(g, t_exp);
    double worst = 0.0;
    for (double gam : {0.5, 1.0, 2.0}) {
      const cplx exact = gamma_complex({1.0, -gam});
      worst = std::max(worst, std::abs(mellin_at(g, f, 0.0, gam) - exact) / std::abs(exact));
    }
    if (prev > 1e-13) CHECK(worst <= prev / 2.0);
    prev = worst;
  }
  CHECK(prev <= 1e-6);
}

TEST_CASE("shifted line agrees with the Gamma oracle") {
  const auto g = standard();
  const VectorXc f = sample_t(g, t_exp);
  const auto F = mellin_forward(g, f, 0.5);
  for (int k = 0; k < F.values.size(); k += 97) {
    const cplx exact = gamma_complex({1.5, -F.gamma[k]});
    CHECK(std::abs(F.values[k] - exact) <= 1e-9 * (1.0 + std::abs(exact)));
  }
}

TEST_CASE("round trip, Plancherel, shift and t d/dt identities") {
  for (auto fn : {t_exp, t2_exp2}) {
    const auto g = standard();
    const VectorXc f = sample_t(g, fn);
    CHECK(round_trip_defect(g, f) <= 1e-6);
    const auto pl = plancherel_defect(g, f);
    CHECK(pl.dt_over_t <= 1e-6);
    CHECK(pl.dt <= 1e-6);
    CHECK(shift_identity_defect(g, f) <= 1e-8);
    CHECK(tdt_symbol_defect(g, f) <= 1e-8);
  }
}

TEST_CASE("defects shrink under refinement until round-off dominates") {
  constexpr double floor = 1e-10;
  const auto coarse = standard(512), fine = standard(1024);
  const VectorXc a = sample_t(coarse, t_exp), b = sample_t(fine, t_exp);
  auto halves = [&](double c, double f) { return f <= std::max(0.5 * c, floor); };
  CHECK(halves(round_trip_defect(coarse, a), round_trip_defect(fine, b)));
  CHECK(halves(plancherel_defect(coarse, a).dt_over_t, plancherel_defect(fine, b).dt_over_t));
  CHECK(halves(plancherel_defect(coarse, a).dt, plancherel_defect(fine, b).dt));
  CHECK(halves(shift_identity_defect(coarse, a), shift_identity_defect(fine, b)));
  CHECK(halves(tdt_symbol_defect(coarse, a), tdt_symbol_defect(fine, b)));
}

TEST_CASE("zero input gives zero everywhere") {
  const auto g = standard(128);
  const VectorXc z = VectorXc::Zero(g.n_t);
  CHECK(mellin_forward(g, z, 0.0).values.norm() == 0.0);
  CHECK(round_trip_defect(g, z) == 0.0);
  CHECK(plancherel_defect(g, z).dt == 0.0);
  CHECK(tdt_symbol_defect(g, z) == 0.0);
  CHECK(shift_identity_defect(g, z) == 0.0);
  MellinSample F = mellin_forward(g, z, 0.0);
  CHECK(mellin_inverse(g, F).norm() == 0.0);
}

TEST_CASE("real input at offset 0 has conjugate-symmetric transform") {
  const auto g = standard(256);
  const VectorXc f = sample_t(g, t_exp);
  const auto F = mellin_forward(g, f, 0.0);
  const int n = g.n_gamma;
  for (int m = 1; m < n; m += 31) CHECK(std::abs(F.values[m] - std::conj(F.values[n - m])) <= 1e-12);
}

TEST_CASE("transform is linear") {
  const auto g = standard(256);
  const VectorXc f = sample_t(g, t_exp), h = sample_t(g, t2_exp2);
  const cplx a(0.3, -1.2);
  const auto lhs = mellin_forward(g, f + a * h, 0.5).values;
  const auto rhs = mellin_forward(g, f, 0.5).values + a * mellin_forward(g, h, 0.5).values;
  CHECK((lhs - rhs).norm() <= 1e-12 * rhs.norm());
}

TEST_CASE("dilation picks up a unimodular factor and leaves dt/t Plancherel unchanged") {
  const auto g = standard();
  const auto t = g.t_nodes();
  double first_defect = -1.0;
  for (double lam : {0.5, 1.0, 2.0}) {
    VectorXc f(g.n_t);
    for (int j = 0; j < g.n_t; ++j) f[j] = t_exp(lam * t[j]);
    for (double gam : {0.5, 1.0}) {
      const cplx F = mellin_at(g, f, 0.0, gam);
      const cplx ref = gamma_complex({1.0, -gam}) * std::polar(1.0, gam * std::log(lam));
      CHECK(std::abs(F - ref) <= 1e-9);
    }
    const double d = plancherel_defect(g, f).dt_over_t;
    CHECK(d <= 1e-6);
    if (first_defect < 0) first_defect = d;
  }
}

TEST_CASE("input checks") {
  const auto g = standard(128);
  VectorXc ones = VectorXc::Ones(g.n_t);
  CHECK_THROWS_AS(mellin_forward(g, ones, 0.0), std::invalid_argument);
  CHECK_NOTHROW(mellin_forward(g, ones, 0.0, Window::kCosineTaper));
  CHECK_THROWS_AS(mellin_forward(g, VectorXc::Ones(7), 0.0), std::invalid_argument);
  MellinGrid sparse = g;
  sparse.gamma_max = 50.0;
  sparse.n_gamma = 8;  // Δγ far above π / span
  CHECK_THROWS_AS(sparse.validate(), std::invalid_argument);
  MellinGrid tiny = g;
  tiny.n_t = 16;
  CHECK_THROWS_AS(tiny.validate(), std::invalid_argument);
  MellinGrid bad = g;
  bad.t_min = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("offset one half turns dt/t into t^{-1/2} dt") {
  // f = e^{-t}: the offset-0 integral has a pole at γ = 0 and f does not decay
  // at the lower end, while t^{1/2} f does.
  const auto g = MellinGrid::full_band(1e-20, 60.0, 1024);
  const auto t = g.t_nodes();
  VectorXc f(g.n_t);
  for (int j = 0; j < g.n_t; ++j) f[j] = std::exp(-t[j]);
  CHECK_THROWS_AS(mellin_at(g, f, 0.0, 0.0), std::invalid_argument);
  CHECK(std::abs(mellin_at(g, f, 0.5, 0.0) - std::sqrt(kPi)) <= 1e-8);
  const cplx exact = gamma_complex({0.5, -1.0});
  CHECK(std::abs(mellin_at(g, f, 0.5, 1.0) - exact) <= 1e-8);
}

TEST_CASE("conjugation by the Mellin transform turns the model operator into H_zeta") {
  GridSpec grid;
  grid.nx = 48;
  grid.nt = 1024;
  grid.t_axis = TAxis::kLog;
  grid.t_min = 1e-16;
  grid.t_max = 60.0;
  const auto mg = MellinGrid::from_grid(grid, 5.0, 1024);
  const auto c = OdeCoefficients::model();
  auto fx = [&](double x) {
    const double R = grid.x_half();
    const double cx = std::cos(kPi * x / (2 * R));
    return cx * cx;
  };
  const VectorXc u1 = sample(grid, [&](double x, double t) { return cplx(fx(x) * t * std::exp(-t)); });
  CHECK(conjugation_defect(grid, mg, u1, 1.0, c) <= 1e-5);
  const VectorXc u2 = sample(grid, [&](double x, double t) { return cplx(fx(x) * t * t * std::exp(-t * t)); });
  CHECK(conjugation_defect(grid, mg, u2, 2.0, c) <= 1e-5);
  CHECK(conjugation_defect(grid, mg, VectorXc::Zero(grid.size()), 1.0, c) == 0.0);
  GridSpec other = grid;
  other.nt = 512;
  CHECK_THROWS_AS(conjugation_defect(other, mg, VectorXc::Zero(other.size()), 1.0, c), std::invalid_argument);
}
