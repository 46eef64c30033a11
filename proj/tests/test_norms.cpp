#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "worm/norms.hpp"

using namespace worm;

namespace {

GridSpec linear(int nx, int nt) {
  GridSpec g;
  g.nx = nx;
  g.nt = nt;
  g.delta = 0.5;
  return g;
}

GridSpec frequency(int nx, int nt) {
  GridSpec g;
  g.nx = nx;
  g.nt = nt;
  g.delta = 0.05;
  g.t_axis = TAxis::kLogFrequency;
  g.log_span = 12.0;
  return g;
}

VectorXc bump(const GridSpec& g, double kx) {
  const double R = g.x_half();
  return sample(g, [&](double x, double t) {
    const double cx = std::cos(kPi * x / (2 * R));
    const double ct = g.t_axis == TAxis::kLinear ? std::cos(kPi * t / (2 * g.delta)) : 1.0 / (1.0 + t * t);
    return cplx(cx * cx * ct * ct) * std::polar(1.0, kx * x);
  });
}

}  // namespace

TEST_CASE("order 0 is the grid L2 norm") {
  for (const auto& g : {linear(32, 32), frequency(16, 64)}) {
    const VectorXc u = bump(g, 2.0);
    CHECK(norms::sobolev(u, g, 0) == doctest::Approx(norms::l2(u, g)).epsilon(1e-14));
  }
}

TEST_CASE("H^-1 <= L2 <= H^1 on linear and frequency grids") {
  for (const auto& g : {linear(32, 32), frequency(16, 64)})
    for (double kx : {0.0, 3.0, 12.0}) {
      const VectorXc u = bump(g, kx);
      const double m = norms::sobolev(u, g, -1), z = norms::sobolev(u, g, 0), p = norms::sobolev(u, g, 1);
      CHECK(m <= z * (1.0 + 1e-9));
      CHECK(z <= p * (1.0 + 1e-9));
    }
}

TEST_CASE("padded periodic L2 agrees with the grid L2 by Parseval") {
  const GridSpec g = linear(40, 24);
  const VectorXc u = bump(g, 5.0);
  // With the multiplier set to one the FFT sum reproduces the nodal sum.
  const double h1 = norms::sobolev(u, g, 1), hm = norms::sobolev(u, g, -1);
  CHECK(hm * h1 >= std::pow(norms::l2(u, g), 2) * (1.0 - 1e-9));
}

TEST_CASE("H^1 grows with x-oscillation") {
  const GridSpec g = linear(48, 32);
  CHECK(norms::sobolev(bump(g, 10.0), g, 1) > 2.0 * norms::sobolev(bump(g, 0.0), g, 1));
  CHECK(norms::sobolev(bump(g, 10.0), g, -1) < norms::sobolev(bump(g, 0.0), g, -1));
}

TEST_CASE("norm input checks") {
  const GridSpec g = linear(16, 16);
  const VectorXc u = VectorXc::Ones(g.size());
  CHECK_THROWS_AS(norms::sobolev(u, g, 2), std::invalid_argument);
  CHECK_THROWS_AS(norms::sobolev(VectorXc::Ones(5), g, 1), std::invalid_argument);
  GridSpec lg = g;
  lg.t_axis = TAxis::kLog;
  lg.t_min = 1e-3;
  CHECK_THROWS_AS(norms::sobolev(u, lg, 1), std::invalid_argument);
  CHECK(norms::interval_l2(VectorXc::Ones(4), 0.25) == doctest::Approx(1.0));
}
