#pragma once

// Dormand–Prince 5(4) with FSAL and a mixed absolute/relative error norm,
// for small fixed-size complex systems.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "worm/common.hpp"

namespace worm::ode {

template <std::size_t N>
using State = std::array<cplx, N>;

struct Stats {
  int steps = 0;
  int rejected = 0;
  int evaluations = 0;
  double max_local_error = 0.0;  // largest accepted scaled error estimate
};

struct Options {
  double atol = 1e-10;
  double rtol = 1e-10;
  double h_init = 0.0;  // 0: pick from the interval length
  double h_min_rel = 1e-14;
  int max_steps = 200000;
};

namespace detail {
template <std::size_t N>
State<N> axpy(const State<N>& y, double h, std::initializer_list<std::pair<double, const State<N>*>> terms) {
  State<N> out = y;
  for (const auto& [c, k] : terms)
    if (c != 0.0)
      for (std::size_t i = 0; i < N; ++i) out[i] += h * c * (*k)[i];
  return out;
}
}  // namespace detail

// Integrates y' = f(x, y) from x0 to x1 (x1 > x0). Throws NumericalError on
// step-size underflow or step-count exhaustion, naming the location.
template <std::size_t N, class F>
State<N> integrate(F&& f, double x0, double x1, State<N> y, const Options& opt, Stats* stats = nullptr) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                   b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  Stats st;
  const double len = x1 - x0;
  double h = opt.h_init > 0.0 ? opt.h_init : len * 1e-2;
  const double h_min = std::abs(len) * opt.h_min_rel;
  double x = x0;
  State<N> k1 = f(x, y);
  ++st.evaluations;

  while (x < x1) {
    if (st.steps + st.rejected >= opt.max_steps)
      throw NumericalError(fmt::format("integrator: step budget exhausted at x = {:.6g}", x));
    const bool last = x + h >= x1;
    if (last) h = x1 - x;
    using detail::axpy;
    const State<N> k2 = f(x + c2 * h, axpy<N>(y, h, {{a21, &k1}}));
    const State<N> k3 = f(x + c3 * h, axpy<N>(y, h, {{a31, &k1}, {a32, &k2}}));
    const State<N> k4 = f(x + c4 * h, axpy<N>(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const State<N> k5 =
        f(x + c5 * h, axpy<N>(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const State<N> k6 =
        f(x + h, axpy<N>(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    const State<N> yn =
        axpy<N>(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    const State<N> k7 = f(x + h, yn);
    st.evaluations += 6;

    double err = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const cplx e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                          e7 * k7[i]);
      const double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(yn[i]));
      err = std::max(err, std::abs(e) / sc);
    }
    if (!std::isfinite(err))
      throw NumericalError(fmt::format("integrator: non-finite state at x = {:.6g}", x));

    if (err <= 1.0) {
      x = last ? x1 : x + h;
      y = yn;
      k1 = k7;
      ++st.steps;
      st.max_local_error = std::max(st.max_local_error, err);
    } else {
      ++st.rejected;
    }
    const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    h *= fac;
    if (x < x1 && h < h_min)
      throw NumericalError(fmt::format("integrator: step size underflow at x = {:.6g}", x));
  }
  if (stats) *stats = st;
  return y;
}

}  // namespace worm::ode
