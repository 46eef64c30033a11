#include <cmath>
#include <limits>
#include <stdexcept>

#include "doctest.h"
#include "worm/estimates.hpp"

using namespace worm;
using namespace worm::estimates;

namespace {

std::vector<double> uniform(int n, double half) {
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) xs[i] = -half + 2.0 * half * i / (n - 1);
  return xs;
}

GridSpec freq_grid(int nx = 32, int nt = 32) {
  GridSpec g;
  g.nx = nx;
  g.nt = nt;
  g.delta = 0.01;
  g.t_axis = TAxis::kLogFrequency;
  g.log_span = 40.0;
  return g;
}

bool same_report(const EstimateReport& a, const EstimateReport& b) {
  if (a.records.size() != b.records.size() || a.best_ratio != b.best_ratio || a.argmax != b.argmax) return false;
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    const auto &x = a.records[k], &y = b.records[k];
    if (x.lhs != y.lhs || x.rhs != y.rhs || x.ratio != y.ratio || x.flag != y.flag || x.params != y.params ||
        x.extra != y.extra)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("trace inequalities hold on smooth samples and are tight on linear ramps") {
  const auto xs = uniform(2001, 1.0);
  VectorXc f(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) f[i] = std::polar(1.0 + xs[i] * xs[i], 3.0 * xs[i]);
  for (const auto& r : lemma2_check(xs, f, 0.1)) CHECK(r.ratio <= 1.0);
  // f = x on [-2ε, 2ε] only: the trace bound is attained up to the grid.
  VectorXc ramp(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) ramp[i] = std::abs(xs[i]) <= 0.2 ? xs[i] + 0.2 : (xs[i] > 0 ? 0.4 : 0.0);
  const auto recs = lemma2_check(xs, ramp, 0.1);
  for (const auto& r : recs) CHECK(r.flag != "violation");
}

TEST_CASE("trace checks on zero data are not applicable") {
  const auto xs = uniform(401, 1.0);
  for (const auto& r : lemma2_check(xs, VectorXc::Zero(401), 0.1)) {
    CHECK(r.flag == "N/A");
    CHECK(r.ratio == 0.0);
  }
}

TEST_CASE("trace check input validation") {
  const auto xs = uniform(401, 1.0);
  const VectorXc f = VectorXc::Ones(401);
  CHECK_THROWS_AS(lemma2_check(xs, f, 0.6), std::invalid_argument);
  CHECK_THROWS_AS(lemma2_check(xs, f, 0.01), std::invalid_argument);
  CHECK_THROWS_AS(lemma2_check(uniform(400, 1.0), VectorXc::Ones(400), 0.1), std::invalid_argument);
}

TEST_CASE("seeded trace sweep has no violations and is independent of jobs") {
  Lemma2Params p;
  p.trials = 200;
  p.n = 1001;
  p.seed = 5;
  const auto a = lemma2_sweep(p, 1), b = lemma2_sweep(p, 4);
  CHECK(a.violations == 0);
  CHECK(a.records.size() == 400);
  CHECK(same_report(a, b));
  p.seed = 6;
  CHECK_FALSE(same_report(a, lemma2_sweep(p, 1)));
}

TEST_CASE("report keeps the running maximum") {
  EstimateReport rep;
  for (double v : {0.3, 0.7, 0.5, std::numeric_limits<double>::quiet_NaN(), 0.2}) {
    EstimateRecord r;
    r.ratio = v;
    const double before = rep.best_ratio;
    rep.add(r);
    CHECK(rep.best_ratio >= before);
  }
  CHECK(rep.best_ratio == 0.7);
  CHECK(rep.argmax == 1);
  EstimateRecord bad;
  bad.ratio = 3.0;
  bad.flag = "violation";
  rep.add(bad);
  CHECK(rep.violations == 1);
}

TEST_CASE("large-gamma estimate: anchor, flatness and the gamma = 0 record") {
  const auto c = OdeCoefficients::model();
  Bound52Params p;
  p.gammas = {0.0, 10.0, 20.0, 50.0, 100.0};
  p.trials = 8;
  p.n = 256;
  const auto rep = bound_5_2_sweep(c, p);
  REQUIRE(rep.records.size() == 5);
  CHECK(rep.records[0].flag == "N/A");
  for (std::size_t k = 1; k < rep.records.size(); ++k) {
    const auto& r = rep.records[k];
    CHECK(std::isfinite(r.ratio));
    CHECK(r.extra_value("anchor_measured") ==
          doctest::Approx(r.extra_value("anchor_closed_form")).epsilon(1e-3));
  }
  CHECK(bound_5_2_flatness(rep, 10.0, 100.0) <= 2.0);
  CHECK_THROWS(bound_5_2_flatness(rep, 200.0, 300.0));
  auto c2 = c;
  c2.beta1 = Polynomial{{1.0}};
  CHECK_THROWS_AS(bound_5_2_anchor(c2, 1.0, 10.0), std::invalid_argument);
}

TEST_CASE("line estimate is finite at s = 1 and degenerates at s = pi/2") {
  const auto c = OdeCoefficients::model();
  const auto good = bound_5_1_point(c, 1.0, 0.0, 256, 4, 4, 3);
  CHECK(std::isfinite(good.ratio));
  CHECK(good.flag.empty());
  const auto bad = bound_5_1_point(c, kPi / 2, 0.0, 256, 4, 4, 3);
  CHECK(bad.flag == "singular-expected");
  CHECK(bad.ratio >= 100.0 * good.ratio);
  Bound51Params p;
  p.gammas = {-4.0, 0.0, 4.0};
  p.n = 256;
  p.trials = 4;
  p.modes = 4;
  CHECK(same_report(bound_5_1_constant(c, p, 1), bound_5_1_constant(c, p, 3)));
}

TEST_CASE("weighted Mellin integrals: zero field, consistency and decay in delta") {
  const auto c = OdeCoefficients::model();
  Lemma5Params p;
  p.nx = 24;
  p.nt_log = 512;
  p.nt_linear = 64;
  const auto zero = lemma5_weighted_integrals([](double, double) { return cplx(0.0); }, c, p);
  CHECK(zero.lhs == 0.0);
  CHECK(zero.rhs == 0.0);

  p.achoice = AChoice::kZero;
  const auto r = lemma5_weighted_integrals(lemma5_packet(c.r, p.delta, 0.0), c, p);
  CHECK(r.extra_value("plancherel_consistency") <= 1e-6);
  CHECK(r.lhs <= r.extra_value("direct_phi_sq") * (1.0 + 1e-6));

  p.achoice = AChoice::kMultiplyT;
  double prev = std::numeric_limits<double>::infinity();
  for (double d : {0.2, 0.1, 0.05}) {
    p.delta = d;
    const auto rec = lemma5_weighted_integrals(lemma5_packet(c.r, d, 0.0), c, p);
    CHECK(rec.ratio <= 1.0);
    CHECK(rec.extra_value("delta2_u2") < prev);
    prev = rec.extra_value("delta2_u2");
  }
  auto wide = [](double, double) { return cplx(1.0); };
  CHECK_THROWS_AS(lemma5_weighted_integrals(wide, c, p), std::invalid_argument);
  auto ck = c;
  ck.kappa = 1.0;
  CHECK_THROWS_AS(lemma5_weighted_integrals(lemma5_packet(c.r, p.delta, 0.0), ck, p), std::invalid_argument);
}

TEST_CASE("model constants on a small frequency grid") {
  const auto c = OdeCoefficients::model();
  const GridSpec g = freq_grid();
  Prop2Params p;
  p.trials = 4;
  p.nm_evals = 40;
  const auto r = prop2_constant(1.0, c, g, p, 0);
  CHECK(std::isfinite(r.ratio));
  CHECK(r.ratio > 0.0);
  const ModelEvaluator ev(1.0, c, g, AChoice::kZero);
  CHECK(ev.prop2_ratio(VectorXc::Zero(g.size())) == 0.0);
  CHECK(ev.lemma1_ratio(VectorXc::Zero(g.size())) == 0.0);
  const auto a = prop2_sweep({1.0, 2.0, 3.0}, c, g, p, 1), b = prop2_sweep({1.0, 2.0, 3.0}, c, g, p, 3);
  CHECK(same_report(a, b));
  const auto bs = blowup_summary(a, 0.25);
  CHECK(bs.peak == a.best_ratio);
  CHECK(bs.argmax_s == a.records[a.argmax].param("s"));
}

TEST_CASE("x-derivative estimate: zero field and packets") {
  const auto c = OdeCoefficients::model();
  const GridSpec g = freq_grid();
  const auto zero = lemma1_check(VectorXc::Zero(g.size()), 1.0, c, g);
  CHECK(zero.flag == "N/A");
  PacketParams pk;
  pk.y0 = -std::log(g.delta) + 0.5 * g.log_span;
  pk.ell = 0.2 * g.log_span;
  for (double xi : {0.0, 10.0, 40.0}) {
    pk.xi = xi;
    const auto rec = lemma1_check(frequency_packet(g, pk), 1.0, c, g);
    CHECK(std::isfinite(rec.ratio));
    CHECK(rec.ratio < 1.0);
  }
  Lemma1Params p;
  p.trials = 2;
  p.xis = {0.0, 20.0};
  p.y0_fractions = {0.5};
  const auto a = lemma1_sweep({1.0, 2.5}, c, g, p, 1), b = lemma1_sweep({1.0, 2.5}, c, g, p, 2);
  CHECK(same_report(a, b));
  CHECK(a.violations == 0);
}

TEST_CASE("Nelder-Mead minimizes a quadratic within the evaluation cap") {
  auto f = [](const std::vector<double>& x) { return (x[0] - 1.0) * (x[0] - 1.0) + 4.0 * (x[1] + 2.0) * (x[1] + 2.0); };
  const auto r = nelder_mead(f, {0.0, 0.0}, {0.5, 0.5}, 400);
  CHECK(r.evaluations <= 400);
  CHECK(r.value <= 1e-8);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(r.x[1] == doctest::Approx(-2.0).epsilon(1e-3));
  CHECK(nelder_mead(f, {0.0, 0.0}, {0.5, 0.5}, 10).evaluations <= 10);
}

TEST_CASE("derived seeds differ per stream and are stable") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(7, 3) == derive_seed(7, 3));
}
