// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <gsl/gsl_sf_gamma.h>
#include <gsl/gsl_sf_result.h>
#include <unistd.h>

#include "worm/config.hpp"
#include "worm/estimates.hpp"
#include "worm/geometry.hpp"
#include "worm/mellin.hpp"
#include "worm/operators.hpp"
#include "worm/spectral.hpp"

namespace fs = std::filesystem;
using namespace worm;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back((ok ? "" : "!") + what);
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const config::RunConfig& shipped() {
  static const auto cfg = config::load_config(WORM_SOURCE_DIR "/configs/model.json");
  return cfg;
}

cplx gamma_complex(cplx z) {
  gsl_sf_result lnr, arg;
  gsl_sf_lngamma_complex_e(z.real(), z.imag(), &lnr, &arg);
  return std::polar(std::exp(lnr.val), arg.val);
}

// ------------------------------------------------------------------ 1
Outcome geometry_oracle() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto& w = shipped().worm;
  const auto flat = geometry::pseudoconvexity_scan(w, geometry::ScanGrid::flat_region(w, 101, 101));
  const auto full = geometry::pseudoconvexity_scan(w, geometry::ScanGrid::full_chart(w, 101, 101));
  const double nu = std::max(flat.max_abs_nu, full.max_abs_nu);
  const double chart = std::max(flat.chart_max_residual, full.chart_max_residual);
  const double dt = seconds_since(t0);
  o.require(flat.flat_max_deviation <= 1e-8, fmt::format("flat dev {:.2e}", flat.flat_max_deviation));
  o.require(nu <= 1e-10, fmt::format("nu {:.2e}", nu));
  o.require(full.min_mu >= -1e-10, fmt::format("min mu {:.3e}", full.min_mu));
  o.require(chart <= 1e-12, fmt::format("chart {:.2e}", chart));
  o.require(dt <= 5.0, fmt::format("{:.2f}s", dt));
  return o;
}

// ------------------------------------------------------------------ 2
Outcome alpha_oracle() {
  Outcome o;
  const double at0 = std::abs(geometry::alpha_coefficient(0.0) - cplx(-2.0, 0.0));
  double worst = 0.0;
  const double d = shipped().worm.delta;
  for (int k = -10000; k <= 10000; ++k) {
    const double t = d * k / 10000.0;
    worst = std::max(worst, std::abs(kI * t * geometry::alpha_coefficient(t) - 2.0 * (std::polar(1.0, -t) - 1.0)));
  }
  o.require(at0 <= 1e-12, fmt::format("|alpha(0)+2| {:.1e}", at0));
  o.require(worst <= 1e-12, fmt::format("sup {:.1e}", worst));
  return o;
}

// ------------------------------------------------------------------ 3
Outcome mellin_oracle() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto& m = shipped().mellin;
  constexpr double floor = 1e-10;
  struct Level {
    double oracle = 0.0, rt = 0.0, pl0 = 0.0, pl1 = 0.0, shift = 0.0, tdt = 0.0;
  };
  auto level = [&](int n) {
    const auto g = mellin::MellinGrid::full_band(m.t_min, m.t_max, n);
    const auto t = g.t_nodes();
    VectorXc f(n);
    for (int j = 0; j < n; ++j) f[j] = t[j] * std::exp(-t[j]);
    Level L;
    for (double gam : {0.5, 1.0, 2.0}) {
      const cplx exact = gamma_complex({1.0, -gam});
      L.oracle = std::max(L.oracle, std::abs(mellin::mellin_at(g, f, 0.0, gam) - exact) / std::abs(exact));
    }
    L.rt = mellin::round_trip_defect(g, f);
    const auto pl = mellin::plancherel_defect(g, f);
    L.pl0 = pl.dt_over_t;
    L.pl1 = pl.dt;
    L.shift = mellin::shift_identity_defect(g, f);
    L.tdt = mellin::tdt_symbol_defect(g, f);
    return L;
  };
  const Level a = level(m.n_t), b = level(2 * m.n_t);
  const double dt = seconds_since(t0);
  o.require(std::max(a.oracle, b.oracle) <= 1e-6, fmt::format("Gamma rel {:.1e}", std::max(a.oracle, b.oracle)));
  auto identity = [&](const char* name, double c, double f) {
    o.require(c <= 1e-6 && f <= 1e-6 && f <= std::max(0.5 * c, floor), fmt::format("{} {:.1e}->{:.1e}", name, c, f));
  };
  identity("rt", a.rt, b.rt);
  identity("pl(dt/t)", a.pl0, b.pl0);
  identity("pl(dt)", a.pl1, b.pl1);
  identity("shift", a.shift, b.shift);
  identity("tdt", a.tdt, b.tdt);
  o.require(dt <= 10.0, fmt::format("{:.2f}s", dt));
  return o;
}

// ------------------------------------------------------------------ 4
Outcome shooting_oracle() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto c = OdeCoefficients::model();
  const double tol = shipped().spectrum.tol;
  double worst = 0.0;
  for (int i = 0; i < 10; ++i)
    for (int k = 0; k < 10; ++k) {
      const cplx z(-3.0 + 6.0 * i / 9.0, -1.0 + 2.0 * k / 9.0);
      const cplx ref = std::abs(z) < 1e-14 ? cplx(2.0) : std::sin(2.0 * z) / z;
      worst = std::max(worst, std::abs(spectral::shoot(z, c, tol).phi_end - ref) / std::max(std::abs(ref), 1e-3));
    }
  o.require(worst <= 1e-8, fmt::format("endpoint rel {:.1e}", worst));

  const auto cert = spectral::locate_zeros({0.5, 8.5, -1.0, 1.0}, c, tol);
  double zerr = cert.zeros.size() == 5 ? 0.0 : INFINITY;
  for (std::size_t k = 0; k < cert.zeros.size() && k < 5; ++k)
    zerr = std::max(zerr, std::abs(cert.zeros[k].zeta - cplx((k + 1) * kPi / 2, 0.0)));
  o.require(zerr <= 1e-8, fmt::format("{} zeros, err {:.1e}", cert.zeros.size(), zerr));

  bool consistent = cert.winding == cert.zero_count();
  for (const spectral::Box& b : {shipped().spectrum.box, spectral::Box{-3.0, 3.0, -1.0, 1.0},
                                 spectral::Box{3.0, 3.5, -1.0, 1.0}, spectral::Box{1.0, 2.0, -0.3, 0.6}}) {
    const auto cc = spectral::locate_zeros(b, c, tol);
    consistent = consistent && cc.winding == cc.zero_count();
  }
  o.require(consistent, "winding == count");
  const double dt = seconds_since(t0);
  o.require(dt <= 30.0, fmt::format("{:.2f}s", dt));
  return o;
}

// ------------------------------------------------------------------ 5
Outcome exceptional_set() {
  Outcome o;
  const auto& e = shipped().exceptional;
  const auto ex = spectral::exceptional_sobolev(e.s_min, e.s_max, e.gamma_max, OdeCoefficients::model(),
                                                shipped().spectrum.tol);
  double err = ex.entries.size() == 3 ? 0.0 : INFINITY;
  for (std::size_t k = 0; k < ex.entries.size() && k < 3; ++k)
    err = std::max(err, std::abs(ex.entries[k].s - (0.5 + (k + 1) * kPi / 2)));
  o.require(err <= 1e-6, fmt::format("{} values, err {:.1e}", ex.entries.size(), err));
  o.require(ex.strip.im_min == -e.gamma_max && ex.strip.im_max == e.gamma_max && ex.s_min == e.s_min &&
                ex.s_max == e.s_max,
            fmt::format("strip Im in [{}, {}]", ex.strip.im_min, ex.strip.im_max));
  return o;
}

// ------------------------------------------------------------------ 6
Outcome dirichlet_degeneracy() {
  Outcome o;
  const auto c = OdeCoefficients::model();
  auto sm = [&](double z, int n) { return spectral::dirichlet_sigma_min({z, 0.0}, c, n).value; };
  const double at = sm(kPi / 2, 512), lo = sm(kPi / 2 - 0.5, 512), hi = sm(kPi / 2 + 0.5, 512);
  o.require(at <= lo / 100.0 && at <= hi / 100.0, fmt::format("{:.2e} vs {:.2e},{:.2e}", at, lo, hi));
  const double at2 = sm(kPi / 2, 1024);
  o.require(at2 < at, fmt::format("n-doubling {:.2e}", at2));
  const double target = kPi * kPi / 4.0;
  double worst = 0.0;
  for (int n : {1024, 2048}) worst = std::max(worst, std::abs(sm(0.0, n) - target) / target);
  o.require(worst <= 0.01, fmt::format("sigma(0) rel {:.1e}", worst));
  return o;
}

// ------------------------------------------------------------------ 7
Outcome inequality_ladder() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto& cfg = shipped();
  const auto c = cfg.ode;
  const auto& E = cfg.estimates;

  auto p2 = E.lemma2;
  p2.seed = cfg.seed;
  const auto l2 = estimates::lemma2_sweep(p2, cfg.jobs);
  o.require(l2.violations == 0 && p2.trials >= 1000,
            fmt::format("lemma2 {} functions, {} violations", p2.trials, l2.violations));

  const auto& b52 = E.bound52;
  const auto r52 = estimates::bound_5_2_sweep(c, {b52.s, b52.gammas, b52.trials, b52.n, b52.modes, cfg.seed}, cfg.jobs);
  const double flat = estimates::bound_5_2_flatness(r52, 10.0, 100.0);
  o.require(flat <= 2.0, fmt::format("large-gamma flatness {:.2f}", flat));

  const auto& b51 = E.bound51;
  estimates::Bound51Params p51{1.0, b51.gammas, b51.n, b51.trials, b51.modes, cfg.seed};
  const auto coarse = estimates::bound_5_1_constant(c, p51, cfg.jobs);
  p51.n *= 2;
  const auto fine = estimates::bound_5_1_constant(c, p51, cfg.jobs);
  const double drift = std::max(coarse.best_ratio, fine.best_ratio) / std::min(coarse.best_ratio, fine.best_ratio);
  o.require(std::isfinite(coarse.best_ratio) && std::isfinite(fine.best_ratio) && drift <= 1.5,
            fmt::format("line sup {:.3g}/{:.3g} drift {:.2f}", coarse.best_ratio, fine.best_ratio, drift));
  const auto sing = estimates::bound_5_1_point(c, kPi / 2, 0.0, b51.n, b51.trials, b51.modes, cfg.seed);
  o.require(sing.ratio >= 100.0 * coarse.best_ratio, fmt::format("pi/2 ratio {:.3g}", sing.ratio));
  const double dt = seconds_since(t0);
  o.require(dt <= 120.0, fmt::format("{:.1f}s", dt));
  return o;
}

// ------------------------------------------------------------------ 8
Outcome prop2_blowup() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto& cfg = shipped();
  const auto& q = cfg.estimates.prop2;
  const auto grid = config::expand_range(1.6, 2.6, 0.05);
  bool grid_ok = q.s_grid.size() == grid.size();
  for (std::size_t k = 0; grid_ok && k < grid.size(); ++k) grid_ok = std::abs(q.s_grid[k] - grid[k]) <= 1e-12;
  o.require(grid_ok && q.grid.nx >= 128 && q.grid.nt >= 128, fmt::format("grid {}x{}", q.grid.nx, q.grid.nt));
  GridSpec g;
  g.nx = q.grid.nx;
  g.nt = q.grid.nt;
  g.r = cfg.ode.r;
  g.delta = q.grid.delta;
  g.t_axis = TAxis::kLogFrequency;
  g.log_span = q.grid.log_span;
  const auto rep = estimates::prop2_sweep(q.s_grid, cfg.ode, g, {q.trials, q.nm_evals, q.achoice, cfg.seed}, cfg.jobs);
  const auto b = estimates::blowup_summary(rep, q.exclusion);
  o.require(std::abs(b.argmax_s - 2.0708) <= 0.05 + 1e-9, fmt::format("argmax {:.2f}", b.argmax_s));
  o.require(b.ratio >= 10.0, fmt::format("peak/plateau {:.1f}", b.ratio));
  const double dt = seconds_since(t0);
  o.require(dt <= 300.0, fmt::format("{:.1f}s", dt));
  return o;
}

// ------------------------------------------------------------------ 9
Outcome lambda_symbol() {
  Outcome o;
  double worst = 0.0;
  for (double s : {1.0, 4.5})
    for (double tau : {0.0, 1.0, 10.0, 100.0})
      worst = std::max(worst, std::abs(lambda_conjugation_symbol(s, tau) + s - s / (1.0 + tau * tau)) / (1.0 + s));
  o.require(worst <= 4.0 * std::numeric_limits<double>::epsilon(), fmt::format("{:.1e}", worst));
  return o;
}

// ------------------------------------------------------------------ 10
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Relative path -> contents of every file under dir.
std::vector<std::pair<std::string, std::string>> snapshot(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> v;
  if (!fs::exists(dir)) return v;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) v.emplace_back(fs::relative(e.path(), dir).string(), slurp(e.path()));
  std::sort(v.begin(), v.end());
  return v;
}

Outcome cli_determinism() {
  Outcome o;
#ifndef WORMLAB_EXE
  o.require(false, "wormlab not built");
#else
  const fs::path root = fs::temp_directory_path() / fmt::format("wormlab_accept_{}", static_cast<long>(::getpid()));
  fs::remove_all(root);
  const std::vector<std::string> verbs = {"geometry-check",
                                          "spectrum",
                                          "exceptional",
                                          "mellin-selftest",
                                          "estimates --which lemma2",
                                          "estimates --which bound52",
                                          "estimates --which bound51",
                                          "estimates --which lemma5",
                                          "estimates --which prop2",
                                          "estimates --which lemma1"};
  auto run = [&](const std::string& verb, const std::string& tag, int jobs) {
    const fs::path out = root / tag;
    const std::string cmd =
        fmt::format("\"{}\" --config \"{}\" --out \"{}\" --jobs {} {} > /dev/null 2>&1", WORMLAB_EXE,
                    WORM_SOURCE_DIR "/configs/model.json", out.string(), jobs, verb);
    const int rc = std::system(cmd.c_str());
    return std::make_pair(rc, snapshot(out));
  };
  int k = 0;
  for (const auto& verb : verbs) {
    const auto a = run(verb, fmt::format("{}a", k), 1);
    const auto b = run(verb, fmt::format("{}b", k), 1);
    const auto c = run(verb, fmt::format("{}c", k), 8);
    const bool same = !a.second.empty() && a == b && a == c;
    o.require(same, fmt::format("{}{}", verb, same ? "" : " differs"));
    ++k;
  }
  fs::remove_all(root);
#endif
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all = {
      {1, "geometry oracle", geometry_oracle},
      {2, "alpha coefficient", alpha_oracle},
      {3, "Mellin oracle and identities", mellin_oracle},
      {4, "shooting oracle and certificates", shooting_oracle},
      {5, "exceptional exponents on [0,6]", exceptional_set},
      {6, "Dirichlet degeneracy", dirichlet_degeneracy},
      {7, "inequality ladder", inequality_ladder},
      {8, "model-constant blow-up", prop2_blowup},
      {9, "lambda conjugation symbol", lambda_symbol},
      {10, "CLI determinism", cli_determinism},
  };
  int failed = 0;
  for (const auto& c : all) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.notes.push_back(std::string("exception: ") + e.what());
    }
    std::string detail;
    for (const auto& n : o.notes) detail += (detail.empty() ? "" : "; ") + n;
    std::cout << fmt::format("{} criterion {:>2} {}: {} [{:.1f}s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, detail,
                             seconds_since(t0))
              << std::flush;
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
