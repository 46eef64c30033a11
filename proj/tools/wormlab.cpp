// wormlab: command-line front end for the geometry, spectral, Mellin and
// estimate modules.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "worm/config.hpp"
#include "worm/estimates.hpp"
#include "worm/geometry.hpp"
#include "worm/mellin.hpp"
#include "worm/report.hpp"
#include "worm/spectral.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace worm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvariant = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

constexpr double kFlatTol = 1e-8;
constexpr double kNuTol = 1e-10;
constexpr std::size_t kMaxListedViolations = 50;
constexpr double kRoundoffFloor = 1e-10;

std::string dump(const json& j) { return j.dump(2) + "\n"; }

int geometry_check(const config::RunConfig& cfg, const std::string& hash) {
  const auto& w = cfg.worm;
  const auto full = geometry::ScanGrid::full_chart(w, cfg.scan.nx, cfg.scan.nt);
  const auto scan = geometry::pseudoconvexity_scan(w, full, cfg.scan.tol);
  const auto flat = geometry::pseudoconvexity_scan(w, geometry::ScanGrid::flat_region(w, cfg.scan.nx, cfg.scan.nt),
                                                   cfg.scan.tol);

  // CR residual on a coarse interior grid; probes must stay inside the chart
  const auto cr_grid = geometry::ScanGrid::full_chart(w, 21, 21, 0.05);
  double cr_max = 0.0;
  for (int i = 0; i < cr_grid.nx; ++i)
    for (int j = 0; j < cr_grid.nt; ++j) {
      const double x = cr_grid.x_min + (cr_grid.x_max - cr_grid.x_min) * i / (cr_grid.nx - 1);
      const double t = cr_grid.t_min + (cr_grid.t_max - cr_grid.t_min) * j / (cr_grid.nt - 1);
      cr_max = std::max(cr_max, geometry::cr_annihilation_residual(w, {x, 0.7, t}, cfg.scan.cr_step));
    }

  const double chart_res = std::max(scan.chart_max_residual, flat.chart_max_residual);
  const double nu = std::max(scan.max_abs_nu, flat.max_abs_nu);
  json viol = json::array();
  for (const auto& s : scan.samples) {
    if (s.mu >= -cfg.scan.tol) continue;
    if (viol.size() >= kMaxListedViolations) break;
    viol.push_back({{"x", s.x}, {"t", s.t}, {"mu", s.mu}});
  }
  const bool flat_ok = flat.flat_max_deviation <= kFlatTol;
  const bool pass = scan.passed() && flat.passed() && flat_ok && nu <= kNuTol &&
                    chart_res <= cfg.scan.chart_tol && cr_max <= cfg.scan.cr_tol;
  json summary = {{"config_hash", hash},
                  {"scan", {{"nx", cfg.scan.nx}, {"nt", cfg.scan.nt}, {"x_max", full.x_max}, {"t_max", full.t_max}}},
                  {"min_mu", scan.min_mu},
                  {"argmin", {{"x", scan.argmin_x}, {"t", scan.argmin_t}}},
                  {"violations", scan.violations},
                  {"violation_samples", viol},
                  {"max_abs_nu", nu},
                  {"flat_max_deviation", flat.flat_max_deviation},
                  {"flat_t0_max_abs_mu", flat.flat_t0_max_abs_mu},
                  {"chart_max_residual", chart_res},
                  {"cr_max_residual", cr_max},
                  {"passed", pass}};
  const fs::path out(cfg.output_dir);
  report::write_file(out / "geometry_mu.csv", report::scan_csv(scan));
  report::write_file(out / "geometry_summary.json", dump(summary));
  if (!pass) {
    std::cerr << fmt::format("geometry-check: FAILED (violations {}, min mu {}, flat deviation {}, chart {}, cr {})\n",
                             scan.violations, report::num(scan.min_mu), report::num(flat.flat_max_deviation),
                             report::num(chart_res), report::num(cr_max));
    for (const auto& v : viol)
      std::cerr << fmt::format("  mu({}, {}) = {}\n", report::num(v["x"].get<double>()),
                               report::num(v["t"].get<double>()), report::num(v["mu"].get<double>()));
    return kExitInvariant;
  }
  std::cout << fmt::format("geometry-check: ok (min mu {}, {} samples)\n", report::num(scan.min_mu),
                           scan.samples.size());
  return kExitOk;
}

int spectrum(const config::RunConfig& cfg, const std::string& hash) {
  const auto cert = spectral::locate_zeros(cfg.spectrum.box, cfg.ode, cfg.spectrum.tol);
  const fs::path out(cfg.output_dir);
  report::write_file(out / "spectrum_certificate.json", report::certificate_json(cert, cfg.spectrum.tol, hash));
  report::write_file(out / "spectrum_zeros.csv", report::zeros_csv(cert));
  std::cout << fmt::format("spectrum: winding {}, {} zeros\n", cert.winding, cert.zero_count());
  return cert.winding == cert.zero_count() ? kExitOk : kExitInvariant;
}

int exceptional(const config::RunConfig& cfg, const std::string& hash) {
  const auto& e = cfg.exceptional;
  const auto ex = spectral::exceptional_sobolev(e.s_min, e.s_max, e.gamma_max, cfg.ode, cfg.spectrum.tol);
  const fs::path out(cfg.output_dir);
  report::write_file(out / "exceptional.csv", report::exceptional_csv(ex));
  report::write_file(out / "exceptional.json", report::exceptional_json(ex, cfg.spectrum.tol, hash));
  std::cout << fmt::format("exceptional: {} values in [{}, {}]\n", ex.entries.size(), report::num(e.s_min),
                           report::num(e.s_max));
  return kExitOk;
}

GridSpec frequency_grid(const config::FrequencyGrid& f, double r) {
  GridSpec g;
  g.nx = f.nx;
  g.nt = f.nt;
  g.r = r;
  g.delta = f.delta;
  g.t_axis = TAxis::kLogFrequency;
  g.log_span = f.log_span;
  g.validate();
  return g;
}

json argmax_json(const estimates::EstimateReport& r) {
  if (r.argmax < 0) return nullptr;
  json p = json::object();
  for (const auto& [k, v] : r.records[r.argmax].params) p[k] = v;
  return p;
}

int run_estimates(const config::RunConfig& cfg, const std::string& hash, const std::string& which) {
  const auto& E = cfg.estimates;
  estimates::EstimateReport rep;
  std::string key;
  json summary = {{"config_hash", hash}, {"which", which}, {"seed", cfg.seed}};
  bool pass = true;

  if (which == "lemma2") {
    auto p = E.lemma2;
    p.seed = cfg.seed;
    rep = estimates::lemma2_sweep(p, cfg.jobs);
    key = "eps";
    pass = rep.violations == 0;
  } else if (which == "bound52") {
    const auto& b = E.bound52;
    estimates::Bound52Params p{b.s, b.gammas, b.trials, b.n, b.modes, cfg.seed};
    rep = estimates::bound_5_2_sweep(cfg.ode, p, cfg.jobs);
    key = "gamma";
    const double flat = estimates::bound_5_2_flatness(rep, b.flat_lo, b.flat_hi);
    summary["flatness"] = flat;
    summary["flat_range"] = {b.flat_lo, b.flat_hi};
    pass = flat <= b.flat_max;
  } else if (which == "bound51") {
    const auto& b = E.bound51;
    estimates::Bound51Params p{b.s, b.gammas, b.n, b.trials, b.modes, cfg.seed};
    rep = estimates::bound_5_1_constant(cfg.ode, p, cfg.jobs);
    key = "gamma";
    int singular = 0;
    for (const auto& r : rep.records) singular += r.flag == "singular-expected";
    summary["singular_expected"] = singular;
  } else if (which == "lemma5") {
    const auto& l = E.lemma5;
    rep.id = "lemma5";
    rep.seed = cfg.seed;
    for (double d : l.deltas) {
      estimates::Lemma5Params p;
      p.s = l.s;
      p.achoice = l.achoice;
      p.delta = d;
      p.nx = l.nx;
      p.nt_log = l.nt_log;
      p.t_min = l.t_min;
      p.nt_linear = l.nt_linear;
      rep.add(estimates::lemma5_weighted_integrals(estimates::lemma5_packet(cfg.ode.r, d, l.tau0), cfg.ode, p));
    }
    key = "delta";
  } else if (which == "prop2") {
    const auto& q = E.prop2;
    estimates::Prop2Params p{q.trials, q.nm_evals, q.achoice, cfg.seed};
    rep = estimates::prop2_sweep(q.s_grid, cfg.ode, frequency_grid(q.grid, cfg.ode.r), p, cfg.jobs);
    key = "s";
    const auto b = estimates::blowup_summary(rep, q.exclusion);
    summary["blowup"] = {{"argmax_s", b.argmax_s}, {"peak", b.peak}, {"plateau", b.plateau}, {"ratio", b.ratio}};
  } else if (which == "lemma1") {
    const auto& q = E.lemma1;
    estimates::Lemma1Params p{q.trials, q.xis, q.y0_fractions, cfg.seed};
    rep = estimates::lemma1_sweep(q.s_grid, cfg.ode, frequency_grid(q.grid, cfg.ode.r), p, cfg.jobs);
    key = "s";
  } else {
    throw ConfigError("which", fmt::format("unknown estimate suite '{}'", which));
  }

  summary["records"] = rep.records.size();
  summary["best_ratio"] = rep.best_ratio;
  summary["argmax"] = argmax_json(rep);
  summary["violations"] = rep.violations;
  summary["passed"] = pass;
  const fs::path out(cfg.output_dir);
  report::write_file(out / fmt::format("estimates_{}.ndjson", which), report::report_ndjson(rep, hash));
  report::write_file(out / fmt::format("estimates_{}_plot.csv", which), report::plot_csv(rep, key));
  report::write_file(out / fmt::format("estimates_{}_summary.json", which), dump(summary));
  std::cout << fmt::format("estimates {}: {} records, best ratio {}, violations {}\n", which, rep.records.size(),
                           report::num(rep.best_ratio), rep.violations);
  return pass ? kExitOk : kExitInvariant;
}

json mellin_level(const config::MellinSettings& m, int n_t) {
  const auto g = mellin::MellinGrid::full_band(m.t_min, m.t_max, n_t);
  const auto t = g.t_nodes();
  VectorXc f(n_t);
  for (int j = 0; j < n_t; ++j) f[j] = t[j] * std::exp(-t[j]);
  json oracle = json::array();
  double worst = 0.0;
  for (double gam : m.oracle_gammas) {
    const cplx F = mellin::mellin_at(g, f, 0.0, gam);
    // |Γ(1 - iγ)|² = πγ / sinh(πγ)
    const double exact = gam == 0.0 ? 1.0 : std::sqrt(kPi * gam / std::sinh(kPi * gam));
    const double rel = std::abs(std::abs(F) - exact) / exact;
    worst = std::max(worst, rel);
    oracle.push_back({{"gamma", gam}, {"re", F.real()}, {"im", F.imag()}, {"abs_exact", exact}, {"rel_error", rel}});
  }
  const auto pl = mellin::plancherel_defect(g, f);
  return {{"n_t", n_t},
          {"oracle", oracle},
          {"oracle_max_rel_error", worst},
          {"round_trip", mellin::round_trip_defect(g, f)},
          {"plancherel_dt_over_t", pl.dt_over_t},
          {"plancherel_dt", pl.dt},
          {"shift", mellin::shift_identity_defect(g, f)},
          {"tdt", mellin::tdt_symbol_defect(g, f)}};
}

int mellin_selftest(const config::RunConfig& cfg, const std::string& hash) {
  const auto& m = cfg.mellin;
  const json coarse = mellin_level(m, m.n_t);
  const json fine = mellin_level(m, 2 * m.n_t);
  bool pass = coarse["oracle_max_rel_error"].get<double>() <= m.tol && fine["oracle_max_rel_error"].get<double>() <= m.tol;
  json refine = json::object();
  for (const char* k : {"round_trip", "plancherel_dt_over_t", "plancherel_dt", "shift", "tdt"}) {
    const double a = coarse[k].get<double>(), b = fine[k].get<double>();
    const bool ok = a <= m.tol && b <= m.tol && b <= std::max(0.5 * a, kRoundoffFloor);
    refine[k] = {{"coarse", a}, {"fine", b}, {"ok", ok}};
    pass = pass && ok;
  }
  json j = {{"config_hash", hash}, {"tol", m.tol}, {"roundoff_floor", kRoundoffFloor},
            {"levels", {coarse, fine}}, {"refinement", refine}, {"passed", pass}};
  report::write_file(fs::path(cfg.output_dir) / "mellin_selftest.json", dump(j));
  std::cout << fmt::format("mellin-selftest: {}\n", pass ? "ok" : "FAILED");
  return pass ? kExitOk : kExitInvariant;
}

std::string join_numbers(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + report::num(v[i]);
  return s + "]";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wormlab: worm-domain boundary analysis toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  int jobs = 0;
  double tol = 0.0;
  app.add_option("--config", config_path, "JSON config file")->envname("WORM_CONFIG")->required();
  auto* o_out = app.add_option("--out", out_dir, "output directory");
  auto* o_seed = app.add_option("--seed", seed, "RNG seed");
  auto* o_jobs = app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  auto* o_tol = app.add_option("--tol", tol, "ODE / shooting tolerance");
  app.add_option("--set", sets, "override a config field: dotted.path=value");

  auto* geo = app.add_subcommand("geometry-check", "pseudoconvexity scan, chart and CR checks");
  auto* spec = app.add_subcommand("spectrum", "certified zeros of the shooting function in a box");
  std::vector<double> box;
  auto* o_box = spec->add_option("--box", box, "re_min,re_max,im_min,im_max")->delimiter(',')->expected(4);
  auto* exc = app.add_subcommand("exceptional", "exceptional Sobolev exponents");
  double s_min = 0, s_max = 0, gamma_max = 0;
  auto* o_smin = exc->add_option("--s-min", s_min);
  auto* o_smax = exc->add_option("--s-max", s_max);
  auto* o_gmax = exc->add_option("--gamma-max", gamma_max);
  auto* est = app.add_subcommand("estimates", "empirical constants of the estimate ladder");
  std::string which;
  est->add_option("--which", which, "lemma2|bound52|bound51|lemma5|prop2|lemma1")
      ->required()
      ->check(CLI::IsMember({"lemma2", "bound52", "bound51", "lemma5", "prop2", "lemma1"}));
  auto* mel = app.add_subcommand("mellin-selftest", "Mellin transform oracle and identities");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    std::vector<config::Override> ov;
    for (const auto& s : sets) ov.push_back(config::Override::parse(s));
    if (*o_out) ov.push_back({"output_dir", json(out_dir).dump()});
    if (*o_seed) ov.push_back({"seed", std::to_string(seed)});
    if (*o_jobs) ov.push_back({"jobs", std::to_string(jobs)});
    if (*o_tol) ov.push_back({"spectrum.tol", report::num(tol)});
    if (*o_box) ov.push_back({"spectrum.box", join_numbers(box)});
    if (*o_smin) ov.push_back({"exceptional.s_min", report::num(s_min)});
    if (*o_smax) ov.push_back({"exceptional.s_max", report::num(s_max)});
    if (*o_gmax) ov.push_back({"exceptional.gamma_max", report::num(gamma_max)});

    const auto cfg = config::load_config(config_path, ov);
    const std::string hash = config::config_hash(cfg);
    if (*geo) return geometry_check(cfg, hash);
    if (*spec) return spectrum(cfg, hash);
    if (*exc) return exceptional(cfg, hash);
    if (*est) return run_estimates(cfg, hash, which);
    if (*mel) return mellin_selftest(cfg, hash);
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "config error";
    if (!e.field().empty()) std::cerr << " [" << e.field() << "]";
    std::cerr << ": " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
