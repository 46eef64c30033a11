// Python bindings for the wormlab core.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "worm/config.hpp"
#include "worm/estimates.hpp"
#include "worm/geometry.hpp"
#include "worm/mellin.hpp"
#include "worm/operators.hpp"
#include "worm/spectral.hpp"

namespace py = pybind11;
using namespace worm;

namespace {

OdeCoefficients make_ode(std::vector<double> a, std::vector<double> beta1, std::vector<double> beta2,
                         std::vector<double> beta3, int sign_s, double r, double kappa) {
  OdeCoefficients c;
  c.a = Polynomial{std::move(a)};
  c.beta1 = Polynomial{std::move(beta1)};
  c.beta2 = Polynomial{std::move(beta2)};
  c.beta3 = Polynomial{std::move(beta3)};
  c.sign_s = sign_s;
  c.r = r;
  c.kappa = kappa;
  c.validate();
  return c;
}

geometry::WormConfig make_worm(double r_flat, double delta, double M, double sigma) {
  geometry::WormConfig w;
  w.r_flat = r_flat;
  w.delta = delta;
  w.phi = {M, sigma};
  w.validate();
  return w;
}

py::dict record_dict(const estimates::EstimateRecord& r) {
  py::dict d;
  d["id"] = r.id;
  py::dict params, extra;
  for (const auto& [k, v] : r.params) params[py::str(k)] = v;
  for (const auto& [k, v] : r.extra) extra[py::str(k)] = v;
  d["params"] = params;
  d["lhs"] = r.lhs;
  d["rhs"] = r.rhs;
  d["ratio"] = r.ratio;
  d["family"] = r.family;
  d["flag"] = r.flag;
  d["extra"] = extra;
  return d;
}

py::dict report_dict(const estimates::EstimateReport& rep) {
  py::list recs;
  for (const auto& r : rep.records) recs.append(record_dict(r));
  py::dict d;
  d["id"] = rep.id;
  d["records"] = recs;
  d["best_ratio"] = rep.best_ratio;
  d["argmax"] = rep.argmax;
  d["violations"] = rep.violations;
  return d;
}

py::dict certificate_dict(const spectral::ZeroCertificate& c) {
  py::list zeros;
  for (const auto& z : c.zeros) {
    py::dict e;
    e["zeta"] = z.zeta;
    e["residual"] = z.residual;
    e["scale"] = z.scale;
    e["multiplicity"] = z.multiplicity;
    e["method"] = z.method;
    zeros.append(e);
  }
  py::dict d;
  d["box"] = std::vector<double>{c.box.re_min, c.box.re_max, c.box.im_min, c.box.im_max};
  d["winding"] = c.winding;
  d["zero_count"] = c.zero_count();
  d["zeros"] = zeros;
  d["multiplicity_flag"] = c.multiplicity_flag;
  return d;
}

spectral::Box make_box(const std::vector<double>& b) {
  if (b.size() != 4) throw std::invalid_argument("box must be [re_min, re_max, im_min, im_max]");
  spectral::Box box{b[0], b[1], b[2], b[3]};
  box.validate();
  return box;
}

}  // namespace

PYBIND11_MODULE(_wormlab, m) {
  m.doc() = "Worm-domain boundary analysis core";

  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<OdeCoefficients>(m, "OdeCoefficients")
      .def(py::init(&make_ode), py::arg("a") = std::vector<double>{1.0},
           py::arg("beta1") = std::vector<double>{}, py::arg("beta2") = std::vector<double>{},
           py::arg("beta3") = std::vector<double>{}, py::arg("sign_s") = 1, py::arg("r") = 1.0,
           py::arg("kappa") = 0.0)
      .def_property_readonly("a", [](const OdeCoefficients& c) { return c.a.c; })
      .def_readonly("sign_s", &OdeCoefficients::sign_s)
      .def_readonly("r", &OdeCoefficients::r)
      .def_readonly("kappa", &OdeCoefficients::kappa);

  py::class_<geometry::WormConfig>(m, "WormConfig")
      .def(py::init(&make_worm), py::arg("r_flat") = 0.5, py::arg("delta") = 0.4, py::arg("M") = 0.5,
           py::arg("sigma") = 1.0)
      .def_readonly("r_flat", &geometry::WormConfig::r_flat)
      .def_readonly("delta", &geometry::WormConfig::delta);

  // geometry
  m.def("alpha_coefficient", &geometry::alpha_coefficient, py::arg("t"));
  m.def(
      "levi_coefficients",
      [](const geometry::WormConfig& w, double x, double t) {
        const auto l = geometry::levi_coefficients(w, x, t);
        return py::make_tuple(l.mu, l.nu);
      },
      py::arg("worm"), py::arg("x"), py::arg("t"));
  m.def(
      "pseudoconvexity_scan",
      [](const geometry::WormConfig& w, int nx, int nt, bool flat_only, double tol) {
        const auto grid = flat_only ? geometry::ScanGrid::flat_region(w, nx, nt)
                                    : geometry::ScanGrid::full_chart(w, nx, nt);
        const auto r = geometry::pseudoconvexity_scan(w, grid, tol);
        py::dict d;
        d["min_mu"] = r.min_mu;
        d["argmin"] = py::make_tuple(r.argmin_x, r.argmin_t);
        d["violations"] = r.violations;
        d["max_abs_nu"] = r.max_abs_nu;
        d["flat_max_deviation"] = r.flat_max_deviation;
        d["chart_max_residual"] = r.chart_max_residual;
        d["passed"] = r.passed();
        return d;
      },
      py::arg("worm"), py::arg("nx") = 101, py::arg("nt") = 101, py::arg("flat_only") = false,
      py::arg("tol") = 1e-10);

  // operators
  m.def("lambda_conjugation_symbol", &lambda_conjugation_symbol, py::arg("s"), py::arg("tau"));
  m.def("q_cutoff_profile", &q_cutoff_profile, py::arg("tau"));

  // spectral
  m.def(
      "shoot", [](cplx zeta, const OdeCoefficients& c, double tol) { return spectral::shoot(zeta, c, tol).phi_end; },
      py::arg("zeta"), py::arg("ode") = OdeCoefficients::model(), py::arg("tol") = 1e-10);
  m.def(
      "count_zeros",
      [](const std::vector<double>& box, const OdeCoefficients& c, double tol) {
        return spectral::count_zeros(make_box(box), c, tol);
      },
      py::arg("box"), py::arg("ode") = OdeCoefficients::model(), py::arg("tol") = 1e-10);
  m.def(
      "locate_zeros",
      [](const std::vector<double>& box, const OdeCoefficients& c, double tol) {
        return certificate_dict(spectral::locate_zeros(make_box(box), c, tol));
      },
      py::arg("box"), py::arg("ode") = OdeCoefficients::model(), py::arg("tol") = 1e-10);
  m.def(
      "exceptional_sobolev",
      [](double s_min, double s_max, double gamma_max, const OdeCoefficients& c, double tol) {
        const auto ex = spectral::exceptional_sobolev(s_min, s_max, gamma_max, c, tol);
        std::vector<double> s;
        for (const auto& e : ex.entries) s.push_back(e.s);
        return s;
      },
      py::arg("s_min"), py::arg("s_max"), py::arg("gamma_max") = 2.0, py::arg("ode") = OdeCoefficients::model(),
      py::arg("tol") = 1e-10);
  m.def(
      "dirichlet_sigma_min",
      [](cplx zeta, const OdeCoefficients& c, int n) { return spectral::dirichlet_sigma_min(zeta, c, n).value; },
      py::arg("zeta"), py::arg("ode") = OdeCoefficients::model(), py::arg("n") = 512);

  // Mellin
  m.def(
      "mellin_nodes",
      [](double t_min, double t_max, int n_t) { return mellin::MellinGrid::full_band(t_min, t_max, n_t).t_nodes(); },
      py::arg("t_min"), py::arg("t_max"), py::arg("n_t"));
  m.def(
      "mellin_at",
      [](double t_min, double t_max, const VectorXc& f, double offset, double gamma) {
        const auto g = mellin::MellinGrid::full_band(t_min, t_max, static_cast<int>(f.size()));
        return mellin::mellin_at(g, f, offset, gamma);
      },
      py::arg("t_min"), py::arg("t_max"), py::arg("f"), py::arg("offset"), py::arg("gamma"));
  m.def(
      "mellin_defects",
      [](double t_min, double t_max, const VectorXc& f) {
        const auto g = mellin::MellinGrid::full_band(t_min, t_max, static_cast<int>(f.size()));
        const auto pl = mellin::plancherel_defect(g, f);
        py::dict d;
        d["round_trip"] = mellin::round_trip_defect(g, f);
        d["plancherel_dt_over_t"] = pl.dt_over_t;
        d["plancherel_dt"] = pl.dt;
        d["shift"] = mellin::shift_identity_defect(g, f);
        d["tdt"] = mellin::tdt_symbol_defect(g, f);
        return d;
      },
      py::arg("t_min"), py::arg("t_max"), py::arg("f"));

  // estimates
  m.def(
      "lemma2_check",
      [](const std::vector<double>& xs, const VectorXc& f, double eps) {
        py::list out;
        for (const auto& r : estimates::lemma2_check(xs, f, eps)) out.append(record_dict(r));
        return out;
      },
      py::arg("xs"), py::arg("f"), py::arg("eps"));
  m.def(
      "lemma2_sweep",
      [](int trials, int n, std::uint64_t seed, int jobs) {
        estimates::Lemma2Params p;
        p.trials = trials;
        p.n = n;
        p.seed = seed;
        return report_dict(estimates::lemma2_sweep(p, jobs));
      },
      py::arg("trials") = 1000, py::arg("n") = 2001, py::arg("seed") = 1, py::arg("jobs") = 1);
  m.def(
      "bound_5_1_point",
      [](double s, double gamma, const OdeCoefficients& c, int n, int trials, int modes, std::uint64_t seed) {
        return record_dict(estimates::bound_5_1_point(c, s, gamma, n, trials, modes, seed));
      },
      py::arg("s"), py::arg("gamma"), py::arg("ode") = OdeCoefficients::model(), py::arg("n") = 512,
      py::arg("trials") = 16, py::arg("modes") = 6, py::arg("seed") = 1);
  m.def("derive_seed", &estimates::derive_seed, py::arg("seed"), py::arg("stream"));

  // configuration
  m.def(
      "load_config",
      [](const std::string& path, const std::vector<std::string>& overrides) {
        std::vector<config::Override> ov;
        for (const auto& s : overrides) ov.push_back(config::Override::parse(s));
        return config::to_json(config::load_config(path, ov));
      },
      py::arg("path"), py::arg("overrides") = std::vector<std::string>{},
      "Resolved configuration as canonical JSON text.");
  m.def(
      "config_hash",
      [](const std::string& path, const std::vector<std::string>& overrides) {
        std::vector<config::Override> ov;
        for (const auto& s : overrides) ov.push_back(config::Override::parse(s));
        return config::config_hash(config::load_config(path, ov));
      },
      py::arg("path"), py::arg("overrides") = std::vector<std::string>{});
}
