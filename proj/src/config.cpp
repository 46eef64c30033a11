#include "worm/config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace worm::config {

using nlohmann::json;

namespace {

std::string join(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

// Reads fields of one JSON object and remembers which keys were consumed.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, fmt::format("{}: expected an object", where()));
  }

  const json& at(const std::string& key) {
    const auto it = j_.find(key);
    if (it == j_.end()) throw ConfigError(join(path_, key), fmt::format("missing field '{}'", join(path_, key)));
    seen_.insert(key);
    return *it;
  }

  double number(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number()) throw type_error(key, "a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw type_error(key, "a finite number");
    return d;
  }

  double positive(const std::string& key) {
    const double v = number(key);
    if (!(v > 0.0)) throw ConfigError(join(path_, key), fmt::format("field '{}' must be positive", join(path_, key)));
    return v;
  }

  int integer(const std::string& key, int min = std::numeric_limits<int>::min()) {
    const json& v = at(key);
    if (!v.is_number_integer()) throw type_error(key, "an integer");
    const auto i = v.get<long long>();
    if (i < min || i > std::numeric_limits<int>::max())
      throw ConfigError(join(path_, key), fmt::format("field '{}' must be an integer >= {}", join(path_, key), min));
    return static_cast<int>(i);
  }

  std::uint64_t unsigned_integer(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      throw type_error(key, "a non-negative integer");
    return v.get<std::uint64_t>();
  }

  std::string string(const std::string& key) {
    const json& v = at(key);
    if (!v.is_string()) throw type_error(key, "a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, bool allow_empty = true) {
    const json& v = at(key);
    if (!v.is_array()) throw type_error(key, "an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw type_error(key, "an array of numbers");
      out.push_back(e.get<double>());
    }
    if (!allow_empty && out.empty())
      throw ConfigError(join(path_, key), fmt::format("field '{}' must not be empty", join(path_, key)));
    return out;
  }

  // [v0, ...] or {"start", "stop", "step"}; never empty.
  std::vector<double> range(const std::string& key) {
    const json& v = at(key);
    if (v.is_array()) return numbers(key, false);
    if (!v.is_object()) throw type_error(key, "an array or a {start, stop, step} object");
    Reader r(v, join(path_, key));
    const double start = r.number("start"), stop = r.number("stop"), step = r.positive("step");
    r.finish();
    if (stop < start)
      throw ConfigError(join(path_, key), fmt::format("range '{}' has stop < start", join(path_, key)));
    return expand_range(start, stop, step);
  }

  Polynomial polynomial(const std::string& key) { return Polynomial{numbers(key)}; }

  Reader object(const std::string& key) { return Reader(at(key), join(path_, key)); }

  const std::string& path() const { return path_; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key()))
        throw ConfigError(join(path_, it.key()), fmt::format("unknown field '{}'", join(path_, it.key())));
  }

  ConfigError fail(const std::string& key, const std::string& what) const {
    return ConfigError(join(path_, key), fmt::format("field '{}': {}", join(path_, key), what));
  }

 private:
  std::string where() const { return path_.empty() ? "config" : path_; }
  ConfigError type_error(const std::string& key, const std::string& what) const {
    return ConfigError(join(path_, key), fmt::format("field '{}' must be {}", join(path_, key), what));
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

AChoice achoice_field(Reader& r, const std::string& key) {
  const std::string s = r.string(key);
  try {
    return parse_achoice(s);
  } catch (const std::invalid_argument& e) {
    throw r.fail(key, e.what());
  }
}

FrequencyGrid read_frequency_grid(Reader r) {
  FrequencyGrid g;
  g.nx = r.integer("nx", 8);
  g.nt = r.integer("nt", 8);
  if (g.nt % 2) throw r.fail("nt", "must be even");
  g.delta = r.positive("delta");
  g.log_span = r.positive("log_span");
  r.finish();
  return g;
}

json write_frequency_grid(const FrequencyGrid& g) {
  return {{"nx", g.nx}, {"nt", g.nt}, {"delta", g.delta}, {"log_span", g.log_span}};
}

RunConfig from_json(const json& root) {
  RunConfig c;
  Reader top(root, "");

  {
    Reader w = top.object("worm");
    c.worm.r_flat = w.positive("r_flat");
    c.worm.delta = w.positive("delta");
    Reader phi = w.object("phi");
    c.worm.phi.M = phi.number("M");
    c.worm.phi.sigma = phi.number("sigma");
    phi.finish();
    w.finish();
  }
  {
    Reader s = top.object("scan");
    c.scan.nx = s.integer("nx", 2);
    c.scan.nt = s.integer("nt", 2);
    c.scan.tol = s.positive("tol");
    c.scan.chart_tol = s.positive("chart_tol");
    c.scan.cr_step = s.positive("cr_step");
    c.scan.cr_tol = s.positive("cr_tol");
    s.finish();
  }
  {
    Reader o = top.object("ode");
    c.ode.a = o.polynomial("a");
    c.ode.beta1 = o.polynomial("beta1");
    c.ode.beta2 = o.polynomial("beta2");
    c.ode.beta3 = o.polynomial("beta3");
    c.ode.sign_s = o.integer("sign_s");
    c.ode.r = o.positive("r");
    c.ode.kappa = o.number("kappa");
    o.finish();
  }
  {
    Reader s = top.object("spectrum");
    const auto box = s.numbers("box");
    if (box.size() != 4) throw s.fail("box", "expected [re_min, re_max, im_min, im_max]");
    c.spectrum.box = {box[0], box[1], box[2], box[3]};
    c.spectrum.tol = s.positive("tol");
    s.finish();
  }
  {
    Reader e = top.object("exceptional");
    c.exceptional.s_min = e.number("s_min");
    c.exceptional.s_max = e.number("s_max");
    c.exceptional.gamma_max = e.positive("gamma_max");
    e.finish();
  }
  {
    Reader m = top.object("mellin");
    c.mellin.t_min = m.positive("t_min");
    c.mellin.t_max = m.positive("t_max");
    c.mellin.n_t = m.integer("n_t", 32);
    c.mellin.oracle_gammas = m.numbers("oracle_gammas", false);
    c.mellin.tol = m.positive("tol");
    m.finish();
  }
  {
    Reader est = top.object("estimates");
    {
      Reader r = est.object("lemma2");
      auto& p = c.estimates.lemma2;
      p.trials = r.integer("trials", 1);
      p.n = r.integer("n", 33);
      if (p.n % 2 == 0) throw r.fail("n", "must be odd");
      p.half_width = r.positive("half_width");
      p.modes = r.integer("modes", 1);
      p.max_frequency = r.positive("max_frequency");
      r.finish();
    }
    {
      Reader r = est.object("bound52");
      auto& p = c.estimates.bound52;
      p.s = r.number("s");
      p.gammas = r.range("gammas");
      p.trials = r.integer("trials", 1);
      p.n = r.integer("n", 16);
      p.modes = r.integer("modes", 1);
      p.flat_lo = r.number("flat_lo");
      p.flat_hi = r.number("flat_hi");
      p.flat_max = r.positive("flat_max");
      r.finish();
    }
    {
      Reader r = est.object("bound51");
      auto& p = c.estimates.bound51;
      p.s = r.number("s");
      p.gammas = r.range("gammas");
      p.n = r.integer("n", 64);
      p.trials = r.integer("trials", 1);
      p.modes = r.integer("modes", 1);
      r.finish();
    }
    {
      Reader r = est.object("lemma5");
      auto& p = c.estimates.lemma5;
      p.s = r.number("s");
      p.achoice = achoice_field(r, "achoice");
      p.deltas = r.numbers("deltas", false);
      for (double d : p.deltas)
        if (!(d > 0.0)) throw r.fail("deltas", "entries must be positive");
      p.tau0 = r.number("tau0");
      p.nx = r.integer("nx", 8);
      p.nt_log = r.integer("nt_log", 32);
      p.t_min = r.positive("t_min");
      p.nt_linear = r.integer("nt_linear", 8);
      r.finish();
    }
    {
      Reader r = est.object("prop2");
      auto& p = c.estimates.prop2;
      p.s_grid = r.range("s_grid");
      p.grid = read_frequency_grid(r.object("grid"));
      p.trials = r.integer("trials", 0);
      p.nm_evals = r.integer("nm_evals", 0);
      p.achoice = achoice_field(r, "achoice");
      p.exclusion = r.positive("exclusion");
      r.finish();
    }
    {
      Reader r = est.object("lemma1");
      auto& p = c.estimates.lemma1;
      p.s_grid = r.range("s_grid");
      p.grid = read_frequency_grid(r.object("grid"));
      p.trials = r.integer("trials", 0);
      p.xis = r.numbers("xis");
      p.y0_fractions = r.numbers("y0_fractions");
      for (double f : p.y0_fractions)
        if (!(f > 0.0 && f < 1.0)) throw r.fail("y0_fractions", "entries must lie in (0, 1)");
      r.finish();
    }
    est.finish();
  }
  c.seed = top.unsigned_integer("seed");
  c.estimates.lemma2.seed = c.seed;
  c.jobs = top.integer("jobs", 1);
  c.output_dir = top.string("output_dir");
  top.finish();
  c.validate();
  return c;
}

json to_json_value(const RunConfig& c) {
  const auto& e = c.estimates;
  json j;
  j["worm"] = {{"r_flat", c.worm.r_flat},
               {"delta", c.worm.delta},
               {"phi", {{"M", c.worm.phi.M}, {"sigma", c.worm.phi.sigma}}}};
  j["scan"] = {{"nx", c.scan.nx},           {"nt", c.scan.nt},         {"tol", c.scan.tol},
               {"chart_tol", c.scan.chart_tol}, {"cr_step", c.scan.cr_step}, {"cr_tol", c.scan.cr_tol}};
  j["ode"] = {{"a", c.ode.a.c},         {"beta1", c.ode.beta1.c}, {"beta2", c.ode.beta2.c},
              {"beta3", c.ode.beta3.c}, {"sign_s", c.ode.sign_s}, {"r", c.ode.r},
              {"kappa", c.ode.kappa}};
  const auto& b = c.spectrum.box;
  j["spectrum"] = {{"box", {b.re_min, b.re_max, b.im_min, b.im_max}}, {"tol", c.spectrum.tol}};
  j["exceptional"] = {{"s_min", c.exceptional.s_min},
                      {"s_max", c.exceptional.s_max},
                      {"gamma_max", c.exceptional.gamma_max}};
  j["mellin"] = {{"t_min", c.mellin.t_min},
                 {"t_max", c.mellin.t_max},
                 {"n_t", c.mellin.n_t},
                 {"oracle_gammas", c.mellin.oracle_gammas},
                 {"tol", c.mellin.tol}};
  j["estimates"]["lemma2"] = {{"trials", e.lemma2.trials},
                              {"n", e.lemma2.n},
                              {"half_width", e.lemma2.half_width},
                              {"modes", e.lemma2.modes},
                              {"max_frequency", e.lemma2.max_frequency}};
  j["estimates"]["bound52"] = {{"s", e.bound52.s},           {"gammas", e.bound52.gammas},
                               {"trials", e.bound52.trials}, {"n", e.bound52.n},
                               {"modes", e.bound52.modes},   {"flat_lo", e.bound52.flat_lo},
                               {"flat_hi", e.bound52.flat_hi}, {"flat_max", e.bound52.flat_max}};
  j["estimates"]["bound51"] = {{"s", e.bound51.s},
                               {"gammas", e.bound51.gammas},
                               {"n", e.bound51.n},
                               {"trials", e.bound51.trials},
                               {"modes", e.bound51.modes}};
  j["estimates"]["lemma5"] = {{"s", e.lemma5.s},
                              {"achoice", to_string(e.lemma5.achoice)},
                              {"deltas", e.lemma5.deltas},
                              {"tau0", e.lemma5.tau0},
                              {"nx", e.lemma5.nx},
                              {"nt_log", e.lemma5.nt_log},
                              {"t_min", e.lemma5.t_min},
                              {"nt_linear", e.lemma5.nt_linear}};
  j["estimates"]["prop2"] = {{"s_grid", e.prop2.s_grid},
                             {"grid", write_frequency_grid(e.prop2.grid)},
                             {"trials", e.prop2.trials},
                             {"nm_evals", e.prop2.nm_evals},
                             {"achoice", to_string(e.prop2.achoice)},
                             {"exclusion", e.prop2.exclusion}};
  j["estimates"]["lemma1"] = {{"s_grid", e.lemma1.s_grid},
                              {"grid", write_frequency_grid(e.lemma1.grid)},
                              {"trials", e.lemma1.trials},
                              {"xis", e.lemma1.xis},
                              {"y0_fractions", e.lemma1.y0_fractions}};
  j["seed"] = c.seed;
  j["jobs"] = c.jobs;
  j["output_dir"] = c.output_dir;
  return j;
}

void apply_override(json& root, const Override& o) {
  json* cur = &root;
  std::stringstream ss(o.path);
  std::string seg, walked;
  while (std::getline(ss, seg, '.')) {
    walked = join(walked, seg);
    if (cur->is_object()) {
      const auto it = cur->find(seg);
      if (it == cur->end()) throw ConfigError(walked, fmt::format("override: unknown field '{}'", walked));
      cur = &*it;
    } else if (cur->is_array()) {
      std::size_t idx = 0;
      try {
        std::size_t used = 0;
        idx = std::stoul(seg, &used);
        if (used != seg.size()) throw std::invalid_argument(seg);
      } catch (const std::exception&) {
        throw ConfigError(walked, fmt::format("override: '{}' is not an array index", walked));
      }
      if (idx >= cur->size()) throw ConfigError(walked, fmt::format("override: index out of range at '{}'", walked));
      cur = &(*cur)[idx];
    } else {
      throw ConfigError(walked, fmt::format("override: '{}' is not an object", walked));
    }
  }
  json value = json::parse(o.value, nullptr, false);
  if (value.is_discarded()) value = o.value;
  *cur = value;
}

std::string position_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return fmt::format("line {}, column {}", line, col);
}

}  // namespace

std::vector<double> expand_range(double start, double stop, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("range: step must be positive");
  if (stop < start) throw std::invalid_argument("range: stop < start");
  const long n = std::lround(std::floor((stop - start) / step + 1e-9));
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(n + 1));
  for (long k = 0; k <= n; ++k) v.push_back(start + k * step);
  return v;
}

void RunConfig::validate() const {
  try {
    worm.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("worm", std::string("worm: ") + e.what());
  }
  try {
    ode.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("ode", std::string("ode: ") + e.what());
  }
  try {
    spectrum.box.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("spectrum.box", std::string("spectrum.box: ") + e.what());
  }
  if (!(spectrum.tol >= 1e-12 && spectrum.tol <= 1e-6))
    throw ConfigError("spectrum.tol", "spectrum.tol must lie in [1e-12, 1e-6]");
  if (exceptional.s_min > exceptional.s_max)
    throw ConfigError("exceptional.s_min", "exceptional: s_min must not exceed s_max");
  if (exceptional.s_min < 0.0) throw ConfigError("exceptional.s_min", "exceptional: s_min must be >= 0");
  if (!(mellin.t_min < mellin.t_max)) throw ConfigError("mellin.t_min", "mellin: t_min must be below t_max");
  if (estimates.lemma5.t_min >= *std::min_element(estimates.lemma5.deltas.begin(), estimates.lemma5.deltas.end()))
    throw ConfigError("estimates.lemma5.t_min", "lemma5: t_min must lie below every delta");
}

Override Override::parse(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError(text, fmt::format("override '{}' must look like path=value", text));
  return {text.substr(0, eq), text.substr(eq + 1)};
}

RunConfig parse_config(const std::string& json_text, const std::vector<Override>& overrides) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", fmt::format("config is not valid JSON at {}: {}", position_of(json_text, e.byte > 0 ? e.byte - 1 : 0), e.what()));
  }
  for (const auto& o : overrides) apply_override(root, o);
  try {
    return from_json(root);
  } catch (const json::exception& e) {
    throw ConfigError("", fmt::format("config: {}", e.what()));
  }
}

RunConfig load_config(const std::string& path, const std::vector<Override>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", fmt::format("cannot read config file '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

std::string to_json(const RunConfig& cfg) { return to_json_value(cfg).dump(2); }

std::string config_hash(const RunConfig& cfg) {
  json j = to_json_value(cfg);
  j.erase("jobs");
  j.erase("output_dir");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace worm::config
