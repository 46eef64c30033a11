#pragma once

// Run configuration: one strict JSON document plus dotted-path overrides.
// Every field is required; unknown keys are rejected. Errors are ConfigError
// carrying the dotted path of the offending field.

#include <cstdint>
#include <string>
#include <vector>

#include "worm/estimates.hpp"
#include "worm/geometry.hpp"
#include "worm/mellin.hpp"
#include "worm/operators.hpp"
#include "worm/spectral.hpp"

namespace worm::config {

struct ScanSettings {
  int nx = 101;
  int nt = 101;
  double tol = 1e-10;
  double chart_tol = 1e-12;
  double cr_step = 1e-5;
  double cr_tol = 1e-6;
};

struct SpectrumSettings {
  spectral::Box box{0.5, 5.0, -1.0, 1.0};
  double tol = 1e-10;
};

struct ExceptionalSettings {
  double s_min = 0.0;
  double s_max = 6.0;
  double gamma_max = 2.0;
};

struct MellinSettings {
  double t_min = 1e-16;
  double t_max = 60.0;
  int n_t = 1024;
  std::vector<double> oracle_gammas{0.5, 1.0, 2.0};
  double tol = 1e-6;
};

struct FrequencyGrid {
  int nx = 128;
  int nt = 128;
  double delta = 0.01;
  double log_span = 160.0;
};

struct Bound52Settings {
  double s = 1.0;
  std::vector<double> gammas;
  int trials = 32;
  int n = 512;
  int modes = 6;
  double flat_lo = 10.0, flat_hi = 100.0, flat_max = 2.0;
};

struct Bound51Settings {
  double s = 1.0;
  std::vector<double> gammas;
  int n = 512;
  int trials = 16;
  int modes = 6;
};

struct Lemma5Settings {
  double s = 1.0;
  AChoice achoice = AChoice::kMultiplyT;
  std::vector<double> deltas{0.2, 0.1, 0.05};
  double tau0 = 0.0;
  int nx = 48;
  int nt_log = 1024;
  double t_min = 1e-24;
  int nt_linear = 128;
};

struct Prop2Settings {
  std::vector<double> s_grid;
  FrequencyGrid grid;
  int trials = 16;
  int nm_evals = 200;
  AChoice achoice = AChoice::kZero;
  double exclusion = 0.25;
};

struct Lemma1Settings {
  std::vector<double> s_grid;
  FrequencyGrid grid;
  int trials = 16;
  std::vector<double> xis{0, 5, 10, 20, 40};
  std::vector<double> y0_fractions{0.25, 0.5, 0.75};
};

struct EstimateSettings {
  estimates::Lemma2Params lemma2;
  Bound52Settings bound52;
  Bound51Settings bound51;
  Lemma5Settings lemma5;
  Prop2Settings prop2;
  Lemma1Settings lemma1;
};

struct RunConfig {
  geometry::WormConfig worm;
  ScanSettings scan;
  OdeCoefficients ode;
  SpectrumSettings spectrum;
  ExceptionalSettings exceptional;
  MellinSettings mellin;
  EstimateSettings estimates;
  std::uint64_t seed = 1;
  int jobs = 1;
  std::string output_dir = "out";

  // Cross-field checks; throws ConfigError.
  void validate() const;
};

// "a.b.c=value"; value is parsed as JSON when possible, otherwise taken as a
// string.
struct Override {
  std::string path;
  std::string value;
  static Override parse(const std::string& text);
};

RunConfig parse_config(const std::string& json_text, const std::vector<Override>& overrides = {});
RunConfig load_config(const std::string& path, const std::vector<Override>& overrides = {});

// Canonical JSON of the resolved configuration (sorted keys, two-space indent).
std::string to_json(const RunConfig& cfg);

// FNV-1a 64 of the canonical JSON with jobs and output_dir removed, as 16 hex
// digits.
std::string config_hash(const RunConfig& cfg);

// Ranges may be written as [v0, v1, ...] or {"start", "stop", "step"}.
std::vector<double> expand_range(double start, double stop, double step);

}  // namespace worm::config
