#pragma once

// Empirical checks of the a priori estimate ladder: the one-dimensional
// trace inequalities, the large-|γ| and line estimates for H_ζ, the weighted
// Mellin integrals, and best constants for the model operator.

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "worm/common.hpp"
#include "worm/grid.hpp"
#include "worm/operators.hpp"

namespace worm::estimates {

using KeyValues = std::vector<std::pair<std::string, double>>;

struct EstimateRecord {
  std::string id;
  KeyValues params;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  std::string family;
  std::string flag;  // "", "N/A", "violation", "singular-expected"
  KeyValues extra;

  double param(const std::string& key) const;
  double extra_value(const std::string& key) const;
};

struct EstimateReport {
  std::string id;
  std::uint64_t seed = 0;
  std::vector<EstimateRecord> records;
  double best_ratio = 0.0;
  int argmax = -1;
  int violations = 0;

  // Appends and updates best_ratio / argmax / violations. best_ratio can
  // only grow.
  void add(EstimateRecord r);
};

// Deterministic per-task RNG seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// ---------------------------------------------------------------- lemma 2

// ‖f‖_{L2[ε,2ε]} <= 2 (‖f‖_{L2[-2ε,-ε]} + ε‖f'‖) and
// |f(0) - f(-ε)| <= ε^{1/2} ‖f'‖, ‖f'‖ over the whole supplied grid.
// xs must be uniform, contain 0 and ±2ε as nodes, with ε >= 8 cells.
std::vector<EstimateRecord> lemma2_check(const std::vector<double>& xs, const VectorXc& f,
                                         double eps);

struct Lemma2Params {
  int trials = 1000;
  int n = 2001;
  double half_width = 1.0;
  int modes = 8;
  double max_frequency = 20.0;
  std::uint64_t seed = 1;
};

EstimateReport lemma2_sweep(const Lemma2Params& p, int jobs = 1);

// ------------------------------------------------------------ large |γ|

struct Bound52Params {
  double s = 1.0;
  std::vector<double> gammas;
  int trials = 32;
  int n = 512;
  int modes = 6;
  std::uint64_t seed = 1;
};

// Closed-form ratio for the first Dirichlet sine mode of I.
double bound_5_2_anchor(const OdeCoefficients& c, double s, double gamma);

EstimateReport bound_5_2_sweep(const OdeCoefficients& c, const Bound52Params& p, int jobs = 1);

// max/min of the per-γ sup ratio over records with |γ| in [lo, hi].
double bound_5_2_flatness(const EstimateReport& r, double lo, double hi);

// --------------------------------------------------------- line estimate

struct Bound51Params {
  double s = 1.0;
  std::vector<double> gammas;
  int n = 512;
  int trials = 16;
  int modes = 6;
  std::uint64_t seed = 1;
};

EstimateRecord bound_5_1_point(const OdeCoefficients& c, double s, double gamma, int n, int trials,
                               int modes, std::uint64_t seed);
EstimateReport bound_5_1_constant(const OdeCoefficients& c, const Bound51Params& p, int jobs = 1);

// ------------------------------------------------------ weighted integrals

struct Lemma5Params {
  double s = 1.0;
  AChoice achoice = AChoice::kMultiplyT;
  double delta = 0.1;
  int nx = 48;
  int nt_log = 1024;
  double t_min = 1e-24;
  int nt_linear = 128;
};

using Field = std::function<cplx(double x, double t)>;

// cos²(πx / 2(r+δ)) exp(-(5t/δ)²) e^{iτ0 t}
Field lemma5_packet(double r, double delta, double tau0);

EstimateRecord lemma5_weighted_integrals(const Field& u, const OdeCoefficients& c,
                                         const Lemma5Params& p);

// ------------------------------------------------- model operator constants

// Evaluates the norms entering the model estimates on a frequency or
// periodic linear grid.
class ModelEvaluator {
 public:
  ModelEvaluator(double s, const OdeCoefficients& c, const GridSpec& g, AChoice a);

  struct Parts {
    double u = 0.0, lbar = 0.0, l = 0.0, calL = 0.0, h_minus1 = 0.0, q_h1 = 0.0, dx = 0.0;
    double frak_b() const { return calL + h_minus1 + q_h1; }
  };

  Parts parts(const VectorXc& u) const;
  // (‖u‖ + ‖Lbar u‖ + ‖L u‖) / (‖calL u‖ + ‖u‖_{-1} + ‖Qu‖_1)
  double prop2_ratio(const VectorXc& u) const;
  // ‖∂x u‖ / (‖u‖ + ‖calL u‖ + ‖Qu‖_1)
  double lemma1_ratio(const VectorXc& u) const;
  const GridSpec& grid() const { return g_; }

 private:
  GridSpec g_;
  DiscreteOperator calL_, lbar_, l_, q_;
  SpMat dx_;
};

struct PacketParams {
  double y0 = 0.0;   // centre in y = log|τ|
  double ell = 1.0;  // half-width in y
  double eta = 0.0;  // oscillation e^{-iηy}
  double xi = 0.0;   // x-frequency
  int sign = 1;      // half of the τ-axis carrying the packet
};

// cos(πx/2R) e^{iξx} cos²(π(y - y0)/2ℓ) e^{-iηy} |τ|^{-1/2} on one τ half
// of a frequency grid (R = r + δ).
VectorXc frequency_packet(const GridSpec& g, const PacketParams& p);

// Smooth random field on a frequency grid, both τ halves.
VectorXc frequency_random_field(const GridSpec& g, std::uint64_t seed);

struct Prop2Params {
  int trials = 16;
  int nm_evals = 200;
  AChoice achoice = AChoice::kZero;
  std::uint64_t seed = 1;
};

// Ĉ(s) = max over the random family and a Nelder–Mead search over packets.
EstimateRecord prop2_constant(double s, const OdeCoefficients& c, const GridSpec& g,
                              const Prop2Params& p, std::uint64_t stream = 0);
EstimateReport prop2_sweep(const std::vector<double>& s_grid, const OdeCoefficients& c,
                           const GridSpec& g, const Prop2Params& p, int jobs = 1);

struct BlowupSummary {
  double argmax_s = 0.0;
  double peak = 0.0;
  double plateau = 0.0;  // median over points farther than `exclusion` from the argmax
  double ratio = 0.0;
};
BlowupSummary blowup_summary(const EstimateReport& r, double exclusion = 0.25);

EstimateRecord lemma1_check(const VectorXc& u, double s, const OdeCoefficients& c,
                            const GridSpec& g);

struct Lemma1Params {
  int trials = 16;
  std::vector<double> xis{0, 5, 10, 20, 40};
  std::vector<double> y0_fractions{0.25, 0.5, 0.75};
  std::uint64_t seed = 1;
};
EstimateReport lemma1_sweep(const std::vector<double>& s_grid, const OdeCoefficients& c,
                            const GridSpec& g, const Lemma1Params& p, int jobs = 1);

// Nelder–Mead minimizer with an evaluation cap (never exceeded once the
// d + 1 starting points are evaluated); used for the packet search.
struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
};
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, const std::vector<double>& step, int max_evals);

}  // namespace worm::estimates
