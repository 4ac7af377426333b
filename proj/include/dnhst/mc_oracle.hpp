#pragma once

// Seeded Monte-Carlo checks of the distributional test.
//
// Each trial owns a random substream derived from (seed, trial index), so a
// run gives bit-identical counts whatever the thread count or scheduling.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "dnhst/dist_nhst.hpp"

namespace dnhst {

/// SplitMix64 step; used to derive substream seeds.
std::uint64_t splitmix64(std::uint64_t& state);

/// xoshiro256++ seeded from one 64-bit word through SplitMix64.
class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed);
  std::uint64_t next();

 private:
  std::uint64_t s_[4];
};

/// Per-trial random source: uniforms on (0, 1), Box-Muller normals and
/// chi-square variates.
class TrialRng {
 public:
  TrialRng(std::uint64_t seed, std::uint64_t trial);

  double uniform();  // open interval (0, 1)
  double normal();
  /// sigma^2-free chi-square with nu degrees of freedom. Integer nu up to
  /// kChiSquareSumLimit is a sum of squared normals; otherwise a gamma draw.
  double chi_square(double nu);

  static constexpr double kChiSquareSumLimit = 1000.0;

 private:
  double gamma(double shape);

  Xoshiro256pp gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct SimConfig {
  ExperimentDesign design = ExperimentDesign::kOneSample;
  int n = 20;
  double q_true = 0.0;
  double sigma = 1.0;
  std::uint64_t trials = 100000;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0 = hardware concurrency
};

void validate(const SimConfig& cfg);

struct CalibrationReport {
  double rate = 0.0;
  double mc_se = 0.0;  // sqrt(rate (1 - rate) / trials)
  std::uint64_t trials = 0;
  std::uint64_t hits = 0;
  double nominal = 0.0;  // rate the analytic model predicts

  /// |rate - target| <= k * mc_se.
  bool within(double target, double k = 3.0) const;
};

CalibrationReport make_report(std::uint64_t hits, std::uint64_t trials, double nominal);

enum class RejectionRule {
  kAbsolute,   // |t| >= t_crit; the library's significance rule, size 2 alpha
  kUpperTail,  // t >= t_crit; size alpha
};

std::string_view to_string(RejectionRule rule);

struct FprRules {
  CalibrationReport absolute;
  CalibrationReport upper_tail;
};

/// Draws mu ~ N(0, q_true sigma^2) per experiment, data ~ N(mu, sigma^2),
/// and tests the design's t against dist_t_crit(alpha, nu, n, q_test).
/// Nominal rates are filled in from the t pivot when q_test == q_true and
/// from the scaled-t tail otherwise.
FprRules simulate_fpr_rules(const SimConfig& cfg, double alpha, double q_test);

CalibrationReport simulate_fpr(const SimConfig& cfg, double alpha, double q_test,
                               RejectionRule rule = RejectionRule::kAbsolute);

struct FprRow {
  int n;
  CalibrationReport report;
};

/// simulate_fpr over a list of sample sizes, everything else fixed.
std::vector<FprRow> fpr_vs_n(const SimConfig& base, double alpha, std::span<const int> n_list,
                             double q_test, RejectionRule rule = RejectionRule::kAbsolute);

enum class ReplicationVariant {
  kSharedS,        // the repeat's t reuses the first experiment's S
  kIndependentS2,   // the repeat draws its own S_2
};

std::string_view to_string(ReplicationVariant variant);

struct ReplicationReport {
  CalibrationReport calibration;  // nominal = replication_probability(...)
  std::uint64_t wrong_sign_significant = 0;  // significant repeats of opposite sign (not counted)
};

/// Simulates exact repeats of an experiment that produced t1, with q =
/// cfg.q_true for both the prior and the significance bound.
ReplicationReport simulate_replication(double t1, const SimConfig& cfg, double alpha,
                                       ReplicationVariant variant);

struct FprCsvRow {
  SimConfig cfg;
  double alpha;
  double q_test;
  RejectionRule rule;
  CalibrationReport report;
};

void write_fpr_csv(std::ostream& out, std::span<const FprCsvRow> rows);

struct ReplicationCsvRow {
  SimConfig cfg;
  double alpha;
  double t1;
  ReplicationVariant variant;
  ReplicationReport report;
};

void write_replication_csv(std::ostream& out, std::span<const ReplicationCsvRow> rows);

}  // namespace dnhst
