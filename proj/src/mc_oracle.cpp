#include "dnhst/mc_oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>
#include <thread>

namespace dnhst {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

unsigned resolve_threads(unsigned requested, std::uint64_t trials) {
  unsigned t = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::uint64_t>(t, std::max<std::uint64_t>(trials, 1)));
}

// Runs fn(trial, counts) over all trials, splitting contiguous blocks across
// threads, and sums the per-thread counters.
template <std::size_t K, class Fn>
std::array<std::uint64_t, K> count_trials(std::uint64_t trials, unsigned threads, Fn fn) {
  const unsigned workers = resolve_threads(threads, trials);
  std::vector<std::array<std::uint64_t, K>> partial(workers);
  auto work = [&](unsigned w) {
    std::array<std::uint64_t, K> counts{};
    const std::uint64_t begin = trials * w / workers;
    const std::uint64_t end = trials * (w + 1) / workers;
    for (std::uint64_t i = begin; i < end; ++i) fn(i, counts);
    partial[w] = counts;
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  std::array<std::uint64_t, K> total{};
  for (const auto& p : partial) {
    for (std::size_t k = 0; k < K; ++k) total[k] += p[k];
  }
  return total;
}

double degrees_of_freedom(ExperimentDesign design, int n) {
  return design == ExperimentDesign::kTwoSampleEqualN ? 2.0 * n - 2.0 : n - 1.0;
}

struct RunningMoments {
  int count = 0;
  double mean = 0.0;
  double m2 = 0.0;
  void add(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / count;
    m2 += delta * (x - mean);
  }
};

// One simulated experiment under the distributional null; returns its t.
double simulate_t(TrialRng& rng, const SimConfig& cfg) {
  const double prior_sd = std::sqrt(cfg.q_true) * cfg.sigma;
  const int n = cfg.n;
  switch (cfg.design) {
    case ExperimentDesign::kOneSample: {
      const double mu = prior_sd * rng.normal();
      RunningMoments m;
      for (int i = 0; i < n; ++i) m.add(mu + cfg.sigma * rng.normal());
      return m.mean / std::sqrt(m.m2 / (n - 1) / n);
    }
    case ExperimentDesign::kPaired: {
      const double mu_x = prior_sd * rng.normal();
      const double mu_y = prior_sd * rng.normal();
      RunningMoments m;
      for (int i = 0; i < n; ++i) {
        const double x = mu_x + cfg.sigma * rng.normal();
        const double y = mu_y + cfg.sigma * rng.normal();
        m.add(x - y);
      }
      return m.mean / std::sqrt(m.m2 / (n - 1) / n);
    }
    case ExperimentDesign::kTwoSampleEqualN: {
      const double mu_x = prior_sd * rng.normal();
      const double mu_y = prior_sd * rng.normal();
      RunningMoments mx;
      RunningMoments my;
      for (int i = 0; i < n; ++i) mx.add(mu_x + cfg.sigma * rng.normal());
      for (int i = 0; i < n; ++i) my.add(mu_y + cfg.sigma * rng.normal());
      const double pooled_var = 0.5 * (mx.m2 / (n - 1) + my.m2 / (n - 1));
      return (mx.mean - my.mean) / std::sqrt(pooled_var * 2.0 / n);
    }
  }
  return 0.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Random numbers

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += kGolden);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Xoshiro256pp::Xoshiro256pp(std::uint64_t seed) {
  std::uint64_t sm = seed;
  for (auto& word : s_) word = splitmix64(sm);
}

std::uint64_t Xoshiro256pp::next() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

namespace {
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t trial) {
  std::uint64_t state = seed;
  const std::uint64_t base = splitmix64(state);
  std::uint64_t mixed = base ^ (trial * kGolden + 0x632BE59BD9B4E019ULL);
  return splitmix64(mixed);
}
}  // namespace

TrialRng::TrialRng(std::uint64_t seed, std::uint64_t trial) : gen_(substream_seed(seed, trial)) {}

double TrialRng::uniform() {
  return (static_cast<double>(gen_.next() >> 11) + 0.5) * 0x1.0p-53;
}

double TrialRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double radius = std::sqrt(-2.0 * std::log(uniform()));
  const double angle = 2.0 * std::numbers::pi * uniform();
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

double TrialRng::gamma(double shape) {
  // Marsaglia and Tsang; shapes below 1 are boosted by U^(1/shape).
  if (shape < 1.0) return gamma(shape + 1.0) * std::pow(uniform(), 1.0 / shape);
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x;
    double v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double TrialRng::chi_square(double nu) {
  if (!(nu > 0.0)) throw ArgumentError("chi-square degrees of freedom must be positive");
  if (nu <= kChiSquareSumLimit && nu == std::floor(nu)) {
    double sum = 0.0;
    for (int i = 0; i < static_cast<int>(nu); ++i) {
      const double z = normal();
      sum += z * z;
    }
    return sum;
  }
  return 2.0 * gamma(0.5 * nu);
}

// ---------------------------------------------------------------------------
// Reports

bool CalibrationReport::within(double target, double k) const {
  return std::fabs(rate - target) <= k * mc_se;
}

CalibrationReport make_report(std::uint64_t hits, std::uint64_t trials, double nominal) {
  CalibrationReport r;
  r.trials = trials;
  r.hits = hits;
  r.rate = trials == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(trials);
  r.mc_se = trials == 0 ? 0.0 : std::sqrt(r.rate * (1.0 - r.rate) / static_cast<double>(trials));
  r.nominal = nominal;
  return r;
}

std::string_view to_string(RejectionRule rule) {
  return rule == RejectionRule::kAbsolute ? "absolute" : "upper-tail";
}

std::string_view to_string(ReplicationVariant variant) {
  return variant == ReplicationVariant::kSharedS ? "shared-s" : "independent-s2";
}

void validate(const SimConfig& cfg) {
  require_sample_size(cfg.n);
  if (!(cfg.q_true >= 0.0) || !std::isfinite(cfg.q_true)) throw ArgumentError("q_true must be >= 0");
  if (!(cfg.sigma > 0.0) || !std::isfinite(cfg.sigma)) throw ArgumentError("sigma must be > 0");
  if (cfg.trials < 1) throw ArgumentError("trials must be >= 1");
}

// ---------------------------------------------------------------------------
// False-positive calibration

FprRules simulate_fpr_rules(const SimConfig& cfg, double alpha, double q_test) {
  validate(cfg);
  require_alpha(alpha);
  const DegreesOfFreedom nu(degrees_of_freedom(cfg.design, cfg.n));
  const double t_crit = dist_t_crit(alpha, nu, cfg.n, DistributionalNull(q_test));

  const auto counts = count_trials<2>(cfg.trials, cfg.threads, [&](std::uint64_t trial, auto& c) {
    TrialRng rng(cfg.seed, trial);
    const double t = simulate_t(rng, cfg);
    if (std::fabs(t) >= t_crit) ++c[0];
    if (t >= t_crit) ++c[1];
  });

  // t / sqrt(1 + q_true n) is t-distributed with nu degrees of freedom.
  const double upper = t_sf(t_crit / std::sqrt(1.0 + cfg.q_true * cfg.n), nu);
  return FprRules{
      .absolute = make_report(counts[0], cfg.trials, 2.0 * upper),
      .upper_tail = make_report(counts[1], cfg.trials, upper),
  };
}

CalibrationReport simulate_fpr(const SimConfig& cfg, double alpha, double q_test,
                               RejectionRule rule) {
  const FprRules both = simulate_fpr_rules(cfg, alpha, q_test);
  return rule == RejectionRule::kAbsolute ? both.absolute : both.upper_tail;
}

std::vector<FprRow> fpr_vs_n(const SimConfig& base, double alpha, std::span<const int> n_list,
                             double q_test, RejectionRule rule) {
  std::vector<FprRow> rows;
  rows.reserve(n_list.size());
  for (int n : n_list) {
    SimConfig cfg = base;
    cfg.n = n;
    rows.push_back({n, simulate_fpr(cfg, alpha, q_test, rule)});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Replication

ReplicationReport simulate_replication(double t1, const SimConfig& cfg, double alpha,
                                       ReplicationVariant variant) {
  validate(cfg);
  require_alpha(alpha);
  if (!std::isfinite(t1)) throw ArgumentError("t1 must be finite");
  const double nu_value = degrees_of_freedom(cfg.design, cfg.n);
  const DegreesOfFreedom nu(nu_value);
  const DistributionalNull null(cfg.q_true);
  const double t_crit = dist_t_crit(alpha, nu, cfg.n, null);
  const double qn = cfg.q_true * cfg.n;
  const double shrinkage = qn / (1.0 + qn);
  // Standard error of the mean (or mean difference) in units of sigma.
  const double se_unit = cfg.design == ExperimentDesign::kTwoSampleEqualN
                             ? std::sqrt(2.0 / cfg.n)
                             : std::sqrt(1.0 / cfg.n);
  const double sampling_sd = cfg.sigma * se_unit;
  const double posterior_sd = std::sqrt(shrinkage) * sampling_sd;
  const double direction = t1 >= 0.0 ? 1.0 : -1.0;

  const auto counts = count_trials<2>(cfg.trials, cfg.threads, [&](std::uint64_t trial, auto& c) {
    TrialRng rng(cfg.seed, trial);
    const double s1 = cfg.sigma * std::sqrt(rng.chi_square(nu_value) / nu_value);
    const double x_bar_1 = t1 * s1 * se_unit;
    const double mu = shrinkage * x_bar_1 + posterior_sd * rng.normal();
    const double x_bar_2 = mu + sampling_sd * rng.normal();
    double s2 = s1;
    if (variant == ReplicationVariant::kIndependentS2) {
      s2 = cfg.sigma * std::sqrt(rng.chi_square(nu_value) / nu_value);
    }
    const double t2 = x_bar_2 / (s2 * se_unit);
    if (std::fabs(t2) >= t_crit) {
      if (t2 * direction > 0.0) {
        ++c[0];
      } else {
        ++c[1];
      }
    }
  });

  ReplicationReport out;
  out.calibration =
      make_report(counts[0], cfg.trials, replication_probability(t1, alpha, nu, cfg.n, null));
  out.wrong_sign_significant = counts[1];
  return out;
}

// ---------------------------------------------------------------------------
// CSV

namespace {
std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}
}  // namespace

void write_fpr_csv(std::ostream& out, std::span<const FprCsvRow> rows) {
  out << "design,n,q_true,q_test,alpha,sigma,seed,rule,rate,mc_se,trials,nominal\n";
  for (const auto& r : rows) {
    out << to_string(r.cfg.design) << ',' << r.cfg.n << ',' << num(r.cfg.q_true) << ','
        << num(r.q_test) << ',' << num(r.alpha) << ',' << num(r.cfg.sigma) << ',' << r.cfg.seed
        << ',' << to_string(r.rule) << ',' << num(r.report.rate) << ',' << num(r.report.mc_se)
        << ',' << r.report.trials << ',' << num(r.report.nominal) << '\n';
  }
}

void write_replication_csv(std::ostream& out, std::span<const ReplicationCsvRow> rows) {
  out << "design,n,q,alpha,t1,sigma,seed,variant,rate,mc_se,trials,predicted,wrong_sign\n";
  for (const auto& r : rows) {
    out << to_string(r.cfg.design) << ',' << r.cfg.n << ',' << num(r.cfg.q_true) << ','
        << num(r.alpha) << ',' << num(r.t1) << ',' << num(r.cfg.sigma) << ',' << r.cfg.seed << ','
        << to_string(r.variant) << ',' << num(r.report.calibration.rate) << ','
        << num(r.report.calibration.mc_se) << ',' << r.report.calibration.trials << ','
        << num(r.report.calibration.nominal) << ',' << r.report.wrong_sign_significant << '\n';
  }
}

}  // namespace dnhst
