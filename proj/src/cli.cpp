#include "dnhst/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <variant>

#include "dnhst/dist_nhst.hpp"
#include "dnhst/joint_criterion.hpp"
#include "dnhst/mc_oracle.hpp"
#include "dnhst/point_nhst.hpp"
#include "dnhst/special_functions.hpp"
#include "dnhst/variance_ratio.hpp"

namespace dnhst::cli {

namespace {

using json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Output records

using Value = std::variant<double, std::int64_t, bool, std::string>;

struct Field {
  std::string key;
  std::string label;
  Value value;
  bool probability = false;
};

using Record = std::vector<Field>;

enum class Format { kHuman, kJson, kCsv };

Format parse_format(const std::string& text) {
  if (text == "human") return Format::kHuman;
  if (text == "json") return Format::kJson;
  if (text == "csv") return Format::kCsv;
  throw UsageError("--format must be one of json, csv, human");
}

std::string shortest(double x) {
  if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

std::string human_number(double x, bool probability) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), probability ? "%.6g" : "%.8g", x);
  return buf;
}

std::string render_value(const Value& v, Format format, bool probability) {
  return std::visit(
      [&](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, double>) {
          return format == Format::kHuman ? human_number(x, probability) : shortest(x);
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(x);
        } else if constexpr (std::is_same_v<T, bool>) {
          return x ? "true" : "false";
        } else {
          return x;
        }
      },
      v);
}

json to_json(const Value& v) {
  return std::visit([](const auto& x) { return json(x); }, v);
}

json record_json(const Record& record) {
  json obj = json::object();
  for (const auto& f : record) obj[f.key] = to_json(f.value);
  return obj;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void emit_json(std::ostream& out, const std::string& command, json result) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["command"] = command;
  doc["result"] = std::move(result);
  out << doc.dump(2) << '\n';
}

void emit_record(std::ostream& out, Format format, const std::string& command,
                 const Record& record) {
  switch (format) {
    case Format::kJson:
      emit_json(out, command, record_json(record));
      return;
    case Format::kCsv: {
      for (std::size_t i = 0; i < record.size(); ++i) out << (i ? "," : "") << record[i].key;
      out << '\n';
      for (std::size_t i = 0; i < record.size(); ++i) {
        out << (i ? "," : "")
            << csv_escape(render_value(record[i].value, format, record[i].probability));
      }
      out << '\n';
      return;
    }
    case Format::kHuman: {
      std::size_t width = 0;
      for (const auto& f : record) width = std::max(width, f.label.size());
      for (const auto& f : record) {
        out << std::left << std::setw(static_cast<int>(width)) << f.label << " : "
            << render_value(f.value, format, f.probability) << '\n';
      }
      return;
    }
  }
}

void emit_table(std::ostream& out, Format format, const std::string& command,
                const std::vector<Record>& rows, const std::vector<std::string>& columns) {
  switch (format) {
    case Format::kJson: {
      json arr = json::array();
      for (const auto& r : rows) arr.push_back(record_json(r));
      emit_json(out, command, std::move(arr));
      return;
    }
    case Format::kCsv:
    case Format::kHuman: {
      std::vector<std::vector<std::string>> cells;
      for (const auto& r : rows) {
        std::vector<std::string> line;
        for (const auto& f : r) line.push_back(render_value(f.value, format, f.probability));
        cells.push_back(std::move(line));
      }
      if (format == Format::kCsv) {
        for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
        out << '\n';
        for (const auto& line : cells) {
          for (std::size_t i = 0; i < line.size(); ++i) out << (i ? "," : "") << csv_escape(line[i]);
          out << '\n';
        }
        return;
      }
      std::vector<std::size_t> width(columns.size());
      for (std::size_t i = 0; i < columns.size(); ++i) width[i] = columns[i].size();
      for (const auto& line : cells) {
        for (std::size_t i = 0; i < line.size() && i < width.size(); ++i) {
          width[i] = std::max(width[i], line[i].size());
        }
      }
      for (std::size_t i = 0; i < columns.size(); ++i) {
        out << (i ? "  " : "");
        if (i + 1 < columns.size()) out << std::left << std::setw(static_cast<int>(width[i]));
        out << columns[i];
      }
      out << '\n';
      for (const auto& line : cells) {
        for (std::size_t i = 0; i < line.size(); ++i) {
          out << (i ? "  " : "");
          if (i + 1 < line.size()) out << std::left << std::setw(static_cast<int>(width[i]));
          out << line[i];
        }
        out << '\n';
      }
      return;
    }
  }
}

// ---------------------------------------------------------------------------
// Settings shared across subcommands; a config file may preset them.

struct Settings {
  double alpha = 0.05;
  double beta = 0.5;
  double q_ceiling = kDefaultQCeiling;
  std::uint64_t seed = 0;
  std::uint64_t trials = 100000;
  std::string format = "human";
};

std::optional<std::string> find_config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config requires a path");
      return args[i + 1];
    }
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(std::string_view text, const std::string& key) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw UsageError("config: invalid value for '" + key + "'");
  }
  return value;
}

// `key = value` lines; `#` comments; optional quotes around strings.
void load_config(const std::string& path, Settings& settings) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty() || view.front() == '#' || view.front() == '[') continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(trim(view.substr(0, eq)));
    std::string_view value = trim(view.substr(eq + 1));
    if (const auto hash = value.find(" #"); hash != std::string_view::npos) {
      value = trim(value.substr(0, hash));
    }
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (key == "alpha") {
      settings.alpha = parse_number<double>(value, key);
    } else if (key == "beta") {
      settings.beta = parse_number<double>(value, key);
    } else if (key == "q_ceiling" || key == "q-ceiling") {
      settings.q_ceiling = parse_number<double>(value, key);
    } else if (key == "seed") {
      settings.seed = parse_number<std::uint64_t>(value, key);
    } else if (key == "trials") {
      settings.trials = parse_number<std::uint64_t>(value, key);
    } else if (key == "format") {
      settings.format = std::string(value);
    } else {
      throw UsageError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
}

// ---------------------------------------------------------------------------
// Subcommand inputs

struct TestArgs {
  std::string design = "one-sample";
  std::optional<int> n;
  std::optional<double> mean;
  std::optional<double> sd;
  std::optional<int> n2;
  std::optional<double> mean2;
  std::optional<double> sd2;
  std::optional<double> t;
  std::optional<double> nu;
  std::optional<double> q;
  std::string power_variant = "lower";
};

struct ResolvedT {
  double t;
  DegreesOfFreedom nu;
  int n;
  std::optional<ExperimentSummary> summary;
};

ResolvedT resolve_t(const TestArgs& a) {
  if (!a.n) throw UsageError("--n is required");
  if (a.t) {
    if (!a.nu) throw UsageError("--t requires --nu");
    if (a.mean || a.sd) throw UsageError("give either --t/--nu or --mean/--sd, not both");
    require_sample_size(*a.n);
    return {*a.t, DegreesOfFreedom(*a.nu), *a.n, std::nullopt};
  }
  if (!a.mean || !a.sd) throw UsageError("give --t with --nu, or --mean with --sd");
  const ExperimentDesign design = parse_design(a.design);
  ExperimentSummary summary{design, *a.n, *a.mean, *a.sd};
  if (design == ExperimentDesign::kTwoSampleEqualN && (a.mean2 || a.sd2)) {
    if (!a.mean2 || !a.sd2) throw UsageError("two-sample input needs both --mean2 and --sd2");
    summary = two_sample_summary(*a.n, *a.mean, *a.sd, a.n2.value_or(*a.n), *a.mean2, *a.sd2);
  } else if (a.mean2 || a.sd2 || a.n2) {
    throw UsageError("--mean2/--sd2/--n2 only apply to --design two-sample");
  }
  const TStatistic ts = t_statistic(summary);
  if (a.nu && std::fabs(*a.nu - ts.nu.value()) > 0.0) {
    throw UsageError("--nu disagrees with the design's degrees of freedom");
  }
  return {ts.t, ts.nu, summary.n, summary};
}

void add_test_inputs(CLI::App* sub, TestArgs& a) {
  sub->add_option("--design", a.design, "one-sample | paired | two-sample")
      ->check(CLI::IsMember({"one-sample", "paired", "two-sample"}));
  sub->add_option("--n", a.n, "Sample size N (per group for two-sample)");
  sub->add_option("--mean", a.mean, "Mean (of differences for paired; group 1 for two-sample)");
  sub->add_option("--sd", a.sd, "Standard deviation (pooled if --mean2 is absent)");
  sub->add_option("--n2", a.n2, "Group 2 size (must equal --n)");
  sub->add_option("--mean2", a.mean2, "Group 2 mean");
  sub->add_option("--sd2", a.sd2, "Group 2 standard deviation");
  sub->add_option("--t", a.t, "Precomputed t statistic");
  sub->add_option("--nu", a.nu, "Degrees of freedom for --t");
}

Record test_record(const TestArgs& a, double alpha) {
  if (!a.q) throw UsageError("--q is required");
  const ResolvedT r = resolve_t(a);
  const DistributionalNull null(*a.q);
  const PointTestReport point = point_test(r.t, r.nu, r.n, alpha);
  const DistTestReport dist = dist_test(r.t, r.nu, r.n, alpha, null);
  Record rec;
  if (r.summary) {
    rec.push_back({"design", "design", std::string(to_string(r.summary->design))});
    rec.push_back({"mean", "mean", r.summary->mean});
    rec.push_back({"sd", "sd", r.summary->sd});
  }
  rec.push_back({"n", "N", static_cast<std::int64_t>(r.n)});
  rec.push_back({"nu", "degrees of freedom", r.nu.value()});
  rec.push_back({"t", "t", r.t});
  rec.push_back({"alpha", "alpha", alpha, true});
  rec.push_back({"q", "q", *a.q});
  rec.push_back({"point_p_value", "point-form p", point.p_value, true});
  rec.push_back({"point_p_value_two_sided", "point-form p (two-sided, extension)",
                 std::min(1.0, 2.0 * point.p_value), true});
  rec.push_back({"point_t_crit", "point-form t_crit", point.t_crit});
  rec.push_back({"point_z_crit", "point-form Z_crit", point.z_crit});
  rec.push_back({"point_significant", "point-form significant", point.significant});
  rec.push_back({"dist_p_value", "distributional p", dist.p_value, true});
  rec.push_back({"dist_p_value_two_sided", "distributional p (two-sided, extension)",
                 std::min(1.0, 2.0 * dist.p_value), true});
  rec.push_back({"dist_t_crit", "distributional t_crit", dist.t_crit});
  rec.push_back({"dist_z_crit", "distributional Z_crit", dist.z_crit});
  rec.push_back({"dist_significant", "distributional significant", dist.significant});
  rec.push_back({"asymptotic_bound_z", "asymptotic |z| bound", dist.asymptotic_bound_z});
  return rec;
}

Record replicate_record(const TestArgs& a, double alpha) {
  if (!a.q) throw UsageError("--q is required");
  const ResolvedT r = resolve_t(a);
  const DistributionalNull null(*a.q);
  PowerQuantile variant = PowerQuantile::kLower;
  if (a.power_variant == "upper") {
    variant = PowerQuantile::kUpper;
  } else if (a.power_variant != "lower") {
    throw UsageError("--power-variant must be lower or upper");
  }
  Record rec;
  rec.push_back({"n", "N", static_cast<std::int64_t>(r.n)});
  rec.push_back({"nu", "degrees of freedom", r.nu.value()});
  rec.push_back({"t", "t1", r.t});
  rec.push_back({"alpha", "alpha", alpha, true});
  rec.push_back({"q", "q", *a.q});
  rec.push_back({"dist_t_crit", "distributional t_crit", dist_t_crit(alpha, r.nu, r.n, null)});
  rec.push_back({"p_replication", "replication probability p_r (distributional)",
                 replication_probability(r.t, alpha, r.nu, r.n, null), true});
  rec.push_back({"power_estimate", "power-based point-form estimate (comparison only)",
                 power_replication_estimate(r.t, alpha, r.nu, variant), true});
  rec.push_back({"power_variant", "power-based quantile", a.power_variant});
  return rec;
}

Record range_record(const TestArgs& a, const Settings& s) {
  const ResolvedT r = resolve_t(a);
  const Criteria criteria(s.alpha, s.beta);
  const QInterval iv = q_interval(r.t, criteria, r.nu, r.n, s.q_ceiling);
  const RuleOfThumb thumb = rule_of_thumb(s.alpha, r.nu);
  Record rec;
  rec.push_back({"status", "status", std::string(iv.solved() ? "solved" : "no_solution")});
  rec.push_back({"n", "N", static_cast<std::int64_t>(r.n)});
  rec.push_back({"nu", "degrees of freedom", r.nu.value()});
  rec.push_back({"t", "t1", r.t});
  rec.push_back({"alpha", "alpha", s.alpha, true});
  rec.push_back({"beta", "beta", s.beta, true});
  rec.push_back({"q_ceiling", "q ceiling", s.q_ceiling});
  rec.push_back({"r_min", "minimum R_q", iv.r_min});
  rec.push_back({"q_at_min", "q at minimum", iv.q_at_min});
  if (iv.solved()) {
    rec.push_back({"q1", "q1", iv.q1});
    rec.push_back({"q2", "q2", iv.q2});
    rec.push_back({"gamma", "gamma (= q2)", iv.gamma});
    rec.push_back({"q1_left_censored", "q1 left-censored", iv.q1_left_censored});
    rec.push_back({"q2_right_censored", "q2 right-censored at ceiling", iv.q2_right_censored});
  } else {
    rec.push_back({"message", "message",
                   std::string("|t1| is below the minimum of R_q: no q meets both criteria")});
  }
  rec.push_back({"thumb_t_bound", "rule-of-thumb t bound (beta = 0.5)", thumb.t_bound});
  rec.push_back({"thumb_p_threshold", "rule-of-thumb p threshold", thumb.p_threshold, true});
  return rec;
}

Record thumb_record(double alpha, double nu_value) {
  const DegreesOfFreedom nu(nu_value);
  const RuleOfThumb t = rule_of_thumb(alpha, nu);
  Record rec;
  rec.push_back({"alpha", "alpha", alpha, true});
  rec.push_back({"nu", "degrees of freedom", nu.value()});
  rec.push_back({"t_quantile", "T^-1(1 - alpha)", t_quantile(1.0 - alpha, nu)});
  rec.push_back({"ratio", "bound / T^-1(1 - alpha)", kRuleOfThumbFactor});
  rec.push_back({"t_bound", "t bound", t.t_bound});
  rec.push_back({"p_threshold", "p threshold (1 - T(bound))", t.p_threshold, true});
  rec.push_back({"cdf_at_bound", "T(bound)", t.cdf_at_bound, true});
  return rec;
}

struct QestArgs {
  std::string data;
  std::string groups;
  std::string sites;
  std::string cells_out;
  std::string hist_out;
  std::size_t min_cell_n = 2;
  std::string denominator = "unbiased";
};

std::set<std::string> split_list(const std::string& text) {
  std::set<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto t = trim(item);
    if (!t.empty()) out.emplace(t);
  }
  return out;
}

int run_qest(const QestArgs& a, Format format, std::ostream& out, std::ostream& err) {
  IngestOptions ingest_options;
  ingest_options.min_cell_n = a.min_cell_n;
  const MultiSiteDataset dataset = ingest_csv_file(a.data, ingest_options);
  for (const auto& r : dataset.rejected_rows()) {
    err << "warning: " << a.data << ":" << r.line << ": " << r.reason << '\n';
  }
  for (const auto& c : dataset.excluded_cells()) {
    err << "warning: cell (" << c.measure << ", " << c.site << ") has " << c.count
        << " observation(s), below min_cell_n; excluded\n";
  }
  std::vector<MeasureGroupSpec> groups;
  if (!a.groups.empty()) groups = parse_group_spec_file(a.groups);

  SitePredicate filter;
  if (!a.sites.empty()) {
    auto keep = split_list(a.sites);
    filter = [keep = std::move(keep)](std::string_view site) {
      return keep.contains(std::string(site));
    };
  }
  SummaryOptions options;
  if (a.denominator == "population") {
    options.denominator = VarianceDenominator::kPopulation;
  } else if (a.denominator != "unbiased") {
    throw UsageError("--denominator must be unbiased or population");
  }
  const SummaryResult summary = summarize(dataset, groups, filter, options);
  for (const auto& w : summary.warnings) err << "warning: " << w << '\n';

  if (!a.cells_out.empty()) {
    std::ofstream f(a.cells_out);
    if (!f) throw DataError("cannot write '" + a.cells_out + "'");
    write_cells_csv(f, summary.cells);
  }
  if (!a.hist_out.empty()) {
    std::ofstream f(a.hist_out);
    if (!f) throw DataError("cannot write '" + a.hist_out + "'");
    std::vector<double> qs;
    for (const auto& c : summary.cells) qs.push_back(c.q);
    write_histogram_csv(f, histogram(qs));
  }

  if (format == Format::kCsv) {
    write_summary_csv(out, summary.rows);
    return kExitOk;
  }
  std::vector<Record> rows;
  for (const auto& r : summary.rows) {
    rows.push_back({{"group", "group", r.group},
                    {"datapoints", "datapoints", static_cast<std::int64_t>(r.datapoints)},
                    {"mean_q", "mean_q", r.mean_q},
                    {"q025", "q025", r.q_lo},
                    {"q975", "q975", r.q_hi}});
  }
  emit_table(out, format, "qest", rows, {"group", "datapoints", "mean_q", "q025", "q975"});
  return kExitOk;
}

struct SimulateArgs {
  std::string mode = "fpr";
  std::string design = "one-sample";
  int n = 20;
  std::vector<int> n_list;
  double q_true = 0.0;
  std::optional<double> q_test;
  double sigma = 1.0;
  std::string rule = "absolute";
  double t1 = 0.0;
  std::string variant = "shared-s";
  unsigned threads = 0;
};

int run_simulate(const SimulateArgs& a, const Settings& s, Format format, std::ostream& out) {
  SimConfig cfg;
  cfg.design = parse_design(a.design);
  cfg.n = a.n;
  cfg.q_true = a.q_true;
  cfg.sigma = a.sigma;
  cfg.trials = s.trials;
  cfg.seed = s.seed;
  cfg.threads = a.threads;
  const double q_test = a.q_test.value_or(a.q_true);
  const RejectionRule rule =
      a.rule == "upper-tail" ? RejectionRule::kUpperTail : RejectionRule::kAbsolute;

  std::vector<Record> rows;
  std::vector<std::string> columns;
  if (a.mode == "fpr" || a.mode == "fpr-vs-n") {
    std::vector<int> sizes = a.mode == "fpr" ? std::vector<int>{a.n} : a.n_list;
    if (sizes.empty()) throw UsageError("fpr-vs-n needs --n-list");
    std::vector<FprCsvRow> csv_rows;
    for (const auto& row : fpr_vs_n(cfg, s.alpha, sizes, q_test, rule)) {
      SimConfig c = cfg;
      c.n = row.n;
      csv_rows.push_back({c, s.alpha, q_test, rule, row.report});
    }
    if (format == Format::kCsv) {
      write_fpr_csv(out, csv_rows);
      return kExitOk;
    }
    columns = {"design", "n",    "q_true", "q_test", "alpha",  "sigma",
               "seed",   "rule", "rate",   "mc_se",  "trials", "nominal"};
    for (const auto& r : csv_rows) {
      rows.push_back({{"design", "design", std::string(to_string(r.cfg.design))},
                      {"n", "n", static_cast<std::int64_t>(r.cfg.n)},
                      {"q_true", "q_true", r.cfg.q_true},
                      {"q_test", "q_test", r.q_test},
                      {"alpha", "alpha", r.alpha, true},
                      {"sigma", "sigma", r.cfg.sigma},
                      {"seed", "seed", static_cast<std::int64_t>(r.cfg.seed)},
                      {"rule", "rule", std::string(to_string(r.rule))},
                      {"rate", "rate", r.report.rate, true},
                      {"mc_se", "mc_se", r.report.mc_se},
                      {"trials", "trials", static_cast<std::int64_t>(r.report.trials)},
                      {"nominal", "nominal", r.report.nominal, true}});
    }
  } else if (a.mode == "replication") {
    std::vector<ReplicationVariant> variants;
    if (a.variant == "shared-s" || a.variant == "both") {
      variants.push_back(ReplicationVariant::kSharedS);
    }
    if (a.variant == "independent-s2" || a.variant == "both") {
      variants.push_back(ReplicationVariant::kIndependentS2);
    }
    std::vector<ReplicationCsvRow> csv_rows;
    for (auto v : variants) {
      csv_rows.push_back({cfg, s.alpha, a.t1, v, simulate_replication(a.t1, cfg, s.alpha, v)});
    }
    if (format == Format::kCsv) {
      write_replication_csv(out, csv_rows);
      return kExitOk;
    }
    columns = {"design", "n",     "q",     "alpha",  "t1",        "sigma",     "seed",
               "variant", "rate", "mc_se", "trials", "predicted", "wrong_sign"};
    for (const auto& r : csv_rows) {
      const auto& c = r.report.calibration;
      rows.push_back(
          {{"design", "design", std::string(to_string(r.cfg.design))},
           {"n", "n", static_cast<std::int64_t>(r.cfg.n)},
           {"q", "q", r.cfg.q_true},
           {"alpha", "alpha", r.alpha, true},
           {"t1", "t1", r.t1},
           {"sigma", "sigma", r.cfg.sigma},
           {"seed", "seed", static_cast<std::int64_t>(r.cfg.seed)},
           {"variant", "variant", std::string(to_string(r.variant))},
           {"rate", "rate", c.rate, true},
           {"mc_se", "mc_se", c.mc_se},
           {"trials", "trials", static_cast<std::int64_t>(c.trials)},
           {"predicted", "predicted", c.nominal, true},
           {"wrong_sign", "wrong_sign", static_cast<std::int64_t>(r.report.wrong_sign_significant)}});
    }
  } else {
    throw UsageError("--mode must be fpr, fpr-vs-n or replication");
  }
  emit_table(out, format, "simulate", rows, columns);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Settings settings;
  try {
    if (const auto path = find_config_path(args)) load_config(*path, settings);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  CLI::App app{"Distributional null hypothesis testing"};
  app.name("dnhst");
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--format", settings.format, "Output format: json | csv | human")
      ->check(CLI::IsMember({"json", "csv", "human"}));
  app.add_option("--config", config_path, "Config file of key = value defaults");
  app.add_option("--seed", settings.seed, "Random seed for simulate");

  TestArgs test_args;
  auto* test = app.add_subcommand("test", "Point-form and distributional significance test");
  add_test_inputs(test, test_args);
  test->add_option("--alpha", settings.alpha, "Significance level");
  test->add_option("--q", test_args.q, "Variance ratio q of the distributional null");

  TestArgs rep_args;
  auto* replicate = app.add_subcommand("replicate", "Replication probability under q");
  add_test_inputs(replicate, rep_args);
  replicate->add_option("--alpha", settings.alpha, "Significance level");
  replicate->add_option("--beta", settings.beta, "Replication level (not needed for p_r)");
  replicate->add_option("--q", rep_args.q, "Variance ratio q");
  replicate->add_option("--power-variant", rep_args.power_variant,
                        "Quantile in the power-based estimate: lower | upper");

  TestArgs range_args;
  auto* range = app.add_subcommand("range", "Interval of q meeting significance and replication");
  add_test_inputs(range, range_args);
  range->add_option("--alpha", settings.alpha, "Significance level");
  range->add_option("--beta", settings.beta, "Replication level, > alpha");
  range->add_option("--q-ceiling", settings.q_ceiling, "Upper end of the q search");

  QestArgs qest_args;
  auto* qest = app.add_subcommand("qest", "Variance ratios from multi-site data");
  qest->add_option("--data", qest_args.data, "CSV with columns site,measure,value")->required();
  qest->add_option("--groups", qest_args.groups, "Group spec file");
  qest->add_option("--sites", qest_args.sites, "Comma-separated sites to keep");
  qest->add_option("--cells-out", qest_args.cells_out, "Write per-cell CSV here");
  qest->add_option("--hist-out", qest_args.hist_out, "Write histogram CSV (bin width 0.01) here");
  qest->add_option("--min-cell-n", qest_args.min_cell_n, "Minimum observations per cell");
  qest->add_option("--denominator", qest_args.denominator, "unbiased | population");

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo calibration runs");
  simulate->add_option("--mode", sim_args.mode, "fpr | fpr-vs-n | replication")
      ->check(CLI::IsMember({"fpr", "fpr-vs-n", "replication"}));
  simulate->add_option("--design", sim_args.design, "one-sample | paired | two-sample")
      ->check(CLI::IsMember({"one-sample", "paired", "two-sample"}));
  simulate->add_option("--n", sim_args.n, "Sample size");
  simulate->add_option("--n-list", sim_args.n_list, "Sample sizes for fpr-vs-n")->delimiter(',');
  simulate->add_option("--q-true", sim_args.q_true, "q of the generating model");
  simulate->add_option("--q-test", sim_args.q_test, "q of the tested null (default: q-true)");
  simulate->add_option("--sigma", sim_args.sigma, "Within-experiment sd");
  simulate->add_option("--rule", sim_args.rule, "absolute | upper-tail")
      ->check(CLI::IsMember({"absolute", "upper-tail"}));
  simulate->add_option("--t1", sim_args.t1, "Observed t1 for replication mode");
  simulate->add_option("--variant", sim_args.variant, "shared-s | independent-s2 | both")
      ->check(CLI::IsMember({"shared-s", "independent-s2", "both"}));
  simulate->add_option("--threads", sim_args.threads, "Worker threads (0 = all cores)");
  simulate->add_option("--alpha", settings.alpha, "Significance level");
  simulate->add_option("--trials", settings.trials, "Trials per scenario");

  double thumb_nu = 0.0;
  auto* thumb = app.add_subcommand("thumb", "Rule-of-thumb p threshold for beta = 0.5");
  thumb->add_option("--alpha", settings.alpha, "Significance level");
  thumb->add_option("--nu", thumb_nu, "Degrees of freedom")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    const Format format = parse_format(settings.format);
    if (*test) {
      emit_record(out, format, "test", test_record(test_args, settings.alpha));
    } else if (*replicate) {
      emit_record(out, format, "replicate", replicate_record(rep_args, settings.alpha));
    } else if (*range) {
      emit_record(out, format, "range", range_record(range_args, settings));
    } else if (*qest) {
      return run_qest(qest_args, format, out, err);
    } else if (*simulate) {
      return run_simulate(sim_args, settings, format, out);
    } else if (*thumb) {
      emit_record(out, format, "thumb", thumb_record(settings.alpha, thumb_nu));
    }
    return kExitOk;
  } catch (const SolverFailure& e) {
    err << "error: solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << '\n';
    return kExitSolver;
  }
}

}  // namespace dnhst::cli
