#include "dnhst/variance_ratio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace dnhst {

MultiSiteDataset build_dataset(std::span<const MultiSiteRecord> records,
                               const IngestOptions& options, std::vector<RejectedRow> rejected);

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string_view unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::optional<double> parse_double(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) return std::nullopt;
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

double mean_of(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

std::string format_number(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Dataset

const std::vector<double>* MultiSiteDataset::find(std::string_view measure,
                                                  std::string_view site) const {
  const auto m = cells_.find(std::string(measure));
  if (m == cells_.end()) return nullptr;
  const auto s = m->second.find(std::string(site));
  if (s == m->second.end()) return nullptr;
  return &s->second;
}

std::vector<std::string> MultiSiteDataset::measures() const {
  std::vector<std::string> out;
  out.reserve(cells_.size());
  for (const auto& [measure, sites] : cells_) out.push_back(measure);
  return out;
}

std::vector<std::string> MultiSiteDataset::sites(std::string_view measure) const {
  std::vector<std::string> out;
  const auto m = cells_.find(std::string(measure));
  if (m == cells_.end()) return out;
  for (const auto& [site, values] : m->second) out.push_back(site);
  return out;
}

bool MultiSiteDataset::has_measure(std::string_view measure) const {
  return cells_.contains(std::string(measure));
}

bool MultiSiteDataset::has_cell(std::string_view measure, std::string_view site) const {
  return find(measure, site) != nullptr;
}

std::span<const double> MultiSiteDataset::values(std::string_view measure,
                                                 std::string_view site) const {
  const auto* v = find(measure, site);
  if (v == nullptr) {
    throw DataError("no cell for measure '" + std::string(measure) + "' at site '" +
                    std::string(site) + "'");
  }
  return *v;
}

std::size_t MultiSiteDataset::cell_count() const {
  std::size_t n = 0;
  for (const auto& [measure, sites] : cells_) n += sites.size();
  return n;
}

std::size_t MultiSiteDataset::observation_count() const {
  std::size_t n = 0;
  for (const auto& [measure, sites] : cells_) {
    for (const auto& [site, values] : sites) n += values.size();
  }
  return n;
}

MultiSiteDataset MultiSiteDataset::restricted_to_sites(const SitePredicate& keep) const {
  MultiSiteDataset out;
  out.rejected_ = rejected_;
  out.excluded_ = excluded_;
  out.dropped_measures_ = dropped_measures_;
  for (const auto& [measure, sites] : cells_) {
    std::map<std::string, std::vector<double>> kept;
    for (const auto& [site, values] : sites) {
      if (!keep || keep(site)) kept.emplace(site, values);
    }
    if (kept.size() >= 2) {
      out.cells_.emplace(measure, std::move(kept));
    } else {
      out.dropped_measures_.push_back(measure);
    }
  }
  return out;
}

MultiSiteDataset build_dataset(std::span<const MultiSiteRecord> records,
                               const IngestOptions& options, std::vector<RejectedRow> rejected) {
  if (records.empty()) throw DataError("dataset is empty: no valid rows");
  if (options.min_cell_n < 2) throw ArgumentError("min_cell_n must be >= 2");

  MultiSiteDataset::Cells raw;
  for (const auto& r : records) {
    if (r.site.empty() || r.measure.empty()) throw DataError("record with empty site or measure");
    if (!std::isfinite(r.value)) throw DataError("record with non-finite value");
    raw[r.measure][r.site].push_back(r.value);
  }

  MultiSiteDataset out;
  out.rejected_ = std::move(rejected);
  for (auto& [measure, sites] : raw) {
    std::map<std::string, std::vector<double>> qualifying;
    for (auto& [site, values] : sites) {
      if (values.size() < options.min_cell_n) {
        out.excluded_.push_back({measure, site, values.size()});
        continue;
      }
      std::sort(values.begin(), values.end());
      qualifying.emplace(site, std::move(values));
    }
    if (qualifying.size() < 2) {
      throw DataError("measure '" + measure + "' has " + std::to_string(qualifying.size()) +
                      " qualifying site(s); at least 2 are needed for a between-site variance");
    }
    out.cells_.emplace(measure, std::move(qualifying));
  }
  return out;
}

MultiSiteDataset ingest(std::span<const MultiSiteRecord> records, const IngestOptions& options) {
  return build_dataset(records, options, {});
}

MultiSiteDataset ingest_csv(std::istream& in, const IngestOptions& options) {
  std::vector<MultiSiteRecord> records;
  std::vector<RejectedRow> rejected;
  std::string line;
  std::size_t line_no = 0;
  int site_col = -1;
  int measure_col = -1;
  int value_col = -1;
  std::size_t columns = 0;
  bool have_header = false;

  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto fields = split(view, ',');
    if (!have_header) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        const auto name = unquote(fields[i]);
        if (name == "site") site_col = static_cast<int>(i);
        if (name == "measure") measure_col = static_cast<int>(i);
        if (name == "value") value_col = static_cast<int>(i);
      }
      if (site_col < 0 || measure_col < 0 || value_col < 0) {
        throw DataError("line " + std::to_string(line_no) +
                        ": expected header with columns site,measure,value");
      }
      columns = fields.size();
      have_header = true;
      continue;
    }
    if (fields.size() != columns) {
      rejected.push_back({line_no, std::string(view),
                          "expected " + std::to_string(columns) + " fields, got " +
                              std::to_string(fields.size())});
      continue;
    }
    const auto site = unquote(fields[site_col]);
    const auto measure = unquote(fields[measure_col]);
    if (site.empty() || measure.empty()) {
      rejected.push_back({line_no, std::string(view), "empty site or measure"});
      continue;
    }
    const auto value = parse_double(unquote(fields[value_col]));
    if (!value) {
      rejected.push_back({line_no, std::string(view),
                          "value '" + std::string(unquote(fields[value_col])) +
                              "' is not a finite number"});
      continue;
    }
    records.push_back({std::string(site), std::string(measure), *value});
  }
  if (!have_header) throw DataError("dataset is empty: no header line");
  return build_dataset(records, options, std::move(rejected));
}

MultiSiteDataset ingest_csv_file(const std::string& path, const IngestOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file '" + path + "'");
  return ingest_csv(in, options);
}

// ---------------------------------------------------------------------------
// Variance ratios

double sample_variance(std::span<const double> values, VarianceDenominator denominator) {
  const std::size_t n = values.size();
  if (n < 2) throw DataError("variance needs at least two values");
  const double mean = mean_of(values);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double denom = denominator == VarianceDenominator::kUnbiased ? static_cast<double>(n - 1)
                                                                     : static_cast<double>(n);
  return ss / denom;
}

double between_site_variance(const MultiSiteDataset& dataset, std::string_view measure,
                             VarianceDenominator denominator) {
  if (!dataset.has_measure(measure)) {
    throw DataError("unknown measure '" + std::string(measure) + "'");
  }
  std::vector<double> means;
  for (const auto& site : dataset.sites(measure)) means.push_back(mean_of(dataset.values(measure, site)));
  return sample_variance(means, denominator);
}

VarianceRatioCell cell_q(const MultiSiteDataset& dataset, std::string_view measure,
                         std::string_view site, VarianceDenominator denominator) {
  const auto values = dataset.values(measure, site);
  const double within = sample_variance(values, denominator);
  if (within == 0.0) {
    throw DegenerateSampleError("within-site variance is zero for measure '" +
                                std::string(measure) + "' at site '" + std::string(site) + "'");
  }
  const double between = between_site_variance(dataset, measure, denominator);
  return VarianceRatioCell{std::string(measure), std::string(site), within, between,
                           between / within};
}

CellTable all_cells(const MultiSiteDataset& dataset, VarianceDenominator denominator) {
  CellTable table;
  for (const auto& measure : dataset.measures()) {
    const double between = between_site_variance(dataset, measure, denominator);
    for (const auto& site : dataset.sites(measure)) {
      const auto values = dataset.values(measure, site);
      const double within = sample_variance(values, denominator);
      if (within == 0.0) {
        table.degenerate.push_back({measure, site, values.size()});
        continue;
      }
      table.cells.push_back({measure, site, within, between, between / within});
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Group specs

std::vector<MeasureGroupSpec> parse_group_spec(std::istream& in) {
  std::vector<MeasureGroupSpec> groups;
  std::set<std::string> seen_measures;
  std::set<std::string> seen_groups;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& why) {
    throw DataError("group spec line " + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty() || view.front() == '#' || view.front() == ';') continue;
    if (view.front() == '[') {
      if (view.back() != ']') fail("unterminated section header");
      const auto name = trim(view.substr(1, view.size() - 2));
      if (name.empty()) fail("empty group name");
      if (!seen_groups.insert(std::string(name)).second) fail("duplicate group '" + std::string(name) + "'");
      groups.push_back({std::string(name), {}, std::nullopt});
      continue;
    }
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) fail("expected key = value");
    if (groups.empty()) fail("key outside of a [group] section");
    const auto key = trim(view.substr(0, eq));
    const auto value = trim(view.substr(eq + 1));
    auto& group = groups.back();
    if (key == "set") {
      if (value.empty()) fail("empty set label");
      group.set_label = std::string(unquote(value));
    } else if (key == "measures") {
      for (auto item : split(value, ',')) {
        const auto measure = unquote(item);
        if (measure.empty()) continue;
        if (!seen_measures.insert(std::string(measure)).second) {
          fail("measure '" + std::string(measure) + "' appears in more than one group");
        }
        group.measures.emplace_back(measure);
      }
    } else {
      fail("unknown key '" + std::string(key) + "'");
    }
  }
  for (const auto& g : groups) {
    if (g.measures.empty()) throw DataError("group '" + g.group + "' lists no measures");
  }
  return groups;
}

std::vector<MeasureGroupSpec> parse_group_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open group spec '" + path + "'");
  return parse_group_spec(in);
}

// ---------------------------------------------------------------------------
// Summaries

double quantile_type7(std::span<const double> values, double p) {
  if (values.empty()) throw DataError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("quantile level must lie in [0, 1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;  // 0-based
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

SummaryResult summarize(const MultiSiteDataset& dataset, std::span<const MeasureGroupSpec> groups,
                        const SitePredicate& site_filter, const SummaryOptions& options) {
  std::set<std::string> listed;
  for (const auto& g : groups) {
    for (const auto& m : g.measures) {
      if (!dataset.has_measure(m)) throw DataError("group '" + g.group + "' references unknown measure '" + m + "'");
      if (!listed.insert(m).second) throw DataError("measure '" + m + "' appears in more than one group");
    }
  }

  const MultiSiteDataset filtered = site_filter ? dataset.restricted_to_sites(site_filter) : dataset;
  SummaryResult result;
  // restricted_to_sites appends to the inherited list.
  const auto& dropped = filtered.dropped_measures();
  for (std::size_t i = dataset.dropped_measures().size(); i < dropped.size(); ++i) {
    result.warnings.push_back("measure '" + dropped[i] +
                              "' has fewer than 2 sites after filtering; skipped");
  }
  const CellTable table = all_cells(filtered, options.denominator);
  for (const auto& d : table.degenerate) {
    result.warnings.push_back("zero within-site variance for measure '" + d.measure +
                              "' at site '" + d.site + "'; skipped");
  }
  std::map<std::string, std::vector<double>> q_by_measure;
  for (const auto& cell : table.cells) q_by_measure[cell.measure].push_back(cell.q);

  auto make_row = [&](const std::string& name, const std::vector<double>& qs) {
    if (qs.empty()) {
      result.warnings.push_back("group '" + name + "' has no variance ratios; row omitted");
      return;
    }
    result.rows.push_back(GroupSummary{
        .group = name,
        .datapoints = qs.size(),
        .mean_q = mean_of(qs),
        .q_lo = quantile_type7(qs, options.lower_p),
        .q_hi = quantile_type7(qs, options.upper_p),
    });
  };
  auto collect = [&](const std::vector<std::string>& measures, std::vector<double>& into) {
    for (const auto& m : measures) {
      const auto it = q_by_measure.find(m);
      if (it != q_by_measure.end()) into.insert(into.end(), it->second.begin(), it->second.end());
    }
  };

  if (groups.empty()) {
    std::vector<double> all;
    collect(filtered.measures(), all);
    make_row("all", all);
  } else {
    std::vector<std::string> set_order;
    std::map<std::string, std::vector<double>> by_set;
    std::vector<double> all;
    for (const auto& g : groups) {
      std::vector<double> qs;
      collect(g.measures, qs);
      make_row(g.group, qs);
      if (g.set_label) {
        if (!by_set.contains(*g.set_label)) set_order.push_back(*g.set_label);
        auto& pool = by_set[*g.set_label];
        pool.insert(pool.end(), qs.begin(), qs.end());
      }
      all.insert(all.end(), qs.begin(), qs.end());
    }
    for (const auto& label : set_order) make_row("all " + label, by_set[label]);
    make_row("all", all);
  }

  std::set<std::string> used;
  for (const auto& g : groups) used.insert(g.measures.begin(), g.measures.end());
  for (const auto& cell : table.cells) {
    if (groups.empty() || used.contains(cell.measure)) result.cells.push_back(cell);
  }
  return result;
}

std::vector<HistogramBin> histogram(std::span<const double> values, double bin_width) {
  if (!(bin_width > 0.0)) throw ArgumentError("bin width must be positive");
  std::vector<HistogramBin> bins;
  if (values.empty()) return bins;
  const double inv = 1.0 / bin_width;
  std::size_t max_index = 0;
  std::vector<std::size_t> index(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0)) throw ArgumentError("histogram values must be >= 0");
    index[i] = static_cast<std::size_t>(std::floor(values[i] * inv));
    max_index = std::max(max_index, index[i]);
  }
  bins.resize(max_index + 1);
  for (std::size_t k = 0; k <= max_index; ++k) {
    bins[k].lo = static_cast<double>(k) * bin_width;
    bins[k].hi = static_cast<double>(k + 1) * bin_width;
  }
  for (auto k : index) ++bins[k].count;
  return bins;
}

void write_summary_csv(std::ostream& out, std::span<const GroupSummary> rows) {
  out << "group,datapoints,mean_q,q025,q975\n";
  for (const auto& r : rows) {
    out << csv_field(r.group) << ',' << r.datapoints << ',' << format_number(r.mean_q) << ','
        << format_number(r.q_lo) << ',' << format_number(r.q_hi) << '\n';
  }
}

void write_cells_csv(std::ostream& out, std::span<const VarianceRatioCell> cells) {
  out << "measure,site,within_var,between_var,q\n";
  for (const auto& c : cells) {
    out << csv_field(c.measure) << ',' << csv_field(c.site) << ',' << format_number(c.within_var)
        << ',' << format_number(c.between_var) << ',' << format_number(c.q) << '\n';
  }
}

void write_histogram_csv(std::ostream& out, std::span<const HistogramBin> bins) {
  out << "bin_lo,bin_hi,count\n";
  for (const auto& b : bins) {
    out << format_number(b.lo) << ',' << format_number(b.hi) << ',' << b.count << '\n';
  }
}

}  // namespace dnhst
