#pragma once

// Variance-ratio estimation from multi-site replication data.
//
// For each measure, every qualifying site gets
//   q = (variance of per-site means across sites) / (that site's within-site variance).
// Ratios are pooled over groups of measures and summarised by mean and
// 2.5% / 97.5% empirical quantiles.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dnhst/errors.hpp"

namespace dnhst {

struct MultiSiteRecord {
  std::string site;
  std::string measure;
  double value = 0.0;
};

struct RejectedRow {
  std::size_t line = 0;  // 1-based line number in the source
  std::string text;
  std::string reason;
};

struct ExcludedCell {
  std::string measure;
  std::string site;
  std::size_t count = 0;
};

struct IngestOptions {
  std::size_t min_cell_n = 2;
};

enum class VarianceDenominator {
  kUnbiased,    // n - 1
  kPopulation,  // n
};

using SitePredicate = std::function<bool(std::string_view site)>;

/// Validated measurements keyed by measure, then site. Values inside a cell
/// are kept sorted, so results do not depend on input row order.
class MultiSiteDataset {
 public:
  using Cells = std::map<std::string, std::map<std::string, std::vector<double>>>;

  std::vector<std::string> measures() const;
  std::vector<std::string> sites(std::string_view measure) const;
  bool has_measure(std::string_view measure) const;
  bool has_cell(std::string_view measure, std::string_view site) const;
  std::span<const double> values(std::string_view measure, std::string_view site) const;
  std::size_t cell_count() const;
  std::size_t observation_count() const;

  const std::vector<RejectedRow>& rejected_rows() const { return rejected_; }
  const std::vector<ExcludedCell>& excluded_cells() const { return excluded_; }
  /// Measures dropped because fewer than two sites qualified (site filtering only).
  const std::vector<std::string>& dropped_measures() const { return dropped_measures_; }

  /// Copy keeping only sites accepted by the predicate. Measures left with
  /// fewer than two sites are dropped and listed in dropped_measures().
  MultiSiteDataset restricted_to_sites(const SitePredicate& keep) const;

 private:
  friend MultiSiteDataset build_dataset(std::span<const MultiSiteRecord>, const IngestOptions&,
                                        std::vector<RejectedRow>);
  const std::vector<double>* find(std::string_view measure, std::string_view site) const;

  Cells cells_;
  std::vector<RejectedRow> rejected_;
  std::vector<ExcludedCell> excluded_;
  std::vector<std::string> dropped_measures_;
};

/// Builds a dataset from parsed records. Throws DataError when there are no
/// records, or when a measure has fewer than two sites meeting min_cell_n.
MultiSiteDataset ingest(std::span<const MultiSiteRecord> records, const IngestOptions& options = {});

/// Parses `site,measure,value` CSV (header required, `#` comment lines and
/// blank lines ignored). Malformed rows are recorded in rejected_rows() and
/// skipped; a missing or wrong header is a DataError.
MultiSiteDataset ingest_csv(std::istream& in, const IngestOptions& options = {});
MultiSiteDataset ingest_csv_file(const std::string& path, const IngestOptions& options = {});

struct VarianceRatioCell {
  std::string measure;
  std::string site;
  double within_var = 0.0;
  double between_var = 0.0;
  double q = 0.0;
};

/// Sample variance of values with the chosen denominator.
double sample_variance(std::span<const double> values,
                       VarianceDenominator denominator = VarianceDenominator::kUnbiased);

/// Variance of the unweighted per-site means of a measure.
double between_site_variance(const MultiSiteDataset& dataset, std::string_view measure,
                             VarianceDenominator denominator = VarianceDenominator::kUnbiased);

/// q for one (measure, site). Throws DataError if the cell does not exist
/// and DegenerateSampleError if its within-site variance is zero.
VarianceRatioCell cell_q(const MultiSiteDataset& dataset, std::string_view measure,
                         std::string_view site,
                         VarianceDenominator denominator = VarianceDenominator::kUnbiased);

struct CellTable {
  std::vector<VarianceRatioCell> cells;
  std::vector<ExcludedCell> degenerate;  // within_var == 0, skipped
};

/// Every cell of the dataset, in measure then site order.
CellTable all_cells(const MultiSiteDataset& dataset,
                    VarianceDenominator denominator = VarianceDenominator::kUnbiased);

struct MeasureGroupSpec {
  std::string group;
  std::vector<std::string> measures;
  std::optional<std::string> set_label;
};

/// INI-style group file:
///   # comment
///   [anchoring]
///   set = 2
///   measures = anchoring1a, anchoring1b
/// Throws DataError on syntax errors, empty groups, or a measure listed twice.
std::vector<MeasureGroupSpec> parse_group_spec(std::istream& in);
std::vector<MeasureGroupSpec> parse_group_spec_file(const std::string& path);

struct GroupSummary {
  std::string group;
  std::size_t datapoints = 0;
  double mean_q = 0.0;
  double q_lo = 0.0;  // 2.5% quantile
  double q_hi = 0.0;  // 97.5% quantile
};

struct SummaryOptions {
  VarianceDenominator denominator = VarianceDenominator::kUnbiased;
  double lower_p = 0.025;
  double upper_p = 0.975;
};

struct SummaryResult {
  std::vector<GroupSummary> rows;
  std::vector<VarianceRatioCell> cells;  // every q that entered a row
  std::vector<std::string> warnings;
};

/// One row per group, then "all <set>" per set label (in order of first
/// appearance) when labels are present, then "all". With no groups, every
/// measure is pooled into "all". The site filter is applied before
/// between-site variances are computed.
SummaryResult summarize(const MultiSiteDataset& dataset, std::span<const MeasureGroupSpec> groups,
                        const SitePredicate& site_filter = {},
                        const SummaryOptions& options = {});

/// Linear interpolation between order statistics at h = (n - 1) p + 1
/// (1-based), the "type 7" rule. Input need not be sorted.
double quantile_type7(std::span<const double> values, double p);

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};

/// Counts of q values in [k w, (k+1) w), from zero to the largest value.
std::vector<HistogramBin> histogram(std::span<const double> values, double bin_width = 0.01);

void write_summary_csv(std::ostream& out, std::span<const GroupSummary> rows);
void write_cells_csv(std::ostream& out, std::span<const VarianceRatioCell> cells);
void write_histogram_csv(std::ostream& out, std::span<const HistogramBin> bins);

}  // namespace dnhst
