#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pausekit {

// Per-session measure vectors: one row per session, one column per measure
// (ms values, absent when the session could not produce the measure).
struct MeasureTable {
  std::vector<std::string> columns;
  std::vector<std::string> session_ids;
  std::vector<std::vector<std::optional<double>>> rows;

  static std::vector<std::string> default_columns();  // RSP..WW
  int column_index(const std::string& name) const;    // -1 when missing
  void add_row(const std::string& id, std::vector<std::optional<double>> values);
  std::vector<std::optional<double>> column(std::size_t idx) const;
};

enum class CorrelationPolicy { CompleteRowsOnly, Pairwise };
enum class CorrelationStat { Pearson, Spearman };

const char* to_string(CorrelationPolicy p);
const char* to_string(CorrelationStat s);

struct CorrelationMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<std::optional<double>>> r;  // absent = undefined
  std::vector<std::vector<int>> n;                    // per-cell sample size
  CorrelationPolicy policy = CorrelationPolicy::CompleteRowsOnly;
  CorrelationStat stat = CorrelationStat::Pearson;
};

// Product-moment correlation. Requires equal lengths >= 3 and two
// nonconstant series; a constant series throws MissingStatError so the
// caller can report an absent cell rather than a fake 0.
double pearson(const std::vector<double>& xs, const std::vector<double>& ys);

// Pearson on average ranks.
double spearman(const std::vector<double>& xs, const std::vector<double>& ys);

CorrelationMatrix correlation_matrix(const MeasureTable& table,
                                     CorrelationPolicy policy = CorrelationPolicy::CompleteRowsOnly,
                                     CorrelationStat stat = CorrelationStat::Pearson);

struct HistogramData {
  std::string measure;
  std::vector<double> edges;  // counts.size() + 1, strictly increasing
  std::vector<std::int64_t> counts;
  std::int64_t n = 0;
  double bandwidth_hint = 0.0;  // Silverman's rule, for density plotting
};

// Equal-width bins over [min, max], right-inclusive last bin. All-equal
// input produces a single unit-width bin around the value.
HistogramData histogram(const std::vector<double>& values, int bins,
                        const std::string& name = "");

// Explicit strictly increasing edges; values outside are clamped into the
// end bins.
HistogramData histogram_with_edges(const std::vector<double>& values,
                                   std::vector<double> edges,
                                   const std::string& name = "");

// Per-session quantile positions of a threshold, binned on the fixed [0, 1]
// range.
HistogramData quantile_distribution(const std::vector<double>& session_quantiles,
                                    int bins, const std::string& measure);

// Serialization: matrix as CSV with a header row/column; histogram as
// `bin_lo,bin_hi,count` rows.
std::string correlation_matrix_csv(const CorrelationMatrix& m);
std::string histogram_csv(const HistogramData& h);

}  // namespace pausekit
