#include "pausekit/corpus_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pausekit/csv.hpp"
#include "pausekit/errors.hpp"

namespace pausekit {

std::vector<std::string> MeasureTable::default_columns() {
  return {"RSP", "TSP", "MUD", "PUB", "3GL", "3GU", "SW", "WS", "WW"};
}

int MeasureTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  return -1;
}

void MeasureTable::add_row(const std::string& id,
                           std::vector<std::optional<double>> values) {
  if (values.size() != columns.size())
    throw ArgumentError("measure table: row arity " + std::to_string(values.size()) +
                        " does not match " + std::to_string(columns.size()) + " columns");
  session_ids.push_back(id);
  rows.push_back(std::move(values));
}

std::vector<std::optional<double>> MeasureTable::column(std::size_t idx) const {
  std::vector<std::optional<double>> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row[idx]);
  return out;
}

const char* to_string(CorrelationPolicy p) {
  return p == CorrelationPolicy::CompleteRowsOnly ? "COMPLETE_ROWS_ONLY" : "PAIRWISE";
}

const char* to_string(CorrelationStat s) {
  return s == CorrelationStat::Pearson ? "pearson" : "spearman";
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw ArgumentError("pearson: length mismatch");
  const std::size_t n = xs.size();
  if (n < 3) throw ArgumentError("pearson: need at least 3 pairs");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw MissingStatError("pearson: correlation undefined for a constant series");
  double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw ArgumentError("spearman: length mismatch");
  if (xs.size() < 3) throw ArgumentError("spearman: need at least 3 pairs");
  return pearson(average_ranks(xs), average_ranks(ys));
}

CorrelationMatrix correlation_matrix(const MeasureTable& table, CorrelationPolicy policy,
                                     CorrelationStat stat) {
  CorrelationMatrix m;
  m.labels = table.columns;
  m.policy = policy;
  m.stat = stat;
  const std::size_t c = table.columns.size();
  const auto corr = stat == CorrelationStat::Pearson ? pearson : spearman;

  std::vector<std::vector<double>> cols(c);
  std::vector<std::vector<char>> present(c);  // per-session availability
  for (std::size_t j = 0; j < c; ++j) {
    for (const auto& row : table.rows) {
      present[j].push_back(row[j].has_value());
      cols[j].push_back(row[j].value_or(0.0));
    }
  }

  std::vector<std::size_t> usable;  // sessions with every column present
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    bool all = true;
    for (std::size_t j = 0; j < c; ++j) all = all && present[j][i];
    if (all) usable.push_back(i);
  }
  if (policy == CorrelationPolicy::CompleteRowsOnly && usable.size() < 3)
    throw ArgumentError("correlation_matrix: fewer than 3 complete sessions (" +
                        std::to_string(usable.size()) + ")");
  if (policy == CorrelationPolicy::Pairwise && table.rows.size() < 3)
    throw ArgumentError("correlation_matrix: fewer than 3 sessions");

  m.r.assign(c, std::vector<std::optional<double>>(c));
  m.n.assign(c, std::vector<int>(c, 0));
  for (std::size_t a = 0; a < c; ++a) {
    for (std::size_t b = a; b < c; ++b) {
      std::vector<double> xs, ys;
      if (policy == CorrelationPolicy::CompleteRowsOnly) {
        for (std::size_t i : usable) {
          xs.push_back(cols[a][i]);
          ys.push_back(cols[b][i]);
        }
      } else {
        for (std::size_t i = 0; i < table.rows.size(); ++i) {
          if (present[a][i] && present[b][i]) {
            xs.push_back(cols[a][i]);
            ys.push_back(cols[b][i]);
          }
        }
      }
      m.n[a][b] = m.n[b][a] = static_cast<int>(xs.size());
      if (a == b) {
        m.r[a][a] = 1.0;
        continue;
      }
      if (xs.size() < 3) continue;  // absent cell
      try {
        const double r = corr(xs, ys);
        m.r[a][b] = m.r[b][a] = r;
      } catch (const MissingStatError&) {
        // constant series: leave the cell absent
      }
    }
  }
  return m;
}

HistogramData histogram(const std::vector<double>& values, int bins,
                        const std::string& name) {
  if (values.empty()) throw ArgumentError("histogram: empty values");
  if (bins < 1) throw ArgumentError("histogram: bins must be >= 1");
  const auto [mn_it, mx_it] = std::minmax_element(values.begin(), values.end());
  const double mn = *mn_it, mx = *mx_it;
  std::vector<double> edges;
  if (mn == mx) {
    // Degenerate single bin around the common value.
    edges = {mn - 0.5, mn + 0.5};
  } else {
    edges.reserve(static_cast<std::size_t>(bins) + 1);
    for (int i = 0; i <= bins; ++i)
      edges.push_back(mn + (mx - mn) * static_cast<double>(i) / static_cast<double>(bins));
    edges.back() = mx;  // exact upper edge
  }
  return histogram_with_edges(values, std::move(edges), name);
}

HistogramData histogram_with_edges(const std::vector<double>& values,
                                   std::vector<double> edges, const std::string& name) {
  if (values.empty()) throw ArgumentError("histogram: empty values");
  if (edges.size() < 2) throw ArgumentError("histogram: need at least 2 edges");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i] > edges[i - 1]))
      throw ArgumentError("histogram: edges must be strictly increasing");

  HistogramData h;
  h.measure = name;
  h.counts.assign(edges.size() - 1, 0);
  const double lo = edges.front(), hi = edges.back();
  const std::size_t nb = h.counts.size();
  for (double v : values) {
    std::size_t idx;
    if (v <= lo) {
      idx = 0;
    } else if (v >= hi) {
      idx = nb - 1;  // right-inclusive last bin
    } else {
      idx = static_cast<std::size_t>(
                std::upper_bound(edges.begin(), edges.end(), v) - edges.begin()) - 1;
      if (idx >= nb) idx = nb - 1;
    }
    ++h.counts[idx];
  }
  h.edges = std::move(edges);
  h.n = static_cast<std::int64_t>(values.size());

  // Silverman bandwidth hint for density overlays.
  const std::size_t n = values.size();
  if (n >= 2) {
    double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                  static_cast<double>(n);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const double q1 = sorted[(n - 1) / 4], q3 = sorted[(3 * (n - 1)) / 4];
    const double iqr = q3 - q1;
    double spread = sd;
    if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
    h.bandwidth_hint = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
  }
  return h;
}

HistogramData quantile_distribution(const std::vector<double>& session_quantiles,
                                    int bins, const std::string& measure) {
  if (session_quantiles.empty())
    throw ArgumentError("quantile_distribution: no session quantiles");
  if (bins < 1) throw ArgumentError("quantile_distribution: bins must be >= 1");
  std::vector<double> edges;
  edges.reserve(static_cast<std::size_t>(bins) + 1);
  for (int i = 0; i <= bins; ++i)
    edges.push_back(static_cast<double>(i) / static_cast<double>(bins));
  return histogram_with_edges(session_quantiles, std::move(edges), measure);
}

std::string correlation_matrix_csv(const CorrelationMatrix& m) {
  std::string out = "measure";
  for (const auto& l : m.labels) out += "," + csv::quote_field(l);
  out += '\n';
  for (std::size_t a = 0; a < m.labels.size(); ++a) {
    out += csv::quote_field(m.labels[a]);
    for (std::size_t b = 0; b < m.labels.size(); ++b)
      out += "," + csv::format_optional(m.r[a][b]);
    out += '\n';
  }
  return out;
}

std::string histogram_csv(const HistogramData& h) {
  std::string out = "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    out += csv::format_double(h.edges[i]) + "," + csv::format_double(h.edges[i + 1]) +
           "," + std::to_string(h.counts[i]) + "\n";
  }
  return out;
}

}  // namespace pausekit
