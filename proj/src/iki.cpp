#include "pausekit/iki.hpp"

#include <algorithm>
#include <cmath>

#include "pausekit/csv.hpp"
#include "pausekit/errors.hpp"

namespace pausekit {

const char* to_string(BigramClass c) {
  switch (c) {
    case BigramClass::WW: return "WW";
    case BigramClass::WS: return "WS";
    case BigramClass::SW: return "SW";
    case BigramClass::SS: return "SS";
  }
  return "?";
}

BigramClass classify_bigram(KeyClass prev, KeyClass next) {
  const bool prev_w = prev == KeyClass::Alnum;
  const bool next_w = next == KeyClass::Alnum;
  if (prev_w && next_w) return BigramClass::WW;
  if (prev_w) return BigramClass::WS;
  if (next_w) return BigramClass::SW;
  return BigramClass::SS;
}

std::vector<IkiRecord> extract_ikis(const Session& session) {
  if (session.events.size() < 2)
    throw MissingStatError("extract_ikis: session '" + session.id +
                           "' has fewer than 2 events");
  std::vector<IkiRecord> out;
  out.reserve(session.events.size() - 1);
  for (std::size_t i = 1; i < session.events.size(); ++i) {
    const auto& prev = session.events[i - 1];
    const auto& cur = session.events[i];
    if (cur.time_ms < prev.time_ms)
      throw ArgumentError("extract_ikis: non-monotonic time at event " +
                          std::to_string(i) + " of session '" + session.id + "'");
    out.push_back(IkiRecord{i, static_cast<double>(cur.time_ms - prev.time_ms),
                            classify_bigram(prev.key_class, cur.key_class)});
  }
  return out;
}

double median(const std::vector<double>& values) {
  if (values.empty()) throw MissingStatError("median of empty list");
  std::vector<double> v = values;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

double sample_sd(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double x : values) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : values) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(n - 1));
}

double nearest_rank_quantile(const std::vector<double>& values, double q) {
  if (values.empty()) throw ArgumentError("nearest_rank_quantile: empty list");
  if (!(q > 0.0 && q <= 1.0))
    throw ArgumentError("nearest_rank_quantile: q must be in (0, 1]");
  std::vector<double> v = values;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  // The 1e-9 slack keeps ceil() from overshooting when q*n is an integer up
  // to floating-point rounding (e.g. q = 17/18, n = 18).
  double rank = std::ceil(q * static_cast<double>(n) - 1e-9);
  if (rank < 1.0) rank = 1.0;
  std::size_t k = static_cast<std::size_t>(rank);
  if (k > n) k = n;
  return v[k - 1];
}

std::vector<double> durations(const std::vector<IkiRecord>& ikis,
                              std::optional<BigramClass> cls) {
  std::vector<double> out;
  out.reserve(ikis.size());
  for (const auto& r : ikis)
    if (!cls || r.bigram_class == *cls) out.push_back(r.duration_ms);
  return out;
}

SessionProfile session_profile(const std::vector<IkiRecord>& ikis) {
  if (ikis.empty()) throw MissingStatError("session_profile: empty IKI list");
  SessionProfile p;
  p.n_ikis = ikis.size();
  for (const auto& r : ikis) ++p.counts[static_cast<std::size_t>(r.bigram_class)];

  const auto ww = durations(ikis, BigramClass::WW);
  const auto ws = durations(ikis, BigramClass::WS);
  const auto sw = durations(ikis, BigramClass::SW);
  if (!ww.empty()) p.ww_median_ms = median(ww);
  if (!ws.empty()) p.ws_median_ms = median(ws);
  if (!sw.empty()) p.sw_median_ms = median(sw);
  p.ww_sd_ms = sample_sd(ww);
  p.ww_sd_degenerate = ww.size() < 2;
  const auto all = durations(ikis);
  p.all_sd_ms = sample_sd(all);
  p.all_sd_degenerate = all.size() < 2;
  return p;
}

std::string profiles_csv_header() {
  return "session_id,n_ikis,ww_n,ws_n,sw_n,ss_n,ww_median_ms,ws_median_ms,"
         "sw_median_ms,ww_sd_ms";
}

std::string profile_csv_row(const std::string& session_id, const SessionProfile& p) {
  return csv::join_row({session_id, std::to_string(p.n_ikis),
                        std::to_string(p.count(BigramClass::WW)),
                        std::to_string(p.count(BigramClass::WS)),
                        std::to_string(p.count(BigramClass::SW)),
                        std::to_string(p.count(BigramClass::SS)),
                        csv::format_optional(p.ww_median_ms),
                        csv::format_optional(p.ws_median_ms),
                        csv::format_optional(p.sw_median_ms),
                        csv::format_double(p.ww_sd_ms)});
}

}  // namespace pausekit
