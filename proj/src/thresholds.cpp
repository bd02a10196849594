#include "pausekit/thresholds.hpp"

#include <cmath>

#include "pausekit/csv.hpp"
#include "pausekit/errors.hpp"

namespace pausekit {

double PubParams::quantile() const {
  const double denom = avg_word_len * chunk_words;
  if (!(avg_word_len > 0.0) || !(chunk_words > 0.0) || denom <= 1.0)
    throw ArgumentError("pub params: avg_word_len * chunk_words must exceed 1");
  return 1.0 - 1.0 / denom;
}

double compute_rsp(const SessionProfile& profile) {
  if (!profile.ww_median_ms)
    throw MissingStatError("compute_rsp: session has no WW IKIs");
  return 2.0 * *profile.ww_median_ms;
}

double compute_tsp(const SessionProfile& profile) {
  if (!profile.sw_median_ms)
    throw MissingStatError("compute_tsp: session has no SW IKIs");
  return 3.0 * *profile.sw_median_ms;
}

double compute_mud(const SessionProfile& profile, MudSdScope scope) {
  if (!profile.ww_median_ms)
    throw MissingStatError("compute_mud: session has no WW IKIs");
  const double sd = scope == MudSdScope::Ww ? profile.ww_sd_ms : profile.all_sd_ms;
  return *profile.ww_median_ms + 2.0 * sd;
}

double compute_pub(const std::vector<IkiRecord>& ikis, const PubParams& params) {
  if (ikis.empty()) throw MissingStatError("compute_pub: empty IKI list");
  PubParams p = params;
  if (p.estimate_word_len) {
    const auto prof_counts = session_profile(ikis);
    const double keystrokes = static_cast<double>(ikis.size() + 1);
    p.avg_word_len = keystrokes /
                     static_cast<double>(prof_counts.count(BigramClass::SW) + 1);
  }
  return nearest_rank_quantile(durations(ikis), p.quantile());
}

ThresholdSet compute_threshold_set(const SessionProfile& profile,
                                   const std::vector<IkiRecord>& ikis,
                                   const PubParams& params, MudSdScope mud_scope) {
  ThresholdSet t;
  t.pub_params = params;
  t.source_profile = profile;

  try {
    t.rsp_ms = compute_rsp(profile);
    t.kub_ms = t.rsp_ms;  // KUB is RSP by definition; copied, never recomputed
    if (*t.rsp_ms <= 0.0) t.flags.push_back("rsp_degenerate");
  } catch (const MissingStatError&) {
    t.flags.push_back("rsp_missing");
    t.flags.push_back("kub_missing");
  }
  try {
    t.tsp_ms = compute_tsp(profile);
    if (*t.tsp_ms <= 0.0) t.flags.push_back("tsp_degenerate");
  } catch (const MissingStatError&) {
    t.flags.push_back("tsp_missing");
  }
  try {
    t.mud_ms = compute_mud(profile, mud_scope);
    if (*t.mud_ms <= 0.0) t.flags.push_back("mud_degenerate");
    if (mud_scope == MudSdScope::Ww && profile.ww_sd_degenerate)
      t.flags.push_back("mud_sd_degenerate");
  } catch (const MissingStatError&) {
    t.flags.push_back("mud_missing");
  }
  try {
    t.pub_ms = compute_pub(ikis, params);
    t.pub_q = params.quantile();
    if (*t.pub_ms <= 0.0) t.flags.push_back("pub_degenerate");
  } catch (const MissingStatError&) {
    t.flags.push_back("pub_missing");
  }
  return t;
}

double threshold_quantile(const std::vector<IkiRecord>& ikis, double threshold_ms) {
  if (ikis.empty()) throw ArgumentError("threshold_quantile: empty IKI list");
  std::size_t below = 0;
  for (const auto& r : ikis)
    if (r.duration_ms <= threshold_ms) ++below;
  return static_cast<double>(below) / static_cast<double>(ikis.size());
}

std::string thresholds_csv_header() {
  return "session_id,rsp_ms,kub_ms,tsp_ms,mud_ms,pub_ms,pub_q,partial_flags";
}

std::string threshold_csv_row(const std::string& session_id, const ThresholdSet& t) {
  std::string flags;
  for (std::size_t i = 0; i < t.flags.size(); ++i) {
    if (i) flags += ';';
    flags += t.flags[i];
  }
  return csv::join_row({session_id, csv::format_optional(t.rsp_ms),
                        csv::format_optional(t.kub_ms), csv::format_optional(t.tsp_ms),
                        csv::format_optional(t.mud_ms), csv::format_optional(t.pub_ms),
                        t.pub_ms ? csv::format_double(t.pub_q) : std::string(), flags});
}

}  // namespace pausekit
