#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pausekit/iki.hpp"

namespace pausekit {

// Parameters of the production-unit-break quantile. With the defaults the
// cut sits at q = 1 - 1/(6*3), i.e. the top ~5.5% of IKIs count as breaks.
struct PubParams {
  double avg_word_len = 6.0;
  double chunk_words = 3.0;
  // When set, avg_word_len is re-estimated per session as
  // keystrokes / (SW count + 1); chunk_words stays fixed.
  bool estimate_word_len = false;

  double quantile() const;  // 1 - 1/(avg_word_len * chunk_words), validated
};

// Which standard deviation feeds the micro-unit delimiter.
enum class MudSdScope { Ww, All };

// The five theory-driven thresholds for one session. Fields are absent when
// their statistic is missing; `flags` lists what is missing or degenerate.
struct ThresholdSet {
  std::optional<double> rsp_ms;
  std::optional<double> kub_ms;  // identical to rsp_ms by definition
  std::optional<double> tsp_ms;
  std::optional<double> mud_ms;
  std::optional<double> pub_ms;
  double pub_q = 0.0;
  PubParams pub_params;
  SessionProfile source_profile;
  std::vector<std::string> flags;

  bool partial() const { return !(rsp_ms && kub_ms && tsp_ms && mud_ms && pub_ms); }
};

// 2 x median WW-IKI. Throws MissingStatError when the WW median is absent.
double compute_rsp(const SessionProfile& profile);

// 3 x median SW-IKI (the longer between-word measure).
double compute_tsp(const SessionProfile& profile);

// median WW-IKI + 2 x SD, with the SD scope configurable.
double compute_mud(const SessionProfile& profile, MudSdScope scope = MudSdScope::Ww);

// Nearest-rank quantile of ALL IKI durations at q = 1 - 1/(word_len*chunk).
double compute_pub(const std::vector<IkiRecord>& ikis, const PubParams& params = {});

// Composition of the four plus KUB = RSP; per-field errors become absent
// fields with flags instead of exceptions.
ThresholdSet compute_threshold_set(const SessionProfile& profile,
                                   const std::vector<IkiRecord>& ikis,
                                   const PubParams& params = {},
                                   MudSdScope mud_scope = MudSdScope::Ww);

// Fraction of IKI durations <= threshold_ms.
double threshold_quantile(const std::vector<IkiRecord>& ikis, double threshold_ms);

std::string thresholds_csv_header();
std::string threshold_csv_row(const std::string& session_id, const ThresholdSet& t);

}  // namespace pausekit
