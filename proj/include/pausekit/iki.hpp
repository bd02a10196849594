#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "pausekit/keylog.hpp"

namespace pausekit {

enum class BigramClass { WW, WS, SW, SS };

const char* to_string(BigramClass c);

// One inter-keystroke interval. `index` is the position of the second
// keystroke of the pair in the session's event list.
struct IkiRecord {
  std::size_t index = 0;
  double duration_ms = 0.0;
  BigramClass bigram_class = BigramClass::SS;
};

// Per-session medians/SD that every threshold builds on. Medians are absent
// (not zero) when their class has no IKIs; ww_sd_ms is the sample SD
// (n-1 denominator), 0 and flagged degenerate when the WW count is < 2.
struct SessionProfile {
  std::optional<double> ww_median_ms;
  std::optional<double> ws_median_ms;
  std::optional<double> sw_median_ms;
  double ww_sd_ms = 0.0;
  bool ww_sd_degenerate = true;
  double all_sd_ms = 0.0;  // sample SD over all IKIs, for the all-IKI MUD variant
  bool all_sd_degenerate = true;
  std::array<std::size_t, 4> counts{};  // indexed by BigramClass
  std::size_t n_ikis = 0;

  std::size_t count(BigramClass c) const { return counts[static_cast<std::size_t>(c)]; }
};

// WW when both keys are alphanumeric, WS/SW across a word edge (Edit counts
// as non-alphanumeric), SS otherwise.
BigramClass classify_bigram(KeyClass prev, KeyClass next);

// Exactly n-1 records in order. Throws on sessions with fewer than 2 events
// or non-monotonic times.
std::vector<IkiRecord> extract_ikis(const Session& session);

// Lower/upper-middle average for even n, exact middle for odd n.
// Throws MissingStatError on an empty list.
double median(const std::vector<double>& values);

// Sample standard deviation (n-1 denominator); 0 when n < 2.
double sample_sd(const std::vector<double>& values);

// Nearest-rank quantile: the ceil(q*n)-th order statistic (1-based), no
// interpolation, so the result is always an observed value. q in (0, 1].
double nearest_rank_quantile(const std::vector<double>& values, double q);

SessionProfile session_profile(const std::vector<IkiRecord>& ikis);

// Durations of the records in the given class (all classes when nullopt).
std::vector<double> durations(const std::vector<IkiRecord>& ikis,
                              std::optional<BigramClass> cls = std::nullopt);

// Profile CSV: one row per session, empty fields for absent statistics.
std::string profiles_csv_header();
std::string profile_csv_row(const std::string& session_id, const SessionProfile& p);

}  // namespace pausekit
