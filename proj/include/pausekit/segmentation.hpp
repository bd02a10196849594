#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pausekit/keylog.hpp"

namespace pausekit {

// A maximal stretch of keystrokes with no internal IKI above the active
// threshold. Units partition the event sequence; the break IKI becomes the
// following unit's preceding pause.
struct ProductionUnit {
  std::size_t start_index = 0;  // inclusive event indices
  std::size_t end_index = 0;
  std::size_t n_keystrokes = 0;
  double span_ms = 0.0;
  std::optional<double> preceding_pause_ms;  // absent for the first unit
};

// Breaks at every IKI strictly greater than threshold_ms.
std::vector<ProductionUnit> segment(const Session& session, double threshold_ms);

// Outer partition by upper_ms, inner partition of each outer unit by
// lower_ms (an IKI above upper always breaks the outer unit first).
struct TwoLevelUnit {
  ProductionUnit unit;
  std::vector<ProductionUnit> keystroke_units;
};

std::vector<TwoLevelUnit> two_level_segment(const Session& session, double lower_ms,
                                            double upper_ms);

struct UnitStats {
  std::size_t n_units = 0;
  double mean_keystrokes = 0.0;
  double median_keystrokes = 0.0;
  std::optional<double> mean_pause_ms;    // absent with fewer than 2 units
  std::optional<double> median_pause_ms;
};

UnitStats unit_stats(const std::vector<ProductionUnit>& units);

// Units CSV; when with_text is set a final column carries the concatenated
// keys of the unit, tokens rendered literally.
std::string units_csv_header(bool with_text);
std::string unit_csv_row(const std::string& session_id, std::size_t unit_index,
                         const ProductionUnit& u, const Session& session,
                         bool with_text);

}  // namespace pausekit
