#include "pausekit/segmentation.hpp"

#include "pausekit/csv.hpp"
#include "pausekit/errors.hpp"
#include "pausekit/iki.hpp"

namespace pausekit {

namespace {

// Segments the half-open event range [first, last) of a session.
std::vector<ProductionUnit> segment_range(const Session& session, std::size_t first,
                                          std::size_t last, double threshold_ms) {
  std::vector<ProductionUnit> units;
  if (first >= last) return units;
  std::size_t start = first;
  std::optional<double> pending_pause;
  for (std::size_t i = first + 1; i <= last; ++i) {
    const bool at_end = i == last;
    double iki = 0.0;
    if (!at_end)
      iki = static_cast<double>(session.events[i].time_ms -
                                session.events[i - 1].time_ms);
    if (at_end || iki > threshold_ms) {
      ProductionUnit u;
      u.start_index = start;
      u.end_index = i - 1;
      u.n_keystrokes = i - start;
      u.span_ms = static_cast<double>(session.events[i - 1].time_ms -
                                      session.events[start].time_ms);
      u.preceding_pause_ms = pending_pause;
      units.push_back(u);
      if (at_end) break;
      pending_pause = iki;
      start = i;
    }
  }
  return units;
}

}  // namespace

std::vector<ProductionUnit> segment(const Session& session, double threshold_ms) {
  return segment_range(session, 0, session.events.size(), threshold_ms);
}

std::vector<TwoLevelUnit> two_level_segment(const Session& session, double lower_ms,
                                            double upper_ms) {
  if (lower_ms > upper_ms)
    throw ArgumentError("two_level_segment: lower threshold exceeds upper");
  std::vector<TwoLevelUnit> out;
  for (const auto& outer : segment(session, upper_ms)) {
    TwoLevelUnit tl;
    tl.unit = outer;
    tl.keystroke_units =
        segment_range(session, outer.start_index, outer.end_index + 1, lower_ms);
    out.push_back(std::move(tl));
  }
  return out;
}

UnitStats unit_stats(const std::vector<ProductionUnit>& units) {
  if (units.empty()) throw ArgumentError("unit_stats: no units");
  UnitStats s;
  s.n_units = units.size();
  std::vector<double> sizes;
  std::vector<double> pauses;
  for (const auto& u : units) {
    sizes.push_back(static_cast<double>(u.n_keystrokes));
    if (u.preceding_pause_ms) pauses.push_back(*u.preceding_pause_ms);
  }
  double sum = 0.0;
  for (double v : sizes) sum += v;
  s.mean_keystrokes = sum / static_cast<double>(sizes.size());
  s.median_keystrokes = median(sizes);
  if (!pauses.empty()) {
    double psum = 0.0;
    for (double v : pauses) psum += v;
    s.mean_pause_ms = psum / static_cast<double>(pauses.size());
    s.median_pause_ms = median(pauses);
  }
  return s;
}

std::string units_csv_header(bool with_text) {
  std::string h =
      "session_id,unit_index,start_index,end_index,n_keystrokes,span_ms,"
      "preceding_pause_ms";
  if (with_text) h += ",text";
  return h;
}

std::string unit_csv_row(const std::string& session_id, std::size_t unit_index,
                         const ProductionUnit& u, const Session& session,
                         bool with_text) {
  std::vector<std::string> fields = {
      session_id,
      std::to_string(unit_index),
      std::to_string(u.start_index),
      std::to_string(u.end_index),
      std::to_string(u.n_keystrokes),
      csv::format_double(u.span_ms),
      csv::format_optional(u.preceding_pause_ms)};
  if (with_text) {
    std::string text;
    for (std::size_t i = u.start_index; i <= u.end_index; ++i)
      text += session.events[i].key;
    fields.push_back(text);
  }
  return csv::join_row(fields);
}

}  // namespace pausekit
