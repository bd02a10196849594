#include <doctest.h>

#include "oracles.hpp"
#include "pausekit/errors.hpp"
#include "pausekit/iki.hpp"
#include "pausekit/segmentation.hpp"
#include "pausekit/thresholds.hpp"
#include "test_helpers.hpp"

using namespace pausekit;

namespace {

Session from_ikis(const std::vector<std::int64_t>& ikis) {
  Session s;
  s.id = "ikis";
  std::int64_t t = 0;
  s.events.push_back({0, "a", KeyClass::Alnum});
  for (std::int64_t d : ikis) {
    t += d;
    s.events.push_back({t, "a", KeyClass::Alnum});
  }
  return s;
}

}  // namespace

TEST_CASE("segment the worked session at its RSP") {
  const Session s = testutil::hand_session();
  const auto units = segment(s, 240.0);
  REQUIRE(units.size() == 2);
  CHECK(units[0].start_index == 0);
  CHECK(units[0].end_index == 3);
  CHECK(units[0].n_keystrokes == 4);
  CHECK(units[0].span_ms == 360.0);
  CHECK_FALSE(units[0].preceding_pause_ms.has_value());
  CHECK(units[1].start_index == 4);
  CHECK(units[1].end_index == 6);
  CHECK(units[1].n_keystrokes == 3);
  CHECK(units[1].preceding_pause_ms == 600.0);
}

TEST_CASE("segment extremes") {
  const Session s = testutil::hand_session();
  CHECK(segment(s, 600.0).size() == 1);   // strict >: the 600 IKI does not break
  CHECK(segment(s, 1e9).size() == 1);
  CHECK(segment(s, 50.0).size() == s.events.size());  // below min IKI
}

TEST_CASE("two_level_segment nests keystroke units inside production units") {
  const Session s = from_ikis({100, 300, 100, 900, 100});
  const auto tl = two_level_segment(s, 200.0, 500.0);
  REQUIRE(tl.size() == 2);
  CHECK(tl[0].keystroke_units.size() == 2);  // inner split at the 300 IKI
  CHECK(tl[0].keystroke_units[1].preceding_pause_ms == 300.0);
  CHECK(tl[1].keystroke_units.size() == 1);
  CHECK(tl[1].unit.preceding_pause_ms == 900.0);

  // lower == upper: one keystroke unit per production unit.
  const auto flat = two_level_segment(s, 500.0, 500.0);
  for (const auto& u : flat) CHECK(u.keystroke_units.size() == 1);

  CHECK_THROWS_AS(two_level_segment(s, 500.0, 200.0), ArgumentError);
}

TEST_CASE("two_level on the worked session") {
  const auto tl = two_level_segment(testutil::hand_session(), 130.0, 240.0);
  REQUIRE(tl.size() == 2);
  CHECK(tl[0].keystroke_units.size() == 1);
  CHECK(tl[1].keystroke_units.size() == 1);
}

TEST_CASE("unit partition property and count identity") {
  for (std::uint64_t seed = 600; seed < 620; ++seed) {
    const Session s = testutil::random_session(seed, 80);
    const auto d = oracle::iki_diffs([&] {
      std::vector<std::int64_t> ts;
      for (const auto& e : s.events) ts.push_back(e.time_ms);
      return ts;
    }());
    for (double threshold : {50.0, 150.0, 400.0}) {
      const auto units = segment(s, threshold);
      CHECK(units.size() == 1 + oracle::count_breaks(d, threshold));
      std::size_t total = 0;
      std::size_t expect_start = 0;
      for (const auto& u : units) {
        CHECK(u.start_index == expect_start);
        CHECK(u.end_index >= u.start_index);
        CHECK(u.n_keystrokes == u.end_index - u.start_index + 1);
        expect_start = u.end_index + 1;
        total += u.n_keystrokes;
      }
      CHECK(total == s.events.size());
    }
  }
}

TEST_CASE("raising the threshold never increases the unit count") {
  for (std::uint64_t seed = 700; seed < 710; ++seed) {
    const Session s = testutil::random_session(seed, 80);
    std::size_t prev = SIZE_MAX;
    for (double threshold : {0.0, 50.0, 120.0, 250.0, 500.0, 2000.0}) {
      const std::size_t n = segment(s, threshold).size();
      CHECK(n <= prev);
      prev = n;
    }
  }
}

TEST_CASE("PUB segmentation break rate is bounded by design") {
  for (std::uint64_t seed = 800; seed < 810; ++seed) {
    const Session s = testutil::random_session(seed, 120);
    const auto ikis = extract_ikis(s);
    const double pub = compute_pub(ikis);
    const auto units = segment(s, pub);
    const double breaks = static_cast<double>(units.size() - 1);
    CHECK(breaks <= std::floor(static_cast<double>(ikis.size()) / 18.0));
  }
}

TEST_CASE("unit_stats") {
  const Session s = testutil::hand_session();
  const auto units = segment(s, 240.0);
  const auto st = unit_stats(units);
  CHECK(st.n_units == 2);
  CHECK(st.mean_keystrokes == 3.5);
  CHECK(st.median_keystrokes == 3.5);
  CHECK(st.mean_pause_ms == 600.0);
  CHECK(st.median_pause_ms == 600.0);

  const auto single = unit_stats(segment(s, 600.0));  // strict >, one unit of 7
  CHECK(single.n_units == 1);
  CHECK(single.mean_keystrokes == 7.0);
  CHECK_FALSE(single.mean_pause_ms.has_value());

  CHECK_THROWS_AS(unit_stats({}), ArgumentError);
}

TEST_CASE("unit CSV includes literal token text when asked") {
  const Session s = testutil::hand_session();
  const auto units = segment(s, 240.0);
  CHECK(unit_csv_row("hand", 0, units[0], s, true) == "hand,0,0,3,4,360,,The<SPACE>");
  CHECK(units_csv_header(false) ==
        "session_id,unit_index,start_index,end_index,n_keystrokes,span_ms,"
        "preceding_pause_ms");
}
