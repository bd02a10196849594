#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "pausekit/errors.hpp"
#include "pausekit/synth.hpp"

using namespace pausekit;

TEST_CASE("generate_session is deterministic per seed") {
  SynthConfig cfg;
  cfg.n_words = 50;
  cfg.seed = 7;
  const auto a = generate_session(cfg);
  const auto b = generate_session(cfg);
  REQUIRE(a.session.events.size() == b.session.events.size());
  for (std::size_t i = 0; i < a.session.events.size(); ++i) {
    CHECK(a.session.events[i].time_ms == b.session.events[i].time_ms);
    CHECK(a.session.events[i].key == b.session.events[i].key);
  }
  cfg.seed = 8;
  const auto c = generate_session(cfg);
  bool any_diff = c.session.events.size() != a.session.events.size();
  for (std::size_t i = 0; !any_diff && i < a.session.events.size(); ++i)
    any_diff = a.session.events[i].time_ms != c.session.events[i].time_ms;
  CHECK(any_diff);
}

TEST_CASE("labels align with extracted IKIs") {
  SynthConfig cfg;
  cfg.n_words = 80;
  cfg.seed = 3;
  const auto ss = generate_session(cfg);
  const auto ikis = extract_ikis(ss.session);
  REQUIRE(ikis.size() == ss.labels.size());
  for (std::size_t i = 0; i < ikis.size(); ++i) {
    CHECK(ikis[i].duration_ms == ss.labels[i].duration_ms);
    CHECK(ikis[i].bigram_class == ss.labels[i].bigram_class);
  }
}

TEST_CASE("label consistency: reflective only at word-initial IKIs") {
  SynthConfig cfg;
  cfg.n_words = 200;
  cfg.seed = 11;
  const auto ss = generate_session(cfg);
  for (const auto& l : ss.labels) {
    if (l.bigram_class == BigramClass::WW || l.bigram_class == BigramClass::WS)
      CHECK(l.true_mode == TrueMode::Automated);
    if (l.true_mode != TrueMode::Automated) CHECK(l.bigram_class == BigramClass::SW);
  }
}

TEST_CASE("zero reflective labels when mode 3 is switched off") {
  SynthConfig cfg;
  cfg.n_words = 100;
  cfg.chunk_boundary_mode3_prob = 0.0;
  cfg.boundary_mode2_prob = 1.0;
  cfg.boundary_mode3_prob = 0.0;
  const auto ss = generate_session(cfg);
  for (const auto& l : ss.labels) CHECK(l.true_mode != TrueMode::Reflective);
}

TEST_CASE("WW median approaches the mode-1 log-normal median") {
  SynthConfig cfg;
  cfg.n_words = 800;
  cfg.seed = 5;
  const auto ss = generate_session(cfg);
  const auto p = session_profile(extract_ikis(ss.session));
  REQUIRE(p.ww_median_ms.has_value());
  CHECK(*p.ww_median_ms ==
        doctest::Approx(std::exp(cfg.modes[0].log_mean)).epsilon(0.05));
}

TEST_CASE("WS median is below SW median by construction") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SynthConfig cfg;
    cfg.n_words = 150;
    cfg.seed = seed;
    const auto p = session_profile(extract_ikis(generate_session(cfg).session));
    REQUIRE(p.ws_median_ms.has_value());
    REQUIRE(p.sw_median_ms.has_value());
    CHECK(*p.ws_median_ms < *p.sw_median_ms);
  }
}

TEST_CASE("config validation") {
  SynthConfig cfg;
  cfg.modes[1].log_mean = cfg.modes[0].log_mean;  // not strictly increasing
  CHECK_THROWS_AS(generate_session(cfg), ArgumentError);
  SynthConfig neg;
  neg.boundary_mode2_prob = -1.0;
  CHECK_THROWS_AS(generate_session(neg), ArgumentError);
  SynthConfig tiny;
  tiny.n_words = 1;
  CHECK_THROWS_AS(generate_session(tiny), ArgumentError);
}

TEST_CASE("evaluate_threshold trivial cases") {
  std::vector<LabeledIki> labels = {
      {100.0, TrueMode::Automated, BigramClass::WW},
      {150.0, TrueMode::Automated, BigramClass::WW},
      {400.0, TrueMode::Respite, BigramClass::SW},
      {2000.0, TrueMode::Reflective, BigramClass::SW},
  };
  // Threshold below everything: full recall, precision at the base rate.
  auto m = evaluate_threshold(labels, 0.0);
  CHECK(m.recall == 1.0);
  CHECK(m.precision == 0.25);
  CHECK(m.accuracy == 0.25);

  // Threshold above everything: no predictions, recall zero.
  m = evaluate_threshold(labels, 1e9);
  CHECK_FALSE(m.precision.has_value());
  CHECK(m.recall == 0.0);
  CHECK_FALSE(m.f1.has_value());
  CHECK(m.accuracy == 0.75);

  // A clean separator.
  m = evaluate_threshold(labels, 1000.0);
  CHECK(m.precision == 1.0);
  CHECK(m.recall == 1.0);
  CHECK(m.f1 == 1.0);
  CHECK(m.accuracy == 1.0);

  // No positives in the data: recall is absent.
  std::vector<LabeledIki> no_pos = {{100.0, TrueMode::Automated, BigramClass::WW}};
  m = evaluate_threshold(no_pos, 50.0);
  CHECK_FALSE(m.recall.has_value());

  CHECK_THROWS_AS(evaluate_threshold({}, 1.0), ArgumentError);
}

TEST_CASE("mode-2/3 density intersection is near-optimal on a big draw") {
  // Well-separated planted modes; the known density intersection should beat
  // or tie any other single threshold up to a small tolerance.
  SynthConfig cfg;
  cfg.n_words = 600;
  cfg.seed = 21;
  const auto ss = generate_session(cfg);

  // Weighted intersection of the mode2/mode3 SW mixture measured on labels.
  std::size_t n2 = 0, n3 = 0;
  for (const auto& l : ss.labels) {
    if (l.true_mode == TrueMode::Respite) ++n2;
    if (l.true_mode == TrueMode::Reflective) ++n3;
  }
  REQUIRE(n3 > 0);
  const double w2 = static_cast<double>(n2), w3 = static_cast<double>(n3);
  const double bayes_log = oracle::density_intersection(
      w2, cfg.modes[1].log_mean, cfg.modes[1].log_sd, w3, cfg.modes[2].log_mean,
      cfg.modes[2].log_sd);
  const double bayes_ms = std::exp(bayes_log);
  const double bayes_acc = evaluate_threshold(ss.labels, bayes_ms).accuracy;

  double best_acc = 0.0;
  for (const auto& l : ss.labels)
    best_acc = std::max(best_acc, evaluate_threshold(ss.labels, l.duration_ms).accuracy);
  CHECK(bayes_acc >= best_acc - 0.01);
}

TEST_CASE("F1 rises to 1 as mode separation grows") {
  const double gaps[] = {0.8, 1.6, 3.0};  // mode3 offset above mode2
  double prev = 0.0;
  for (double gap : gaps) {
    SynthConfig cfg;
    cfg.modes = {{{4.5, 0.25}, {5.0, 0.25}, {5.0 + gap, 0.25}}};
    cfg.n_words = 500;
    cfg.seed = 33;
    const auto ss = generate_session(cfg);
    const auto ikis = extract_ikis(ss.session);
    const double pub = compute_pub(ikis);
    const auto m = evaluate_threshold(ss.labels, pub);
    REQUIRE(m.f1.has_value());
    CHECK(*m.f1 >= prev - 0.02);  // monotone up to sampling slack
    prev = *m.f1;
  }
  CHECK(prev > 0.95);
}

TEST_CASE("benchmark produces one score row per method and a sane matrix") {
  BenchmarkConfig bc;
  bc.n_sessions = 6;
  bc.base.n_words = 120;
  bc.gmm.restarts = 2;
  const auto res = benchmark_methods(bc);
  REQUIRE(res.scores.size() == 5);
  CHECK(res.scores[0].method == "RSP");
  CHECK(res.scores[4].method == "3GU");
  for (const auto& sc : res.scores) CHECK(sc.n_scored == 6);
  REQUIRE(res.matrix.has_value());
  const int tsp = res.measures.column_index("TSP");
  const int sw = res.measures.column_index("SW");
  REQUIRE(res.matrix->r[tsp][sw].has_value());
  CHECK(std::abs(*res.matrix->r[tsp][sw] - 1.0) < 1e-12);
  CHECK(res.degenerate_sessions == 0);
}

TEST_CASE("benchmark flags degenerate ground truth") {
  BenchmarkConfig bc;
  bc.n_sessions = 3;
  bc.base.n_words = 60;
  bc.base.chunk_boundary_mode3_prob = 0.0;
  bc.base.boundary_mode2_prob = 1.0;
  bc.base.boundary_mode3_prob = 0.0;
  bc.gmm.restarts = 1;
  const auto res = benchmark_methods(bc);
  CHECK(res.degenerate_sessions == 3);
  REQUIRE_FALSE(res.flags.empty());
  CHECK(res.flags[0].substr(0, 24) == "degenerate_ground_truth:");
  for (const auto& sc : res.scores) CHECK(sc.n_scored == 0);
}
