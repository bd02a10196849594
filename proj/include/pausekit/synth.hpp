#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pausekit/corpus_stats.hpp"
#include "pausekit/iki.hpp"
#include "pausekit/mixture.hpp"
#include "pausekit/thresholds.hpp"

namespace pausekit {

enum class TrueMode { Automated, Respite, Reflective };

const char* to_string(TrueMode m);
std::optional<TrueMode> true_mode_from_string(const std::string& s);

struct ModeParams {
  double log_mean = 0.0;  // log-ms
  double log_sd = 0.3;
};

// Three-mode generative model: within-word and word-final IKIs come from
// mode 1 (the separator binds to the preceding word); word-initial IKIs come
// from mode 2 or 3, with roughly every chunk_words_mean-th boundary forced
// into the reflective mode. Durations are log-normal, rounded to whole ms.
struct SynthConfig {
  std::array<ModeParams, 3> modes = {{{4.5, 0.22}, {5.0, 0.20}, {7.5, 0.30}}};
  double word_len_mean = 6.0;
  double chunk_words_mean = 3.0;
  int n_words = 300;
  double boundary_mode2_prob = 0.85;  // mode mix at ordinary word boundaries
  double boundary_mode3_prob = 0.15;
  double chunk_boundary_mode3_prob = 1.0;
  std::uint64_t seed = 1;
  std::string id = "synth";

  void validate() const;  // throws ArgumentError
};

// One synthetic IKI with its ground-truth generating mode.
struct LabeledIki {
  double duration_ms = 0.0;
  TrueMode true_mode = TrueMode::Automated;
  BigramClass bigram_class = BigramClass::WW;
};

struct SynthSession {
  Session session;
  std::vector<LabeledIki> labels;  // one per IKI, aligned with extract_ikis
};

// Deterministic per seed.
SynthSession generate_session(const SynthConfig& config);

// Binary metrics for "reflective iff duration > threshold". Precision is
// absent with no predicted positives; recall is absent with no true
// positives in the data.
struct EvalMetrics {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
  double accuracy = 0.0;
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

EvalMetrics evaluate_threshold(const std::vector<LabeledIki>& labeled,
                               double threshold_ms);

struct BenchmarkConfig {
  int n_sessions = 50;
  SynthConfig base;
  // Per-session typing-speed offset: one normal draw with this SD added to
  // all three mode log-means.
  double jitter_log_mean = 0.1;
  std::uint64_t seed = 1;
  GmmConfig gmm;
  PubParams pub;
  // The benchmark scores MUD as an upper (reflective) threshold, which
  // needs the all-IKI SD; the per-session WW-scope variant stays available
  // through the analysis pipeline.
  MudSdScope mud_scope = MudSdScope::All;
};

struct MethodScore {
  std::string method;
  int n_scored = 0;
  std::optional<double> mean_f1;
  std::optional<double> sd_f1;
  std::optional<double> mean_precision;
  std::optional<double> mean_recall;
  std::optional<double> mean_accuracy;
};

struct BenchmarkResult {
  std::vector<MethodScore> scores;
  MeasureTable measures;  // per-session threshold/median table
  std::optional<CorrelationMatrix> matrix;
  int degenerate_sessions = 0;  // sessions with no reflective ground truth
  std::vector<std::string> flags;
};

// Generates n_sessions synthetic sessions (seed + index each), computes the
// named thresholds per session, scores them against the ground truth, and
// correlates the measure table.
BenchmarkResult benchmark_methods(const BenchmarkConfig& config,
                                  const std::vector<std::string>& methods = {
                                      "RSP", "TSP", "MUD", "PUB", "3GU"});

}  // namespace pausekit
