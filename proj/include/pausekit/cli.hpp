#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pausekit/corpus_stats.hpp"
#include "pausekit/keylog.hpp"
#include "pausekit/mixture.hpp"
#include "pausekit/synth.hpp"
#include "pausekit/thresholds.hpp"

namespace pausekit::cli {

// Everything a subcommand needs, resolved before any computation runs.
// Populated from command-line flags plus an optional key-value config file;
// unknown config keys are rejected.
struct RunConfig {
  std::vector<std::string> inputs;
  std::string out_dir = ".";
  std::string config_path;
  std::string classify_config_path;
  std::string format = "csv";  // csv | json
  std::uint64_t seed = 1;
  int jobs = 0;  // 0 = all available cores

  ClassifyConfig classify;
  PubParams pub;
  MudSdScope mud_scope = MudSdScope::Ww;
  GmmConfig gmm;
  CorrelationPolicy corr_policy = CorrelationPolicy::CompleteRowsOnly;
  CorrelationStat corr_stat = CorrelationStat::Pearson;
  int hist_bins = 20;
  std::size_t gmm_min_ikis = 15;  // sessions below this are skipped with a warning

  // simulate / benchmark
  SynthConfig synth;
  int n_sessions = 50;
  double jitter = 0.1;

  // segment
  std::string threshold_spec = "pub";  // named threshold or a number in ms
  std::string lower_spec;              // two-level when both set
  std::string upper_spec;
  bool with_text = false;
};

// Applies `key = value` lines from a config file; throws ArgumentError on
// unknown keys or bad values.
void apply_config_file(RunConfig& cfg, const std::string& path);
void apply_config_text(RunConfig& cfg, std::string_view text);

// Exit codes: 0 success, 1 partial (some sessions failed, listed in the
// summary), 2 total failure.
int cmd_analyze(const RunConfig& cfg);
int cmd_gmm(const RunConfig& cfg);
int cmd_correlate(const RunConfig& cfg);
int cmd_segment(const RunConfig& cfg);
int cmd_simulate(const RunConfig& cfg);
int cmd_benchmark(const RunConfig& cfg);
int cmd_validate(const RunConfig& cfg);

}  // namespace pausekit::cli
