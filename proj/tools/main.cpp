#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pausekit/cli.hpp"
#include "pausekit/errors.hpp"

using pausekit::cli::RunConfig;

namespace {

void add_common_flags(CLI::App* cmd, RunConfig& cfg, bool needs_input) {
  auto* in = cmd->add_option("-i,--input", cfg.inputs, "Input keystroke log(s), canonical CSV");
  if (needs_input) in->required();
  cmd->add_option("-o,--out-dir", cfg.out_dir, "Output directory (default: current)");
  cmd->add_option("-c,--config", cfg.config_path, "Run config file (key = value lines)");
  cmd->add_option("--classify-config", cfg.classify_config_path,
                  "Key classification config file");
  cmd->add_option("--seed", cfg.seed, "Base random seed");
  cmd->add_option("-j,--jobs", cfg.jobs, "Worker threads (0 = all cores)");
  cmd->add_option("--format", cfg.format, "Table output format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pausekit: keystroke-pause thresholds for text-production research"};
  app.require_subcommand(1);

  RunConfig cfg;
  int (*run)(const RunConfig&) = nullptr;

  auto* analyze = app.add_subcommand(
      "analyze", "Per-session IKI profiles and pause thresholds");
  add_common_flags(analyze, cfg, true);
  analyze->callback([&] { run = pausekit::cli::cmd_analyze; });

  auto* gmm = app.add_subcommand(
      "gmm", "Gaussian-mixture fits, AIC selection and 3GL/3GU boundaries");
  add_common_flags(gmm, cfg, true);
  gmm->callback([&] { run = pausekit::cli::cmd_gmm; });

  auto* correlate = app.add_subcommand(
      "correlate", "Correlation matrix and distribution files across a corpus");
  add_common_flags(correlate, cfg, true);
  correlate->callback([&] { run = pausekit::cli::cmd_correlate; });

  auto* segment = app.add_subcommand("segment", "Split sessions into typing bursts");
  add_common_flags(segment, cfg, true);
  segment->add_option("-t,--threshold", cfg.threshold_spec,
                      "Threshold: rsp|kub|tsp|mud|pub|3gl|3gu or a number in ms");
  segment->add_option("--lower", cfg.lower_spec, "Two-level: inner (keystroke unit) threshold");
  segment->add_option("--upper", cfg.upper_spec, "Two-level: outer (production unit) threshold");
  segment->add_flag("--with-text", cfg.with_text, "Append reconstructed text per unit");
  segment->callback([&] { run = pausekit::cli::cmd_segment; });

  auto* simulate = app.add_subcommand(
      "simulate", "Generate a synthetic corpus with ground-truth labels");
  add_common_flags(simulate, cfg, false);
  simulate->add_option("-n,--sessions", cfg.n_sessions, "Number of sessions");
  simulate->add_option("--n-words", cfg.synth.n_words, "Words per session");
  simulate->callback([&] { run = pausekit::cli::cmd_simulate; });

  auto* benchmark = app.add_subcommand(
      "benchmark", "Score each threshold method against synthetic ground truth");
  add_common_flags(benchmark, cfg, false);
  benchmark->add_option("-n,--sessions", cfg.n_sessions, "Number of sessions");
  benchmark->add_option("--n-words", cfg.synth.n_words, "Words per session");
  benchmark->add_option("--jitter", cfg.jitter, "Per-session typing-speed jitter (log-ms SD)");
  benchmark->callback([&] { run = pausekit::cli::cmd_benchmark; });

  auto* validate = app.add_subcommand("validate", "Check session invariants");
  add_common_flags(validate, cfg, true);
  validate->callback([&] { run = pausekit::cli::cmd_validate; });

  try {
    app.parse(argc, argv);
    // Precedence: defaults < config file < command-line flags. The second
    // parse replays the flags on top of the file-initialized config.
    if (!cfg.config_path.empty()) {
      const std::string path = cfg.config_path;
      cfg = RunConfig{};
      pausekit::cli::apply_config_file(cfg, path);
      app.clear();
      app.parse(argc, argv);
    }
    if (!cfg.classify_config_path.empty())
      cfg.classify = pausekit::load_classify_config(cfg.classify_config_path);
    return run(cfg);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "pausekit error: " << e.what() << "\n";
    return 2;
  }
}
