#include "pausekit/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "pausekit/csv.hpp"
#include "pausekit/errors.hpp"
#include "pausekit/iki.hpp"
#include "pausekit/segmentation.hpp"

namespace pausekit::cli {

using ordered_json = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------- logging

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("PAUSEKIT_LOG");
    if (!env) return LogLevel::Warn;
    const std::string v = env;
    if (v == "error" || v == "0") return LogLevel::Error;
    if (v == "warn" || v == "1") return LogLevel::Warn;
    if (v == "info" || v == "2") return LogLevel::Info;
    if (v == "debug" || v == "3") return LogLevel::Debug;
    return LogLevel::Warn;
  }();
  return level;
}

std::mutex log_mu;

void log_at(LogLevel lvl, const char* tag, const std::string& msg) {
  if (log_level() < lvl) return;
  std::lock_guard<std::mutex> lk(log_mu);
  std::cerr << "pausekit " << tag << ": " << msg << "\n";
}

void log_warn(const std::string& msg) { log_at(LogLevel::Warn, "warning", msg); }
void log_info(const std::string& msg) { log_at(LogLevel::Info, "info", msg); }

// ------------------------------------------------------------ config file

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

double parse_number(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ArgumentError("config: key '" + key + "' expects a number, got '" + value + "'");
  }
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
  const double v = parse_number(key, value);
  if (v != std::floor(v))
    throw ArgumentError("config: key '" + key + "' expects an integer");
  return static_cast<std::int64_t>(v);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ArgumentError("config: key '" + key + "' expects true or false");
}

void apply_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "classify_config") {
    cfg.classify_config_path = value;
    cfg.classify = load_classify_config(value);
  } else if (key == "pub.avg_word_len") {
    cfg.pub.avg_word_len = parse_number(key, value);
  } else if (key == "pub.chunk_words") {
    cfg.pub.chunk_words = parse_number(key, value);
  } else if (key == "pub.estimate_word_len") {
    cfg.pub.estimate_word_len = parse_bool(key, value);
  } else if (key == "mud.sd_scope") {
    if (value == "ww") cfg.mud_scope = MudSdScope::Ww;
    else if (value == "all") cfg.mud_scope = MudSdScope::All;
    else throw ArgumentError("config: mud.sd_scope must be 'ww' or 'all'");
  } else if (key == "gmm.max_iter") {
    cfg.gmm.max_iter = static_cast<int>(parse_int(key, value));
  } else if (key == "gmm.tol") {
    cfg.gmm.tol = parse_number(key, value);
  } else if (key == "gmm.restarts") {
    cfg.gmm.restarts = static_cast<int>(parse_int(key, value));
  } else if (key == "gmm.k_max") {
    cfg.gmm.k_max = static_cast<int>(parse_int(key, value));
  } else if (key == "gmm.fit_space") {
    if (value == "log") cfg.gmm.fit_space = FitSpace::LogMs;
    else if (value == "raw") cfg.gmm.fit_space = FitSpace::RawMs;
    else throw ArgumentError("config: gmm.fit_space must be 'log' or 'raw'");
  } else if (key == "gmm.variance_floor_ratio") {
    cfg.gmm.variance_floor_ratio = parse_number(key, value);
  } else if (key == "gmm.min_ikis") {
    cfg.gmm_min_ikis = static_cast<std::size_t>(parse_int(key, value));
  } else if (key == "correlate.policy") {
    if (value == "complete_rows") cfg.corr_policy = CorrelationPolicy::CompleteRowsOnly;
    else if (value == "pairwise") cfg.corr_policy = CorrelationPolicy::Pairwise;
    else throw ArgumentError("config: correlate.policy must be 'complete_rows' or 'pairwise'");
  } else if (key == "correlate.stat") {
    if (value == "pearson") cfg.corr_stat = CorrelationStat::Pearson;
    else if (value == "spearman") cfg.corr_stat = CorrelationStat::Spearman;
    else throw ArgumentError("config: correlate.stat must be 'pearson' or 'spearman'");
  } else if (key == "hist.bins") {
    cfg.hist_bins = static_cast<int>(parse_int(key, value));
  } else if (key == "synth.mode1.log_mean") {
    cfg.synth.modes[0].log_mean = parse_number(key, value);
  } else if (key == "synth.mode1.log_sd") {
    cfg.synth.modes[0].log_sd = parse_number(key, value);
  } else if (key == "synth.mode2.log_mean") {
    cfg.synth.modes[1].log_mean = parse_number(key, value);
  } else if (key == "synth.mode2.log_sd") {
    cfg.synth.modes[1].log_sd = parse_number(key, value);
  } else if (key == "synth.mode3.log_mean") {
    cfg.synth.modes[2].log_mean = parse_number(key, value);
  } else if (key == "synth.mode3.log_sd") {
    cfg.synth.modes[2].log_sd = parse_number(key, value);
  } else if (key == "synth.word_len_mean") {
    cfg.synth.word_len_mean = parse_number(key, value);
  } else if (key == "synth.chunk_words_mean") {
    cfg.synth.chunk_words_mean = parse_number(key, value);
  } else if (key == "synth.n_words") {
    cfg.synth.n_words = static_cast<int>(parse_int(key, value));
  } else if (key == "synth.boundary_mode2_prob") {
    cfg.synth.boundary_mode2_prob = parse_number(key, value);
  } else if (key == "synth.boundary_mode3_prob") {
    cfg.synth.boundary_mode3_prob = parse_number(key, value);
  } else if (key == "synth.chunk_boundary_mode3_prob") {
    cfg.synth.chunk_boundary_mode3_prob = parse_number(key, value);
  } else if (key == "benchmark.n_sessions") {
    cfg.n_sessions = static_cast<int>(parse_int(key, value));
  } else if (key == "benchmark.jitter") {
    cfg.jitter = parse_number(key, value);
  } else if (key == "segment.threshold") {
    cfg.threshold_spec = value;
  } else if (key == "segment.lower") {
    cfg.lower_spec = value;
  } else if (key == "segment.upper") {
    cfg.upper_spec = value;
  } else if (key == "segment.with_text") {
    cfg.with_text = parse_bool(key, value);
  } else {
    throw ArgumentError("config: unknown key '" + key + "'");
  }
}

// ------------------------------------------------------------ corpus load

std::vector<Session> load_corpus(const RunConfig& cfg) {
  if (cfg.inputs.empty()) throw ArgumentError("no --input file given");
  std::vector<Session> sessions;
  std::map<std::string, std::size_t> by_id;
  for (const auto& path : cfg.inputs) {
    const std::string text = io::read_file(path);
    for (auto& s : parse_keystroke_log(text, LogFormat::CanonicalCsv, cfg.classify)) {
      auto it = by_id.find(s.id);
      if (it == by_id.end()) {
        by_id.emplace(s.id, sessions.size());
        sessions.push_back(std::move(s));
      } else {
        log_warn("session '" + s.id + "' continues across input files; events appended");
        auto& dst = sessions[it->second].events;
        dst.insert(dst.end(), s.events.begin(), s.events.end());
      }
    }
  }
  std::sort(sessions.begin(), sessions.end(),
            [](const Session& a, const Session& b) { return a.id < b.id; });
  return sessions;
}

// --------------------------------------------------------- parallel driver

template <typename Fn>
void par_for(std::size_t n, int jobs, Fn&& fn) {
  std::size_t j = jobs <= 0 ? std::max(1u, std::thread::hardware_concurrency())
                            : static_cast<std::size_t>(jobs);
  j = std::min(j, n);
  if (j <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> threads;
  std::exception_ptr first_error;
  std::mutex err_mu;
  for (std::size_t t = 0; t < j; ++t) {
    threads.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// ------------------------------------------------------------ shared bits

struct SessionAnalysis {
  bool ok = false;
  std::string fail_reason;
  std::vector<IkiRecord> ikis;
  SessionProfile profile;
  ThresholdSet thresholds;
};

SessionAnalysis analyze_one(const Session& s, const RunConfig& cfg) {
  SessionAnalysis a;
  const ValidationReport vr = validate_session(s, cfg.classify);
  if (!vr.ok) {
    for (const auto& issue : vr.issues) {
      if (is_error(issue.code)) {
        a.fail_reason = std::string(to_string(issue.code)) + " at event " +
                        std::to_string(issue.event_index);
        break;
      }
    }
    return a;
  }
  a.ikis = extract_ikis(s);
  a.profile = session_profile(a.ikis);
  a.thresholds = compute_threshold_set(a.profile, a.ikis, cfg.pub, cfg.mud_scope);
  a.ok = true;
  return a;
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

int exit_for(std::size_t n_total, std::size_t n_failed) {
  if (n_failed == 0) return 0;
  return n_failed == n_total ? 2 : 1;
}

ordered_json matrix_json(const CorrelationMatrix& m) {
  ordered_json j;
  j["measures"] = m.labels;
  j["policy"] = to_string(m.policy);
  j["stat"] = to_string(m.stat);
  ordered_json rows = ordered_json::array();
  for (std::size_t a = 0; a < m.labels.size(); ++a) {
    ordered_json row = ordered_json::array();
    for (std::size_t b = 0; b < m.labels.size(); ++b) {
      if (m.r[a][b]) row.push_back(*m.r[a][b]);
      else row.push_back(nullptr);
    }
    rows.push_back(row);
  }
  j["r"] = rows;
  j["n"] = m.n;
  return j;
}

// Named or numeric threshold for segmentation.
std::optional<double> resolve_threshold(const std::string& spec,
                                        const SessionAnalysis& a,
                                        const std::optional<GmmThresholds>& gmm) {
  std::string name = spec;
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (name == "rsp") return a.thresholds.rsp_ms;
  if (name == "kub") return a.thresholds.kub_ms;
  if (name == "tsp") return a.thresholds.tsp_ms;
  if (name == "mud") return a.thresholds.mud_ms;
  if (name == "pub") return a.thresholds.pub_ms;
  if (name == "3gl") return gmm ? std::optional<double>(gmm->g3l_ms) : std::nullopt;
  if (name == "3gu") return gmm ? std::optional<double>(gmm->g3u_ms) : std::nullopt;
  try {
    std::size_t pos = 0;
    const double v = std::stod(spec, &pos);
    if (pos == spec.size() && v >= 0.0) return v;
  } catch (const std::exception&) {
  }
  throw ArgumentError("unknown threshold '" + spec +
                      "' (expected rsp|kub|tsp|mud|pub|3gl|3gu or a number in ms)");
}

bool spec_needs_gmm(const std::string& spec) {
  std::string name = spec;
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return name == "3gl" || name == "3gu";
}

}  // namespace

void apply_config_text(RunConfig& cfg, std::string_view text) {
  std::size_t pos = 0, line_no = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line[0] != '#') {
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos)
        throw ArgumentError("config line " + std::to_string(line_no) +
                            ": expected key = value");
      apply_key(cfg, trim(std::string_view(line).substr(0, eq)),
                trim(std::string_view(line).substr(eq + 1)));
    }
    if (nl == text.size()) break;
  }
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  apply_config_text(cfg, io::read_file(path));
}

// ----------------------------------------------------------------- analyze

int cmd_analyze(const RunConfig& cfg) {
  const auto sessions = load_corpus(cfg);
  std::vector<SessionAnalysis> results(sessions.size());
  par_for(sessions.size(), cfg.jobs,
          [&](std::size_t i) { results[i] = analyze_one(sessions[i], cfg); });

  std::string profiles = profiles_csv_header() + "\n";
  std::string thresholds = thresholds_csv_header() + "\n";
  ordered_json summary;
  summary["command"] = "analyze";
  summary["n_sessions"] = sessions.size();
  ordered_json failures = ordered_json::array();
  std::size_t n_failed = 0;
  for (std::size_t i = 0; i < sessions.size(); ++i) {
    if (!results[i].ok) {
      ++n_failed;
      failures.push_back({{"session_id", sessions[i].id},
                          {"reason", results[i].fail_reason}});
      log_warn("session '" + sessions[i].id + "' skipped: " + results[i].fail_reason);
      continue;
    }
    profiles += profile_csv_row(sessions[i].id, results[i].profile) + "\n";
    thresholds += threshold_csv_row(sessions[i].id, results[i].thresholds) + "\n";
  }
  summary["n_ok"] = sessions.size() - n_failed;
  summary["n_failed"] = n_failed;
  summary["failures"] = failures;
  summary["outputs"] = {"profiles.csv", "thresholds.csv"};

  io::ensure_dir(cfg.out_dir);
  io::write_file(out_path(cfg, "profiles.csv"), profiles);
  io::write_file(out_path(cfg, "thresholds.csv"), thresholds);
  io::write_file(out_path(cfg, "summary.json"), summary.dump(2) + "\n");
  if (sessions.empty()) return 0;
  return exit_for(sessions.size(), n_failed);
}

// --------------------------------------------------------------------- gmm

namespace {

struct GmmWork {
  bool fitted = false;
  bool failed = false;  // invalid session, as opposed to a precondition skip
  std::string skip_reason;
  std::size_t dropped_nonpositive = 0;
  std::size_t n_values = 0;
  SelectKResult selection;
  GmmThresholds thresholds;
  std::uint64_t seed = 0;
};

ordered_json fit_params_json(const MixtureFit& f) {
  ordered_json j;
  j["fit_space"] = to_string(f.fit_space);
  j["weights"] = f.weights;
  j["means"] = f.means;
  j["sds"] = f.sds;
  if (f.fit_space == FitSpace::LogMs) {
    std::vector<double> means_ms, sds_ms;
    for (int c = 0; c < f.k; ++c) {
      const double mu = f.means[c], s = f.sds[c];
      means_ms.push_back(std::exp(mu));  // component median in ms
      sds_ms.push_back(std::exp(mu + 0.5 * s * s) * std::sqrt(std::expm1(s * s)));
    }
    j["means_ms"] = means_ms;
    j["sds_ms"] = sds_ms;
  } else {
    j["means_ms"] = f.means;
    j["sds_ms"] = f.sds;
  }
  j["loglik"] = f.loglik;
  j["aic"] = f.aic;
  j["bic"] = f.bic;
  j["iterations"] = f.iterations;
  j["converged"] = f.converged;
  j["restart_index"] = f.restart_index;
  return j;
}

GmmWork gmm_one(const Session& s, const RunConfig& cfg, std::uint64_t seed) {
  GmmWork w;
  w.seed = seed;
  const ValidationReport vr = validate_session(s, cfg.classify);
  if (!vr.ok) {
    w.failed = true;
    w.skip_reason = "failed validation";
    return w;
  }
  std::vector<double> values = durations(extract_ikis(s));
  if (cfg.gmm.fit_space == FitSpace::LogMs) {
    const std::size_t before = values.size();
    values.erase(std::remove_if(values.begin(), values.end(),
                                [](double v) { return !(v > 0.0); }),
                 values.end());
    w.dropped_nonpositive = before - values.size();
  }
  w.n_values = values.size();
  if (values.size() < cfg.gmm_min_ikis) {
    w.skip_reason = "only " + std::to_string(values.size()) + " usable IKIs (need " +
                    std::to_string(cfg.gmm_min_ikis) + ")";
    return w;
  }
  GmmConfig gcfg = cfg.gmm;
  gcfg.seed = seed;
  w.selection = select_k_aic(values, gcfg);
  MixtureFit forced3;
  for (const auto& f : w.selection.fits)
    if (f.k == 3) forced3 = f;
  if (forced3.k != 3) forced3 = fit_gmm(values, 3, gcfg);
  w.thresholds = gmm_thresholds_from_fit(std::move(forced3));
  w.thresholds.aic_best_k = w.selection.best_k;
  w.fitted = true;
  return w;
}

}  // namespace

int cmd_gmm(const RunConfig& cfg) {
  const auto sessions = load_corpus(cfg);
  std::vector<GmmWork> results(sessions.size());
  par_for(sessions.size(), cfg.jobs, [&](std::size_t i) {
    results[i] = gmm_one(sessions[i], cfg, cfg.seed + i);
  });

  std::string table = "session_id,best_k,g3l_ms,g3u_ms,boundary_method,converged,seed\n";
  ordered_json reports = ordered_json::array();
  std::size_t n_failed = 0;
  for (std::size_t i = 0; i < sessions.size(); ++i) {
    const auto& w = results[i];
    ordered_json j;
    j["session_id"] = sessions[i].id;
    j["seed"] = w.seed;
    if (!w.fitted) {
      if (w.failed) ++n_failed;
      j["skipped"] = w.skip_reason;
      reports.push_back(j);
      log_warn("gmm: session '" + sessions[i].id + "' skipped: " + w.skip_reason);
      continue;
    }
    j["n_values"] = w.n_values;
    j["dropped_nonpositive"] = w.dropped_nonpositive;
    ordered_json sel = ordered_json::array();
    for (const auto& f : w.selection.fits)
      sel.push_back({{"k", f.k},
                     {"aic", f.aic},
                     {"bic", f.bic},
                     {"loglik", f.loglik},
                     {"iterations", f.iterations},
                     {"converged", f.converged}});
    j["selection"] = sel;
    j["selection_warnings"] = w.selection.warnings;
    j["best_k"] = w.selection.best_k;
    j["forced3"] = fit_params_json(w.thresholds.fit);
    j["g3l_ms"] = w.thresholds.g3l_ms;
    j["g3u_ms"] = w.thresholds.g3u_ms;
    j["boundary_method"] = to_string(w.thresholds.boundary_method);
    j["boundary_methods"] = {to_string(w.thresholds.g3l_method),
                             to_string(w.thresholds.g3u_method)};
    reports.push_back(j);

    table += csv::join_row({sessions[i].id, std::to_string(w.selection.best_k),
                            csv::format_double(w.thresholds.g3l_ms),
                            csv::format_double(w.thresholds.g3u_ms),
                            to_string(w.thresholds.boundary_method),
                            w.thresholds.fit.converged ? "true" : "false",
                            std::to_string(w.seed)}) +
             "\n";
  }

  io::ensure_dir(cfg.out_dir);
  io::write_file(out_path(cfg, "gmm.csv"), table);
  io::write_file(out_path(cfg, "gmm.json"), reports.dump(2) + "\n");
  // Too-few-IKI skips are warnings; only invalid sessions count as failures.
  if (sessions.empty()) return 0;
  return exit_for(sessions.size(), n_failed);
}

// ---------------------------------------------------------------- correlate

int cmd_correlate(const RunConfig& cfg) {
  const auto sessions = load_corpus(cfg);
  if (sessions.size() < 3) {
    std::cerr << "pausekit error: correlate needs at least 3 sessions, got "
              << sessions.size() << "\n";
    return 2;
  }
  std::vector<SessionAnalysis> results(sessions.size());
  par_for(sessions.size(), cfg.jobs,
          [&](std::size_t i) { results[i] = analyze_one(sessions[i], cfg); });

  // Optional 3GL/3GU columns from a previous `gmm` run in the same out-dir.
  std::map<std::string, std::pair<double, double>> gmm_cols;
  const std::string gmm_path = out_path(cfg, "gmm.csv");
  if (std::filesystem::exists(gmm_path)) {
    const auto rows = csv::parse(io::read_file(gmm_path));
    for (std::size_t r = 1; r < rows.size(); ++r) {
      if (rows[r].fields.size() < 4) continue;
      try {
        gmm_cols[rows[r].fields[0]] = {std::stod(rows[r].fields[2]),
                                       std::stod(rows[r].fields[3])};
      } catch (const std::exception&) {
      }
    }
    log_info("correlate: using 3GL/3GU from " + gmm_path);
  } else {
    log_info("correlate: no gmm.csv in out-dir; matrix excludes 3GL/3GU");
  }

  MeasureTable table;
  const bool with_gmm = !gmm_cols.empty();
  table.columns = with_gmm
                      ? MeasureTable::default_columns()
                      : std::vector<std::string>{"RSP", "TSP", "MUD", "PUB", "SW", "WS", "WW"};
  std::vector<std::size_t> row_session;  // table row -> session index
  for (std::size_t i = 0; i < sessions.size(); ++i) {
    if (!results[i].ok) continue;
    const auto& t = results[i].thresholds;
    const auto& p = results[i].profile;
    std::vector<std::optional<double>> row = {t.rsp_ms, t.tsp_ms, t.mud_ms, t.pub_ms};
    if (with_gmm) {
      auto it = gmm_cols.find(sessions[i].id);
      row.push_back(it != gmm_cols.end() ? std::optional<double>(it->second.first)
                                         : std::nullopt);
      row.push_back(it != gmm_cols.end() ? std::optional<double>(it->second.second)
                                         : std::nullopt);
    }
    row.push_back(p.sw_median_ms);
    row.push_back(p.ws_median_ms);
    row.push_back(p.ww_median_ms);
    table.add_row(sessions[i].id, std::move(row));
    row_session.push_back(i);
  }

  CorrelationMatrix matrix;
  try {
    matrix = correlation_matrix(table, cfg.corr_policy, cfg.corr_stat);
  } catch (const Error& e) {
    std::cerr << "pausekit error: " << e.what() << "\n";
    return 2;
  }

  io::ensure_dir(cfg.out_dir);
  io::write_file(out_path(cfg, "matrix.csv"), correlation_matrix_csv(matrix));
  io::write_file(out_path(cfg, "matrix.json"), matrix_json(matrix).dump(2) + "\n");
  if (cfg.corr_policy == CorrelationPolicy::Pairwise) {
    std::string ncsv = "measure";
    for (const auto& l : matrix.labels) ncsv += "," + l;
    ncsv += '\n';
    for (std::size_t a = 0; a < matrix.labels.size(); ++a) {
      ncsv += matrix.labels[a];
      for (std::size_t b = 0; b < matrix.labels.size(); ++b)
        ncsv += "," + std::to_string(matrix.n[a][b]);
      ncsv += '\n';
    }
    io::write_file(out_path(cfg, "matrix_n.csv"), ncsv);
  }

  // Per-measure quantile positions (threshold location within each
  // session's own IKI distribution) and value distributions.
  for (const auto& name : table.columns) {
    const int col = table.column_index(name);
    std::vector<double> quantiles, values;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto& cell = table.rows[r][static_cast<std::size_t>(col)];
      if (!cell) continue;
      values.push_back(*cell);
      quantiles.push_back(threshold_quantile(results[row_session[r]].ikis, *cell));
    }
    if (values.empty()) continue;
    io::write_file(out_path(cfg, "quantile_hist_" + name + ".csv"),
                   histogram_csv(quantile_distribution(quantiles, cfg.hist_bins, name)));
    io::write_file(out_path(cfg, "measure_hist_" + name + ".csv"),
                   histogram_csv(histogram(values, cfg.hist_bins, name)));
  }

  // Pooled IKI distributions per bigram class.
  for (BigramClass c : {BigramClass::WW, BigramClass::WS, BigramClass::SW, BigramClass::SS}) {
    std::vector<double> pooled;
    for (std::size_t i = 0; i < sessions.size(); ++i) {
      if (!results[i].ok) continue;
      for (const auto& r : results[i].ikis)
        if (r.bigram_class == c) pooled.push_back(r.duration_ms);
    }
    if (pooled.empty()) continue;
    io::write_file(out_path(cfg, std::string("iki_hist_") + to_string(c) + ".csv"),
                   histogram_csv(histogram(pooled, cfg.hist_bins, to_string(c))));
  }
  return 0;
}

// ------------------------------------------------------------------ segment

int cmd_segment(const RunConfig& cfg) {
  const bool two_level = !cfg.lower_spec.empty() || !cfg.upper_spec.empty();
  if (two_level && (cfg.lower_spec.empty() || cfg.upper_spec.empty()))
    throw ArgumentError("two-level segmentation needs both --lower and --upper");

  const auto sessions = load_corpus(cfg);
  const bool needs_gmm =
      two_level ? (spec_needs_gmm(cfg.lower_spec) || spec_needs_gmm(cfg.upper_spec))
                : spec_needs_gmm(cfg.threshold_spec);

  struct SegWork {
    SessionAnalysis a;
    std::optional<GmmThresholds> gmm;
  };
  std::vector<SegWork> work(sessions.size());
  par_for(sessions.size(), cfg.jobs, [&](std::size_t i) {
    work[i].a = analyze_one(sessions[i], cfg);
    if (work[i].a.ok && needs_gmm) {
      GmmConfig gcfg = cfg.gmm;
      gcfg.seed = cfg.seed + i;
      std::vector<double> values = durations(work[i].a.ikis);
      if (gcfg.fit_space == FitSpace::LogMs)
        values.erase(std::remove_if(values.begin(), values.end(),
                                    [](double v) { return !(v > 0.0); }),
                     values.end());
      if (values.size() >= cfg.gmm_min_ikis)
        work[i].gmm = gmm_thresholds(values, gcfg, false);
    }
  });

  std::string units = units_csv_header(cfg.with_text) + "\n";
  std::string kunits;
  if (two_level)
    kunits = "session_id,unit_index,keystroke_unit_index,start_index,end_index,"
             "n_keystrokes,span_ms,preceding_pause_ms\n";
  std::size_t n_failed = 0;
  for (std::size_t i = 0; i < sessions.size(); ++i) {
    const auto& s = sessions[i];
    const auto& w = work[i];
    if (!w.a.ok) {
      ++n_failed;
      log_warn("segment: session '" + s.id + "' skipped: " + w.a.fail_reason);
      continue;
    }
    if (two_level) {
      const auto lower = resolve_threshold(cfg.lower_spec, w.a, w.gmm);
      const auto upper = resolve_threshold(cfg.upper_spec, w.a, w.gmm);
      if (!lower || !upper) {
        ++n_failed;
        log_warn("segment: session '" + s.id + "' skipped: threshold unavailable");
        continue;
      }
      const auto tl = two_level_segment(s, *lower, *upper);
      for (std::size_t u = 0; u < tl.size(); ++u) {
        units += unit_csv_row(s.id, u, tl[u].unit, s, cfg.with_text) + "\n";
        for (std::size_t kv = 0; kv < tl[u].keystroke_units.size(); ++kv) {
          const auto& ku = tl[u].keystroke_units[kv];
          kunits += csv::join_row({s.id, std::to_string(u), std::to_string(kv),
                                   std::to_string(ku.start_index),
                                   std::to_string(ku.end_index),
                                   std::to_string(ku.n_keystrokes),
                                   csv::format_double(ku.span_ms),
                                   csv::format_optional(ku.preceding_pause_ms)}) +
                    "\n";
        }
      }
    } else {
      const auto threshold = resolve_threshold(cfg.threshold_spec, w.a, w.gmm);
      if (!threshold) {
        ++n_failed;
        log_warn("segment: session '" + s.id + "' skipped: threshold '" +
                 cfg.threshold_spec + "' unavailable");
        continue;
      }
      const auto us = segment(s, *threshold);
      for (std::size_t u = 0; u < us.size(); ++u)
        units += unit_csv_row(s.id, u, us[u], s, cfg.with_text) + "\n";
    }
  }

  io::ensure_dir(cfg.out_dir);
  if (two_level) {
    io::write_file(out_path(cfg, "production_units.csv"), units);
    io::write_file(out_path(cfg, "keystroke_units.csv"), kunits);
  } else {
    io::write_file(out_path(cfg, "units.csv"), units);
  }
  if (sessions.empty()) return 0;
  return exit_for(sessions.size(), n_failed);
}

// ----------------------------------------------------------------- simulate

int cmd_simulate(const RunConfig& cfg) {
  if (cfg.n_sessions < 1) throw ArgumentError("simulate: --sessions must be >= 1");
  std::vector<SynthSession> corpus(static_cast<std::size_t>(cfg.n_sessions));
  par_for(corpus.size(), cfg.jobs, [&](std::size_t i) {
    SynthConfig sc = cfg.synth;
    sc.seed = cfg.seed + i;
    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "synth-%04zu", i);
    sc.id = idbuf;
    corpus[i] = generate_session(sc);
  });

  std::vector<Session> sessions;
  sessions.reserve(corpus.size());
  std::string labels = "session_id,iki_index,true_mode\n";
  for (const auto& ss : corpus) {
    sessions.push_back(ss.session);
    for (std::size_t li = 0; li < ss.labels.size(); ++li)
      labels += csv::join_row({ss.session.id, std::to_string(li),
                               to_string(ss.labels[li].true_mode)}) +
                "\n";
  }
  io::ensure_dir(cfg.out_dir);
  io::write_file(out_path(cfg, "corpus.csv"), serialize_sessions(sessions));
  io::write_file(out_path(cfg, "labels.csv"), labels);
  return 0;
}

// ---------------------------------------------------------------- benchmark

int cmd_benchmark(const RunConfig& cfg) {
  BenchmarkConfig bc;
  bc.n_sessions = cfg.n_sessions;
  bc.base = cfg.synth;
  bc.base.seed = cfg.seed;
  bc.jitter_log_mean = cfg.jitter;
  bc.seed = cfg.seed;
  bc.gmm = cfg.gmm;
  bc.pub = cfg.pub;
  const BenchmarkResult res = benchmark_methods(bc);

  std::string table =
      "method,n_scored,mean_f1,sd_f1,mean_precision,mean_recall,mean_accuracy\n";
  ordered_json j;
  j["command"] = "benchmark";
  j["n_sessions"] = cfg.n_sessions;
  j["seed"] = cfg.seed;
  j["flags"] = res.flags;
  ordered_json scores = ordered_json::array();
  for (const auto& sc : res.scores) {
    table += csv::join_row({sc.method, std::to_string(sc.n_scored),
                            csv::format_optional(sc.mean_f1),
                            csv::format_optional(sc.sd_f1),
                            csv::format_optional(sc.mean_precision),
                            csv::format_optional(sc.mean_recall),
                            csv::format_optional(sc.mean_accuracy)}) +
             "\n";
    ordered_json o;
    o["method"] = sc.method;
    o["n_scored"] = sc.n_scored;
    if (sc.mean_f1) o["mean_f1"] = *sc.mean_f1;
    if (sc.sd_f1) o["sd_f1"] = *sc.sd_f1;
    if (sc.mean_precision) o["mean_precision"] = *sc.mean_precision;
    if (sc.mean_recall) o["mean_recall"] = *sc.mean_recall;
    if (sc.mean_accuracy) o["mean_accuracy"] = *sc.mean_accuracy;
    scores.push_back(o);
  }
  j["scores"] = scores;

  io::ensure_dir(cfg.out_dir);
  for (const auto& f : res.flags) log_warn("benchmark: " + f);
  if (cfg.format == "json") io::write_file(out_path(cfg, "benchmark.json"), j.dump(2) + "\n");
  else io::write_file(out_path(cfg, "benchmark.csv"), table);
  if (res.matrix) {
    io::write_file(out_path(cfg, "benchmark_matrix.csv"),
                   correlation_matrix_csv(*res.matrix));
    io::write_file(out_path(cfg, "benchmark_matrix.json"),
                   matrix_json(*res.matrix).dump(2) + "\n");
  }
  return 0;
}

// ----------------------------------------------------------------- validate

int cmd_validate(const RunConfig& cfg) {
  const auto sessions = load_corpus(cfg);
  std::string report = "session_id,ok,event_index,code,severity,detail\n";
  std::size_t n_bad = 0;
  ordered_json summary;
  summary["command"] = "validate";
  summary["n_sessions"] = sessions.size();
  for (const auto& s : sessions) {
    const auto vr = validate_session(s, cfg.classify);
    if (!vr.ok) ++n_bad;
    if (vr.issues.empty()) {
      report += csv::join_row({s.id, "true", "", "", "", ""}) + "\n";
      continue;
    }
    for (const auto& issue : vr.issues) {
      report += csv::join_row({s.id, vr.ok ? "true" : "false",
                               std::to_string(issue.event_index),
                               to_string(issue.code),
                               is_error(issue.code) ? "error" : "warning",
                               issue.detail}) +
                "\n";
    }
  }
  summary["n_ok"] = sessions.size() - n_bad;
  summary["n_failed"] = n_bad;
  io::ensure_dir(cfg.out_dir);
  io::write_file(out_path(cfg, "validation.csv"), report);
  io::write_file(out_path(cfg, "validation_summary.json"), summary.dump(2) + "\n");
  return n_bad == 0 ? 0 : 1;
}

}  // namespace pausekit::cli
