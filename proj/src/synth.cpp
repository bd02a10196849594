#include "pausekit/synth.hpp"

#include <algorithm>
#include <cmath>

#include "pausekit/errors.hpp"
#include "pausekit/rng.hpp"

namespace pausekit {

const char* to_string(TrueMode m) {
  switch (m) {
    case TrueMode::Automated: return "AUTOMATED";
    case TrueMode::Respite: return "RESPITE";
    case TrueMode::Reflective: return "REFLECTIVE";
  }
  return "?";
}

std::optional<TrueMode> true_mode_from_string(const std::string& s) {
  if (s == "AUTOMATED") return TrueMode::Automated;
  if (s == "RESPITE") return TrueMode::Respite;
  if (s == "REFLECTIVE") return TrueMode::Reflective;
  return std::nullopt;
}

void SynthConfig::validate() const {
  if (!(modes[0].log_mean < modes[1].log_mean && modes[1].log_mean < modes[2].log_mean))
    throw ArgumentError("synth config: mode log-means must be strictly increasing");
  for (const auto& m : modes)
    if (!(m.log_sd > 0.0)) throw ArgumentError("synth config: log_sd must be positive");
  if (!(word_len_mean >= 1.0))
    throw ArgumentError("synth config: word_len_mean must be >= 1");
  if (!(chunk_words_mean >= 1.0))
    throw ArgumentError("synth config: chunk_words_mean must be >= 1");
  if (n_words < 2) throw ArgumentError("synth config: n_words must be >= 2");
  if (boundary_mode2_prob < 0.0 || boundary_mode3_prob < 0.0 ||
      boundary_mode2_prob + boundary_mode3_prob <= 0.0)
    throw ArgumentError("synth config: boundary mode mix must be non-negative and non-zero");
  if (chunk_boundary_mode3_prob < 0.0 || chunk_boundary_mode3_prob > 1.0)
    throw ArgumentError("synth config: chunk_boundary_mode3_prob must be in [0, 1]");
}

namespace {

TrueMode mode_of(int idx) {
  switch (idx) {
    case 0: return TrueMode::Automated;
    case 1: return TrueMode::Respite;
    default: return TrueMode::Reflective;
  }
}

}  // namespace

SynthSession generate_session(const SynthConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const double p3 =
      config.boundary_mode3_prob / (config.boundary_mode2_prob + config.boundary_mode3_prob);

  SynthSession out;
  out.session.id = config.id;

  std::int64_t t = 0;
  double chunk_acc = 0.0;
  bool first_event = true;

  auto push_key = [&](const std::string& key, KeyClass kc, int mode_idx) {
    if (first_event) {
      out.session.events.push_back(KeyEvent{0, key, kc});
      first_event = false;
      return;
    }
    const auto& mp = config.modes[static_cast<std::size_t>(mode_idx)];
    double draw = rng.next_lognormal(mp.log_mean, mp.log_sd);
    std::int64_t dur = static_cast<std::int64_t>(std::llround(draw));
    if (dur < 1) dur = 1;
    t += dur;
    const KeyClass prev = out.session.events.back().key_class;
    out.session.events.push_back(KeyEvent{t, key, kc});
    out.labels.push_back(LabeledIki{static_cast<double>(dur), mode_of(mode_idx),
                                    classify_bigram(prev, kc)});
  };

  for (int w = 0; w < config.n_words; ++w) {
    const std::int64_t len = rng.next_geometric(config.word_len_mean);
    for (std::int64_t c = 0; c < len; ++c) {
      const std::string key(1, static_cast<char>('a' + rng.next_int(0, 25)));
      int mode_idx = 0;  // within-word typing is automated
      if (!first_event && c == 0 && w > 0) {
        // Word-initial IKI (SW): every ~chunk_words_mean-th boundary is a
        // chunk boundary and goes reflective with the configured
        // probability; other boundaries draw from the mode 2/3 mix.
        chunk_acc += 1.0;
        bool chunk_boundary = false;
        if (chunk_acc >= config.chunk_words_mean) {
          chunk_acc -= config.chunk_words_mean;
          chunk_boundary = true;
        }
        if (chunk_boundary && rng.next_bernoulli(config.chunk_boundary_mode3_prob))
          mode_idx = 2;
        else
          mode_idx = rng.next_bernoulli(p3) ? 2 : 1;
      }
      push_key(key, KeyClass::Alnum, mode_idx);
    }
    if (w + 1 < config.n_words) {
      // The separator binds to the preceding word, so WS stays automated.
      push_key("<SPACE>", KeyClass::Sep, 0);
    }
  }
  return out;
}

EvalMetrics evaluate_threshold(const std::vector<LabeledIki>& labeled,
                               double threshold_ms) {
  if (labeled.empty()) throw ArgumentError("evaluate_threshold: empty label list");
  EvalMetrics m;
  for (const auto& l : labeled) {
    const bool truth = l.true_mode == TrueMode::Reflective;
    const bool pred = l.duration_ms > threshold_ms;
    if (truth && pred) ++m.tp;
    else if (!truth && pred) ++m.fp;
    else if (truth) ++m.fn;
    else ++m.tn;
  }
  const double total = static_cast<double>(labeled.size());
  m.accuracy = static_cast<double>(m.tp + m.tn) / total;
  if (m.tp + m.fp > 0)
    m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
  if (m.tp + m.fn > 0)
    m.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
  if (m.precision && m.recall && (*m.precision + *m.recall) > 0.0)
    m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
  return m;
}

namespace {

struct Accumulator {
  std::vector<double> values;
  void add(const std::optional<double>& v) {
    if (v) values.push_back(*v);
  }
  std::optional<double> mean() const {
    if (values.empty()) return std::nullopt;
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
  }
  std::optional<double> sd() const {
    if (values.size() < 2) return std::nullopt;
    return sample_sd(values);
  }
};

}  // namespace

BenchmarkResult benchmark_methods(const BenchmarkConfig& config,
                                  const std::vector<std::string>& methods) {
  if (config.n_sessions < 1)
    throw ArgumentError("benchmark_methods: n_sessions must be >= 1");
  BenchmarkResult res;
  res.measures.columns = MeasureTable::default_columns();

  struct PerSession {
    std::vector<EvalMetrics> per_method;
    bool degenerate = false;
  };
  std::vector<PerSession> scored;

  for (int i = 0; i < config.n_sessions; ++i) {
    SynthConfig cfg = config.base;
    cfg.seed = config.base.seed + static_cast<std::uint64_t>(i);
    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "synth-%04d", i);
    cfg.id = idbuf;
    if (config.jitter_log_mean > 0.0) {
      Rng jrng(Rng::derive(config.seed, 0x6a6974746572ULL, static_cast<std::uint64_t>(i)));
      const double offset = config.jitter_log_mean * jrng.next_normal();
      for (auto& m : cfg.modes) m.log_mean += offset;
    }

    const SynthSession ss = generate_session(cfg);
    const auto ikis = extract_ikis(ss.session);
    const auto profile = session_profile(ikis);
    const auto tset =
        compute_threshold_set(profile, ikis, config.pub, config.mud_scope);

    GmmConfig gcfg = config.gmm;
    gcfg.seed = cfg.seed;
    std::optional<GmmThresholds> gmm;
    try {
      gmm = gmm_thresholds(durations(ikis), gcfg, /*run_selection=*/false);
    } catch (const Error&) {
      // leave 3GL/3GU absent for this session
    }

    res.measures.add_row(
        cfg.id,
        {tset.rsp_ms, tset.tsp_ms, tset.mud_ms, tset.pub_ms,
         gmm ? std::optional<double>(gmm->g3l_ms) : std::nullopt,
         gmm ? std::optional<double>(gmm->g3u_ms) : std::nullopt,
         profile.sw_median_ms, profile.ws_median_ms, profile.ww_median_ms});

    PerSession ps;
    ps.degenerate = std::none_of(ss.labels.begin(), ss.labels.end(), [](const LabeledIki& l) {
      return l.true_mode == TrueMode::Reflective;
    });
    if (ps.degenerate) ++res.degenerate_sessions;
    for (const auto& name : methods) {
      std::optional<double> threshold;
      if (name == "RSP") threshold = tset.rsp_ms;
      else if (name == "TSP") threshold = tset.tsp_ms;
      else if (name == "MUD") threshold = tset.mud_ms;
      else if (name == "PUB") threshold = tset.pub_ms;
      else if (name == "KUB") threshold = tset.kub_ms;
      else if (name == "3GU" && gmm) threshold = gmm->g3u_ms;
      else if (name == "3GL" && gmm) threshold = gmm->g3l_ms;
      else if (name != "3GU" && name != "3GL")
        throw ArgumentError("benchmark_methods: unknown method '" + name + "'");
      EvalMetrics m;
      if (threshold && !ps.degenerate) m = evaluate_threshold(ss.labels, *threshold);
      else m.accuracy = -1.0;  // sentinel: not scored
      ps.per_method.push_back(m);
    }
    scored.push_back(std::move(ps));
  }

  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    MethodScore sc;
    sc.method = methods[mi];
    Accumulator f1, prec, rec, acc;
    for (const auto& ps : scored) {
      const auto& m = ps.per_method[mi];
      if (m.accuracy < 0.0) continue;
      ++sc.n_scored;
      f1.add(m.f1);
      prec.add(m.precision);
      rec.add(m.recall);
      acc.add(m.accuracy);
    }
    sc.mean_f1 = f1.mean();
    sc.sd_f1 = f1.sd();
    sc.mean_precision = prec.mean();
    sc.mean_recall = rec.mean();
    sc.mean_accuracy = acc.mean();
    res.scores.push_back(std::move(sc));
  }

  if (res.degenerate_sessions > 0)
    res.flags.push_back("degenerate_ground_truth:" +
                        std::to_string(res.degenerate_sessions) + "_sessions");
  try {
    res.matrix = correlation_matrix(res.measures, CorrelationPolicy::CompleteRowsOnly,
                                    CorrelationStat::Pearson);
  } catch (const Error& e) {
    res.flags.push_back(std::string("correlation_unavailable: ") + e.what());
  }
  return res;
}

}  // namespace pausekit
