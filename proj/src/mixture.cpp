#include "pausekit/mixture.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>

#include "pausekit/errors.hpp"
#include "pausekit/iki.hpp"
#include "pausekit/rng.hpp"

namespace pausekit {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
// Contributions more than ~50 nats below the per-point maximum are dropped
// from the responsibility normalization; they are < 2e-22 relatively.
constexpr double kLogCutoff = 50.0;

struct EmRun {
  std::vector<double> weights, means, sds;
  double loglik = -INFINITY;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;
};

// Sorted values compressed into (distinct value, multiplicity) pairs. The
// mixture likelihood only sees the multiset, so grouping ties is exact and
// makes EM on integer-millisecond data several times cheaper.
struct BinnedData {
  std::vector<double> x;    // distinct values, ascending
  std::vector<double> cnt;  // multiplicities
  double n = 0.0;
};

BinnedData bin_sorted(const std::vector<double>& sorted) {
  BinnedData b;
  b.n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    b.x.push_back(sorted[i]);
    b.cnt.push_back(static_cast<double>(j - i));
    i = j;
  }
  return b;
}

// Order statistic of the underlying multiset (1-based rank).
double binned_rank(const BinnedData& b, double rank) {
  double acc = 0.0;
  for (std::size_t i = 0; i < b.x.size(); ++i) {
    acc += b.cnt[i];
    if (acc >= rank) return b.x[i];
  }
  return b.x.back();
}

double binned_quantile(const BinnedData& b, double q) {
  double rank = std::ceil(q * b.n - 1e-9);
  if (rank < 1.0) rank = 1.0;
  if (rank > b.n) rank = b.n;
  return binned_rank(b, rank);
}

double binned_mean(const BinnedData& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < b.x.size(); ++i) s += b.cnt[i] * b.x[i];
  return s / b.n;
}

double binned_population_sd(const BinnedData& b, double mean) {
  double ss = 0.0;
  for (std::size_t i = 0; i < b.x.size(); ++i) {
    const double d = b.x[i] - mean;
    ss += b.cnt[i] * d * d;
  }
  return std::sqrt(ss / b.n);
}

// One E-pass over the distinct values: fills resp (flattened |x| x k rows,
// normalized) and returns the log-likelihood of the current parameters.
double e_step(const BinnedData& data, const EmRun& run, int k,
              std::vector<double>& resp) {
  const std::size_t m_vals = data.x.size();
  std::vector<double> log_norm(k), half_prec(k);
  for (int j = 0; j < k; ++j) {
    log_norm[j] = std::log(run.weights[j]) - std::log(run.sds[j]) - 0.5 * kLog2Pi;
    half_prec[j] = 0.5 / (run.sds[j] * run.sds[j]);
  }
  double loglik = 0.0;
  std::vector<double> ld(k);
  for (std::size_t i = 0; i < m_vals; ++i) {
    const double x = data.x[i];
    double m = -INFINITY;
    for (int j = 0; j < k; ++j) {
      const double d = x - run.means[j];
      ld[j] = log_norm[j] - d * d * half_prec[j];
      if (ld[j] > m) m = ld[j];
    }
    double sum = 0.0;
    for (int j = 0; j < k; ++j) {
      const double diff = ld[j] - m;
      double e;
      if (diff == 0.0) e = 1.0;
      else if (diff > -kLogCutoff) e = std::exp(diff);
      else e = 0.0;
      resp[i * k + j] = e;
      sum += e;
    }
    const double inv = 1.0 / sum;
    for (int j = 0; j < k; ++j) resp[i * k + j] *= inv;
    loglik += data.cnt[i] * (m + std::log(sum));
  }
  return loglik;
}

void m_step(const BinnedData& data, const std::vector<double>& resp, int k,
            double sd_floor, EmRun& run) {
  const std::size_t m_vals = data.x.size();
  for (int j = 0; j < k; ++j) {
    double nj = 0.0, sum = 0.0;
    for (std::size_t i = 0; i < m_vals; ++i) {
      const double r = data.cnt[i] * resp[i * k + j];
      nj += r;
      sum += r * data.x[i];
    }
    if (nj < 1e-10) {
      // Starved component: keep its parameters, give it a vanishing weight.
      run.weights[j] = 1e-12;
      continue;
    }
    const double mu = sum / nj;
    double ss = 0.0;
    for (std::size_t i = 0; i < m_vals; ++i) {
      const double d = data.x[i] - mu;
      ss += data.cnt[i] * resp[i * k + j] * d * d;
    }
    run.weights[j] = nj / data.n;
    run.means[j] = mu;
    run.sds[j] = std::max(std::sqrt(ss / nj), sd_floor);
  }
  double wsum = std::accumulate(run.weights.begin(), run.weights.end(), 0.0);
  for (int j = 0; j < k; ++j) run.weights[j] /= wsum;
}

// Deterministic restart schedule. Restart 0 starts at equal-mass quantile
// midpoints; restart 1 biases the start means toward the upper tail, where
// pause modes sit as small-weight components; restart 2 spreads them from
// min to max; later restarts pick random order statistics. Each schedule
// explores a different basin, and the best log-likelihood wins.
std::vector<double> init_means(const BinnedData& data, int k, int restart,
                               std::uint64_t restart_seed) {
  std::vector<double> means(k);
  if (restart == 0) {
    for (int j = 0; j < k; ++j)
      means[j] = binned_quantile(data, (2.0 * j + 1.0) / (2.0 * k));
  } else if (restart == 1) {
    for (int j = 0; j < k; ++j) {
      const double u = 1.0 - (j + 0.5) / k;
      means[j] = binned_quantile(data, 1.0 - u * u);
    }
  } else if (restart == 2 && k >= 2) {
    for (int j = 0; j < k; ++j)
      means[j] = binned_rank(
          data, 1.0 + (data.n - 1.0) * static_cast<double>(j) / (k - 1.0));
  } else {
    Rng rng(restart_seed);
    for (int j = 0; j < k; ++j)
      means[j] = binned_rank(
          data, static_cast<double>(rng.next_int(1, static_cast<std::int64_t>(data.n))));
    std::sort(means.begin(), means.end());
  }
  return means;
}

EmRun run_em(const BinnedData& data, int k, const GmmConfig& cfg,
             std::uint64_t restart_seed, int restart) {
  const double data_sd = binned_population_sd(data, binned_mean(data));
  double sd_floor = cfg.variance_floor_ratio * data_sd;
  if (sd_floor <= 0.0) sd_floor = 1e-9;  // all-identical data still needs a floor

  EmRun run;
  run.weights.assign(k, 1.0 / k);
  run.sds.assign(k, std::max(data_sd, sd_floor));
  run.means = init_means(data, k, restart, restart_seed);

  std::vector<double> resp(data.x.size() * static_cast<std::size_t>(k));
  double prev_ll = -INFINITY;
  for (int iter = 1; iter <= cfg.max_iter; ++iter) {
    const double ll = e_step(data, run, k, resp);
    run.trace.push_back(ll);
    run.iterations = iter;
    assert(!(ll + 1e-9 < prev_ll) && "EM log-likelihood decreased");
    if (iter > 1 && std::abs(ll - prev_ll) < cfg.tol * (std::abs(prev_ll) + 1.0)) {
      run.converged = true;
      run.loglik = ll;
      return run;  // params unchanged since ll was computed
    }
    prev_ll = ll;
    m_step(data, resp, k, sd_floor, run);
  }
  // Out of iterations: score the final parameters.
  run.loglik = e_step(data, run, k, resp);
  run.trace.push_back(run.loglik);
  return run;
}

}  // namespace

const char* to_string(FitSpace s) {
  return s == FitSpace::LogMs ? "LOG_MS" : "RAW_MS";
}

const char* to_string(BoundaryMethod m) {
  return m == BoundaryMethod::AnalyticIntersection ? "ANALYTIC_INTERSECTION"
                                                   : "MEAN_MIDPOINT";
}

double aic_from(int k, double loglik) {
  return 2.0 * (3.0 * k - 1.0) - 2.0 * loglik;
}

double aic(const MixtureFit& fit) { return aic_from(fit.k, fit.loglik); }

MixtureFit fit_gmm(const std::vector<double>& values, int k, const GmmConfig& config) {
  if (k < 1) throw ArgumentError("fit_gmm: k must be >= 1");
  const std::size_t n = values.size();
  if (n < static_cast<std::size_t>(5 * k))
    throw FitError("fit_gmm: need at least " + std::to_string(5 * k) +
                   " points for k=" + std::to_string(k) + ", got " + std::to_string(n));

  std::vector<double> xs(n);
  if (config.fit_space == FitSpace::LogMs) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!(values[i] > 0.0))
        throw FitError("fit_gmm: non-positive value in log space");
      xs[i] = std::log(values[i]);
    }
  } else {
    xs = values;
  }
  // Canonical order so that identical multisets give bit-identical fits.
  std::sort(xs.begin(), xs.end());
  const BinnedData data = bin_sorted(xs);

  // k = 1 has a single EM fixed point (the sample moments); one run suffices
  // and is identical for every restart.
  const int restarts = k == 1 ? 1 : std::max(1, config.restarts);

  EmRun best;
  int best_restart = 0;
  for (int r = 0; r < restarts; ++r) {
    EmRun run = run_em(data, k, config,
                       Rng::derive(config.seed, static_cast<std::uint64_t>(k),
                                   static_cast<std::uint64_t>(r)),
                       r);
    if (run.loglik > best.loglik) {
      best = std::move(run);
      best_restart = r;
    }
  }

  // Canonical order: ascending mean.
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return best.means[a] < best.means[b]; });

  MixtureFit fit;
  fit.k = k;
  fit.weights.resize(k);
  fit.means.resize(k);
  fit.sds.resize(k);
  for (int j = 0; j < k; ++j) {
    fit.weights[j] = best.weights[order[j]];
    fit.means[j] = best.means[order[j]];
    fit.sds[j] = best.sds[order[j]];
  }
  fit.loglik = best.loglik;
  fit.aic = aic_from(k, best.loglik);
  fit.bic = (3.0 * k - 1.0) * std::log(static_cast<double>(n)) - 2.0 * best.loglik;
  fit.iterations = best.iterations;
  fit.converged = best.converged;
  fit.seed = config.seed;
  fit.restart_index = best_restart;
  fit.fit_space = config.fit_space;
  fit.loglik_trace = std::move(best.trace);
  return fit;
}

SelectKResult select_k_aic(const std::vector<double>& values, const GmmConfig& config) {
  if (config.k_max < 1) throw ArgumentError("select_k_aic: k_max must be >= 1");
  SelectKResult res;
  for (int k = 1; k <= config.k_max; ++k) {
    try {
      res.fits.push_back(fit_gmm(values, k, config));
    } catch (const Error& e) {
      res.warnings.push_back("k=" + std::to_string(k) + " excluded: " + e.what());
    }
  }
  if (res.fits.empty())
    throw FitError("select_k_aic: no usable component count in 1.." +
                   std::to_string(config.k_max));
  const MixtureFit* best = &res.fits[0];
  for (const auto& f : res.fits)
    if (f.aic < best->aic) best = &f;  // strict: ties stay with smaller k
  res.best_k = best->k;
  return res;
}

std::vector<Boundary> component_boundaries(const MixtureFit& fit) {
  if (fit.k < 2) throw ArgumentError("component_boundaries: need k >= 2");
  std::vector<Boundary> out;
  for (int j = 0; j + 1 < fit.k; ++j) {
    const double w1 = fit.weights[j], m1 = fit.means[j], s1 = fit.sds[j];
    const double w2 = fit.weights[j + 1], m2 = fit.means[j + 1], s2 = fit.sds[j + 1];
    const double midpoint = 0.5 * (m1 + m2);
    Boundary b{midpoint, BoundaryMethod::MeanMidpoint};

    if (m2 > m1) {
      // Roots of log(w1 phi1(x)) - log(w2 phi2(x)) = A x^2 + B x + C.
      const double a1 = 0.5 / (s1 * s1), a2 = 0.5 / (s2 * s2);
      const double A = a2 - a1;
      const double B = 2.0 * (m1 * a1 - m2 * a2);
      const double C = m2 * m2 * a2 - m1 * m1 * a1 +
                       std::log(w1 / w2) + std::log(s2 / s1);
      const double scale = std::max({std::abs(a1), std::abs(a2), 1e-300});
      double root = NAN;
      if (std::abs(A) < 1e-12 * scale) {
        if (B != 0.0) root = -C / B;
      } else {
        const double disc = B * B - 4.0 * A * C;
        if (disc >= 0.0) {
          const double sq = std::sqrt(disc);
          const double q = -0.5 * (B + (B >= 0.0 ? sq : -sq));
          const double r1 = q / A;
          const double r2 = q != 0.0 ? C / q : NAN;
          if (r1 > m1 && r1 < m2) root = r1;
          else if (r2 > m1 && r2 < m2) root = r2;
        }
      }
      if (std::isfinite(root) && root > m1 && root < m2) {
        b.position = root;
        b.method = BoundaryMethod::AnalyticIntersection;
      }
    }
    out.push_back(b);
  }
  return out;
}

std::vector<std::vector<double>> responsibilities(const MixtureFit& fit,
                                                  const std::vector<double>& values) {
  const int k = fit.k;
  std::vector<std::vector<double>> out;
  out.reserve(values.size());
  std::vector<double> ld(k);
  for (double v : values) {
    const double x = fit.fit_space == FitSpace::LogMs ? std::log(v) : v;
    double m = -INFINITY;
    for (int j = 0; j < k; ++j) {
      const double d = x - fit.means[j];
      ld[j] = std::log(fit.weights[j]) - std::log(fit.sds[j]) - 0.5 * kLog2Pi -
              0.5 * d * d / (fit.sds[j] * fit.sds[j]);
      m = std::max(m, ld[j]);
    }
    std::vector<double> row(k);
    double sum = 0.0;
    for (int j = 0; j < k; ++j) {
      row[j] = std::exp(ld[j] - m);
      sum += row[j];
    }
    for (int j = 0; j < k; ++j) row[j] /= sum;
    out.push_back(std::move(row));
  }
  return out;
}

GmmThresholds gmm_thresholds_from_fit(MixtureFit fit) {
  if (fit.k != 3)
    throw ArgumentError("gmm_thresholds_from_fit: fit must have k = 3");
  GmmThresholds gt;
  gt.fit = std::move(fit);
  const auto bounds = component_boundaries(gt.fit);
  const bool log_space = gt.fit.fit_space == FitSpace::LogMs;
  gt.g3l_ms = log_space ? std::exp(bounds[0].position) : bounds[0].position;
  gt.g3u_ms = log_space ? std::exp(bounds[1].position) : bounds[1].position;
  gt.g3l_method = bounds[0].method;
  gt.g3u_method = bounds[1].method;
  gt.boundary_method = (bounds[0].method == BoundaryMethod::MeanMidpoint ||
                        bounds[1].method == BoundaryMethod::MeanMidpoint)
                           ? BoundaryMethod::MeanMidpoint
                           : BoundaryMethod::AnalyticIntersection;
  return gt;
}

GmmThresholds gmm_thresholds(const std::vector<double>& values, const GmmConfig& config,
                             bool run_selection) {
  MixtureFit forced3;
  int aic_best_k = 0;
  if (run_selection) {
    SelectKResult sel = select_k_aic(values, config);
    aic_best_k = sel.best_k;
    for (auto& f : sel.fits)
      if (f.k == 3) forced3 = std::move(f);
  }
  if (forced3.k != 3) forced3 = fit_gmm(values, 3, config);
  GmmThresholds gt = gmm_thresholds_from_fit(std::move(forced3));
  gt.aic_best_k = aic_best_k;
  return gt;
}

}  // namespace pausekit
