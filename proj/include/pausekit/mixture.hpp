#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pausekit {

enum class FitSpace { LogMs, RawMs };

const char* to_string(FitSpace s);

struct GmmConfig {
  int max_iter = 500;
  double tol = 1e-6;  // relative log-likelihood change
  int restarts = 5;
  std::uint64_t seed = 0;
  FitSpace fit_space = FitSpace::LogMs;
  double variance_floor_ratio = 1e-3;  // sd floor as a fraction of the data SD
  int k_max = 5;                       // search range for model selection
};

// A fitted 1-D Gaussian mixture. Components are stored sorted by ascending
// mean; parameters are in fit space (log-ms by default).
struct MixtureFit {
  int k = 0;
  std::vector<double> weights;  // positive, sum to 1
  std::vector<double> means;
  std::vector<double> sds;      // >= variance floor
  double loglik = 0.0;
  double aic = 0.0;  // 2*(3k-1) - 2*loglik
  double bic = 0.0;  // informational only
  int iterations = 0;
  bool converged = false;
  std::uint64_t seed = 0;
  int restart_index = 0;  // which restart won
  FitSpace fit_space = FitSpace::LogMs;
  std::vector<double> loglik_trace;  // per-iteration trace of the winning run
};

// AIC with p = 3k - 1 free parameters (weights on the simplex, means, sds).
double aic(const MixtureFit& fit);
double aic_from(int k, double loglik);

// Seeded EM with deterministic restarts: means start at the k evenly spaced
// nearest-rank quantiles of the data (jittered per restart after the first),
// equal weights, SDs at the data SD. Best log-likelihood wins, ties broken
// toward the lower restart index.
// Requires at least 5*k points; log-space fits require positive values.
MixtureFit fit_gmm(const std::vector<double>& values, int k, const GmmConfig& config = {});

struct SelectKResult {
  int best_k = 0;
  std::vector<MixtureFit> fits;       // one per usable k, ascending
  std::vector<std::string> warnings;  // excluded k values and why
};

// Fits k = 1..k_max and picks the AIC minimum, ties toward smaller k.
SelectKResult select_k_aic(const std::vector<double>& values, const GmmConfig& config = {});

enum class BoundaryMethod { AnalyticIntersection, MeanMidpoint };

const char* to_string(BoundaryMethod m);

struct Boundary {
  double position = 0.0;  // fit space
  BoundaryMethod method = BoundaryMethod::AnalyticIntersection;
};

// For each adjacent component pair, the point between the means where the
// weighted densities are equal; the means' midpoint when no such root lies
// between them. k-1 boundaries, ascending.
std::vector<Boundary> component_boundaries(const MixtureFit& fit);

// Per-point posterior responsibilities under a fit; values in original
// (ms) space. Rows sum to 1.
std::vector<std::vector<double>> responsibilities(const MixtureFit& fit,
                                                  const std::vector<double>& values);

// The two decision boundaries of a forced 3-component fit, back-transformed
// to milliseconds. The AIC-selected k is reported alongside.
struct GmmThresholds {
  double g3l_ms = 0.0;
  double g3u_ms = 0.0;
  BoundaryMethod g3l_method = BoundaryMethod::AnalyticIntersection;
  BoundaryMethod g3u_method = BoundaryMethod::AnalyticIntersection;
  // MeanMidpoint when either boundary fell back.
  BoundaryMethod boundary_method = BoundaryMethod::AnalyticIntersection;
  MixtureFit fit;      // the forced k = 3 fit
  int aic_best_k = 0;  // 0 when selection was skipped
};

GmmThresholds gmm_thresholds(const std::vector<double>& values, const GmmConfig& config = {},
                             bool run_selection = true);

// Boundaries of an existing k = 3 fit (no refitting).
GmmThresholds gmm_thresholds_from_fit(MixtureFit fit);

}  // namespace pausekit
