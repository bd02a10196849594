#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "pausekit/errors.hpp"
#include "pausekit/mixture.hpp"
#include "pausekit/rng.hpp"

using namespace pausekit;

namespace {

std::vector<double> planted_mixture(std::uint64_t seed, std::size_t n,
                                    const std::vector<double>& weights,
                                    const std::vector<double>& log_means,
                                    const std::vector<double>& log_sds) {
  Rng rng(seed);
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.next_double();
    std::size_t c = 0;
    double acc = 0.0;
    for (; c < weights.size(); ++c) {
      acc += weights[c];
      if (u < acc) break;
    }
    if (c >= weights.size()) c = weights.size() - 1;
    out.push_back(rng.next_lognormal(log_means[c], log_sds[c]));
  }
  return out;
}

// Closed-form maximum-likelihood log-likelihood of a single normal.
double normal_mle_loglik(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double var = ss / static_cast<double>(n);
  return -0.5 * static_cast<double>(n) *
         (std::log(2.0 * 3.14159265358979323846 * var) + 1.0);
}

}  // namespace

TEST_CASE("aic formula") {
  MixtureFit f;
  f.k = 1;
  f.loglik = -1000.0;
  CHECK(aic(f) == 2004.0);
  f.k = 3;
  CHECK(aic(f) == 2016.0);
  CHECK(aic_from(4, -1000.0) > aic_from(3, -1000.0));  // penalty is monotone
}

TEST_CASE("k=1 fit reproduces the sample moments and the closed-form loglik") {
  Rng rng(11);
  std::vector<double> xs;
  double sum = 0.0;
  for (int i = 0; i < 2000; ++i) {
    xs.push_back(500.0 + 80.0 * rng.next_normal());
    sum += xs.back();
  }
  GmmConfig cfg;
  cfg.fit_space = FitSpace::RawMs;
  const auto fit = fit_gmm(xs, 1, cfg);
  const double sample_mean = sum / static_cast<double>(xs.size());
  const double se = 80.0 / std::sqrt(2000.0);
  CHECK(std::abs(fit.means[0] - sample_mean) < 3.0 * se);
  CHECK(fit.sds[0] == doctest::Approx(80.0).epsilon(0.05));
  CHECK(fit.loglik == doctest::Approx(normal_mle_loglik(xs)).epsilon(1e-12));
  CHECK(std::abs(fit.loglik - normal_mle_loglik(xs)) < 1e-9);
  CHECK(fit.weights[0] == 1.0);
}

TEST_CASE("planted 3-component mixture is recovered") {
  const std::vector<double> w = {0.7, 0.2, 0.1};
  const std::vector<double> mu = {4.5, 6.0, 7.5};
  const std::vector<double> sd = {0.3, 0.3, 0.3};
  const auto values = planted_mixture(42, 3000, w, mu, sd);
  GmmConfig cfg;
  cfg.seed = 7;
  const auto fit = fit_gmm(values, 3, cfg);
  REQUIRE(fit.k == 3);
  for (int c = 0; c < 3; ++c) CHECK(std::abs(fit.means[c] - mu[c]) < 0.05);
  CHECK(fit.converged);
  // Means are canonically ascending.
  CHECK(fit.means[0] < fit.means[1]);
  CHECK(fit.means[1] < fit.means[2]);
  // Weights normalized.
  CHECK(fit.weights[0] + fit.weights[1] + fit.weights[2] ==
        doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("select_k_aic finds the planted component count") {
  const auto values =
      planted_mixture(43, 3000, {0.7, 0.2, 0.1}, {4.5, 6.0, 7.5}, {0.3, 0.3, 0.3});
  GmmConfig cfg;
  cfg.seed = 3;
  const auto sel = select_k_aic(values, cfg);
  CHECK(sel.best_k == 3);
  CHECK(sel.fits.size() == 5);
}

TEST_CASE("select_k_aic prefers one component for a single normal") {
  Rng rng(5);
  std::vector<double> xs;
  for (int i = 0; i < 2000; ++i) xs.push_back(200.0 * std::exp(0.25 * rng.next_normal()));
  GmmConfig cfg;
  cfg.seed = 5;
  const auto sel = select_k_aic(xs, cfg);
  CHECK(sel.best_k == 1);
}

TEST_CASE("select_k_aic excludes k values without enough data") {
  std::vector<double> xs;
  Rng rng(9);
  for (int i = 0; i < 20; ++i) xs.push_back(100.0 + rng.next_double() * 50.0);
  GmmConfig cfg;
  cfg.k_max = 5;
  const auto sel = select_k_aic(xs, cfg);  // k=5 needs 25 points
  CHECK(sel.fits.size() == 4);
  CHECK(sel.warnings.size() == 1);

  std::vector<double> tiny = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(select_k_aic(tiny, cfg), FitError);
}

TEST_CASE("fit_gmm input validation") {
  GmmConfig cfg;
  std::vector<double> with_zero = {0.0, 1.0, 2.0, 3.0, 4.0};
  CHECK_THROWS_AS(fit_gmm(with_zero, 1, cfg), FitError);  // log space needs > 0
  cfg.fit_space = FitSpace::RawMs;
  CHECK_NOTHROW(fit_gmm(with_zero, 1, cfg));
  std::vector<double> four = {1.0, 2.0, 3.0, 4.0};
  CHECK_THROWS_AS(fit_gmm(four, 1, cfg), FitError);  // < 5k points
}

TEST_CASE("EM log-likelihood is non-decreasing within a run") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto values =
        planted_mixture(100 + seed, 600, {0.6, 0.4}, {4.0, 6.5}, {0.4, 0.4});
    GmmConfig cfg;
    cfg.seed = seed;
    const auto fit = fit_gmm(values, 2, cfg);
    for (std::size_t i = 1; i < fit.loglik_trace.size(); ++i)
      CHECK(fit.loglik_trace[i] >= fit.loglik_trace[i - 1] - 1e-9);
  }
}

TEST_CASE("fits are deterministic and permutation invariant") {
  auto values =
      planted_mixture(77, 900, {0.5, 0.3, 0.2}, {4.2, 5.8, 7.2}, {0.3, 0.3, 0.3});
  GmmConfig cfg;
  cfg.seed = 123;
  const auto a = fit_gmm(values, 3, cfg);
  const auto b = fit_gmm(values, 3, cfg);
  CHECK(a.means == b.means);
  CHECK(a.weights == b.weights);
  CHECK(a.sds == b.sds);
  CHECK(a.loglik == b.loglik);
  CHECK(a.restart_index == b.restart_index);

  std::reverse(values.begin(), values.end());
  const auto c = fit_gmm(values, 3, cfg);
  CHECK(a.means == c.means);
  CHECK(a.loglik == c.loglik);
}

TEST_CASE("responsibilities are normalized per point") {
  const auto values =
      planted_mixture(88, 500, {0.5, 0.5}, {4.0, 6.0}, {0.3, 0.3});
  GmmConfig cfg;
  const auto fit = fit_gmm(values, 2, cfg);
  const auto resp = responsibilities(fit, values);
  REQUIRE(resp.size() == values.size());
  for (const auto& row : resp) {
    double sum = 0.0;
    for (double r : row) sum += r;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("component boundaries: symmetric case is the midpoint") {
  MixtureFit f;
  f.k = 2;
  f.weights = {0.5, 0.5};
  f.means = {2.0, 6.0};
  f.sds = {0.5, 0.5};
  const auto b = component_boundaries(f);
  REQUIRE(b.size() == 1);
  CHECK(b[0].method == BoundaryMethod::AnalyticIntersection);
  CHECK(b[0].position == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("component boundaries: unequal weights shift toward the lighter mean") {
  MixtureFit f;
  f.k = 2;
  f.weights = {0.9, 0.1};
  f.means = {2.0, 6.0};
  f.sds = {0.5, 0.5};
  const auto b = component_boundaries(f);
  REQUIRE(b.size() == 1);
  CHECK(b[0].position > 4.0);
  const double expect = oracle::density_intersection(0.9, 2.0, 0.5, 0.1, 6.0, 0.5);
  CHECK(b[0].position == doctest::Approx(expect).epsilon(1e-6));
  // Weighted densities are equal at the boundary.
  const double d1 = 0.9 * oracle::normal_pdf(b[0].position, 2.0, 0.5);
  const double d2 = 0.1 * oracle::normal_pdf(b[0].position, 6.0, 0.5);
  CHECK(std::abs(d1 - d2) <= 1e-9 * std::max(d1, d2));
}

TEST_CASE("component boundaries: unequal sds still land between the means") {
  MixtureFit f;
  f.k = 2;
  f.weights = {0.6, 0.4};
  f.means = {1.0, 5.0};
  f.sds = {0.4, 1.2};
  const auto b = component_boundaries(f);
  REQUIRE(b.size() == 1);
  CHECK(b[0].method == BoundaryMethod::AnalyticIntersection);
  CHECK(b[0].position > 1.0);
  CHECK(b[0].position < 5.0);
  const double expect = oracle::density_intersection(0.6, 1.0, 0.4, 0.4, 5.0, 1.2);
  CHECK(b[0].position == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("three components give two strictly increasing boundaries") {
  const auto values =
      planted_mixture(99, 1500, {0.5, 0.3, 0.2}, {4.2, 5.8, 7.2}, {0.3, 0.3, 0.3});
  const auto fit = fit_gmm(values, 3, GmmConfig{});
  const auto b = component_boundaries(fit);
  REQUIRE(b.size() == 2);
  CHECK(b[0].position < b[1].position);
}

TEST_CASE("gmm_thresholds back-transforms to milliseconds and orders g3l < g3u") {
  const auto values =
      planted_mixture(101, 3000, {0.7, 0.2, 0.1}, {4.5, 6.0, 7.5}, {0.3, 0.3, 0.3});
  GmmConfig cfg;
  cfg.seed = 17;
  const auto gt = gmm_thresholds(values, cfg);
  CHECK(gt.fit.k == 3);
  CHECK(gt.aic_best_k == 3);
  CHECK(gt.g3l_ms > 0.0);
  CHECK(gt.g3l_ms < gt.g3u_ms);
  // Within 10% (ms) of the numerically computed planted boundaries.
  const double lo =
      std::exp(oracle::density_intersection(0.7, 4.5, 0.3, 0.2, 6.0, 0.3));
  const double hi =
      std::exp(oracle::density_intersection(0.2, 6.0, 0.3, 0.1, 7.5, 0.3));
  CHECK(std::abs(gt.g3l_ms - lo) / lo < 0.10);
  CHECK(std::abs(gt.g3u_ms - hi) / hi < 0.10);
}

TEST_CASE("identical data degenerates to midpoint boundaries") {
  std::vector<double> same(60, 250.0);
  GmmConfig cfg;
  const auto gt = gmm_thresholds(same, cfg, false);
  CHECK(gt.boundary_method == BoundaryMethod::MeanMidpoint);
  CHECK(gt.g3l_ms == doctest::Approx(250.0).epsilon(1e-9));
  CHECK(gt.g3u_ms == doctest::Approx(250.0).epsilon(1e-9));
}
