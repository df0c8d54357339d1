#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "infhs/rng.hpp"
#include "infhs/selection.hpp"
#include "infhs/simulate.hpp"
#include "infhs/types.hpp"
#include "infhs/vb.hpp"

using namespace infhs;
using namespace infhs::sim;

namespace {

PosteriorDraws draws_with_lambdas(const std::vector<Vec>& lambdas) {
  PosteriorDraws draws;
  for (const Vec& l : lambdas) {
    GibbsState s;
    s.lambda = l;
    draws.draws.push_back(s);
  }
  return draws;
}

// Trapezoid expectation of weight(x) under the kernel
// x^{-1} exp(-a/x^2 - b x^2 + c x) with a dense fixed grid.
double trapezoid_expectation(double a, double b, double c,
                             double (*weight)(double)) {
  auto g = [&](double x) {
    return -std::log(x) - a / (x * x) - b * x * x + c * x;
  };
  double gmax = -1e300, xmax = 1.0;
  for (int k = 0; k <= 4000; ++k) {
    const double x = std::pow(10.0, -6.0 + 10.0 * k / 4000.0);
    if (g(x) > gmax) {
      gmax = g(x);
      xmax = x;
    }
  }
  double lo = xmax, hi = xmax;
  while (lo > 1e-280 && g(lo) > gmax - 720.0) lo *= 0.8;
  while (hi < 1e10 && g(hi) > gmax - 720.0) hi *= 1.25;
  const int nodes = 1000000;
  const double h = (hi - lo) / (nodes - 1);
  double num = 0.0, den = 0.0;
  for (int k = 0; k < nodes; ++k) {
    const double x = lo + k * h;
    const double f = std::exp(g(x) - gmax) * (k == 0 || k == nodes - 1 ? 0.5 : 1.0);
    den += f;
    num += f * weight(x);
  }
  return num / den;
}

double inclusion_weight(double x) { return x * x / (1.0 + x * x); }

// Proximal-gradient (ISTA) minimizer of
// (1/n)||x beta_hat - x theta||^2 + lambda sum_j w_j |theta_j|.
Vec prox_oracle(const Mat& x, const Vec& beta_hat, double lambda,
                bool exempt_intercept) {
  const int m = static_cast<int>(x.cols());
  const int n = static_cast<int>(x.rows());
  const Mat gram = x.transpose() * x;
  const Vec gram_beta = gram * beta_hat;
  Vec weight = Vec::Zero(m);
  std::vector<bool> pinned(m, false);
  for (int j = 0; j < m; ++j) {
    if (std::abs(beta_hat(j)) < 1e-12) {
      pinned[j] = true;
    } else if (j > 0 || !exempt_intercept) {
      weight(j) = 1.0 / std::abs(beta_hat(j));
    }
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(gram);
  const double step = 1.0 / ((2.0 / n) * es.eigenvalues().maxCoeff());

  Vec theta = Vec::Zero(m);
  for (int it = 0; it < 2000000; ++it) {
    const Vec grad = (2.0 / n) * (gram * theta - gram_beta);
    Vec next(m);
    for (int j = 0; j < m; ++j) {
      if (pinned[j]) {
        next(j) = 0.0;
        continue;
      }
      const double z = theta(j) - step * grad(j);
      const double t = step * lambda * weight(j);
      next(j) = z > t ? z - t : (z < -t ? z + t : 0.0);
    }
    const double change = (next - theta).cwiseAbs().maxCoeff();
    theta = next;
    if (change < 1e-14) break;
  }
  return theta;
}

double dss_objective(const Mat& x, const Vec& beta_hat, const Vec& theta,
                     double lambda, bool exempt_intercept) {
  double penalty = 0.0;
  for (int j = 0; j < theta.size(); ++j) {
    if (j == 0 && exempt_intercept) continue;
    if (std::abs(beta_hat(j)) < 1e-12) continue;  // pinned at zero
    penalty += std::abs(theta(j)) / std::abs(beta_hat(j));
  }
  return (x * (beta_hat - theta)).squaredNorm() / x.rows() + lambda * penalty;
}

Mat random_design(rng::Engine& eng, int n, int p) {
  Mat x(n, p + 1);
  x.col(0).setOnes();
  for (int i = 0; i < n; ++i)
    for (int j = 1; j <= p; ++j) x(i, j) = rng::rnorm(eng);
  return x;
}

int support_size(const Vec& v) {
  int k = 0;
  for (int j = 0; j < v.size(); ++j)
    if (v(j) != 0.0) ++k;
  return k;
}

}  // namespace

TEST_CASE("draw-averaged inclusion probabilities hit the closed forms") {
  const int p = 3;
  Vec tiny = Vec::Constant(p, 1e-9);
  Vec huge = Vec::Constant(p, 1e3);
  Vec unit = Vec::Constant(p, 1.0);
  Vec twos = Vec::Constant(p, 2.0);

  CHECK(inclusion_probs(draws_with_lambdas({tiny})).maxCoeff() < 1e-12);
  CHECK(inclusion_probs(draws_with_lambdas({huge})).minCoeff() >=
        1.0 - 1.1e-6);

  const Vec mixed = inclusion_probs(draws_with_lambdas({unit, twos}));
  CHECK(mixed(0) == doctest::Approx(0.5 * (0.5 + 0.8)).epsilon(1e-15));

  const Vec probs = inclusion_probs(draws_with_lambdas({unit, twos, huge}));
  CHECK(probs.minCoeff() >= 0.0);
  CHECK(probs.maxCoeff() <= 1.0);
  CHECK_THROWS_AS(inclusion_probs(PosteriorDraws{}), InvalidHyper);
}

TEST_CASE("variational inclusion probabilities match the trapezoid oracle") {
  VBState state;
  state.a_star = Vec::Ones(1);
  state.b_star = Vec::Ones(1);
  state.c_star = Vec::Zero(1);
  const Vec probs = inclusion_probs(state);
  const double oracle = trapezoid_expectation(1.0, 1.0, 0.0, inclusion_weight);
  CHECK(std::abs(probs(0) - oracle) < 1e-6);
}

TEST_CASE("variational inclusion grows as the signal factor strengthens") {
  // a* carries the squared-coefficient moment, and exp(-a*/lambda^2) starves
  // the near-zero region: heavier signal (larger a*) => larger score, so the
  // score falls monotonically as a* -> 0.
  const std::vector<double> a_grid{2.0, 1.0, 0.5, 0.1, 0.02};
  double prev = 2.0;
  for (const double a : a_grid) {
    VBState state;
    state.a_star = Vec::Constant(1, a);
    state.b_star = Vec::Ones(1);
    state.c_star = Vec::Constant(1, 0.3);
    const double score = inclusion_probs(state)(0);
    CHECK(score >= 0.0);
    CHECK(score <= 1.0);
    CHECK(score < prev);
    prev = score;
  }
}

TEST_CASE("thresholding is a strict cut at t") {
  Vec scores(3);
  scores << 0.2, 0.7, 0.5;
  const std::vector<bool> at_half = threshold_select(scores);
  CHECK(at_half == std::vector<bool>{false, true, false});
  CHECK(threshold_select(Vec::Ones(4), 0.5) ==
        std::vector<bool>{true, true, true, true});
  CHECK(threshold_select(scores, 0.0) == std::vector<bool>{true, true, true});
}

TEST_CASE("orthogonal design reproduces the soft-threshold closed form") {
  // x = 8 * I keeps every rescaling a power of two, so the unpenalized
  // solution must equal beta_hat bit for bit.
  const int n = 64;
  Mat x = 8.0 * Mat::Identity(n, n);
  rng::Engine eng(21);
  Vec beta_hat(n);
  for (int j = 0; j < n; ++j) beta_hat(j) = rng::rnorm(eng);

  const std::vector<Vec> unpenalized = dss_path(x, beta_hat, {0.0});
  REQUIRE(unpenalized.size() == 1);
  for (int j = 0; j < n; ++j) CHECK(unpenalized[0](j) == beta_hat(j));

  const std::vector<double> grid = default_lambda_grid(x, beta_hat);
  REQUIRE(grid.size() == 50);
  const std::vector<Vec> path = dss_path(x, beta_hat, grid);

  int last_support = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (int j = 0; j < n; ++j) {
      const double closed =
          beta_hat(j) == 0.0
              ? 0.0
              : (beta_hat(j) > 0.0 ? 1.0 : -1.0) *
                    std::max(std::abs(beta_hat(j)) -
                                 grid[g] / (2.0 * std::abs(beta_hat(j))),
                             0.0);
      CHECK(path[g](j) == doctest::Approx(closed).epsilon(1e-12));
    }
    const int support = support_size(path[g]);
    CHECK(support >= last_support);  // support grows as the penalty shrinks
    last_support = support;
  }
}

TEST_CASE("the top of the default grid zeroes every coefficient") {
  rng::Engine eng(4);
  const Mat x = random_design(eng, 30, 8);
  Vec beta_hat(9);
  for (int j = 0; j < 9; ++j) beta_hat(j) = rng::rnorm(eng);

  const double lambda_max = default_lambda_grid(x, beta_hat).front();
  for (const double lambda : {lambda_max, 2.0 * lambda_max}) {
    const std::vector<Vec> path = dss_path(x, beta_hat, {lambda});
    CHECK(path[0].cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("coordinate descent agrees with the proximal-gradient oracle") {
  rng::Engine eng(13);
  for (int rep = 0; rep < 3; ++rep) {
    const Mat x = random_design(eng, 30, 8);
    Vec beta_hat(9);
    for (int j = 0; j < 9; ++j) beta_hat(j) = rng::rnorm(eng);
    beta_hat(3) = 0.0;  // exercise the pinned branch

    const double lambda_max = default_lambda_grid(x, beta_hat).front();
    for (const bool exempt : {false, true}) {
      for (const double frac : {0.3, 0.05}) {
        const double lambda = frac * lambda_max;
        const Vec cd = dss_path(x, beta_hat, {lambda}, exempt)[0];
        const Vec prox = prox_oracle(x, beta_hat, lambda, exempt);
        CAPTURE(rep);
        CAPTURE(exempt);
        CAPTURE(frac);
        CHECK((cd - prox).cwiseAbs().maxCoeff() < 1e-6);
      }
    }
  }
}

TEST_CASE("optimal objective values decrease along the descending grid") {
  rng::Engine eng(29);
  const Mat x = random_design(eng, 40, 12);
  Vec beta_hat(13);
  for (int j = 0; j < 13; ++j) beta_hat(j) = rng::rnorm(eng);

  const std::vector<double> grid = default_lambda_grid(x, beta_hat);
  const std::vector<Vec> path = dss_path(x, beta_hat, grid);
  double prev = dss_objective(x, beta_hat, path[0], grid[0], false);
  for (std::size_t g = 1; g < grid.size(); ++g) {
    const double val = dss_objective(x, beta_hat, path[g], grid[g], false);
    CHECK(val <= prev + 1e-10 * std::max(1.0, std::abs(prev)));
    prev = val;
  }
}

TEST_CASE("grid validation rejects malformed penalties") {
  rng::Engine eng(2);
  const Mat x = random_design(eng, 10, 3);
  Vec beta_hat = Vec::Ones(4);
  CHECK_THROWS_AS(dss_path(x, beta_hat, {}), InvalidHyper);
  CHECK_THROWS_AS(dss_path(x, beta_hat, {0.1, 0.5}), InvalidHyper);
  CHECK_THROWS_AS(dss_path(x, beta_hat, {0.5, 0.5}), InvalidHyper);
  CHECK_THROWS_AS(dss_path(x, beta_hat, {0.5, -0.1}), InvalidHyper);
}

TEST_CASE("cross-validation bookkeeping on degenerate grids") {
  SimSpec spec;
  spec.n = 40;
  spec.p = 10;
  spec.p0 = 3;
  spec.seed = 3;
  const auto [data, truth] = simulate_instance(spec, scenario_preset("main_G0"));
  const auto [state, trace] = run_cavi_linear(data, Hyperparameters{}, {});

  const SelectionResult single = dss_cv(data, state, {0.37}, 3);
  CHECK(single.method == SelectionMethod::dss);
  REQUIRE(single.dss_lambda.has_value());
  CHECK(*single.dss_lambda == 0.37);
  CHECK(static_cast<int>(single.selected.size()) == data.p());
  CHECK(single.scores.size() == data.p());
  CHECK(single.scores.minCoeff() >= 0.0);
  CHECK(single.scores.maxCoeff() <= 1.0);

  const SelectionResult deduped = dss_cv(data, state, {0.5, 0.5, 0.2}, 3);
  REQUIRE(deduped.dss_lambda.has_value());
  CHECK((*deduped.dss_lambda == 0.5 || *deduped.dss_lambda == 0.2));

  CHECK_THROWS_AS(dss_cv(data, state, {0.5, 0.2}, 1), InvalidHyper);
  CHECK_THROWS_AS(dss_cv(data, state, {0.5, 0.2}, data.n() + 1), InvalidHyper);
}

TEST_CASE("cross-validated selection recovers planted signals") {
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SimSpec spec;
    spec.n = 60;
    spec.p = 20;
    spec.p0 = 5;
    spec.seed = seed;
    const auto [data, truth] =
        simulate_instance(spec, scenario_preset("main_G0"));
    const auto [state, trace] = run_cavi_linear(data, Hyperparameters{}, {});

    const std::vector<double> grid = default_lambda_grid(data.X, state.mu_beta);
    const SelectionResult result = dss_cv(data, state, grid, 5);

    int recovered = 0;
    for (int j = 1; j <= data.p(); ++j) {
      if (truth(j) != 0.0 && result.selected[j - 1]) ++recovered;
    }
    if (recovered >= 4) ++hits;
  }
  CHECK(hits >= 8);
}
