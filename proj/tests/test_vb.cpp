#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "infhs/gibbs.hpp"
#include "infhs/rng.hpp"
#include "infhs/simulate.hpp"
#include "infhs/special_fns.hpp"
#include "infhs/types.hpp"
#include "infhs/vb.hpp"

using namespace infhs;
using namespace infhs::sim;

namespace {

// Random regression instance with an intercept column, a handful of strong
// coefficients, and 0-2 co-data sources (one binary, one continuous).
Dataset random_instance(std::uint64_t seed, Task task) {
  rng::Engine eng(seed);
  const int n = 30 + static_cast<int>(rng::runif(eng) * 50);
  int p = 8 + static_cast<int>(rng::runif(eng) * 40);
  const int n_sources = static_cast<int>(seed % 3);
  const bool tall_p = seed % 5 == 0;
  const int nn = tall_p ? 20 : n;
  if (tall_p) p = 60;  // forces the low-rank solver branch

  Vec beta = Vec::Zero(p + 1);
  beta(0) = 0.5 * rng::rnorm(eng);
  const int k = std::max(1, p / 5);
  for (int j = 1; j <= k; ++j) {
    beta(j) = (rng::runif(eng) < 0.5 ? -1.0 : 1.0) *
              (1.0 + std::abs(rng::rnorm(eng)));
  }

  Mat x(nn, p + 1);
  x.col(0).setOnes();
  for (int i = 0; i < nn; ++i) {
    for (int j = 1; j <= p; ++j) x(i, j) = rng::rnorm(eng);
  }
  Vec latent = x * beta;
  for (int i = 0; i < nn; ++i) latent(i) += rng::rnorm(eng);

  Dataset data;
  data.X = x;
  if (task == Task::linear) {
    data.y = latent;
  } else {
    data.y.resize(nn);
    for (int i = 0; i < nn; ++i) data.y(i) = latent(i) > 0.0 ? 1.0 : 0.0;
    if (data.y.sum() == 0.0 || data.y.sum() == nn) {
      data.y(0) = 1.0 - data.y(0);  // keep both classes represented
    }
  }
  if (n_sources >= 1) {
    Mat z = Mat::Zero(p, 1);
    for (int j = 1; j <= p; ++j) {
      const bool informative = beta(j) != 0.0;
      const bool flip = rng::runif(eng) < 0.1;
      z(j - 1, 0) = (informative != flip) ? 1.0 : 0.0;
    }
    data.Z.push_back(z);
  }
  if (n_sources >= 2) {
    Mat z(p, 1);
    for (int j = 0; j < p; ++j) z(j, 0) = rng::rnorm(eng);
    data.Z.push_back(z);
  }
  return data;
}

// Worst per-step drop of the trace relative to the allowed tolerance;
// nonnegative means the trace is monotone within tolerance.
double worst_margin(const std::vector<double>& trace) {
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < trace.size(); ++i) {
    const double tol = std::max(1e-6, 1e-6 * std::abs(trace[i - 1]));
    worst = std::min(worst, trace[i] - trace[i - 1] + tol);
  }
  return worst;
}

bool all_finite(const std::vector<double>& trace) {
  return std::all_of(trace.begin(), trace.end(),
                     [](double v) { return std::isfinite(v); });
}

// Flattens every variational parameter (moments included) for fixed-point
// comparisons.
std::vector<double> collect(const VBState& s) {
  std::vector<double> out;
  auto push_vec = [&out](const Vec& v) {
    for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  };
  push_vec(s.mu_beta);
  push_vec(s.diag_sigma_beta);
  out.push_back(s.log_det_sigma_beta);
  out.push_back(s.scale_beta);
  out.push_back(s.a0_star);
  out.push_back(s.k0_star);
  push_vec(s.a_star);
  push_vec(s.b_star);
  push_vec(s.c_star);
  push_vec(s.d_star);
  for (const auto& lm : s.lambda_moments) {
    out.push_back(lm.m1);
    out.push_back(lm.m2);
    out.push_back(lm.m_neg2);
  }
  push_vec(s.mu_gamma);
  push_vec(s.e_star);
  push_vec(s.f_star);
  out.push_back(s.g_star);
  out.push_back(s.h_star);
  out.push_back(s.l_star);
  return out;
}

double max_rel_change(const std::vector<double>& a,
                      const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst,
                     std::abs(a[i] - b[i]) / std::max(1.0, std::abs(a[i])));
  }
  return worst;
}

// log of the normalizing integral of x^{-1} exp(-a/x^2 - b x^2 + c x) on
// (0, inf), by composite Simpson on a bracket from a coarse log-grid scan.
double log_normalizer_oracle(double a, double b, double c) {
  auto g = [&](double x) {
    return -std::log(x) - a / (x * x) - b * x * x + c * x;
  };
  double gmax = -std::numeric_limits<double>::infinity();
  double xmax = 1.0;
  for (int k = 0; k <= 6000; ++k) {
    const double x = std::pow(10.0, -9.0 + 13.0 * k / 6000.0);
    const double v = g(x);
    if (v > gmax) {
      gmax = v;
      xmax = x;
    }
  }
  double lo = xmax;
  while (lo > 1e-300 && g(lo) > gmax - 750.0) lo *= 0.7;
  double hi = xmax;
  while (hi < 1e12 && g(hi) > gmax - 750.0) hi *= 1.3;

  const int segments = 400000;  // Simpson pairs
  const double h = (hi - lo) / (2.0 * segments);
  double sum = std::exp(g(lo) - gmax) + std::exp(g(hi) - gmax);
  for (int k = 1; k < 2 * segments; ++k) {
    sum += (k % 2 == 1 ? 4.0 : 2.0) * std::exp(g(lo + k * h) - gmax);
  }
  return gmax + std::log(sum * h / 3.0);
}

// Unpenalized probit maximum likelihood by Newton-Raphson.
Vec probit_mle(const Mat& x, const Vec& y) {
  const double half_log_2pi = 0.9189385332046727;
  Vec beta = Vec::Zero(x.cols());
  for (int it = 0; it < 100; ++it) {
    const Vec eta = x * beta;
    Vec score(x.rows()), weight(x.rows());
    for (int i = 0; i < x.rows(); ++i) {
      const double q = y(i) == 1.0 ? 1.0 : -1.0;
      const double z = q * eta(i);
      const double mills =
          std::exp(-0.5 * z * z - half_log_2pi - sf::log_Phi(z));
      score(i) = q * mills;
      weight(i) = mills * (mills + z);
    }
    const Mat h =
        x.transpose() * weight.asDiagonal() * x;
    const Vec step = h.ldlt().solve(x.transpose() * score);
    beta += step;
    if (step.norm() < 1e-12) break;
  }
  return beta;
}

double pearson(const Vec& a, const Vec& b) {
  const Vec ac = a.array() - a.mean();
  const Vec bc = b.array() - b.mean();
  return ac.dot(bc) / std::sqrt(ac.squaredNorm() * bc.squaredNorm());
}

}  // namespace

TEST_CASE("lower bound is monotone on random linear instances") {
  for (std::uint64_t s = 1; s <= 20; ++s) {
    const Dataset data = random_instance(1000 + s, Task::linear);
    const auto [state, trace] = run_cavi_linear(data, Hyperparameters{}, {});
    CAPTURE(s);
    REQUIRE(!trace.empty());
    CHECK(all_finite(trace));
    CHECK(worst_margin(trace) >= 0.0);
    CHECK(state.d_star.minCoeff() > 0.0);
    CHECK(state.l_star > 0.0);
  }
}

TEST_CASE("lower bound is monotone on random probit instances") {
  for (std::uint64_t s = 1; s <= 20; ++s) {
    const Dataset data = random_instance(2000 + s, Task::probit);
    const auto [state, trace] = run_cavi_probit(data, Hyperparameters{}, {});
    CAPTURE(s);
    REQUIRE(!trace.empty());
    CHECK(all_finite(trace));
    CHECK(worst_margin(trace) >= 0.0);
    CHECK(state.mu_w.size() == data.n());
  }
}

TEST_CASE("converged state is a fixed point of every block update") {
  SimSpec spec;
  spec.n = 60;
  spec.p = 10;
  spec.p0 = 3;
  spec.seed = 7;
  const auto [data, truth] =
      simulate_instance(spec, scenario_preset("appendix_G3"));

  CaviEngine engine(data, Hyperparameters{}, Task::linear);
  bool settled = false;
  std::vector<double> prev = collect(engine.state());
  for (int it = 0; it < 30000; ++it) {
    engine.sweep();
    std::vector<double> cur = collect(engine.state());
    if (max_rel_change(prev, cur) < 1e-9) {
      settled = true;
      break;
    }
    prev = std::move(cur);
  }
  REQUIRE(settled);

  auto check_update = [&](const char* name, auto&& update) {
    const std::vector<double> before = collect(engine.state());
    update();
    const std::vector<double> after = collect(engine.state());
    CAPTURE(name);
    CHECK(max_rel_change(before, after) < 1e-8);
  };
  check_update("beta", [&] { engine.update_beta(); });
  check_update("lambda0", [&] { engine.update_lambda0(); });
  check_update("lambda", [&] { engine.update_lambda_block(); });
  check_update("gamma", [&] { engine.update_gamma(); });
  check_update("kappa", [&] { engine.update_kappa(); });
  check_update("tau", [&] { engine.update_tau(); });
  check_update("sigma", [&] { engine.update_sigma(); });
}

TEST_CASE("zero response collapses all coefficient means") {
  rng::Engine eng(33);
  const int n = 50, p = 10;
  Dataset data;
  data.X.resize(n, p + 1);
  data.X.col(0).setOnes();
  for (int i = 0; i < n; ++i)
    for (int j = 1; j <= p; ++j) data.X(i, j) = rng::rnorm(eng);
  data.y = Vec::Zero(n);

  const auto [state, trace] = run_cavi_linear(data, Hyperparameters{}, {});
  CHECK(all_finite(trace));
  CHECK(state.mu_beta.cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("lower bound accounts for the lambda normalizers exactly") {
  SimSpec spec;
  spec.n = 20;
  spec.p = 10;
  spec.p0 = 3;
  spec.seed = 11;
  const auto [data, truth] =
      simulate_instance(spec, scenario_preset("main_G0"));

  CaviEngine engine(data, Hyperparameters{}, Task::linear);
  for (int it = 0; it < 5; ++it) engine.sweep();
  const VBState state = engine.state();

  const double full = compute_elbo(state, data, Hyperparameters{}, Task::linear);
  CHECK(full ==
        compute_elbo(state, data, Hyperparameters{}, Task::linear));  // purity

  VBState stripped = state;
  for (auto& lm : stripped.lambda_moments) lm.log_s = 0.0;
  const double without =
      compute_elbo(stripped, data, Hyperparameters{}, Task::linear);

  double oracle = 0.0;
  for (int j = 0; j < data.p(); ++j) {
    oracle += log_normalizer_oracle(state.a_star(j), state.b_star(j),
                                    state.c_star(j));
  }
  CHECK(std::abs((full - without) - oracle) <=
        1e-6 * std::max(1.0, std::abs(oracle)));
}

TEST_CASE("probit fit tracks the unpenalized maximum-likelihood probabilities") {
  rng::Engine eng(99);
  const int n = 200, p = 5;
  Vec beta_true = Vec::Zero(p + 1);
  beta_true(1) = 2.0;

  Dataset data;
  data.X.resize(n, p + 1);
  data.X.col(0).setOnes();
  for (int i = 0; i < n; ++i)
    for (int j = 1; j <= p; ++j) data.X(i, j) = rng::rnorm(eng);
  data.y.resize(n);
  for (int i = 0; i < n; ++i) {
    const double latent = data.X.row(i).dot(beta_true) + rng::rnorm(eng);
    data.y(i) = latent > 0.0 ? 1.0 : 0.0;
  }

  const auto [state, trace] = run_cavi_probit(data, Hyperparameters{}, {});
  const Vec mle = probit_mle(data.X, data.y);

  Vec fit_vb(n), fit_mle(n);
  for (int i = 0; i < n; ++i) {
    fit_vb(i) = sf::Phi(data.X.row(i).dot(state.mu_beta));
    fit_mle(i) = sf::Phi(data.X.row(i).dot(mle));
  }
  CHECK(pearson(fit_vb, fit_mle) > 0.95);
}

TEST_CASE("antisymmetric balanced design pins the probit intercept at zero") {
  rng::Engine eng(5);
  const int half = 60, p = 8;
  Vec beta_true = Vec::Zero(p + 1);
  beta_true(1) = 1.5;
  beta_true(2) = -1.0;

  Dataset data;
  data.X.resize(2 * half, p + 1);
  data.X.col(0).setOnes();
  data.y.resize(2 * half);
  for (int i = 0; i < half; ++i) {
    for (int j = 1; j <= p; ++j) data.X(i, j) = rng::rnorm(eng);
    const double latent = data.X.row(i).dot(beta_true) + rng::rnorm(eng);
    data.y(i) = latent > 0.0 ? 1.0 : 0.0;
    // mirrored companion: flipping x and the label leaves the model invariant
    data.X.row(half + i) = -data.X.row(i);
    data.X(half + i, 0) = 1.0;
    data.y(half + i) = 1.0 - data.y(i);
  }

  const auto [state, trace] = run_cavi_probit(data, Hyperparameters{}, {});
  CHECK(std::abs(state.mu_beta(0)) < 0.05);
  CHECK(std::abs(data.y.sum() - half) < 0.5);  // perfectly balanced
}

TEST_CASE("variational mean matches the posterior sampler on informative co-data") {
  SimSpec spec;
  spec.n = 100;
  spec.p = 75;
  spec.p0 = 30;
  spec.seed = 17;
  const auto [data, truth] =
      simulate_instance(spec, scenario_preset("appendix_G3"));

  VBConfig vb_config;
  vb_config.eps = 1e-8;
  const auto [state, trace] = run_cavi_linear(data, Hyperparameters{}, vb_config);

  GibbsConfig gibbs_config;
  gibbs_config.B = 5000;
  gibbs_config.bn = 2500;
  gibbs_config.seed = 17;
  const FitSummary summary =
      summarize(run_gibbs(data, Hyperparameters{}, gibbs_config));

  const double gap = (state.mu_beta - summary.beta_mean).squaredNorm();
  CHECK(gap < 0.01);
}
