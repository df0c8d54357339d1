#include "infhs/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace infhs::sim {

namespace {

void check_spec(const SimSpec& spec) {
  if (spec.n < 2) throw InvalidHyper("simulation needs n >= 2");
  if (spec.p < 1) throw InvalidHyper("simulation needs p >= 1");
  if (spec.p0 < 0 || spec.p0 > spec.p)
    throw InvalidHyper("simulation needs 0 <= p0 <= p");
  if (!(spec.v0_sq > 0.0) || !(spec.v_sq > 0.0))
    throw InvalidHyper("simulation variance factors must be positive");
  if (spec.bern < 0.0 || spec.bern > 1.0)
    throw InvalidHyper("sign-flip probability must lie in [0, 1]");
}

// First k entries of a uniform random permutation of `pool`, drawn by
// partial Fisher-Yates so the cost is O(k) swaps and the draw sequence is
// reproducible from the engine state.
std::vector<int> sample_without_replacement(std::vector<int> pool, int k,
                                            rng::Engine& eng) {
  const int m = static_cast<int>(pool.size());
  for (int i = 0; i < k; ++i) {
    const int j =
        i + static_cast<int>(rng::runif(eng) * static_cast<double>(m - i));
    std::swap(pool[i], pool[std::min(j, m - 1)]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace

CodataScenario scenario_preset(const std::string& name) {
  using K = CodataScenario::Kind;
  if (name == "main_G0") return {K::intercept_only, 0, 0, 0};
  if (name == "main_G1") return {K::binary_random, 0, 0, 100};
  if (name == "main_G2") return {K::binary, 20, 80, 0};
  if (name == "main_G3") return {K::binary, 20, 10, 0};
  if (name == "main_G4") return {K::perfect, 0, 0, 0};
  if (name == "appendix_G0") return {K::intercept_only, 0, 0, 0};
  if (name == "appendix_G1") return {K::binary_random, 0, 0, 30};
  if (name == "appendix_G2") return {K::binary, 20, 10, 0};
  if (name == "appendix_G3") return {K::perfect, 0, 0, 0};
  throw BadFlag("unknown co-data scenario preset: " + name);
}

std::pair<Dataset, Vec> gen_data(const SimSpec& spec, rng::Engine& eng) {
  check_spec(spec);
  const int n = spec.n;
  const int p = spec.p;
  const double v0 = std::sqrt(spec.v0_sq);
  const double v = std::sqrt(spec.v_sq);
  const double base = spec.v_sq * std::log(static_cast<double>(n)) /
                      std::sqrt(static_cast<double>(n));

  Vec beta = Vec::Zero(p + 1);
  beta(0) = v0 * std::abs(rng::rnorm(eng));
  for (int j = 1; j <= spec.p0; ++j) {
    const double sign = (rng::runif(eng) < spec.bern) ? -1.0 : 1.0;
    beta(j) = sign * (base + v * std::abs(rng::rnorm(eng)));
  }

  Mat X(n, p + 1);
  X.col(0).setOnes();
  for (int i = 0; i < n; ++i)
    for (int j = 1; j <= p; ++j) X(i, j) = rng::rnorm(eng);

  Vec latent = X * beta;
  for (int i = 0; i < n; ++i) latent(i) += rng::rnorm(eng);

  Dataset data;
  data.X = std::move(X);
  if (spec.task == Task::linear) {
    data.y = latent;
  } else {
    // Threshold at the sample median so the two classes are balanced.
    std::vector<double> sorted(latent.data(), latent.data() + n);
    std::sort(sorted.begin(), sorted.end());
    const double median = (n % 2 == 1)
                              ? sorted[n / 2]
                              : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    data.y = (latent.array() > median).cast<double>();
  }
  return {std::move(data), std::move(beta)};
}

Mat gen_codata(const CodataScenario& scenario, const Vec& true_beta,
               rng::Engine& eng) {
  const int p = static_cast<int>(true_beta.size()) - 1;
  if (p < 1) throw InvalidHyper("co-data generation needs p >= 1");

  std::vector<int> support, null_set;
  for (int j = 1; j <= p; ++j)
    (true_beta(j) != 0.0 ? support : null_set).push_back(j - 1);

  using K = CodataScenario::Kind;
  if (scenario.kind == K::intercept_only) return Mat(p, 0);

  Mat z = Mat::Zero(p, 1);
  if (scenario.kind == K::perfect) {
    for (int j : support) z(j, 0) = 1.0;
    return z;
  }
  if (scenario.kind == K::binary_random) {
    if (scenario.k_total < 0 || scenario.k_total > p)
      throw InvalidHyper("co-data scenario needs 0 <= k_total <= p");
    std::vector<int> pool(p);
    std::iota(pool.begin(), pool.end(), 0);
    for (int j : sample_without_replacement(std::move(pool),
                                            scenario.k_total, eng))
      z(j, 0) = 1.0;
    return z;
  }
  // binary: stratified picks on and off the true support.
  if (scenario.k_true < 0 ||
      scenario.k_true > static_cast<int>(support.size()))
    throw InvalidHyper("co-data scenario asks for more marked signals than "
                       "the true support holds");
  if (scenario.k_false < 0 ||
      scenario.k_false > static_cast<int>(null_set.size()))
    throw InvalidHyper("co-data scenario asks for more marked nulls than "
                       "the null set holds");
  for (int j : sample_without_replacement(support, scenario.k_true, eng))
    z(j, 0) = 1.0;
  for (int j : sample_without_replacement(null_set, scenario.k_false, eng))
    z(j, 0) = 1.0;
  return z;
}

std::pair<Dataset, Vec> simulate_instance(const SimSpec& spec,
                                          const CodataScenario& scenario) {
  rng::Engine eng(spec.seed);
  auto [data, beta] = gen_data(spec, eng);
  Mat src = gen_codata(scenario, beta, eng);
  if (src.cols() > 0) data.Z.push_back(std::move(src));
  return {std::move(data), std::move(beta)};
}

}  // namespace infhs::sim
