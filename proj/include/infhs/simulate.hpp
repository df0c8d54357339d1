#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "infhs/rng.hpp"
#include "infhs/types.hpp"

namespace infhs::sim {

// Synthetic-instance description. The true coefficient vector has an
// intercept beta_0 = v0*|t| plus exactly p0 nonzero covariate effects
//   beta_j = (-1)^u * (v^2 log(n)/sqrt(n) + v*|t|),  u ~ Bernoulli(bern),
// with v0^2 = v0_sq and v^2 = v_sq; the remaining p - p0 effects are zero.
struct SimSpec {
  int n = 100;
  int p = 500;
  int p0 = 30;
  double v0_sq = 0.5;
  double v_sq = 0.75;
  double bern = 0.4;
  std::uint64_t seed = 1;
  Task task = Task::linear;
};

// How the single synthetic co-data source marks covariates.
//   intercept_only : no source column (the stacked co-data is just 1_p);
//   binary         : 0/1 column with exactly k_true ones placed uniformly on
//                    the true support and k_false ones off it;
//   binary_random  : 0/1 column with k_total ones placed uniformly over all
//                    p covariates, ignoring the support;
//   perfect        : 0/1 column equal to the indicator of the true support.
struct CodataScenario {
  enum class Kind { intercept_only, binary, binary_random, perfect };
  Kind kind = Kind::intercept_only;
  int k_true = 0;
  int k_false = 0;
  int k_total = 0;
};

// Named presets.  The "main" family targets the larger benchmark designs,
// the "appendix" family the smaller accuracy studies:
//   main_G0 intercept-only          appendix_G0 intercept-only
//   main_G1 binary_random 100       appendix_G1 binary_random 30
//   main_G2 binary 20 true/80 null  appendix_G2 binary 20 true/10 null
//   main_G3 binary 20 true/10 null  appendix_G3 perfect
//   main_G4 perfect
// Throws BadFlag for an unknown name.
CodataScenario scenario_preset(const std::string& name);

// Draws the design matrix (intercept column of ones plus standard-normal
// entries), the true coefficients, and the response.  Linear task: y is the
// latent response itself; probit task: y_i = 1 iff the latent response
// exceeds its sample median (balanced classes).  The returned Dataset has no
// co-data attached.  Throws InvalidHyper on inconsistent spec fields.
std::pair<Dataset, Vec> gen_data(const SimSpec& spec, rng::Engine& eng);

// Builds the co-data source column(s) for one scenario: a p x 0 matrix for
// intercept_only, otherwise a p x 1 indicator column.  Throws InvalidHyper
// when the requested counts exceed the available support/null covariates.
Mat gen_codata(const CodataScenario& scenario, const Vec& true_beta,
               rng::Engine& eng);

// Seeds an engine with spec.seed, runs gen_data then gen_codata on it, and
// attaches the source to the dataset.  One-stop deterministic instance.
std::pair<Dataset, Vec> simulate_instance(const SimSpec& spec,
                                          const CodataScenario& scenario);

}  // namespace infhs::sim
