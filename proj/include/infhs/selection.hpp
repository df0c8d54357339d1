#pragma once

// Posterior variable selection: inclusion probabilities from either engine,
// plain thresholding, and a decoupled shrinkage-and-selection (DSS) adaptive
// LASSO path with cross-validated penalty choice.

#include <optional>
#include <vector>

#include "infhs/gibbs.hpp"
#include "infhs/types.hpp"
#include "infhs/vb.hpp"

namespace infhs {

enum class SelectionMethod { threshold, dss };

struct SelectionResult {
  Vec scores;                  // p inclusion probabilities, each in [0,1]
  std::vector<bool> selected;  // covariates 1..p (intercept excluded)
  SelectionMethod method = SelectionMethod::threshold;
  std::optional<double> dss_lambda;
};

// E[lambda_j^2 / (1 + lambda_j^2)] per covariate: the average over retained
// draws (sampler fit) or the quadrature expectation under the variational
// factor (may throw QuadratureFailure).
Vec inclusion_probs(const PosteriorDraws& draws);
Vec inclusion_probs(const VBState& state);

// selected_j = scores_j > t.
std::vector<bool> threshold_select(const Vec& scores, double t = 0.5);

// 50 penalties log-spaced from the smallest all-zero penalty down to 1e-4
// times it; a single unit penalty when every coefficient is negligible.
std::vector<double> default_lambda_grid(const Mat& x, const Vec& beta_hat,
                                        bool exempt_intercept = false);

// Adaptive-LASSO refits of x*beta_hat: for each penalty, the minimizer of
// (1/n)||x beta_hat - x theta||^2 + lambda * sum_j |theta_j| / |beta_hat_j|,
// warm-started down the strictly decreasing grid. Coordinates with
// |beta_hat_j| < 1e-12 carry infinite weight and are pinned at zero; the
// intercept (column 0) is penalized with the rest unless exempted. Every
// returned solution satisfies its KKT conditions to 1e-8; NonConvergence
// otherwise.
std::vector<Vec> dss_path(const Mat& x, const Vec& beta_hat,
                          const std::vector<double>& lambda_grid,
                          bool exempt_intercept = false);

// K-fold cross-validation of the DSS penalty: refits the path on each
// training block and scores held-out rows of x*beta_hat; ties prefer the
// larger (sparser) penalty. scores carries the engine's inclusion
// probabilities; selected marks the nonzero refitted covariates at the
// chosen penalty.
SelectionResult dss_cv(const Dataset& data, const PosteriorDraws& fit,
                       const std::vector<double>& lambda_grid, int folds,
                       bool exempt_intercept = false);
SelectionResult dss_cv(const Dataset& data, const VBState& fit,
                       const std::vector<double>& lambda_grid, int folds,
                       bool exempt_intercept = false);

// Same search given an already-extracted coefficient estimate and inclusion
// scores (as read back from a stored fit).
SelectionResult dss_cv(const Dataset& data, const Vec& beta_hat,
                       const Vec& scores,
                       const std::vector<double>& lambda_grid, int folds,
                       bool exempt_intercept = false);

}  // namespace infhs
