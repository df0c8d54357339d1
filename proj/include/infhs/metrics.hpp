#pragma once

// Evaluation metrics: rank-based AUC, squared-error distances between
// coefficient estimates, relative reduction in prediction error, and the mean
// absolute gap between binary labels and predicted probabilities.

#include <vector>

#include "infhs/types.hpp"

namespace infhs::metrics {

// Mann-Whitney AUC of `scores` against binary `truth`; tied score pairs count
// half. Throws DegenerateLabels unless both classes are present, and
// DimensionMismatch on length disagreement.
double auc(const Vec& scores, const std::vector<bool>& truth);

// Squared Euclidean distance between two coefficient vectors.
double mse_beta(const Vec& beta_a, const Vec& beta_b);

// Relative reduction in mean squared error against a null model:
// 1 - mse_model / mse_null. Requires mse_null > 0.
double rrmse(double mse_model, double mse_null);

// Mean of |y_i - probs_i| over observations.
double mean_abs_diff(const Vec& y, const Vec& probs);

}  // namespace infhs::metrics
