#include "infhs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace infhs::metrics {

double auc(const Vec& scores, const std::vector<bool>& truth) {
  const int n = static_cast<int>(scores.size());
  if (static_cast<int>(truth.size()) != n) {
    throw DimensionMismatch("auc: scores and truth lengths differ");
  }
  long n_pos = std::count(truth.begin(), truth.end(), true);
  long n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw DegenerateLabels("auc: needs at least one positive and one negative");
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return scores(i) < scores(j); });

  // Midranks over tie groups; rank sum of the positive class.
  double rank_sum_pos = 0.0;
  int i = 0;
  while (i < n) {
    int j = i;
    while (j < n && scores(order[j]) == scores(order[i])) ++j;
    const double midrank = 0.5 * ((i + 1) + j);  // ranks are 1-based
    for (int k = i; k < j; ++k) {
      if (truth[order[k]]) rank_sum_pos += midrank;
    }
    i = j;
  }
  return (rank_sum_pos - 0.5 * n_pos * (n_pos + 1)) /
         (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double mse_beta(const Vec& beta_a, const Vec& beta_b) {
  if (beta_a.size() != beta_b.size()) {
    throw DimensionMismatch("mse_beta: vector lengths differ");
  }
  return (beta_a - beta_b).squaredNorm();
}

double rrmse(double mse_model, double mse_null) {
  if (!(mse_null > 0.0)) {
    throw InvalidHyper("rrmse: null-model error must be positive");
  }
  return 1.0 - mse_model / mse_null;
}

double mean_abs_diff(const Vec& y, const Vec& probs) {
  if (y.size() != probs.size()) {
    throw DimensionMismatch("mean_abs_diff: vector lengths differ");
  }
  return (y - probs).cwiseAbs().mean();
}

}  // namespace infhs::metrics
