#include "infhs/selection.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "infhs/special_fns.hpp"

namespace infhs {

namespace {

constexpr double kPinBelow = 1e-12;  // |beta_hat| under this pins theta at 0
constexpr double kKktTol = 1e-8;

double soft(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

struct DssProblem {
  Mat gram;                 // x^T x
  Vec gram_beta;            // gram * beta_hat
  Vec weight;               // penalty weights (0 for unpenalized coords)
  std::vector<bool> pinned; // forced-zero coordinates
  int n = 0;                // rows of x, the objective's normalizer
};

DssProblem make_problem(const Mat& x, const Vec& beta_hat,
                        bool exempt_intercept) {
  if (x.cols() != beta_hat.size()) {
    throw DimensionMismatch("dss: design columns and estimate length differ");
  }
  if (!beta_hat.allFinite()) {
    throw InvalidHyper("dss: coefficient estimate must be finite");
  }
  DssProblem prob;
  const int m = static_cast<int>(x.cols());
  prob.n = static_cast<int>(x.rows());
  Mat lower = Mat::Zero(m, m);
  lower.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
  prob.gram = lower.selfadjointView<Eigen::Lower>();
  prob.gram_beta = prob.gram * beta_hat;
  prob.weight = Vec::Zero(m);
  prob.pinned.assign(m, false);
  for (int j = 0; j < m; ++j) {
    if (std::abs(beta_hat(j)) < kPinBelow) {
      prob.pinned[j] = true;
    } else if (j > 0 || !exempt_intercept) {
      prob.weight(j) = 1.0 / std::abs(beta_hat(j));
    }
  }
  return prob;
}

bool kkt_satisfied(const DssProblem& prob, double lambda, const Vec& theta) {
  const Vec grad =
      (2.0 / prob.n) * (prob.gram * theta - prob.gram_beta);
  for (int j = 0; j < theta.size(); ++j) {
    if (prob.pinned[j]) continue;
    const double lw = lambda * prob.weight(j);
    if (theta(j) != 0.0) {
      if (std::abs(grad(j) + lw * (theta(j) > 0.0 ? 1.0 : -1.0)) > kKktTol) {
        return false;
      }
    } else if (std::abs(grad(j)) > lw + kKktTol) {
      return false;
    }
  }
  return true;
}

// Cyclic coordinate descent from the given warm start.
Vec dss_solve(const DssProblem& prob, double lambda, Vec theta) {
  const int m = static_cast<int>(theta.size());
  Vec gram_theta = prob.gram * theta;
  constexpr int kMaxSweeps = 100000;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double max_step = 0.0;
    for (int j = 0; j < m; ++j) {
      const double old = theta(j);
      double next = 0.0;
      if (!prob.pinned[j]) {
        const double gjj = prob.gram(j, j);
        const double rho = prob.gram_beta(j) - (gram_theta(j) - gjj * old);
        if (gjj > 0.0) {
          next = soft(rho, 0.5 * prob.n * lambda * prob.weight(j)) / gjj;
        }
      }
      if (next != old) {
        gram_theta += prob.gram.col(j) * (next - old);
        theta(j) = next;
        max_step = std::max(max_step, std::abs(next - old));
      }
    }
    if (max_step < 1e-13 * std::max(1.0, theta.cwiseAbs().maxCoeff())) {
      gram_theta = prob.gram * theta;  // shed incremental-update drift
      if (kkt_satisfied(prob, lambda, theta)) return theta;
    }
  }
  throw NonConvergence(
      "dss: coordinate descent exhausted its sweeps; the design may be "
      "ill-conditioned");
}

std::vector<double> clean_grid(const std::vector<double>& grid) {
  std::vector<double> out(grid.begin(), grid.end());
  std::sort(out.begin(), out.end(), std::greater<>());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void check_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw InvalidHyper("dss: empty penalty grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i]) || grid[i] < 0.0) {
      throw InvalidHyper("dss: penalties must be finite and nonnegative");
    }
    if (i > 0 && grid[i] >= grid[i - 1]) {
      throw InvalidHyper("dss: penalty grid must be strictly decreasing");
    }
  }
}

}  // namespace

SelectionResult dss_cv(const Dataset& data, const Vec& beta_hat,
                       const Vec& scores,
                       const std::vector<double>& lambda_grid, int folds,
                       bool exempt_intercept) {
  const int n = data.n();
  if (folds < 2) throw InvalidHyper("dss_cv: needs at least 2 folds");
  if (folds > n) throw InvalidHyper("dss_cv: more folds than observations");
  const std::vector<double> grid = clean_grid(lambda_grid);
  check_grid(grid);

  const Vec target = data.X * beta_hat;
  std::vector<double> cv_loss(grid.size(), 0.0);
  for (int k = 0; k < folds; ++k) {
    const int lo = static_cast<int>(static_cast<long>(k) * n / folds);
    const int hi = static_cast<int>(static_cast<long>(k + 1) * n / folds);
    Mat x_train(n - (hi - lo), data.X.cols());
    x_train.topRows(lo) = data.X.topRows(lo);
    x_train.bottomRows(n - hi) = data.X.bottomRows(n - hi);

    const std::vector<Vec> path =
        dss_path(x_train, beta_hat, grid, exempt_intercept);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const Vec fitted = data.X.middleRows(lo, hi - lo) * path[g];
      cv_loss[g] += (target.segment(lo, hi - lo) - fitted).squaredNorm();
    }
  }

  std::size_t best = 0;  // grid is descending: first minimum is the sparsest
  for (std::size_t g = 1; g < grid.size(); ++g) {
    if (cv_loss[g] < cv_loss[best]) best = g;
  }

  const std::vector<Vec> full_path =
      dss_path(data.X, beta_hat, grid, exempt_intercept);
  SelectionResult result;
  result.scores = scores;
  result.selected.resize(data.p());
  for (int j = 0; j < data.p(); ++j) {
    result.selected[j] = full_path[best](j + 1) != 0.0;
  }
  result.method = SelectionMethod::dss;
  result.dss_lambda = grid[best];
  return result;
}

Vec inclusion_probs(const PosteriorDraws& draws) {
  if (draws.draws.empty()) {
    throw InvalidHyper("inclusion_probs: no retained draws");
  }
  const int p = static_cast<int>(draws.draws.front().lambda.size());
  Vec probs = Vec::Zero(p);
  for (const GibbsState& s : draws.draws) {
    for (int j = 0; j < p; ++j) {
      const double l_sq = s.lambda(j) * s.lambda(j);
      probs(j) += l_sq / (1.0 + l_sq);
    }
  }
  return probs / static_cast<double>(draws.draws.size());
}

Vec inclusion_probs(const VBState& state) {
  const int p = static_cast<int>(state.a_star.size());
  Vec probs(p);
  for (int j = 0; j < p; ++j) {
    probs(j) = sf::lambda_expectation(
        {state.a_star(j), state.b_star(j), state.c_star(j)},
        [](double l) { return l * l / (1.0 + l * l); });
  }
  return probs;
}

std::vector<bool> threshold_select(const Vec& scores, double t) {
  std::vector<bool> selected(scores.size());
  for (int j = 0; j < scores.size(); ++j) selected[j] = scores(j) > t;
  return selected;
}

std::vector<double> default_lambda_grid(const Mat& x, const Vec& beta_hat,
                                        bool exempt_intercept) {
  const DssProblem prob = make_problem(x, beta_hat, exempt_intercept);
  double lambda_max = 0.0;
  for (int j = 0; j < beta_hat.size(); ++j) {
    if (prob.pinned[j] || prob.weight(j) == 0.0) continue;
    lambda_max = std::max(
        lambda_max,
        (2.0 / prob.n) * std::abs(prob.gram_beta(j)) / prob.weight(j));
  }
  if (lambda_max <= 0.0) return {1.0};
  std::vector<double> grid(50);
  for (int i = 0; i < 50; ++i) {
    grid[i] = lambda_max * std::pow(10.0, -4.0 * i / 49.0);
  }
  return grid;
}

std::vector<Vec> dss_path(const Mat& x, const Vec& beta_hat,
                          const std::vector<double>& lambda_grid,
                          bool exempt_intercept) {
  check_grid(lambda_grid);
  const DssProblem prob = make_problem(x, beta_hat, exempt_intercept);
  std::vector<Vec> path;
  path.reserve(lambda_grid.size());
  Vec theta = Vec::Zero(beta_hat.size());
  for (const double lambda : lambda_grid) {
    theta = dss_solve(prob, lambda, std::move(theta));
    path.push_back(theta);
  }
  return path;
}

SelectionResult dss_cv(const Dataset& data, const PosteriorDraws& fit,
                       const std::vector<double>& lambda_grid, int folds,
                       bool exempt_intercept) {
  return dss_cv(data, summarize(fit).beta_mean, inclusion_probs(fit),
                lambda_grid, folds, exempt_intercept);
}

SelectionResult dss_cv(const Dataset& data, const VBState& fit,
                       const std::vector<double>& lambda_grid, int folds,
                       bool exempt_intercept) {
  return dss_cv(data, fit.mu_beta, inclusion_probs(fit), lambda_grid,
                folds, exempt_intercept);
}

}  // namespace infhs
