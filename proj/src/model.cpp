#include <cmath>
#include <string>

#include "infhs/types.hpp"

namespace infhs {

StackedCodata stack_codata(const Dataset& data) {
  const int p = data.p();
  int M = 1;
  for (const Mat& z : data.Z) M += static_cast<int>(z.cols());

  StackedCodata out;
  out.Z.resize(p, M);
  out.Z.col(0).setOnes();
  int col = 1;
  for (const Mat& z : data.Z) {
    out.Z.middleCols(col, z.cols()) = z;
    col += static_cast<int>(z.cols());
  }
  // The ones column is absorbed into the first block so every block owns one
  // kappa^2 scale.
  if (data.Z.empty()) {
    out.block_sizes = {1};
  } else {
    out.block_sizes.push_back(1 + static_cast<int>(data.Z.front().cols()));
    for (std::size_t d = 1; d < data.Z.size(); ++d)
      out.block_sizes.push_back(static_cast<int>(data.Z[d].cols()));
  }
  return out;
}

Hyperparameters resolve_hyper(const Hyperparameters& hyper, int n_blocks) {
  Hyperparameters out = hyper;
  if (out.a.size() == 0) out.a = Vec::Constant(n_blocks, 1.0);
  if (out.b.size() == 0) out.b = Vec::Constant(n_blocks, 10.0);
  if (out.a.size() != n_blocks || out.b.size() != n_blocks) {
    throw InvalidHyper("a/b must have one entry per co-data block (" +
                       std::to_string(n_blocks) + "), got " +
                       std::to_string(out.a.size()) + "/" +
                       std::to_string(out.b.size()));
  }
  return out;
}

void validate(const Dataset& data, const Hyperparameters& hyper, Task task) {
  const int n = data.n();
  const int p = data.p();
  if (data.y.size() != n) {
    throw DimensionMismatch("y has " + std::to_string(data.y.size()) +
                            " rows but X has " + std::to_string(n));
  }
  if (n < 2) throw DimensionMismatch("need at least 2 observations");
  if (p < 1) throw DimensionMismatch("need at least 1 covariate besides the intercept");
  for (int i = 0; i < n; ++i) {
    if (data.X(i, 0) != 1.0) {
      throw MissingIntercept("X column 0 must be all ones (row " +
                             std::to_string(i) + " is " +
                             std::to_string(data.X(i, 0)) + ")");
    }
  }
  for (std::size_t d = 0; d < data.Z.size(); ++d) {
    if (data.Z[d].rows() != p) {
      throw DimensionMismatch("co-data source " + std::to_string(d + 1) +
                              " has " + std::to_string(data.Z[d].rows()) +
                              " rows, expected p=" + std::to_string(p));
    }
    if (data.Z[d].cols() < 1) {
      throw DimensionMismatch("co-data source " + std::to_string(d + 1) +
                              " has no columns");
    }
  }

  if (!(hyper.v > 0.0) || !(hyper.q > 0.0) || !(hyper.s0_sq > 0.0)) {
    throw InvalidHyper("v, q, s0_sq must be strictly positive");
  }
  const int n_blocks = data.Z.empty() ? 1 : static_cast<int>(data.Z.size());
  Hyperparameters resolved = resolve_hyper(hyper, n_blocks);
  for (int d = 0; d < resolved.a.size(); ++d) {
    if (!(resolved.a[d] > 0.0) || !(resolved.b[d] > 0.0)) {
      throw InvalidHyper("a/b entries must be strictly positive");
    }
  }

  if (task == Task::probit) {
    for (int i = 0; i < n; ++i) {
      if (data.y[i] != 0.0 && data.y[i] != 1.0) {
        throw InvalidBinaryResponse("y[" + std::to_string(i) + "] = " +
                                    std::to_string(data.y[i]) +
                                    " is not in {0,1}");
      }
    }
  }
}

namespace {

bool is_binary_column(const Eigen::Ref<const Vec>& col) {
  for (int i = 0; i < col.size(); ++i) {
    if (col[i] != 0.0 && col[i] != 1.0) return false;
  }
  return true;
}

void center_scale(Eigen::Ref<Vec> col) {
  const double n = static_cast<double>(col.size());
  const double mean = col.mean();
  col.array() -= mean;
  if (col.size() < 2) return;
  const double sd = std::sqrt(col.squaredNorm() / (n - 1.0));
  if (sd > 0.0) col /= sd;
}

}  // namespace

Dataset standardize(const Dataset& data) {
  Dataset out = data;
  for (int j = 1; j < out.X.cols(); ++j) center_scale(out.X.col(j));
  for (Mat& z : out.Z) {
    for (int j = 0; j < z.cols(); ++j) {
      if (!is_binary_column(z.col(j))) center_scale(z.col(j));
    }
  }
  return out;
}

}  // namespace infhs
