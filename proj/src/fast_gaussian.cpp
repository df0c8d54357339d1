#include "infhs/fast_gaussian.hpp"

#include <cmath>

namespace infhs {

namespace {

void check_sigma(double sigma_sq) {
  if (!(sigma_sq > 0.0) || !std::isfinite(sigma_sq)) {
    throw InvalidHyper("sigma_sq must be positive and finite");
  }
}

}  // namespace

WoodburyWorkspace::WoodburyWorkspace(const Mat& X, const DiagPrecision& prec)
    : n_(static_cast<int>(X.rows())), m_(static_cast<int>(X.cols())) {
  if (n_ < 1 || m_ < 1) {
    throw DimensionMismatch("design matrix must be nonempty");
  }
  if (prec.delta.size() != m_) {
    throw DimensionMismatch("delta length must equal the number of columns");
  }
  for (int j = 0; j < m_; ++j) {
    const double d = prec.delta[j];
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw InvalidHyper("delta entries must be positive and finite");
    }
  }
  delta_ = prec.delta;
  dinv_ = delta_.cwiseInverse();
  log_delta_sum_ = delta_.array().log().sum();
  xdinv_ = X * dinv_.asDiagonal();
  Mat C = Mat::Identity(n_, n_);
  C.noalias() += xdinv_ * X.transpose();
  if (!C.allFinite()) {
    throw SingularSystem("capacitance matrix has non-finite entries");
  }
  llt_.compute(C);
  if (llt_.info() != Eigen::Success) {
    throw SingularSystem("Cholesky of the capacitance matrix failed");
  }
}

Vec WoodburyWorkspace::diag() const {
  Mat half = llt_.matrixL().solve(xdinv_);
  Vec corr = half.colwise().squaredNorm().transpose();
  return dinv_ - corr;
}

Vec WoodburyWorkspace::mean(const Vec& rhs) const {
  if (rhs.size() != m_) {
    throw DimensionMismatch("rhs length must equal the number of columns");
  }
  Vec s = llt_.solve(xdinv_ * rhs);
  return dinv_.cwiseProduct(rhs) - xdinv_.transpose() * s;
}

Vec WoodburyWorkspace::mean_xt(const Vec& w) const {
  if (w.size() != n_) {
    throw DimensionMismatch("w length must equal the number of rows");
  }
  return xdinv_.transpose() * llt_.solve(w);
}

double WoodburyWorkspace::logdet() const {
  const double logdet_c =
      2.0 * llt_.matrixLLT().diagonal().array().log().sum();
  return -log_delta_sum_ - logdet_c;
}

double WoodburyWorkspace::trace_xsx() const {
  Mat linv = llt_.matrixL().solve(Mat::Identity(n_, n_));
  return static_cast<double>(n_) - linv.squaredNorm();
}

Vec woodbury_diag(const Mat& X, const DiagPrecision& prec) {
  return WoodburyWorkspace(X, prec).diag();
}

Vec woodbury_mean(const Mat& X, const DiagPrecision& prec, const Vec& rhs) {
  return WoodburyWorkspace(X, prec).mean(rhs);
}

double woodbury_logdet(const Mat& X, const DiagPrecision& prec) {
  return WoodburyWorkspace(X, prec).logdet();
}

double trace_xsx(const Mat& X, const DiagPrecision& prec) {
  return WoodburyWorkspace(X, prec).trace_xsx();
}

Vec sample_beta_dense(const Mat& X, const Vec& y, const DiagPrecision& prec,
                      double sigma_sq, rng::Engine& eng) {
  check_sigma(sigma_sq);
  const int m = static_cast<int>(X.cols());
  if (prec.delta.size() != m) {
    throw DimensionMismatch("delta length must equal the number of columns");
  }
  if (y.size() != X.rows()) {
    throw DimensionMismatch("y length must equal the number of rows");
  }
  for (int j = 0; j < m; ++j) {
    const double d = prec.delta[j];
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw InvalidHyper("delta entries must be positive and finite");
    }
  }
  Mat A = Mat::Zero(m, m);
  A.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose());
  A.diagonal() += prec.delta;
  if (!A.allFinite()) {
    throw SingularSystem("precision matrix has non-finite entries");
  }
  Eigen::LLT<Mat> llt(A);
  if (llt.info() != Eigen::Success) {
    throw SingularSystem("Cholesky of the coefficient precision failed");
  }
  Vec mu = llt.solve(X.transpose() * y);
  Vec z(m);
  for (int j = 0; j < m; ++j) z[j] = rng::rnorm(eng);
  // A = L L^T, so L^{-T} z has covariance A^{-1}.
  return mu + std::sqrt(sigma_sq) * llt.matrixU().solve(z);
}

Vec sample_beta_woodbury(const WoodburyWorkspace& ws, const Vec& y,
                         double sigma_sq, rng::Engine& eng) {
  check_sigma(sigma_sq);
  if (y.size() != ws.n()) {
    throw DimensionMismatch("y length must equal the number of rows");
  }
  const int n = ws.n();
  const int m = ws.m();
  const double sigma = std::sqrt(sigma_sq);
  Vec u(m);
  for (int j = 0; j < m; ++j) {
    u[j] = rng::rnorm(eng) / std::sqrt(ws.delta()[j]);
  }
  Vec e(n);
  for (int i = 0; i < n; ++i) e[i] = rng::rnorm(eng);
  // X u recovered from the stored X Delta^{-1} as (X Delta^{-1})(Delta u).
  Vec xu = ws.x_dinv() * ws.delta().cwiseProduct(u);
  Vec w = ws.solve_c(y / sigma - xu - e);
  Vec beta = sigma * (u + ws.x_dinv().transpose() * w);
  if (!beta.allFinite()) {
    throw NumericalOverflow("coefficient draw is non-finite");
  }
  return beta;
}

Vec sample_beta_fc(const Mat& X, const Vec& y, const DiagPrecision& prec,
                   double sigma_sq, rng::Engine& eng) {
  const int n = static_cast<int>(X.rows());
  const int m = static_cast<int>(X.cols());
  if (m <= 2 * n) {
    return sample_beta_dense(X, y, prec, sigma_sq, eng);
  }
  WoodburyWorkspace ws(X, prec);
  return sample_beta_woodbury(ws, y, sigma_sq, eng);
}

}  // namespace infhs
