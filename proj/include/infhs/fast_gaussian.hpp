#pragma once

#include "infhs/rng.hpp"
#include "infhs/types.hpp"

namespace infhs {

// Diagonal prior-precision contribution in the Gaussian full conditional of
// the regression coefficients: Sigma* = (X^T X + Delta)^{-1} with
// Delta = diag(delta). In the samplers delta_j = 1/(tau^2 lambda_j^2) (or the
// corresponding posterior expectation), one entry per column of X including
// the intercept column.
struct DiagPrecision {
  Vec delta;  // strictly positive, length p+1
};

// Factors C = I_n + X Delta^{-1} X^T once (O(n^2 p)) and answers every
// downstream query about Sigma* = (X^T X + Delta)^{-1} against that single
// n x n Cholesky factor, so no (p+1) x (p+1) matrix is ever formed.
//
// Throws DimensionMismatch on inconsistent shapes, InvalidHyper if any
// delta_j is non-positive or non-finite, and SingularSystem if the n x n
// factorization fails (numerically degenerate inputs).
class WoodburyWorkspace {
 public:
  WoodburyWorkspace(const Mat& X, const DiagPrecision& prec);

  int n() const { return n_; }
  int m() const { return m_; }  // number of columns of X, i.e. p+1

  // diag(Sigma*), computed as 1/delta_j - || (L^{-1} X Delta^{-1})_col j ||^2
  // where C = L L^T.
  Vec diag() const;

  // Sigma* rhs via the two-term Woodbury expansion
  // Delta^{-1} rhs - Delta^{-1} X^T C^{-1} X Delta^{-1} rhs.
  Vec mean(const Vec& rhs) const;

  // Sigma* X^T w for an n-vector w using the push-through identity
  // Sigma* X^T = Delta^{-1} X^T C^{-1}: one n x n solve plus matrix-vector
  // products only. Agrees with mean(X^T w) exactly in exact arithmetic.
  Vec mean_xt(const Vec& w) const;

  // log det Sigma* = -sum_j log delta_j - log det C.
  double logdet() const;

  // tr(X Sigma* X^T) = n - tr(C^{-1}), nonnegative because every eigenvalue
  // of C is >= 1.
  double trace_xsx() const;

  // Plumbing shared with the sampler below.
  const Vec& delta() const { return delta_; }
  const Vec& dinv() const { return dinv_; }
  const Mat& x_dinv() const { return xdinv_; }  // X Delta^{-1}, n x m
  Vec solve_c(const Vec& v) const { return llt_.solve(v); }

 private:
  int n_ = 0;
  int m_ = 0;
  Vec delta_;
  Vec dinv_;
  double log_delta_sum_ = 0.0;
  Mat xdinv_;
  Eigen::LLT<Mat> llt_;
};

// Convenience one-shot wrappers; each builds a workspace internally.
Vec woodbury_diag(const Mat& X, const DiagPrecision& prec);
Vec woodbury_mean(const Mat& X, const DiagPrecision& prec, const Vec& rhs);
double woodbury_logdet(const Mat& X, const DiagPrecision& prec);
double trace_xsx(const Mat& X, const DiagPrecision& prec);

// Exact draw from N(Sigma* X^T y, sigma_sq Sigma*). Dispatches on dimension:
// dense Cholesky of the (p+1) x (p+1) precision when p+1 <= 2n, otherwise
// the O(n^2 p) auxiliary-variable scheme. The two paths are exposed
// separately so their laws can be verified against each other.
Vec sample_beta_fc(const Mat& X, const Vec& y, const DiagPrecision& prec,
                   double sigma_sq, rng::Engine& eng);

// Dense path: Cholesky of X^T X + Delta. Draw order: the p+1 standard
// normals for the solution of L^T w = z, after the mean solve.
Vec sample_beta_dense(const Mat& X, const Vec& y, const DiagPrecision& prec,
                      double sigma_sq, rng::Engine& eng);

// High-dimensional path against a prebuilt workspace, so repeated draws at
// fixed Delta cost O(np) each: draw u ~ N(0, Delta^{-1}) (p+1 normals), then
// e ~ N(0, I_n) (n normals), solve C w = y/sigma - X u - e, and return
// sigma (u + Delta^{-1} X^T w).
Vec sample_beta_woodbury(const WoodburyWorkspace& ws, const Vec& y,
                         double sigma_sq, rng::Engine& eng);

}  // namespace infhs
