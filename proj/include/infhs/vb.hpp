#pragma once

#include <utility>
#include <vector>

#include "infhs/special_fns.hpp"
#include "infhs/types.hpp"

namespace infhs {

// Parameters and cached moments of the mean-field variational fit.  Factor
// families (all expectations below are taken under these factors):
//   q(beta)      = N(mu_beta, scale_beta * Sigma_beta) with
//                  Sigma_beta = (X'X + Delta)^-1 and
//                  Delta = E[tau^-2] diag(E[lambda_k^-2]); only the diagonal,
//                  log-determinant, and tr(X Sigma_beta X') of Sigma_beta are
//                  kept.  scale_beta = 1/E[sigma^-2] (1 for probit).
//   q(lambda0^2) = IG(1, a0_star)        q(psi0) = IG(1, k0_star)
//   q(lambda_j) ∝ u^-1 exp(-a_star_j/u^2 - b_star_j u^2 + c_star_j u), u>0,
//                  with normalizer and moments cached in lambda_moments
//   q(phi_j^2)   = IG(1, d_star_j)
//   q(gamma)     = N(mu_gamma, s0^2 * sigma_gamma)
//   q(kappa_d^2) = IG(e_star_d, f_star_d)
//   q(tau^2)     = IG(p/2 + 1, g_star)   q(zeta) = IG(1, h_star)
//   q(sigma^2)   = IG(v + (n+p+1)/2, l_star)          (linear task only)
//   q(w_i)       = N(mu_w_i, 1) truncated to w_i > 0 when y_i = 1 and to
//                  w_i <= 0 when y_i = 0                (probit task only)
struct VBState {
  Vec mu_beta;              // p+1
  Vec diag_sigma_beta;      // p+1 (unscaled Sigma_beta diagonal)
  double log_det_sigma_beta = 0.0;
  double trace_xsx = 0.0;   // tr(X Sigma_beta X'), unscaled
  double scale_beta = 1.0;  // covariance multiplier of q(beta)

  double a0_star = 1.0;
  double k0_star = 2.0;

  Vec a_star, b_star, c_star, d_star;          // p each
  std::vector<sf::LambdaMoments> lambda_moments;  // p

  Vec mu_gamma;     // M
  Mat sigma_gamma;  // M x M (unscaled; q covariance is s0^2 * sigma_gamma)

  Vec e_star, f_star;  // D each
  double g_star = 1.0;
  double h_star = 2.0;
  double l_star = 1.0;

  Vec mu_w;  // n truncation locations (probit only; empty for linear)
};

struct VBConfig {
  double eps = 1e-3;   // stop when the lower-bound increase falls below this
  int max_iter = 1000; // hard sweep cap; reaching it is not an error
};

// Coordinate-ascent engine.  The block updates are public so tests can
// verify the fixed-point property of each conditional update in isolation;
// sweep() applies them in the fixed order
//   (probit: mu_w first,) beta; lambda0; lambda block; gamma; kappa; tau;
//   (linear: sigma;)
// and returns the lower bound of the updated factor product.
class CaviEngine {
 public:
  CaviEngine(const Dataset& data, const Hyperparameters& hyper, Task task);

  void init();
  void update_mu_w();          // probit only (no-op guard otherwise)
  void update_beta();
  void update_lambda0();       // a0_star, k0_star
  void update_lambda_block();  // a,b,c -> moments -> d, for every j
  void update_gamma();
  void update_kappa();         // e_star, f_star
  void update_tau();           // g_star, h_star
  void update_sigma();         // l_star (linear only; no-op guard otherwise)

  double sweep();

  // init() + sweeps until the lower-bound increase drops below config.eps or
  // config.max_iter sweeps have run; returns the final state and the full
  // lower-bound trace (one entry per sweep).  Throws ElboDecrease if the
  // trace ever drops by more than max(1e-6, 1e-6*|previous|).
  std::pair<VBState, std::vector<double>> run(const VBConfig& config);

  const VBState& state() const { return st_; }
  VBState& state() { return st_; }
  const StackedCodata& codata() const { return zc_; }

 private:
  double inv_sigma_sq_moment() const;  // E[sigma^-2] (1 for probit)
  double inv_tau_sq_moment() const;    // E[tau^-2]
  Vec expected_w() const;              // E[w_i] from mu_w and y

  Dataset data_;
  Hyperparameters hyper_;
  Task task_;
  StackedCodata zc_;
  std::vector<int> col_block_;  // stacked column -> co-data block
  double alpha_sigma_ = 1.0;    // shape of q(sigma^2)
  double alpha_tau_ = 1.0;      // shape of q(tau^2)
  VBState st_;
};

// Convenience wrappers around CaviEngine::run.
std::pair<VBState, std::vector<double>> run_cavi_linear(
    const Dataset& data, const Hyperparameters& hyper, const VBConfig& config);
std::pair<VBState, std::vector<double>> run_cavi_probit(
    const Dataset& data, const Hyperparameters& hyper, const VBConfig& config);

// Evidence lower bound of the factor product held in `state`, computed as
// the exact component sum E[log joint] - E[log q] with all constants kept
// (the factorized truncation normalizer is a parameter-free constant and is
// dropped).  Pure: reads only stored parameters and moments.
double compute_elbo(const VBState& state, const Dataset& data,
                    const Hyperparameters& hyper, Task task);

}  // namespace infhs
