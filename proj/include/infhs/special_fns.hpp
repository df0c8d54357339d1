#pragma once

#include <functional>

#include "infhs/types.hpp"

namespace infhs::sf {

// Parameters of the non-analytic variational factor
//   q(lambda) ∝ lambda^{-1} exp(-a_star/lambda^2 - b_star*lambda^2
//                               + c_star*lambda)   on (0, inf).
struct LambdaFactorParams {
  double a_star;  // coefficient of -1/lambda^2 (>= 0; > 0 for moments)
  double b_star;  // coefficient of -lambda^2   (> 0)
  double c_star;  // coefficient of +lambda     (any sign)
};

struct LambdaMoments {
  double log_s;    // log of the normalizing integral (nu = -1)
  double m1;       // E[lambda]
  double m2;       // E[lambda^2]
  double m_neg2;   // E[lambda^-2]
};

enum class TruncSide { right_of_zero, left_of_zero };

// exp(z^2) * erfc(z), stable for all z representable without overflow of the
// result (returns +inf below z ~ -26.6); continued fraction for large z.
double erfcx(double z);

// Standard normal CDF and a log-CDF that stays accurate far into both tails.
double Phi(double x);
double log_Phi(double x);

double digamma(double x);  // x > 0

// P(N(mu, var) > 0).
double normal_positive_mass(double mu, double var);

// Mean of N(mu, 1) truncated to (0, inf) (right_of_zero) or (-inf, 0)
// (left_of_zero); stable for |mu| well past 30.
double trunc_normal_mean(double mu, TruncSide side);

// Second moment of the same truncated normal: 1 + mu * mean.
double trunc_normal_second_moment(double mu, TruncSide side);

// Position of the maximum of x^nu * exp(-d/x^2 - b*x^2 + c*x) over (0, inf):
// the positive root of 2b*x^4 - c*x^3 - nu*x^2 - 2d = 0 with the largest
// kernel value. nu in {-3, -1, 0, 1}; throws NoPositiveRoot when no interior
// maximum exists (nu <= -1 with d = 0, or nu = 0 with d = 0 and c <= 0).
double quartic_mode(int nu, double d, double b, double c);

// Log-normalizer and moments of the lambda factor via mode-rescaled adaptive
// Gauss-Kronrod quadrature. Requires a_star > 0. Relative accuracy <= 1e-8.
LambdaMoments lambda_moments(const LambdaFactorParams& params);

// E[weight(lambda)] under the same factor, for bounded smooth weights.
double lambda_expectation(const LambdaFactorParams& params,
                          const std::function<double(double)>& weight);

}  // namespace infhs::sf
