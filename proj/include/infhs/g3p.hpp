#pragma once

#include <cstdint>
#include <utility>

#include "infhs/rng.hpp"
#include "infhs/types.hpp"

namespace infhs {

// Parameters of the local-scale full conditional
//   f(x) ∝ x^{-1} exp(-psi/x^2 - alpha_sq*x^2 + beta_lin*x)  on (0, inf).
struct LambdaFullConditionalParams {
  double psi;       // > 0 (callers floor at 1e-300)
  double alpha_sq;  // > 0
  double beta_lin;  // any sign
};

// Envelope exponent for the rejection proposal: the integer nearest to
// x_max * (2*alpha_sq*x_max - beta_lin) where x_max is the target mode,
// clamped at zero.
int choose_gamma(const LambdaFullConditionalParams& p);

// Exact draw from g(x) ∝ x^gamma exp(-alpha_sq*x^2 + beta_lin*x) on (0, inf)
// via tangent-hull adaptive rejection sampling (the log-density is strictly
// concave for gamma >= 0). Consumes only uniforms from rng.
double sample_g3p(int gamma, double alpha_sq, double beta_lin, rng::SplitMix& rng);

// Rejection sampler for the full conditional. Returns the accepted draw and
// the number of envelope proposals consumed. Throws AcceptanceStall once
// 1e6 proposals have been used without an acceptance.
std::pair<double, std::uint64_t> sample_lambda_fc(
    const LambdaFullConditionalParams& p, rng::SplitMix& rng);

// One slice-sampling update of u = log(x) for the same target, starting from
// `current` (> 0). Used as the fallback when the rejection sampler stalls.
double slice_update_lambda(const LambdaFullConditionalParams& p,
                           double current, rng::SplitMix& rng);

}  // namespace infhs
