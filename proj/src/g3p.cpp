#include "infhs/g3p.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "infhs/special_fns.hpp"

namespace infhs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Tangent-hull adaptive rejection sampler for h(x) = gamma*log(x)
// - alpha_sq*x^2 + beta*x, strictly concave on (0, inf) for gamma >= 0.
class ArsHull {
 public:
  ArsHull(double gamma, double alpha_sq, double beta)
      : gamma_(gamma), a2_(alpha_sq), beta_(beta) {
    double xg;
    if (gamma_ > 0.0) {
      xg = (beta_ + std::sqrt(beta_ * beta_ + 8.0 * a2_ * gamma_)) /
           (4.0 * a2_);
      init_points(0.5 * xg, xg, 2.0 * xg);
    } else if (beta_ > 0.0) {
      xg = beta_ / (2.0 * a2_);
      init_points(0.5 * xg, xg, 2.0 * xg);
    } else {
      // Mode at the boundary; any descending ladder works.
      double s = 1.0 / std::sqrt(2.0 * a2_);
      init_points(0.25 * s, 0.5 * s, s);
    }
    rebuild();
  }

  double h(double x) const {
    double v = -a2_ * x * x + beta_ * x;
    if (gamma_ > 0.0) v += gamma_ * std::log(x);
    return v;
  }
  double hslope(double x) const {
    double v = -2.0 * a2_ * x + beta_;
    if (gamma_ > 0.0) v += gamma_ / x;
    return v;
  }

  double draw(rng::SplitMix& rng) {
    for (long attempt = 0; attempt < 100000; ++attempt) {
      size_t k = pick_segment(rng);
      double x = sample_segment(k, rng);
      if (!(x > 0.0) || !std::isfinite(x)) continue;
      double hull = hx_[k] + sx_[k] * (x - xs_[k]);
      if (std::log(rng.uniform()) <= h(x) - hull) return x;
      insert(x);
    }
    throw NumericalOverflow("adaptive rejection sampling failed to accept");
  }

 private:
  void init_points(double a, double b, double c) {
    for (double x : {a, b, c}) {
      xs_.push_back(x);
      hx_.push_back(h(x));
      sx_.push_back(hslope(x));
    }
  }

  void insert(double x) {
    if (xs_.size() >= 50) return;
    auto it = std::lower_bound(xs_.begin(), xs_.end(), x);
    size_t pos = it - xs_.begin();
    if (pos < xs_.size() && xs_[pos] == x) return;
    xs_.insert(xs_.begin() + pos, x);
    hx_.insert(hx_.begin() + pos, h(x));
    sx_.insert(sx_.begin() + pos, hslope(x));
    rebuild();
  }

  // Recompute segment boundaries and log-masses from scratch (K <= 50).
  void rebuild() {
    size_t K = xs_.size();
    zb_.assign(K + 1, 0.0);
    lm_.assign(K, 0.0);
    zb_[0] = 0.0;
    zb_[K] = kInf;
    for (size_t k = 1; k < K; ++k) {
      double ds = sx_[k - 1] - sx_[k];
      double z;
      if (ds > 1e-14 * (std::abs(sx_[k - 1]) + std::abs(sx_[k]) + 1.0)) {
        z = (hx_[k] - hx_[k - 1] - xs_[k] * sx_[k] + xs_[k - 1] * sx_[k - 1]) /
            ds;
      } else {
        z = 0.5 * (xs_[k - 1] + xs_[k]);
      }
      zb_[k] = std::clamp(z, xs_[k - 1], xs_[k]);
    }
    for (size_t k = 0; k < K; ++k) lm_[k] = segment_log_mass(k);
  }

  double segment_log_mass(size_t k) const {
    double a = zb_[k], b = zb_[k + 1];
    double s = sx_[k], hk = hx_[k], xk = xs_[k];
    if (b == kInf) {
      // Guaranteed s < 0 on the unbounded segment.
      return hk + s * (a - xk) - std::log(-s);
    }
    double span = s * (b - a);
    if (std::abs(span) < 1e-8)
      return hk + s * (0.5 * (a + b) - xk) + std::log(b - a);
    if (s > 0.0) return hk + s * (b - xk) - std::log(s) + std::log1p(-std::exp(-span));
    return hk + s * (a - xk) - std::log(-s) + std::log1p(-std::exp(span));
  }

  size_t pick_segment(rng::SplitMix& rng) const {
    double lmax = -kInf;
    for (double v : lm_) lmax = std::max(lmax, v);
    double total = 0.0;
    for (double v : lm_) total += std::exp(v - lmax);
    double u = rng.uniform() * total;
    double acc = 0.0;
    for (size_t k = 0; k + 1 < lm_.size(); ++k) {
      acc += std::exp(lm_[k] - lmax);
      if (u <= acc) return k;
    }
    return lm_.size() - 1;
  }

  double sample_segment(size_t k, rng::SplitMix& rng) const {
    double a = zb_[k], b = zb_[k + 1];
    double s = sx_[k];
    double v = rng.uniform();
    if (b == kInf) return a + std::log1p(-v) / s;  // s < 0
    double span = s * (b - a);
    if (std::abs(span) < 1e-8) return a + v * (b - a);
    if (s > 0.0) return b + std::log(v + (1.0 - v) * std::exp(-span)) / s;
    return a + std::log1p(-v * (1.0 - std::exp(span))) / s;
  }

  double gamma_, a2_, beta_;
  std::vector<double> xs_, hx_, sx_;
  std::vector<double> zb_, lm_;
};

void check_params(const LambdaFullConditionalParams& p) {
  if (!(p.psi > 0.0) || !(p.alpha_sq > 0.0) || !std::isfinite(p.beta_lin))
    throw InvalidHyper(
        "lambda full conditional: requires psi > 0 and alpha_sq > 0");
}

}  // namespace

int choose_gamma(const LambdaFullConditionalParams& p) {
  check_params(p);
  double x_max = sf::quartic_mode(-1, p.psi, p.alpha_sq, p.beta_lin);
  double g = x_max * (2.0 * p.alpha_sq * x_max - p.beta_lin);
  if (!(g > 0.0)) return 0;
  g = std::min(g, 1e9);
  return static_cast<int>(std::llround(g));
}

double sample_g3p(int gamma, double alpha_sq, double beta_lin, rng::SplitMix& rng) {
  if (gamma < 0 || !(alpha_sq > 0.0))
    throw InvalidHyper("sample_g3p: requires gamma >= 0 and alpha_sq > 0");
  ArsHull hull(static_cast<double>(gamma), alpha_sq, beta_lin);
  return hull.draw(rng);
}

std::pair<double, std::uint64_t> sample_lambda_fc(
    const LambdaFullConditionalParams& p, rng::SplitMix& rng) {
  check_params(p);
  int gamma = choose_gamma(p);
  double xdot = std::sqrt(2.0 * p.psi / (gamma + 1.0));
  double inv_xdot_sq = (gamma + 1.0) / (2.0 * p.psi);
  // One hull serves all envelope proposals: every hull draw is an exact
  // draw from the envelope no matter how refined the hull is.
  ArsHull hull(static_cast<double>(gamma), p.alpha_sq, p.beta_lin);
  std::uint64_t used = 0;
  while (used < 1000000) {
    double x = hull.draw(rng);
    ++used;
    double logr = -(gamma + 1.0) * std::log(x / xdot) +
                  p.psi * (inv_xdot_sq - 1.0 / (x * x));
    if (std::log(rng.uniform()) <= logr) return {x, used};
  }
  throw AcceptanceStall(
      "lambda rejection sampler: exceeded 1e6 envelope proposals");
}

double slice_update_lambda(const LambdaFullConditionalParams& p,
                           double current, rng::SplitMix& rng) {
  check_params(p);
  if (!(current > 0.0))
    throw InvalidHyper("slice_update_lambda: current must be > 0");
  // Log-density of u = log(x): the x^{-1} factor cancels the Jacobian.
  auto t = [&](double u) {
    return -p.psi * std::exp(-2.0 * u) - p.alpha_sq * std::exp(2.0 * u) +
           p.beta_lin * std::exp(u);
  };
  double u0 = std::log(current);
  double y = t(u0) + std::log(rng.uniform());
  const double w = 1.0;
  double L = u0 - w * rng.uniform();
  double R = L + w;
  for (int i = 0; i < 120 && t(L) > y; ++i) L -= w;
  for (int i = 0; i < 120 && t(R) > y; ++i) R += w;
  for (int i = 0; i < 300; ++i) {
    double u = L + rng.uniform() * (R - L);
    if (t(u) > y) return std::exp(u);
    if (u < u0)
      L = u;
    else
      R = u;
  }
  return current;
}

}  // namespace infhs
