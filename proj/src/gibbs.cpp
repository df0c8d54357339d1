#include "infhs/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "infhs/fast_gaussian.hpp"
#include "infhs/g3p.hpp"
#include "infhs/threads.hpp"

namespace infhs {

namespace {

constexpr double kPsiFloor = 1e-300;

double quantile_type7(std::vector<double>& sorted, double q) {
  const int n = static_cast<int>(sorted.size());
  if (n == 1) return sorted[0];
  const double h = (n - 1) * q;
  const int lo = static_cast<int>(std::floor(h));
  const int hi = std::min(lo + 1, n - 1);
  return sorted[lo] + (h - lo) * (sorted[hi] - sorted[lo]);
}

}  // namespace

GibbsSampler::GibbsSampler(const Dataset& data, const Hyperparameters& hyper,
                           const GibbsConfig& config, GibbsDiagnostic diag)
    : data_(data), cfg_(config), diag_(diag) {
  validate(data, hyper, Task::linear);
  zc_ = stack_codata(data_);
  hyper_ = resolve_hyper(hyper, zc_.n_blocks());
  if (cfg_.B < 1 || cfg_.bn < 0 || cfg_.bn >= cfg_.B || cfg_.thin < 1) {
    throw InvalidHyper("chain configuration must satisfy 0 <= bn < B, thin >= 1");
  }
  if (zc_.M() > 10 * data_.n()) {
    throw DimensionMismatch(
        "stacked co-data dimension exceeds ten times the sample size");
  }
  col_block_.reserve(zc_.M());
  for (int d = 0; d < zc_.n_blocks(); ++d) {
    for (int k = 0; k < zc_.block_sizes[d]; ++k) col_block_.push_back(d);
  }
  const int n = data_.n();
  const int m = data_.p() + 1;
  dense_path_ = (m <= 2 * n);
  if (dense_path_) {
    gram_ = Mat::Zero(m, m);
    gram_.selfadjointView<Eigen::Lower>().rankUpdate(data_.X.transpose());
  }
  xty_ = data_.X.transpose() * data_.y;
}

void GibbsSampler::init(rng::Engine& eng) {
  const int p = data_.p();
  st_.beta = Vec::Zero(p + 1);
  st_.sigma_sq = 1.0;
  st_.tau_sq = 1.0;
  st_.lambda0_sq = 1.0;
  st_.lambda = Vec::Ones(p);
  st_.gamma = Vec::Zero(zc_.M());
  st_.phi_sq.resize(p);
  for (int j = 0; j < p; ++j) st_.phi_sq[j] = rng::rinvgamma(eng, 0.5, 0.5);
  st_.kappa_sq.resize(zc_.n_blocks());
  for (int d = 0; d < zc_.n_blocks(); ++d) {
    st_.kappa_sq[d] = rng::rinvgamma(eng, hyper_.a[d], hyper_.b[d]);
  }
  st_.zeta = rng::rinvgamma(eng, 0.5, 1.0);
  st_.psi0 = rng::rinvgamma(eng, 0.5, 1.0);
  state_set_ = true;
}

void GibbsSampler::set_state(const GibbsState& s) {
  const int p = data_.p();
  if (s.beta.size() != p + 1 || s.lambda.size() != p ||
      s.phi_sq.size() != p || s.gamma.size() != zc_.M() ||
      s.kappa_sq.size() != zc_.n_blocks()) {
    throw DimensionMismatch("state sizes do not match the dataset");
  }
  st_ = s;
  state_set_ = true;
}

void GibbsSampler::set_response(const Vec& y) {
  if (y.size() != data_.n()) {
    throw DimensionMismatch("response length must equal the sample size");
  }
  data_.y = y;
  xty_ = data_.X.transpose() * y;
}

void GibbsSampler::update_beta(rng::Engine& eng) {
  const int n = data_.n();
  const int m = data_.p() + 1;
  Vec delta(m);
  delta[0] = 1.0 / (st_.tau_sq * st_.lambda0_sq);
  for (int j = 1; j < m; ++j) {
    delta[j] = 1.0 / (st_.tau_sq * st_.lambda[j - 1] * st_.lambda[j - 1]);
  }
  if (!delta.allFinite()) {
    throw NumericalOverflow("shrinkage precision overflowed");
  }
  if (dense_path_) {
    Mat A = gram_;
    A.diagonal() += delta;
    Eigen::LLT<Mat> llt(A);
    if (llt.info() != Eigen::Success) {
      throw SingularSystem("Cholesky of the coefficient precision failed");
    }
    Vec mu = llt.solve(xty_);
    Vec z(m);
    for (int j = 0; j < m; ++j) z[j] = rng::rnorm(eng);
    st_.beta = mu + std::sqrt(st_.sigma_sq) * llt.matrixU().solve(z);
  } else {
    WoodburyWorkspace ws(data_.X, DiagPrecision{delta});
    st_.beta = sample_beta_woodbury(ws, data_.y, st_.sigma_sq, eng);
  }
  if (!st_.beta.allFinite()) {
    throw NumericalOverflow("coefficient draw is non-finite");
  }
  (void)n;
}

void GibbsSampler::update_lambda_block(std::uint64_t iter) {
  const int p = data_.p();
  const double s0 = hyper_.s0_sq;
  const double two_s2t2 = 2.0 * st_.sigma_sq * st_.tau_sq;
  std::vector<std::uint64_t> proposals(p, 0);
  std::vector<unsigned char> sliced(p, 0);
  Vec mu = zc_.Z * st_.gamma;
  threads::parallel_for(p, [&](int j) {
    rng::SplitMix sm(rng::substream_seed(cfg_.seed, iter, static_cast<std::uint64_t>(j)));
    const double bj = st_.beta[j + 1];
    LambdaFullConditionalParams pr{
        std::max(bj * bj / two_s2t2, kPsiFloor),
        1.0 / (2.0 * s0 * st_.phi_sq[j]),
        mu[j] / (s0 * st_.phi_sq[j])};
    double lam;
    try {
      auto [x, used] = sample_lambda_fc(pr, sm);
      lam = x;
      proposals[j] = used;
    } catch (const AcceptanceStall&) {
      lam = slice_update_lambda(pr, st_.lambda[j], sm);
      sliced[j] = 1;
    }
    st_.lambda[j] = lam;
    const double dev = lam - mu[j];
    const double rate = 0.5 + dev * dev / (2.0 * s0);
    st_.phi_sq[j] = rate / (-std::log(sm.uniform()));
  });
  for (int j = 0; j < p; ++j) {
    if (sliced[j]) {
      ++stats_.slice_fallbacks;
    } else {
      ++stats_.lambda_updates;
      stats_.lambda_proposals += proposals[j];
    }
  }
}

void GibbsSampler::update_gamma(rng::Engine& eng) {
  const int M = zc_.M();
  const double s0 = hyper_.s0_sq;
  Vec phi_inv = st_.phi_sq.cwiseInverse();
  Mat W = phi_inv.asDiagonal() * zc_.Z;  // Phi^{-2} Z, with Phi^2 = diag(phi_sq)
  Mat A = zc_.Z.transpose() * W;
  for (int c = 0; c < M; ++c) {
    A(c, c) += s0 / st_.kappa_sq[col_block_[c]];
  }
  Eigen::LLT<Mat> llt(A);
  if (llt.info() != Eigen::Success) {
    throw SingularSystem("Cholesky of the co-data precision failed");
  }
  Vec mean = llt.solve(W.transpose() * st_.lambda);
  Vec z(M);
  for (int c = 0; c < M; ++c) z[c] = rng::rnorm(eng);
  st_.gamma = mean + std::sqrt(s0) * llt.matrixU().solve(z);
}

void GibbsSampler::check_finite(const char* where) const {
  const bool ok = st_.beta.allFinite() && st_.lambda.allFinite() &&
                  st_.phi_sq.allFinite() && st_.gamma.allFinite() &&
                  st_.kappa_sq.allFinite() && std::isfinite(st_.sigma_sq) &&
                  std::isfinite(st_.tau_sq) && std::isfinite(st_.zeta) &&
                  std::isfinite(st_.lambda0_sq) && std::isfinite(st_.psi0) &&
                  st_.sigma_sq > 0.0 && st_.tau_sq > 0.0 && st_.zeta > 0.0 &&
                  st_.lambda0_sq > 0.0 && st_.psi0 > 0.0;
  if (!ok) {
    throw NumericalOverflow(std::string("non-finite state after ") + where);
  }
}

void GibbsSampler::sweep(rng::Engine& eng, std::uint64_t iter) {
  update_beta(eng);
  if (diag_ == GibbsDiagnostic::frozen_scales) return;

  const int p = data_.p();
  const double b0 = st_.beta[0];
  st_.lambda0_sq = rng::rinvgamma(
      eng, 1.0, 1.0 / st_.psi0 + b0 * b0 / (2.0 * st_.sigma_sq * st_.tau_sq));
  st_.psi0 = rng::rinvgamma(eng, 1.0, 1.0 + 1.0 / st_.lambda0_sq);

  update_lambda_block(iter);

  if (diag_ != GibbsDiagnostic::pin_gamma_zero) {
    update_gamma(eng);
    int offset = 0;
    for (int d = 0; d < zc_.n_blocks(); ++d) {
      const int md = zc_.block_sizes[d];
      const double ss = st_.gamma.segment(offset, md).squaredNorm();
      st_.kappa_sq[d] =
          rng::rinvgamma(eng, hyper_.a[d] + 0.5 * md, hyper_.b[d] + 0.5 * ss);
      offset += md;
    }
  }

  double scaled_ss = 0.0;  // sum beta_j^2 / lambda_j^2
  for (int j = 0; j < p; ++j) {
    const double r = st_.beta[j + 1] / st_.lambda[j];
    scaled_ss += r * r;
  }
  st_.tau_sq = rng::rinvgamma(
      eng, 0.5 * p + 1.0,
      1.0 / st_.zeta + b0 * b0 / (2.0 * st_.sigma_sq * st_.lambda0_sq) +
          scaled_ss / (2.0 * st_.sigma_sq));
  st_.zeta = rng::rinvgamma(eng, 1.0, 1.0 + 1.0 / st_.tau_sq);

  const double rss = (data_.y - data_.X * st_.beta).squaredNorm();
  st_.sigma_sq = rng::rinvgamma(
      eng, hyper_.v + 0.5 * (data_.n() + p + 1),
      hyper_.q + 0.5 * rss +
          b0 * b0 / (2.0 * st_.tau_sq * st_.lambda0_sq) +
          scaled_ss / (2.0 * st_.tau_sq));

  check_finite("sweep");
}

PosteriorDraws GibbsSampler::run() {
  PosteriorDraws out;
  out.B = cfg_.B;
  out.bn = cfg_.bn;
  out.thin = cfg_.thin;
  out.seed = cfg_.seed;
  rng::Engine eng(cfg_.seed);
  if (!state_set_) init(eng);
  const int keep = (cfg_.B - cfg_.bn - 1) / cfg_.thin + 1;
  out.draws.reserve(keep);
  for (int iter = 1; iter <= cfg_.B; ++iter) {
    try {
      sweep(eng, static_cast<std::uint64_t>(iter));
    } catch (const NumericalOverflow& e) {
      throw NumericalOverflow(std::string(e.what()) + " at iteration " +
                              std::to_string(iter));
    }
    if (iter > cfg_.bn && (iter - cfg_.bn - 1) % cfg_.thin == 0) {
      out.draws.push_back(st_);
    }
  }
  return out;
}

PosteriorDraws run_gibbs(const Dataset& data, const Hyperparameters& hyper,
                         const GibbsConfig& config, GibbsDiagnostic diag) {
  GibbsSampler sampler(data, hyper, config, diag);
  return sampler.run();
}

FitSummary summarize(const PosteriorDraws& draws) {
  if (draws.draws.empty()) {
    throw InvalidHyper("cannot summarize an empty set of draws");
  }
  const int N = static_cast<int>(draws.draws.size());
  const int m = static_cast<int>(draws.draws[0].beta.size());
  const int p = m - 1;
  const int M = static_cast<int>(draws.draws[0].gamma.size());
  const int D = static_cast<int>(draws.draws[0].kappa_sq.size());

  FitSummary s;
  s.beta_mean = Vec::Zero(m);
  s.beta_sd = Vec::Zero(m);
  s.beta_q025 = Vec::Zero(m);
  s.beta_q50 = Vec::Zero(m);
  s.beta_q975 = Vec::Zero(m);
  s.gamma_mean = Vec::Zero(M);
  s.kappa_sq_mean = Vec::Zero(D);
  s.inclusion = Vec::Zero(p);

  std::vector<double> col(N);
  for (int j = 0; j < m; ++j) {
    double sum = 0.0;
    for (int t = 0; t < N; ++t) {
      col[t] = draws.draws[t].beta[j];
      sum += col[t];
    }
    const double mean = sum / N;
    s.beta_mean[j] = mean;
    double ss = 0.0;
    for (int t = 0; t < N; ++t) ss += (col[t] - mean) * (col[t] - mean);
    s.beta_sd[j] = (N > 1) ? std::sqrt(ss / (N - 1)) : 0.0;
    std::sort(col.begin(), col.end());
    s.beta_q025[j] = quantile_type7(col, 0.025);
    s.beta_q50[j] = quantile_type7(col, 0.5);
    s.beta_q975[j] = quantile_type7(col, 0.975);
  }
  for (int t = 0; t < N; ++t) {
    const GibbsState& st = draws.draws[t];
    s.sigma_sq_mean += st.sigma_sq;
    s.tau_sq_mean += st.tau_sq;
    s.gamma_mean += st.gamma;
    s.kappa_sq_mean += st.kappa_sq;
    for (int j = 0; j < p; ++j) {
      const double l2 = st.lambda[j] * st.lambda[j];
      s.inclusion[j] += l2 / (1.0 + l2);
    }
  }
  s.sigma_sq_mean /= N;
  s.tau_sq_mean /= N;
  s.gamma_mean /= N;
  s.kappa_sq_mean /= N;
  s.inclusion /= N;
  return s;
}

}  // namespace infhs
