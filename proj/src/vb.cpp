#include "infhs/vb.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "infhs/fast_gaussian.hpp"
#include "infhs/threads.hpp"

namespace infhs {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kLogPi = 1.1447298858494001741;
// Guards the log-divergence of the lambda factor at zero when the squared
// coefficient moment underflows.
constexpr double kAStarFloor = 1e-300;

// Entropy of IG(shape, rate).
double ig_entropy(double shape, double rate) {
  return shape + std::log(rate) + std::lgamma(shape) -
         (1.0 + shape) * sf::digamma(shape);
}

// E[log x] for x ~ IG(shape, rate).
double ig_log_moment(double shape, double rate) {
  return std::log(rate) - sf::digamma(shape);
}

bool params_changed(double a_old, double a_new, double b_old, double b_new,
                    double c_old, double c_new) {
  auto moved = [](double u, double v) {
    return std::abs(u - v) >
           1e-12 * std::max({1.0, std::abs(u), std::abs(v)});
  };
  return moved(a_old, a_new) || moved(b_old, b_new) || moved(c_old, c_new);
}

}  // namespace

CaviEngine::CaviEngine(const Dataset& data, const Hyperparameters& hyper,
                       Task task)
    : data_(data), task_(task) {
  validate(data, hyper, task);
  zc_ = stack_codata(data_);
  hyper_ = resolve_hyper(hyper, zc_.n_blocks());
  if (zc_.M() > 10 * data_.n()) {
    throw DimensionMismatch(
        "stacked co-data dimension exceeds ten times the sample size");
  }
  col_block_.reserve(zc_.M());
  for (int d = 0; d < zc_.n_blocks(); ++d) {
    for (int k = 0; k < zc_.block_sizes[d]; ++k) col_block_.push_back(d);
  }
  const int n = data_.n();
  const int p = data_.p();
  alpha_sigma_ = hyper_.v + 0.5 * (n + p + 1);
  alpha_tau_ = 0.5 * p + 1.0;
  init();
}

double CaviEngine::inv_sigma_sq_moment() const {
  return task_ == Task::linear ? alpha_sigma_ / st_.l_star : 1.0;
}

double CaviEngine::inv_tau_sq_moment() const {
  return alpha_tau_ / st_.g_star;
}

Vec CaviEngine::expected_w() const {
  const int n = data_.n();
  Vec ew(n);
  for (int i = 0; i < n; ++i) {
    ew(i) = sf::trunc_normal_mean(st_.mu_w(i),
                                  data_.y(i) == 1.0
                                      ? sf::TruncSide::right_of_zero
                                      : sf::TruncSide::left_of_zero);
  }
  return ew;
}

void CaviEngine::init() {
  const int p = data_.p();
  const int M = zc_.M();
  const int D = zc_.n_blocks();

  st_ = VBState{};
  st_.mu_beta = Vec::Zero(p + 1);
  st_.diag_sigma_beta = Vec::Zero(p + 1);
  st_.scale_beta = 1.0;

  // Inverse-Gamma factors start at their prior means, falling back to
  // rate/shape where the mean is undefined; chained priors are followed
  // through (zeta = 2 -> tau^2 = 1, psi0 = 2 -> lambda0^2 = 1, phi^2 = 1).
  st_.a0_star = 1.0;
  st_.k0_star = 2.0;
  st_.g_star = alpha_tau_;  // E[tau^-2] = 1
  st_.h_star = 2.0;         // E[zeta^-1] = 1/2
  st_.l_star = task_ == Task::linear ? alpha_sigma_ * hyper_.q / hyper_.v
                                     : 1.0;  // E[sigma^-2] = v/q

  st_.a_star = Vec::Ones(p);
  st_.b_star = Vec::Ones(p);
  st_.c_star = Vec::Zero(p);
  st_.d_star = Vec::Ones(p);
  const sf::LambdaMoments seed = sf::lambda_moments({1.0, 1.0, 0.0});
  st_.lambda_moments.assign(p, seed);

  // q(gamma) starts as a point mass at zero.
  st_.mu_gamma = Vec::Zero(M);
  st_.sigma_gamma = Mat::Zero(M, M);

  st_.e_star.resize(D);
  st_.f_star.resize(D);
  for (int d = 0; d < D; ++d) {
    st_.e_star(d) = hyper_.a[d] + 0.5 * zc_.block_sizes[d];
    st_.f_star(d) = st_.e_star(d) * hyper_.b[d] / hyper_.a[d];
  }

  st_.mu_w = task_ == Task::probit ? Vec::Zero(data_.n()) : Vec();
}

void CaviEngine::update_mu_w() {
  if (task_ != Task::probit) return;
  st_.mu_w = data_.X * st_.mu_beta;
}

void CaviEngine::update_beta() {
  const int p = data_.p();
  const double i_tau = inv_tau_sq_moment();

  Vec delta(p + 1);
  delta(0) = i_tau / st_.a0_star;
  for (int j = 0; j < p; ++j)
    delta(j + 1) = i_tau * st_.lambda_moments[j].m_neg2;
  if (!delta.allFinite()) {
    throw NumericalOverflow(
        "local precision overflowed in the coefficient update");
  }

  const WoodburyWorkspace ws(data_.X, DiagPrecision{delta});
  st_.mu_beta = task_ == Task::linear ? ws.mean_xt(data_.y)
                                      : ws.mean_xt(expected_w());
  st_.diag_sigma_beta = ws.diag();
  st_.log_det_sigma_beta = ws.logdet();
  st_.trace_xsx = ws.trace_xsx();
  st_.scale_beta = 1.0 / inv_sigma_sq_moment();
  if (!st_.mu_beta.allFinite()) {
    throw NumericalOverflow("coefficient mean update produced non-finite "
                            "values");
  }
}

void CaviEngine::update_lambda0() {
  const double eb0_sq =
      st_.mu_beta(0) * st_.mu_beta(0) +
      st_.scale_beta * st_.diag_sigma_beta(0);
  st_.a0_star = 1.0 / st_.k0_star +
                0.5 * eb0_sq * inv_sigma_sq_moment() * inv_tau_sq_moment();
  st_.k0_star = 1.0 + 1.0 / st_.a0_star;
}

void CaviEngine::update_lambda_block() {
  const int p = data_.p();
  const double s0 = hyper_.s0_sq;
  const double i_sigma = inv_sigma_sq_moment();
  const double i_tau = inv_tau_sq_moment();

  // gamma-dependent pieces, shared across j: z_j'mu and z_j' E[gg'] z_j.
  const Vec zmu = zc_.Z * st_.mu_gamma;
  const Vec zsz =
      ((zc_.Z * st_.sigma_gamma).array() * zc_.Z.array()).rowwise().sum();

  threads::parallel_for(p, [&](int j) {
    const double eb_sq =
        st_.mu_beta(j + 1) * st_.mu_beta(j + 1) +
        st_.scale_beta * st_.diag_sigma_beta(j + 1);
    const double a_new =
        std::max(0.5 * eb_sq * i_sigma * i_tau, kAStarFloor);
    const double b_new = 1.0 / (2.0 * s0 * st_.d_star(j));
    const double c_new = zmu(j) / (s0 * st_.d_star(j));
    if (params_changed(st_.a_star(j), a_new, st_.b_star(j), b_new,
                       st_.c_star(j), c_new)) {
      st_.lambda_moments[j] = sf::lambda_moments({a_new, b_new, c_new});
    }
    st_.a_star(j) = a_new;
    st_.b_star(j) = b_new;
    st_.c_star(j) = c_new;

    const sf::LambdaMoments& lm = st_.lambda_moments[j];
    const double spread = lm.m2 - 2.0 * lm.m1 * zmu(j) + zmu(j) * zmu(j) +
                          s0 * zsz(j);
    st_.d_star(j) = 0.5 + std::max(spread, 0.0) / (2.0 * s0);
  });
}

void CaviEngine::update_gamma() {
  const int p = data_.p();
  const int M = zc_.M();
  const double s0 = hyper_.s0_sq;

  const Vec w = st_.d_star.cwiseInverse();  // E[phi_j^-2]
  Mat a = Mat::Zero(M, M);
  a.selfadjointView<Eigen::Lower>().rankUpdate(
      (zc_.Z.array().colwise() * w.array().sqrt()).matrix().transpose());
  for (int c = 0; c < M; ++c) {
    a(c, c) += s0 * st_.e_star(col_block_[c]) / st_.f_star(col_block_[c]);
  }

  Vec rhs = Vec::Zero(M);
  for (int j = 0; j < p; ++j) {
    rhs += zc_.Z.row(j).transpose() * (st_.lambda_moments[j].m1 * w(j));
  }

  Eigen::LLT<Mat> llt(a);  // reads the lower triangle only
  if (llt.info() != Eigen::Success) {
    throw SingularSystem("co-data precision matrix is not positive definite");
  }
  st_.mu_gamma = llt.solve(rhs);
  st_.sigma_gamma = llt.solve(Mat::Identity(M, M));
}

void CaviEngine::update_kappa() {
  const double s0 = hyper_.s0_sq;
  int offset = 0;
  for (int d = 0; d < zc_.n_blocks(); ++d) {
    const int m_d = zc_.block_sizes[d];
    const double mu_sq = st_.mu_gamma.segment(offset, m_d).squaredNorm();
    const double tr =
        st_.sigma_gamma.block(offset, offset, m_d, m_d).trace();
    st_.e_star(d) = hyper_.a[d] + 0.5 * m_d;
    st_.f_star(d) = hyper_.b[d] + 0.5 * (mu_sq + s0 * tr);
    offset += m_d;
  }
}

void CaviEngine::update_tau() {
  const int p = data_.p();
  const double i_sigma = inv_sigma_sq_moment();

  const double eb0_sq =
      st_.mu_beta(0) * st_.mu_beta(0) +
      st_.scale_beta * st_.diag_sigma_beta(0);
  double acc = 1.0 / st_.h_star + 0.5 * eb0_sq * i_sigma / st_.a0_star;
  for (int j = 0; j < p; ++j) {
    const double eb_sq =
        st_.mu_beta(j + 1) * st_.mu_beta(j + 1) +
        st_.scale_beta * st_.diag_sigma_beta(j + 1);
    acc += 0.5 * eb_sq * i_sigma * st_.lambda_moments[j].m_neg2;
  }
  st_.g_star = acc;
  st_.h_star = 1.0 + inv_tau_sq_moment();
}

void CaviEngine::update_sigma() {
  if (task_ != Task::linear) return;
  const int p = data_.p();
  const double i_tau = inv_tau_sq_moment();

  const double rss = (data_.y - data_.X * st_.mu_beta).squaredNorm() +
                     st_.scale_beta * st_.trace_xsx;
  const double eb0_sq =
      st_.mu_beta(0) * st_.mu_beta(0) +
      st_.scale_beta * st_.diag_sigma_beta(0);
  double acc = rss + eb0_sq * i_tau / st_.a0_star;
  for (int j = 0; j < p; ++j) {
    const double eb_sq =
        st_.mu_beta(j + 1) * st_.mu_beta(j + 1) +
        st_.scale_beta * st_.diag_sigma_beta(j + 1);
    acc += eb_sq * i_tau * st_.lambda_moments[j].m_neg2;
  }
  st_.l_star = hyper_.q + 0.5 * acc;
}

double CaviEngine::sweep() {
  update_mu_w();
  update_beta();
  update_lambda0();
  update_lambda_block();
  update_gamma();
  update_kappa();
  update_tau();
  update_sigma();
  return compute_elbo(st_, data_, hyper_, task_);
}

std::pair<VBState, std::vector<double>> CaviEngine::run(
    const VBConfig& config) {
  if (!(config.eps > 0.0) || config.max_iter < 1) {
    throw InvalidHyper("stopping rule needs eps > 0 and max_iter >= 1");
  }
  init();
  std::vector<double> trace;
  trace.reserve(64);
  double prev = -std::numeric_limits<double>::infinity();
  for (int it = 1; it <= config.max_iter; ++it) {
    const double elbo = sweep();
    if (!std::isfinite(elbo)) {
      throw NumericalOverflow("lower bound is not finite at sweep " +
                              std::to_string(it));
    }
    if (std::isfinite(prev)) {
      const double tol = std::max(1e-6, 1e-6 * std::abs(prev));
      if (elbo - prev < -tol) {
        throw ElboDecrease("lower bound fell from " + std::to_string(prev) +
                           " to " + std::to_string(elbo) + " at sweep " +
                           std::to_string(it));
      }
    }
    trace.push_back(elbo);
    if (elbo - prev < config.eps) break;
    prev = elbo;
  }
  return {st_, trace};
}

std::pair<VBState, std::vector<double>> run_cavi_linear(
    const Dataset& data, const Hyperparameters& hyper,
    const VBConfig& config) {
  CaviEngine engine(data, hyper, Task::linear);
  return engine.run(config);
}

std::pair<VBState, std::vector<double>> run_cavi_probit(
    const Dataset& data, const Hyperparameters& hyper,
    const VBConfig& config) {
  CaviEngine engine(data, hyper, Task::probit);
  return engine.run(config);
}

double compute_elbo(const VBState& state, const Dataset& data,
                    const Hyperparameters& hyper, Task task) {
  const int n = data.n();
  const int p = data.p();
  const int m = p + 1;
  const StackedCodata zc = stack_codata(data);
  const int M = zc.M();
  const int D = zc.n_blocks();
  const Hyperparameters hp = resolve_hyper(hyper, D);
  const double s0 = hp.s0_sq;

  const double alpha_sigma = hp.v + 0.5 * (n + p + 1);
  const double alpha_tau = 0.5 * p + 1.0;
  const double i_sigma =
      task == Task::linear ? alpha_sigma / state.l_star : 1.0;
  const double l_sigma =
      task == Task::linear ? ig_log_moment(alpha_sigma, state.l_star) : 0.0;
  const double i_tau = alpha_tau / state.g_star;
  const double l_tau = ig_log_moment(alpha_tau, state.g_star);
  const double l_zeta = ig_log_moment(1.0, state.h_star);
  const double e_zeta_inv = 1.0 / state.h_star;
  const double l_lam0 = ig_log_moment(1.0, state.a0_star);
  const double e_lam0_inv2 = 1.0 / state.a0_star;
  const double l_psi0 = ig_log_moment(1.0, state.k0_star);
  const double e_psi0_inv = 1.0 / state.k0_star;
  const double sb = state.scale_beta;

  auto eb_sq = [&](int k) {
    return state.mu_beta(k) * state.mu_beta(k) +
           sb * state.diag_sigma_beta(k);
  };

  // gamma moments.
  const Vec zmu = zc.Z * state.mu_gamma;
  const Vec zsz =
      ((zc.Z * state.sigma_gamma).array() * zc.Z.array()).rowwise().sum();
  Eigen::LLT<Mat> llt_gamma(state.sigma_gamma);
  if (llt_gamma.info() != Eigen::Success) {
    throw SingularSystem("stored co-data covariance is not positive definite");
  }
  double log_det_sigma_gamma = 0.0;
  for (int c = 0; c < M; ++c) {
    log_det_sigma_gamma += 2.0 * std::log(llt_gamma.matrixLLT()(c, c));
  }

  double elbo = 0.0;

  // Likelihood (linear) or latent-response terms (probit).
  if (task == Task::linear) {
    const double rss = (data.y - data.X * state.mu_beta).squaredNorm() +
                       sb * state.trace_xsx;
    elbo += -0.5 * n * (kLog2Pi + l_sigma) - 0.5 * i_sigma * rss;
  } else {
    const Vec xmu = data.X * state.mu_beta;
    double fit = sb * state.trace_xsx;
    double entropy_w = 0.0;
    for (int i = 0; i < n; ++i) {
      const bool positive = data.y(i) == 1.0;
      const double mu = state.mu_w(i);
      const double ew = sf::trunc_normal_mean(
          mu, positive ? sf::TruncSide::right_of_zero
                       : sf::TruncSide::left_of_zero);
      const double ew2 = sf::trunc_normal_second_moment(
          mu, positive ? sf::TruncSide::right_of_zero
                       : sf::TruncSide::left_of_zero);
      fit += ew2 - 2.0 * ew * xmu(i) + xmu(i) * xmu(i);
      entropy_w += sf::log_Phi(positive ? mu : -mu) + 0.5 * kLog2Pi +
                   0.5 * (1.0 - mu * ew + mu * mu);
    }
    elbo += -0.5 * n * kLog2Pi - 0.5 * fit;  // E[log p(w | X, beta)]
    elbo += entropy_w;                       // -E[log q(w)], Bernoulli term
  }

  // Coefficient prior: the E[log lambda_j] terms are omitted here and in the
  // lambda entropy below, where they appear with opposite sign and cancel.
  double q_sum = eb_sq(0) * i_sigma * i_tau * e_lam0_inv2;
  for (int j = 0; j < p; ++j) {
    q_sum += eb_sq(j + 1) * i_sigma * i_tau * state.lambda_moments[j].m_neg2;
  }
  elbo += -0.5 * m * (kLog2Pi + l_sigma + l_tau) - 0.5 * l_lam0 -
          0.5 * q_sum;

  // Global-scale half-Cauchy ladders.
  elbo += -0.5 * l_psi0 - 1.5 * l_lam0 - e_psi0_inv * e_lam0_inv2 -
          0.5 * kLogPi;                                   // lambda0^2 | psi0
  elbo += -1.5 * l_psi0 - e_psi0_inv - 0.5 * kLogPi;      // psi0
  elbo += -0.5 * l_zeta - 1.5 * l_tau - e_zeta_inv * i_tau -
          0.5 * kLogPi;                                   // tau^2 | zeta
  elbo += -1.5 * l_zeta - e_zeta_inv - 0.5 * kLogPi;      // zeta

  // Local scales, their mixing variances, and their entropies.
  for (int j = 0; j < p; ++j) {
    const sf::LambdaMoments& lm = state.lambda_moments[j];
    const double l_phi = ig_log_moment(1.0, state.d_star(j));
    const double e_phi_inv2 = 1.0 / state.d_star(j);
    const double spread = std::max(
        lm.m2 - 2.0 * lm.m1 * zmu(j) + zmu(j) * zmu(j) + s0 * zsz(j), 0.0);
    elbo += -0.5 * std::log(2.0 * M_PI * s0) - 0.5 * l_phi -
            spread * e_phi_inv2 / (2.0 * s0);             // lambda_j prior
    elbo += -1.5 * l_phi - 0.5 * e_phi_inv2 - 0.5 * kLog2Pi;  // phi_j^2 prior
    elbo += lm.log_s + state.a_star(j) * lm.m_neg2 +
            state.b_star(j) * lm.m2 - state.c_star(j) * lm.m1;  // H(lambda_j)
    elbo += ig_entropy(1.0, state.d_star(j));             // H(phi_j^2)
  }

  // Co-data coefficients and their block variances.
  int offset = 0;
  for (int d = 0; d < D; ++d) {
    const int m_d = zc.block_sizes[d];
    const double g_d =
        state.mu_gamma.segment(offset, m_d).squaredNorm() +
        s0 * state.sigma_gamma.block(offset, offset, m_d, m_d).trace();
    const double l_kappa = ig_log_moment(state.e_star(d), state.f_star(d));
    const double e_kappa_inv2 = state.e_star(d) / state.f_star(d);
    elbo += -0.5 * m_d * (kLog2Pi + l_kappa) - 0.5 * e_kappa_inv2 * g_d;
    elbo += hp.a[d] * std::log(hp.b[d]) - std::lgamma(hp.a[d]) -
            (hp.a[d] + 1.0) * l_kappa - hp.b[d] * e_kappa_inv2;
    elbo += ig_entropy(state.e_star(d), state.f_star(d));
    offset += m_d;
  }

  // Remaining entropies.
  elbo += 0.5 * m * (kLog2Pi + 1.0 + std::log(sb)) +
          0.5 * state.log_det_sigma_beta;                 // H(beta)
  elbo += ig_entropy(1.0, state.a0_star);                 // H(lambda0^2)
  elbo += ig_entropy(1.0, state.k0_star);                 // H(psi0)
  elbo += 0.5 * M * (kLog2Pi + 1.0 + std::log(s0)) +
          0.5 * log_det_sigma_gamma;                      // H(gamma)
  elbo += ig_entropy(alpha_tau, state.g_star);            // H(tau^2)
  elbo += ig_entropy(1.0, state.h_star);                  // H(zeta)

  if (task == Task::linear) {
    elbo += hp.v * std::log(hp.q) - std::lgamma(hp.v) - (hp.v + 1.0) * l_sigma -
            hp.q * i_sigma;                               // sigma^2 prior
    elbo += ig_entropy(alpha_sigma, state.l_star);        // H(sigma^2)
  }

  return elbo;
}

}  // namespace infhs
