#include "infhs/special_fns.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

namespace infhs::sf {

namespace {

constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Normal-tail machinery
// ---------------------------------------------------------------------------

// Mills ratio (1 - Phi(x)) / phi(x) for large positive x via the classical
// continued fraction 1/(x + 1/(x + 2/(x + 3/(x + ...)))).
double mills_ratio_cf(double x) {
  double t = 0.0;
  for (int k = 60; k >= 1; --k) t = k / (x + t);
  return 1.0 / (x + t);
}

}  // namespace

double erfcx(double z) {
  if (z >= 6.0) {
    // erfcx(z) = sqrt(2/pi) * MillsRatio(sqrt(2) z)
    return std::sqrt(2.0 / kPi) * mills_ratio_cf(std::sqrt(2.0) * z);
  }
  if (z < -26.0) return std::numeric_limits<double>::infinity();
  return std::exp(z * z) * std::erfc(z);
}

double Phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double log_Phi(double x) {
  if (x >= 8.0) {
    double tail = 0.5 * erfcx(x / std::sqrt(2.0)) * std::exp(-0.5 * x * x);
    return std::log1p(-tail);
  }
  return -0.5 * x * x + std::log(0.5 * erfcx(-x / std::sqrt(2.0)));
}

double digamma(double x) {
  if (!(x > 0.0)) throw NumericalOverflow("digamma: requires x > 0");
  double r = 0.0;
  while (x < 10.0) {
    r -= 1.0 / x;
    x += 1.0;
  }
  double i = 1.0 / x;
  double i2 = i * i;
  double series =
      1.0 / 12 -
      i2 * (1.0 / 120 -
            i2 * (1.0 / 252 -
                  i2 * (1.0 / 240 -
                        i2 * (1.0 / 132 - i2 * (691.0 / 32760)))));
  return r + std::log(x) - 0.5 * i - i2 * series;
}

double normal_positive_mass(double mu, double var) {
  if (!(var > 0.0)) throw InvalidHyper("normal_positive_mass: var must be > 0");
  return Phi(mu / std::sqrt(var));
}

double trunc_normal_mean(double mu, TruncSide side) {
  if (side == TruncSide::left_of_zero)
    return -trunc_normal_mean(-mu, TruncSide::right_of_zero);
  if (mu < -32.0) {
    // mean = (1/m)(1 - 2u + 10u^2 - 74u^3 + 706u^4 + ...), u = 1/m^2
    double m = -mu, u = 1.0 / (m * m);
    return (1.0 / m) *
           (1.0 - u * (2.0 - u * (10.0 - u * (74.0 - u * 706.0))));
  }
  // mean = mu + phi(mu)/Phi(mu), with phi/Phi = sqrt(2/pi)/erfcx(-mu/sqrt(2))
  return mu + std::sqrt(2.0 / kPi) / erfcx(-mu / std::sqrt(2.0));
}

double trunc_normal_second_moment(double mu, TruncSide side) {
  return 1.0 + mu * trunc_normal_mean(mu, side);
}

// ---------------------------------------------------------------------------
// Quartic mode
// ---------------------------------------------------------------------------

namespace {

// Log-kernel nu*log(x) - d/x^2 - b*x^2 + c*x with term-wise zero guards so
// that d == 0 or nu == 0 stay finite for extreme x.
struct LogKernel {
  double nu, d, b, c;
  double operator()(double x) const {
    double v = -b * x * x + c * x;
    if (nu != 0.0) v += nu * std::log(x);
    if (d != 0.0) v -= d / (x * x);
    return v;
  }
};

// Real roots of the monic cubic z^3 + a2 z^2 + a1 z + a0.
int cubic_real_roots(double a2, double a1, double a0, double out[3]) {
  double p = a1 - a2 * a2 / 3.0;
  double q = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;
  double shift = -a2 / 3.0;
  double half_q = 0.5 * q, third_p = p / 3.0;
  double disc = half_q * half_q + third_p * third_p * third_p;
  if (disc > 0.0) {
    double s = std::sqrt(disc);
    out[0] = std::cbrt(-half_q + s) + std::cbrt(-half_q - s) + shift;
    return 1;
  }
  double r = std::sqrt(std::max(0.0, -third_p));
  if (r == 0.0) {
    out[0] = shift;
    return 1;
  }
  double cosphi = std::clamp(-half_q / (r * r * r), -1.0, 1.0);
  double phi = std::acos(cosphi);
  for (int k = 0; k < 3; ++k)
    out[k] = 2.0 * r * std::cos((phi - 2.0 * kPi * k) / 3.0) + shift;
  return 3;
}

// The stationarity polynomial f(x) = 2b x^4 - c x^3 - nu x^2 - 2d and its
// derivative.
struct Quartic {
  double nu, d, b, c;
  double value(double x) const {
    return ((2.0 * b * x - c) * x - nu) * x * x - 2.0 * d;
  }
  double deriv(double x) const {
    return ((8.0 * b * x - 3.0 * c) * x - 2.0 * nu) * x;
  }
  double scale(double x) const {
    return ((2.0 * b * x + std::abs(c)) * x + std::abs(nu)) * x * x + 2.0 * d;
  }
};

// Newton-polish a candidate root, keeping it strictly positive.
double polish_root(const Quartic& f, double x) {
  for (int it = 0; it < 8; ++it) {
    double fv = f.value(x), fd = f.deriv(x);
    if (fd == 0.0) break;
    double step = fv / fd;
    double xn = x - step;
    if (!(xn > 0.0)) xn = 0.5 * x;
    if (xn == x) break;
    x = xn;
    if (std::abs(f.value(x)) <= 1e-14 * f.scale(x)) break;
  }
  return x;
}

// Fallback: locate all positive roots by sign scanning on a geometric grid
// plus bisection. Deterministic and slow; used only when the closed-form
// path fails its residual check.
void bisection_roots(const Quartic& f, std::vector<double>* roots) {
  double b = f.b, c = std::abs(f.c), nu = std::abs(f.nu), d = f.d;
  double hi = 2.0 * (1.0 + std::max({c / (2.0 * b), nu / (2.0 * b), d / b}));
  double lo = hi;
  if (d > 0.0) {
    lo = std::min({std::pow(d / (2.0 * b), 0.25),
                   c > 0 ? std::cbrt(d / c) : hi,
                   nu > 0 ? std::sqrt(d / nu) : hi}) /
         4.0;
  } else {
    lo = 1e-8 * hi;
  }
  lo = std::max(lo, 1e-290);
  int n_grid = 2000;
  double ratio = std::pow(hi / lo, 1.0 / n_grid);
  double x_prev = lo, f_prev = f.value(lo);
  for (int i = 1; i <= n_grid; ++i) {
    double x = lo * std::pow(ratio, i);
    double fx = f.value(x);
    if ((f_prev < 0.0 && fx >= 0.0) || (f_prev > 0.0 && fx <= 0.0)) {
      double a1 = x_prev, b1 = x;
      double fa = f_prev;
      for (int it = 0; it < 200 && (b1 - a1) > 1e-16 * b1; ++it) {
        double m = 0.5 * (a1 + b1), fm = f.value(m);
        if ((fa <= 0.0) == (fm <= 0.0)) {
          a1 = m;
          fa = fm;
        } else {
          b1 = m;
        }
      }
      roots->push_back(polish_root(f, 0.5 * (a1 + b1)));
    }
    x_prev = x;
    f_prev = fx;
  }
}

}  // namespace

double quartic_mode(int nu, double d, double b, double c) {
  if (!(b > 0.0) || !(d >= 0.0))
    throw NoPositiveRoot("quartic_mode: requires b > 0 and d >= 0");
  if (nu != -3 && nu != -1 && nu != 0 && nu != 1)
    throw NoPositiveRoot("quartic_mode: nu must be one of {-3, -1, 0, 1}");
  if (d == 0.0) {
    if (nu == 1) return (c + std::sqrt(c * c + 8.0 * b)) / (4.0 * b);
    if (nu == 0 && c > 0.0) return c / (2.0 * b);
    throw NoPositiveRoot("quartic_mode: kernel has no interior maximum");
  }
  Quartic f{static_cast<double>(nu), d, b, c};
  LogKernel lk{static_cast<double>(nu), d, b, c};
  std::vector<double> roots;
  if (c == 0.0) {
    // Biquadratic: x^2 = (nu + sqrt(nu^2 + 16 d b)) / (4 b), written in the
    // rationalized form 4d / (sqrt(nu^2 + 16 d b) - nu) when nu <= 0 so the
    // tiny-d case does not cancel to zero.
    double disc = std::sqrt(nu * nu + 16.0 * d * b);
    double xsq = (nu > 0) ? (nu + disc) / (4.0 * b) : 4.0 * d / (disc - nu);
    roots.push_back(std::sqrt(xsq));
  } else {
    // Ferrari. Monic form x^4 + P x^3 + Q x^2 + R x + S with R = 0.
    double P = -c / (2.0 * b), Q = -static_cast<double>(nu) / (2.0 * b),
           S = -d / b;
    double alpha = Q - 3.0 * P * P / 8.0;
    double beta = P * P * P / 8.0 - P * Q / 2.0;  // R = 0
    double gamma =
        S + P * P * Q / 16.0 - 3.0 * P * P * P * P / 256.0;  // P*R/4 = 0
    double res[3];
    int nres = cubic_real_roots(2.0 * alpha, alpha * alpha - 4.0 * gamma,
                                -beta * beta, res);
    // Newton-polish the resolvent roots: the Cardano path loses relative
    // accuracy when the smallest root is near zero (beta^2 tiny).
    for (int i = 0; i < nres; ++i) {
      double a1 = alpha * alpha - 4.0 * gamma, a2 = 2.0 * alpha,
             a0 = -beta * beta;
      for (int it = 0; it < 3; ++it) {
        double zz = res[i];
        double fv = ((zz + a2) * zz + a1) * zz + a0;
        double fd = (3.0 * zz + 2.0 * a2) * zz + a1;
        if (fd != 0.0) res[i] = zz - fv / fd;
      }
    }
    double z = -1.0;
    for (int i = 0; i < nres; ++i) z = std::max(z, res[i]);
    if (z > 0.0) {
      double u = std::sqrt(z);
      double w = 0.5 * (alpha + z + beta / u);
      double v = 0.5 * (alpha + z - beta / u);
      // t^2 + u t + v = 0  and  t^2 - u t + w = 0.
      double dv = u * u - 4.0 * v;
      if (dv >= 0.0) {
        double sq = std::sqrt(dv);
        roots.push_back(0.5 * (-u + sq) - P / 4.0);
        roots.push_back(0.5 * (-u - sq) - P / 4.0);
      }
      double dw = u * u - 4.0 * w;
      if (dw >= 0.0) {
        double sq = std::sqrt(dw);
        roots.push_back(0.5 * (u + sq) - P / 4.0);
        roots.push_back(0.5 * (u - sq) - P / 4.0);
      }
    }
  }
  // For nu < 0 the kernel always has a stationary point near sqrt(2d/|nu|)
  // when d is small (the x^nu spike). The closed-form path can lose this
  // root to rounding when d is many orders of magnitude below the other
  // coefficients, so it is seeded explicitly and polished like the rest.
  if (nu < 0)
    roots.push_back(std::sqrt(2.0 * d / -static_cast<double>(nu)));
  // Keep positive roots, polish, verify residuals; pick the kernel argmax.
  double best_x = -1.0, best_lk = -std::numeric_limits<double>::infinity();
  bool residual_ok = true;
  for (double r : roots) {
    if (!(r > 0.0)) continue;
    double x = polish_root(f, r);
    if (!(x > 0.0) || !std::isfinite(x)) continue;
    if (std::abs(f.value(x)) > 1e-10 * f.scale(x)) {
      residual_ok = false;
      continue;
    }
    double v = lk(x);
    if (v > best_lk) {
      best_lk = v;
      best_x = x;
    }
  }
  if (best_x <= 0.0 || !residual_ok) {
    std::vector<double> scanned;
    bisection_roots(f, &scanned);
    for (double x : scanned) {
      if (!(x > 0.0)) continue;
      double v = lk(x);
      if (v > best_lk) {
        best_lk = v;
        best_x = x;
      }
    }
  }
  if (best_x <= 0.0)
    throw NoPositiveRoot("quartic_mode: no positive stationary point found");
  return best_x;
}

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod quadrature (7-15 pair)
// ---------------------------------------------------------------------------

namespace {

// 15-point Kronrod nodes (positive half; symmetric) and weights, with the
// embedded 7-point Gauss weights on the odd-indexed nodes.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, integral, err;
};

template <typename F>
Segment gk15(const F& g, double a, double b) {
  double center = 0.5 * (a + b), half = 0.5 * (b - a);
  double fc = g(center);
  double res_k = kWgk[7] * fc;
  double res_g = kWg[3] * fc;
  for (int i = 0; i < 7; ++i) {
    double dx = half * kXgk[i];
    double fsum = g(center - dx) + g(center + dx);
    res_k += kWgk[i] * fsum;
    if (i % 2 == 1) res_g += kWg[i / 2] * fsum;
  }
  Segment s;
  s.a = a;
  s.b = b;
  s.integral = res_k * half;
  s.err = std::abs((res_k - res_g) * half);
  return s;
}

// Globally adaptive integration of g over [lo, hi] starting from a geometric
// initial partition. g is assumed non-negative and <= ~1 (mode-rescaled).
template <typename F>
double adaptive_integral(const F& g, double lo, double hi) {
  std::vector<Segment> segs;
  int n_init = 4;
  if (lo > 0.0 && hi / lo > 10.0) {
    n_init = std::clamp(
        static_cast<int>(std::ceil(std::log10(hi / lo))), 4, 36);
  }
  segs.reserve(64);
  if (lo > 0.0) {
    double lr = std::log(lo), dr = (std::log(hi) - lr) / n_init;
    double prev = lo;
    for (int i = 1; i <= n_init; ++i) {
      double nxt = (i == n_init) ? hi : std::exp(lr + i * dr);
      segs.push_back(gk15(g, prev, nxt));
      prev = nxt;
    }
  } else {
    double prev = lo;
    for (int i = 1; i <= n_init; ++i) {
      double nxt = lo + (hi - lo) * i / n_init;
      segs.push_back(gk15(g, prev, nxt));
      prev = nxt;
    }
  }
  double total = 0.0, total_err = 0.0;
  for (const Segment& s : segs) {
    total += s.integral;
    total_err += s.err;
  }
  double tol = 1e-12 * std::max(1.0, std::abs(total));
  int splits = 0;
  while (total_err > tol) {
    if (++splits > 200)
      throw QuadratureFailure(
          "adaptive quadrature: subdivision budget exhausted");
    size_t worst = 0;
    for (size_t i = 1; i < segs.size(); ++i)
      if (segs[i].err > segs[worst].err) worst = i;
    Segment old = segs[worst];
    double mid = (old.a > 0.0 && old.b / old.a > 4.0)
                     ? std::sqrt(old.a * old.b)
                     : 0.5 * (old.a + old.b);
    if (mid <= old.a || mid >= old.b) break;  // interval at rounding limit
    Segment left = gk15(g, old.a, mid), right = gk15(g, mid, old.b);
    total += left.integral + right.integral - old.integral;
    total_err += left.err + right.err - old.err;
    segs[worst] = left;
    segs.push_back(right);
    tol = 1e-12 * std::max(1.0, std::abs(total));
  }
  return total;
}

struct RescaledKernel {
  LogKernel lk;
  double x_mode, log_peak;
  double g(double x) const { return std::exp(lk(x) - log_peak); }
  double lo = 0, hi = 0;

  void bracket() {
    // Always reach past the Gaussian body of the kernel: when the mode is a
    // tiny-x spike, the rescaled tail through the 1/x plateau still carries
    // mass even where g has dropped below threshold locally.
    double body = 3.0 / std::sqrt(lk.b) + (lk.c > 0.0 ? lk.c / (2.0 * lk.b) : 0.0);
    lo = x_mode / 10.0;
    hi = std::max(x_mode * 10.0, body);
    while (g(lo) > 1e-16 && lo > x_mode * 1e-260) lo /= 10.0;
    while (g(hi) > 1e-16 && hi < x_mode * 1e260 && hi < 1e290) hi *= 10.0;
  }
};

RescaledKernel make_kernel(int nu, double a, double b, double c) {
  RescaledKernel k;
  k.lk = LogKernel{static_cast<double>(nu), a, b, c};
  k.x_mode = quartic_mode(nu, a, b, c);
  k.log_peak = k.lk(k.x_mode);
  k.bracket();
  return k;
}

// log of integral_0^inf x^nu exp(-a/x^2 - b x^2 + c x) dx.
double log_integral(int nu, double a, double b, double c) {
  RescaledKernel k = make_kernel(nu, a, b, c);
  double G = adaptive_integral([&](double x) { return k.g(x); }, k.lo, k.hi);
  if (!(G > 0.0) || !std::isfinite(G))
    throw QuadratureFailure("lambda integral: non-finite quadrature result");
  return k.log_peak + std::log(G);
}

}  // namespace

LambdaMoments lambda_moments(const LambdaFactorParams& params) {
  double a = params.a_star, b = params.b_star, c = params.c_star;
  if (!(a > 0.0) || !(b > 0.0))
    throw InvalidHyper("lambda_moments: requires a_star > 0 and b_star > 0");
  double l_m1 = log_integral(-1, a, b, c);
  double l_0 = log_integral(0, a, b, c);
  double l_p1 = log_integral(1, a, b, c);
  double l_m3 = log_integral(-3, a, b, c);
  LambdaMoments m;
  m.log_s = l_m1;
  m.m1 = std::exp(l_0 - l_m1);
  m.m2 = std::exp(l_p1 - l_m1);
  m.m_neg2 = std::exp(l_m3 - l_m1);
  if (!std::isfinite(m.m1) || !std::isfinite(m.m2) || !std::isfinite(m.m_neg2))
    throw QuadratureFailure("lambda_moments: non-finite moment");
  return m;
}

double lambda_expectation(const LambdaFactorParams& params,
                          const std::function<double(double)>& weight) {
  double a = params.a_star, b = params.b_star, c = params.c_star;
  if (!(a > 0.0) || !(b > 0.0))
    throw InvalidHyper(
        "lambda_expectation: requires a_star > 0 and b_star > 0");
  RescaledKernel k = make_kernel(-1, a, b, c);
  double denom =
      adaptive_integral([&](double x) { return k.g(x); }, k.lo, k.hi);
  double numer = adaptive_integral(
      [&](double x) { return weight(x) * k.g(x); }, k.lo, k.hi);
  if (!(denom > 0.0) || !std::isfinite(denom) || !std::isfinite(numer))
    throw QuadratureFailure("lambda_expectation: non-finite quadrature");
  return numer / denom;
}

}  // namespace infhs::sf
