#include "qboot/qcalculus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace qboot {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::domain_error(std::string(what) + " must be positive and finite, got " +
                            std::to_string(v));
  }
}

bool is_non_positive_integer(double x) {
  return x <= 0.0 && std::nearbyint(x) == x;
}

constexpr std::size_t kMaxSeriesTerms = 1'000'000;
constexpr double kSeriesRelTol = 1e-14;

}  // namespace

QDeform QDeform::from_q(double q, double beta) {
  return from_q_minus_one(q - 1.0, beta);
}

QDeform QDeform::from_q_minus_one(double q_minus_one, double beta) {
  require_positive(q_minus_one, "q - 1");
  require_positive(beta, "beta");
  return QDeform(q_minus_one, beta);
}

double q_log1p(double x, double q_minus_one) {
  const double arg = q_minus_one * x;
  if (!(arg > -1.0)) {
    throw std::domain_error("q-exponential base 1 + (q-1)x must be positive");
  }
  return std::log1p(arg) / q_minus_one;
}

double qexp_decay(double x, double q_minus_one, double exponent_scale) {
  require_positive(q_minus_one, "q - 1");
  if (!(x >= 0.0)) {
    throw std::domain_error("qexp_decay requires x >= 0");
  }
  return std::exp(-exponent_scale * q_log1p(x, q_minus_one));
}

TransformedQ transform_q(double q_minus_one, double scale) {
  require_positive(q_minus_one, "q - 1");
  require_positive(scale, "transformation scale");
  return TransformedQ{q_minus_one * scale, scale};
}

double untransform_q(const TransformedQ& t) {
  return t.q_prime_minus_one / t.scale;
}

double ln_gamma(double z) {
  if (!(z > 0.0) || !std::isfinite(z)) {
    throw std::domain_error("ln_gamma requires a positive finite argument");
  }
  if (z < 0.5) {
    return ln_gamma(z + 1.0) - std::log(z);
  }
  static constexpr double g = 7.0;
  static constexpr std::array<double, 9> coef = {
      0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
      771.32342877765313,      -176.61502916214059,   12.507343278686905,
      -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
  const double x = z - 1.0;
  double series = coef[0];
  for (std::size_t i = 1; i < coef.size(); ++i) {
    series += coef[i] / (x + static_cast<double>(i));
  }
  const double t = x + g + 0.5;
  const double half_ln_two_pi = 0.5 * std::log(2.0 * std::numbers::pi);
  return half_ln_two_pi + (x + 0.5) * std::log(t) - t + std::log(series);
}

namespace {

// Stirling correction ln Gamma(z) - [(z - 1/2) ln z - z + ln(2 pi)/2].
double stirling_tail(double z) {
  const double inv = 1.0 / z;
  const double inv2 = inv * inv;
  return inv * (1.0 / 12 -
                inv2 * (1.0 / 360 - inv2 * (1.0 / 1260 - inv2 * (1.0 / 1680 - inv2 / 1188))));
}

}  // namespace

double ln_gamma_ratio(double x, double y) {
  if (!(x > 0.0) || !(y > 0.0) || !std::isfinite(x) || !std::isfinite(y)) {
    throw std::domain_error("ln_gamma_ratio requires positive finite arguments");
  }
  if (std::min(x, y) < 20.0) {
    return ln_gamma(x) - ln_gamma(y);
  }
  // y = x + d:  (x-1/2)ln x - (y-1/2)ln y + d = -d ln x - (y-1/2) log1p(d/x) + d
  const double d = y - x;
  return -d * std::log(x) - (y - 0.5) * std::log1p(d / x) + d + stirling_tail(x) -
         stirling_tail(y);
}

double digamma(double z) {
  if (!(z > 0.0) || !std::isfinite(z)) {
    throw std::domain_error("digamma requires a positive finite argument");
  }
  double shift = 0.0;
  while (z < 12.0) {
    shift -= 1.0 / z;
    z += 1.0;
  }
  const double inv2 = 1.0 / (z * z);
  const double tail =
      inv2 * (1.0 / 12 - inv2 * (1.0 / 120 - inv2 * (1.0 / 252 - inv2 * (1.0 / 240 - inv2 / 132))));
  return shift + std::log(z) - 0.5 / z - tail;
}

double ln_beta(double x, double y) {
  require_positive(x, "Beta argument x");
  require_positive(y, "Beta argument y");
  return ln_gamma(x) + ln_gamma(y) - ln_gamma(x + y);
}

double beta_fn(double x, double y) {
  return std::exp(ln_beta(x, y));
}

double hyp2f1_series(double a, double b, double c, double w) {
  if (is_non_positive_integer(c)) {
    throw std::domain_error("hyp2f1: c must not be a non-positive integer");
  }
  if (!(std::fabs(w) < 1.0)) {
    throw std::domain_error("hyp2f1 series requires |w| < 1");
  }
  // Past this index every Pochhammer factor has a fixed sign, so a small term
  // really does mark the tail.
  const double settle = std::max({0.0, -a, -b, -c});
  double sum = 1.0;
  double term = 1.0;
  for (std::size_t k = 0; k < kMaxSeriesTerms; ++k) {
    const double kd = static_cast<double>(k);
    term *= (a + kd) * (b + kd) / ((c + kd) * (kd + 1.0)) * w;
    sum += term;
    if (term == 0.0) {
      return sum;
    }
    if (kd + 1.0 > settle && std::fabs(term) < kSeriesRelTol * std::fabs(sum)) {
      return sum;
    }
  }
  throw convergence_error("hyp2f1: series did not converge within 10^6 terms (w = " +
                          std::to_string(w) + ")");
}

double hyp2f1(double a, double b, double c, double z) {
  if (!(z < 1.0)) {
    throw std::domain_error("hyp2f1 is implemented for z < 1 only");
  }
  if (z < 0.0) {
    const double w = z / (z - 1.0);
    return std::exp(-a * std::log1p(-z)) * hyp2f1_series(a, c - b, c, w);
  }
  return hyp2f1_series(a, b, c, z);
}

}  // namespace qboot
