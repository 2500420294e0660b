#pragma once

// q-deformed elementary functions and the special functions the rest of the
// library is built on.
//
// Units are natural (hbar = c = k_B = 1): energies and masses in GeV, inverse
// temperatures in GeV^-1. The entropic index is carried as q - 1 wherever it
// multiplies an argument, so that q -> 1+ limits stay accurate.

#include <stdexcept>

namespace qboot {

/// Raised by series evaluations that fail to reach their truncation
/// criterion within the term budget.
class convergence_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Entropic index and inverse effective temperature of a q-Boltzmann weight.
class QDeform {
 public:
  static QDeform from_q(double q, double beta);
  static QDeform from_q_minus_one(double q_minus_one, double beta);

  double q() const noexcept { return 1.0 + q_minus_one_; }
  double q_minus_one() const noexcept { return q_minus_one_; }
  double beta() const noexcept { return beta_; }

 private:
  QDeform(double q_minus_one, double beta) : q_minus_one_(q_minus_one), beta_(beta) {}

  double q_minus_one_;
  double beta_;
};

/// Result of rescaling a q-exponential argument: (q - 1) * scale = q' - 1.
struct TransformedQ {
  double q_prime_minus_one;
  double scale;

  double q_prime() const noexcept { return 1.0 + q_prime_minus_one; }
};

/// log1p((q-1) x) / (q-1); tends to x as q -> 1. Every q-exponential in the
/// library is exp(+-s * q_log1p(x, q-1)).
double q_log1p(double x, double q_minus_one);

/// [1 + (q-1) x]^(-exponent_scale / (q-1)).
///
/// exponent_scale = q gives the q-Boltzmann weight, exponent_scale = 1 the bare
/// q-exponential decay. Converges to exp(-exponent_scale * x) as q -> 1+.
/// Throws std::domain_error when q <= 1, x < 0 or the base is not positive.
double qexp_decay(double x, double q_minus_one, double exponent_scale);

/// q' = 1 + (q - 1) * scale. Throws std::domain_error unless q > 1, scale > 0.
TransformedQ transform_q(double q_minus_one, double scale);

/// Inverse of transform_q: recovers q - 1 from (q' - 1, scale).
double untransform_q(const TransformedQ& t);

/// Natural log of Gamma(z) for z > 0 (Lanczos, g = 7).
double ln_gamma(double z);

/// ln Gamma(x) - ln Gamma(y) for x, y > 0. For large arguments the Stirling
/// series is differenced analytically, avoiding the cancellation between two
/// large log-Gamma values.
double ln_gamma_ratio(double x, double y);

/// Digamma psi(z) for z > 0 (upward recurrence to z >= 6, then the
/// asymptotic series).
double digamma(double z);

double ln_beta(double x, double y);

/// Euler Beta function B(x, y) for x, y > 0.
double beta_fn(double x, double y);

/// Gauss hypergeometric 2F1(a, b; c; z) for z < 1.
///
/// Arguments z < 0 are mapped into [0, 1) with the Pfaff transformation
///   2F1(a, b; c; z) = (1 - z)^(-a) 2F1(a, c - b; c; z / (z - 1)),
/// after which the power series is summed until a term falls below 1e-14 of
/// the partial sum. Throws convergence_error after 10^6 terms and
/// std::domain_error for z >= 1 or c a non-positive integer.
double hyp2f1(double a, double b, double c, double z);

/// The bare power series of 2F1(a, b; c; w) for |w| < 1, without any
/// transformation. Callers that keep the Pfaff prefactor in log space use
/// this directly.
double hyp2f1_series(double a, double b, double c, double w);

}  // namespace qboot
