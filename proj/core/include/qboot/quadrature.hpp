#pragma once

// Adaptive Gauss-Kronrod quadrature over finite and semi-infinite intervals.
//
// The algorithm is a global adaptive bisection scheme on the 21-point Kronrod
// rule with QUADPACK-style error scaling. Semi-infinite intervals are mapped
// onto (0, 1]: by default through x = lower + t / (1 - t), or, when the caller
// declares the power p of an algebraic tail f(x) ~ x^-p, through
//
//   x = lower + L * (u^(-1/(p-1)) - 1)
//
// which makes the mapped integrand bounded for a pure power law. L is the
// supplied tail_scale, or `lower` itself when that is positive (so the map
// reduces to x = lower * u^(-1/(p-1))), or 1.
//
// Subdivision order is fully determined by the error estimates (ties broken by
// position), so repeated calls return bit-identical results.

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace qboot {

using Integrand = std::function<double(double)>;

inline constexpr double kDefaultRelTol = 1e-8;
inline constexpr double kDefaultAbsTol = 1e-12;
inline constexpr std::size_t kMaxEvaluations = 1'000'000;

struct IntegrandSpec {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  /// Asymptotic decay power p with f(x) ~ x^-p. Only used for infinite upper limits.
  std::optional<double> tail_exponent_hint;
  /// Length scale L of the power-law map (see file comment).
  std::optional<double> tail_scale;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t evaluations = 0;
};

class quadrature_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The adaptive scheme ran out of evaluations (or of resolvable subintervals)
/// before meeting the tolerance. Carries the best estimate reached.
class tolerance_not_met : public quadrature_error {
 public:
  tolerance_not_met(const std::string& what, QuadratureResult best)
      : quadrature_error(what), best_(best) {}
  const QuadratureResult& best() const noexcept { return best_; }

 private:
  QuadratureResult best_;
};

class non_finite_integrand : public quadrature_error {
 public:
  non_finite_integrand(const std::string& what, double abscissa)
      : quadrature_error(what), abscissa_(abscissa) {}
  double abscissa() const noexcept { return abscissa_; }

 private:
  double abscissa_;
};

/// A semi-infinite integral whose declared tail decays no faster than 1/x.
class divergent_integral : public quadrature_error {
 public:
  divergent_integral(const std::string& what, double tail_exponent)
      : quadrature_error(what), tail_exponent_(tail_exponent) {}
  double tail_exponent() const noexcept { return tail_exponent_; }

 private:
  double tail_exponent_;
};

/// Integrates f over [spec.lower, spec.upper].
///
/// Stops once the global error estimate is at most max(rel_tol*|value|, abs_tol).
/// Throws tolerance_not_met after kMaxEvaluations integrand calls,
/// non_finite_integrand if f returns NaN or infinity, divergent_integral if
/// a declared tail exponent is <= 1, and std::invalid_argument for a malformed
/// spec or non-positive tolerances.
QuadratureResult integrate(const Integrand& f, const IntegrandSpec& spec,
                           double rel_tol = kDefaultRelTol, double abs_tol = kDefaultAbsTol);

/// Tail power of x^k [1 + (q-1) s x]^(-1/(q-1)): 1/(q-1) - k.
double qtail_exponent(double q_minus_one, double prefactor_power);

/// Integrates f over [lower, inf) where f behaves like
/// x^prefactor_power * [1 + (q-1) * decay_scale * x]^(-1/(q-1)) for large x.
///
/// The tail exponent and the map scale L = 1 / ((q-1) * decay_scale) are
/// derived from the declared decay. Tolerance is purely relative. Throws
/// divergent_integral when the derived exponent is <= 1, which is exactly
/// the condition under which the integral does not exist.
QuadratureResult integrate_qtail(const Integrand& f, double lower, double q_minus_one,
                                 double decay_scale, double rel_tol = kDefaultRelTol,
                                 double prefactor_power = 0.0);

}  // namespace qboot
