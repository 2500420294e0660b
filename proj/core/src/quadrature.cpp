#include "qboot/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <sstream>
#include <vector>

namespace qboot {

namespace {

// 21-point Kronrod abscissae/weights and the embedded 10-point Gauss weights
// (QUADPACK qk21).
constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208980610838, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr std::size_t kInitialPanels = 4;

struct Segment {
  double a;
  double b;
  double value;
  double error;
  bool resolvable;
};

struct WorseFirst {
  bool operator()(const Segment& x, const Segment& y) const {
    if (x.error != y.error) return x.error < y.error;
    return x.a > y.a;
  }
};

// Integrand on the working interval, with the original abscissa kept for
// diagnostics.
class MappedIntegrand {
 public:
  MappedIntegrand(const Integrand& f, const IntegrandSpec& spec) : f_(f) {
    lower_ = spec.lower;
    if (std::isinf(spec.upper)) {
      if (spec.tail_exponent_hint) {
        kind_ = Kind::PowerLaw;
        inv_pm1_ = 1.0 / (*spec.tail_exponent_hint - 1.0);
        scale_ = spec.tail_scale ? *spec.tail_scale : (lower_ > 0.0 ? lower_ : 1.0);
      } else {
        kind_ = Kind::Rational;
      }
      t0_ = 0.0;
      t1_ = 1.0;
    } else {
      kind_ = Kind::Identity;
      t0_ = spec.lower;
      t1_ = spec.upper;
    }
  }

  double t0() const { return t0_; }
  double t1() const { return t1_; }
  std::size_t calls() const { return calls_; }

  double operator()(double t) {
    double x = t;
    double jac = 1.0;
    switch (kind_) {
      case Kind::Identity:
        break;
      case Kind::Rational: {
        const double s = 1.0 - t;
        x = lower_ + t / s;
        jac = 1.0 / (s * s);
        break;
      }
      case Kind::PowerLaw: {
        // x = lower + L (u^(-1/(p-1)) - 1),  dx/du = -L/(p-1) u^(-1/(p-1)-1)
        const double lnu = std::log(t);
        const double growth = std::exp(-lnu * inv_pm1_);
        x = lower_ + scale_ * std::expm1(-lnu * inv_pm1_);
        jac = scale_ * inv_pm1_ * growth / t;
        break;
      }
    }
    ++calls_;
    if (!std::isfinite(x)) {
      return 0.0;
    }
    const double fx = f_(x);
    if (!std::isfinite(fx)) {
      std::ostringstream msg;
      msg << "integrand is not finite at x = " << x;
      throw non_finite_integrand(msg.str(), x);
    }
    if (fx == 0.0) {
      return 0.0;
    }
    const double v = fx * jac;
    return std::isfinite(v) ? v : 0.0;
  }

 private:
  enum class Kind { Identity, Rational, PowerLaw };

  const Integrand& f_;
  Kind kind_ = Kind::Identity;
  double lower_ = 0.0;
  double inv_pm1_ = 0.0;
  double scale_ = 1.0;
  double t0_ = 0.0;
  double t1_ = 1.0;
  std::size_t calls_ = 0;
};

Segment kronrod21(MappedIntegrand& g, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = g(center);
  double kronrod = fc * kWgk[10];
  double gauss = 0.0;
  double abs_sum = std::fabs(kronrod);
  std::array<double, 10> f1{};
  std::array<double, 10> f2{};
  for (std::size_t j = 0; j < 10; ++j) {
    const double dx = half * kXgk[j];
    f1[j] = g(center - dx);
    f2[j] = g(center + dx);
    const double pair = f1[j] + f2[j];
    kronrod += kWgk[j] * pair;
    abs_sum += kWgk[j] * (std::fabs(f1[j]) + std::fabs(f2[j]));
    if (j % 2 == 1) {
      gauss += kWg[j / 2] * pair;
    }
  }
  const double mean = 0.5 * kronrod;
  double asc = kWgk[10] * std::fabs(fc - mean);
  for (std::size_t j = 0; j < 10; ++j) {
    asc += kWgk[j] * (std::fabs(f1[j] - mean) + std::fabs(f2[j] - mean));
  }
  const double value = kronrod * half;
  const double resabs = abs_sum * std::fabs(half);
  const double resasc = asc * std::fabs(half);
  double err = std::fabs((kronrod - gauss) * half);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  if (resabs > std::numeric_limits<double>::min() / (50.0 * kEps)) {
    err = std::max(50.0 * kEps * resabs, err);
  }
  const double width_floor = 100.0 * kEps * std::max({std::fabs(a), std::fabs(b), 1e-300});
  return Segment{a, b, value, err, (b - a) > width_floor};
}

void validate(const IntegrandSpec& spec, double rel_tol, double abs_tol) {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
    throw std::invalid_argument("quadrature tolerances must be positive");
  }
  if (!std::isfinite(spec.lower) || std::isnan(spec.upper) || !(spec.lower < spec.upper)) {
    throw std::invalid_argument("quadrature interval requires finite lower < upper");
  }
  if (std::isinf(spec.upper) && spec.tail_exponent_hint) {
    const double p = *spec.tail_exponent_hint;
    if (!(p > 1.0)) {
      std::ostringstream msg;
      msg << "integral diverges: tail exponent " << p << " <= 1";
      throw divergent_integral(msg.str(), p);
    }
    if (spec.tail_scale && !(*spec.tail_scale > 0.0)) {
      throw std::invalid_argument("tail_scale must be positive");
    }
  }
}

}  // namespace

QuadratureResult integrate(const Integrand& f, const IntegrandSpec& spec, double rel_tol,
                           double abs_tol) {
  validate(spec, rel_tol, abs_tol);
  MappedIntegrand g(f, spec);

  std::priority_queue<Segment, std::vector<Segment>, WorseFirst> work;
  const double step = (g.t1() - g.t0()) / static_cast<double>(kInitialPanels);
  for (std::size_t i = 0; i < kInitialPanels; ++i) {
    const double a = g.t0() + step * static_cast<double>(i);
    const double b = (i + 1 == kInitialPanels) ? g.t1() : a + step;
    work.push(kronrod21(g, a, b));
  }

  auto totals = [&work]() {
    // priority_queue hides its container; copy to sum in a fixed order.
    auto copy = work;
    double value = 0.0;
    double error = 0.0;
    while (!copy.empty()) {
      value += copy.top().value;
      error += copy.top().error;
      copy.pop();
    }
    return std::pair{value, error};
  };

  double value = 0.0;
  double error = 0.0;
  {
    auto [v, e] = totals();
    value = v;
    error = e;
  }
  std::vector<Segment> frozen;
  double frozen_value = 0.0;
  double frozen_error = 0.0;

  while (error > std::max(rel_tol * std::fabs(value), abs_tol)) {
    if (work.empty()) {
      throw tolerance_not_met("quadrature: subintervals exhausted before tolerance was met",
                              QuadratureResult{value, error, g.calls()});
    }
    if (g.calls() >= kMaxEvaluations) {
      throw tolerance_not_met("quadrature: evaluation budget exhausted",
                              QuadratureResult{value, error, g.calls()});
    }
    const Segment worst = work.top();
    work.pop();
    if (!worst.resolvable) {
      frozen.push_back(worst);
      frozen_value += worst.value;
      frozen_error += worst.error;
      continue;
    }
    const double mid = 0.5 * (worst.a + worst.b);
    const Segment left = kronrod21(g, worst.a, mid);
    const Segment right = kronrod21(g, mid, worst.b);
    value += (left.value + right.value) - worst.value;
    error += (left.error + right.error) - worst.error;
    work.push(left);
    work.push(right);
  }

  // Re-sum from the segment list to shed accumulated update rounding.
  auto [v, e] = totals();
  return QuadratureResult{v + frozen_value, e + frozen_error, g.calls()};
}

double qtail_exponent(double q_minus_one, double prefactor_power) {
  if (!(q_minus_one > 0.0)) {
    throw std::domain_error("qtail_exponent requires q > 1");
  }
  return 1.0 / q_minus_one - prefactor_power;
}

QuadratureResult integrate_qtail(const Integrand& f, double lower, double q_minus_one,
                                 double decay_scale, double rel_tol, double prefactor_power) {
  if (!(decay_scale > 0.0)) {
    throw std::domain_error("integrate_qtail requires a positive decay scale");
  }
  const double p = qtail_exponent(q_minus_one, prefactor_power);
  if (!(p > 1.0)) {
    std::ostringstream msg;
    msg << "integral diverges: q-exponential tail exponent " << p << " <= 1";
    throw divergent_integral(msg.str(), p);
  }
  IntegrandSpec spec;
  spec.lower = lower;
  spec.tail_exponent_hint = p;
  spec.tail_scale = 1.0 / (q_minus_one * decay_scale);
  return integrate(f, spec, rel_tol, std::numeric_limits<double>::min());
}

}  // namespace qboot
