#include "qboot/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "qboot/quadrature.hpp"

namespace qboot {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEulerGamma = std::numbers::egamma;
constexpr double kMatchTol = 1e-9;
constexpr double kBootstrapRelTol = 1e-10;

void check(bool ok, const char* field, const char* rule) {
  if (!ok) {
    throw std::invalid_argument(std::string(field) + ": " + rule);
  }
}

bool finite_positive(double v) {
  return v > 0.0 && std::isfinite(v);
}

// exp(-gap * ln(1 + k m)/k): the combined q-factor of the mass integrand under
// matched deformation, and the energy-integral weight without its extra power.
double gap_factor(double m, double gap, double k) {
  return std::exp(-gap * q_log1p(m, k));
}

ZqValue make_status(Representation rep, double beta, const BootstrapParams& p) {
  ZqValue z;
  z.representation = rep;
  z.validity.above_limiting_temperature = beta > p.beta0;
  z.validity.convergence_constraint = convergence_constraint_holds(beta, p);
  if (!z.validity.above_limiting_temperature) {
    z.status = ZqStatus::divergent;
    std::ostringstream msg;
    msg << "partition function diverges: beta = " << beta << " <= beta0 = " << p.beta0;
    z.message = msg.str();
  } else if (!z.validity.convergence_constraint) {
    z.status = ZqStatus::constraint_violation;
    std::ostringstream msg;
    msg << "energy integral does not converge: (beta - beta0)/(q0' - 1) = "
        << (beta - p.beta0) / p.q0_prime_minus_one << " <= a + 1 = " << p.a_exp + 1.0;
    z.message = msg.str();
  }
  return z;
}

void finish(ZqValue& z, double value) {
  if (!std::isfinite(value)) {
    z.status = ZqStatus::divergent;
    z.message = "partition function overflows double precision";
    return;
  }
  z.value = value;
}

}  // namespace

void BootstrapParams::validate() const {
  check(finite_positive(beta0), "beta0", "must be positive");
  check(finite_positive(q0_prime_minus_one), "q0_prime_minus_one", "must be positive (q0' > 1)");
  check(finite_positive(gamma_const), "gamma", "must be positive");
  check(finite_positive(b_const), "b", "must be positive");
  check(std::isfinite(a_exp) && a_exp > -1.0, "a", "must exceed -1");
  check(finite_positive(V0), "V0", "must be positive");
}

double BootstrapParams::alpha(double beta) const {
  return gamma_const * V0 / (2.0 * kPi * kPi * std::pow(beta, 1.5));
}

void CutoffParams::validate() const {
  check(finite_positive(M), "M", "must be positive");
  check(finite_positive(m_tilde) && m_tilde < M, "m_tilde", "must lie in (0, M)");
  check(finite_positive(a_tilde), "a_tilde", "must be positive");
  check(finite_positive(m_min) && m_min < M, "m_min", "must lie in (0, M)");
}

CutoffParams CutoffParams::defaults_for(const BootstrapParams& p) {
  CutoffParams c;
  c.M = 20.0 / p.beta0;
  c.m_tilde = c.M / 100.0;
  c.a_tilde = 0.05 / c.m_tilde;
  c.m_min = kPionMassGeV;
  return c;
}

std::string_view to_string(Representation r) {
  switch (r) {
    case Representation::energy_rep: return "energy_rep";
    case Representation::mass_rep: return "mass_rep";
    case Representation::gamma_closed_form: return "gamma_closed_form";
    case Representation::asymptotic: return "asymptotic";
  }
  return "unknown";
}

std::string_view to_string(ZqStatus s) {
  switch (s) {
    case ZqStatus::ok: return "ok";
    case ZqStatus::divergent: return "divergent";
    case ZqStatus::constraint_violation: return "constraint_violation";
  }
  return "unknown";
}

double ln_mass_spectrum(double m, const BootstrapParams& p) {
  if (!(m > 0.0)) throw std::domain_error("mass_spectrum requires m > 0");
  return std::log(p.gamma_const) - 2.5 * std::log(m) + p.beta0 * q_log1p(m, p.q0_prime_minus_one);
}

double mass_spectrum(double m, const BootstrapParams& p) {
  return std::exp(ln_mass_spectrum(m, p));
}

double ln_level_density(double E, const BootstrapParams& p) {
  if (!(E > 0.0)) throw std::domain_error("level_density requires E > 0");
  return std::log(p.b_const) + p.a_exp * std::log(E) +
         p.beta0 * q_log1p(E, p.q0_prime_minus_one);
}

double level_density(double E, const BootstrapParams& p) {
  return std::exp(ln_level_density(E, p));
}

double momentum_integral_numeric(double m, int n, const QDeform& d) {
  if (!(m > 0.0)) throw std::domain_error("momentum integral requires m > 0");
  if (n < 1) throw std::domain_error("momentum integral requires n >= 1");
  const double qm1 = d.q_minus_one();
  const double beta = d.beta();
  const double power = static_cast<double>(n) * d.q();  // exponent is power/(q-1)
  // Factor out the value at p = 0 so the integrand stays O(1) for large beta*m.
  const double ln_edge = -power * q_log1p(beta * m, qm1);
  auto f = [&](double p) {
    const double energy = std::hypot(p, m);
    return p * p * std::exp(-power * (q_log1p(beta * energy, qm1) - q_log1p(beta * m, qm1)));
  };
  const auto r = integrate_qtail(f, 0.0, qm1 / power, power * beta, kBootstrapRelTol, 2.0);
  return r.value * std::exp(ln_edge);
}

double momentum_integral_asymptotic(double m, int n, const QDeform& d) {
  const double nb = static_cast<double>(n) * d.beta();
  return std::pow(m, 1.5) / std::pow(nb, 1.5) * std::exp(-q_log1p(nb * m, d.q_minus_one()));
}

bool convergence_constraint_holds(double beta, const BootstrapParams& p) {
  const double gap = beta - p.beta0;
  return gap > 0.0 && gap / p.q0_prime_minus_one > p.a_exp + 1.0;
}

QDeform matched_deformation(double beta, const BootstrapParams& p) {
  return QDeform::from_q_minus_one(p.q0_prime_minus_one / beta, beta);
}

ZqValue zq_mass_rep(const QDeform& d, const BootstrapParams& p, const CutoffParams& cut) {
  p.validate();
  cut.validate();
  const double beta = d.beta();
  ZqValue z = make_status(Representation::mass_rep, beta, p);
  const double k = p.q0_prime_minus_one;
  const double k2 = beta * d.q_minus_one();  // q'' - 1
  z.validity.matched_deformation = std::fabs(k2 - k) <= kMatchTol * k;
  if (!z.validity.matched_deformation) {
    std::ostringstream msg;
    msg << "deformation not matched: q'' - 1 = beta (q - 1) = " << k2 << ", q0' - 1 = " << k;
    z.message = z.message.empty() ? msg.str() : z.message + "; " + msg.str();
  }
  if (z.status != ZqStatus::ok) {
    return z;
  }

  // m^(3/2) rho(m) [1 + (q''-1) m]^(-beta/(q''-1)) = (gamma/m) exp(beta0 L(m,k) - beta L(m,k'')),
  // with gamma carried by alpha(beta).
  const double tail_power = 1.0 + 1.0 / d.q_minus_one() - p.beta0 / k;
  if (!(tail_power > 1.0)) {
    z.status = ZqStatus::divergent;
    const std::string msg = "mass integral diverges: spectrum growth outpaces the q-Boltzmann decay";
    z.message = z.message.empty() ? msg : z.message + "; " + msg;
    return z;
  }
  auto integrand = [&](double m) {
    return std::exp(p.beta0 * q_log1p(m, k) - beta * q_log1p(m, k2)) / m;
  };
  const auto low = integrate(integrand, IntegrandSpec{cut.m_min, cut.M, {}, {}},
                             kBootstrapRelTol, std::numeric_limits<double>::min());
  IntegrandSpec tail_spec{cut.M, std::numeric_limits<double>::infinity(), tail_power, 1.0 / k2};
  const auto high = integrate(integrand, tail_spec, kBootstrapRelTol,
                              std::numeric_limits<double>::min());
  const double exponent = p.alpha(beta) * (low.value + high.value);
  finish(z, std::expm1(exponent));
  return z;
}

ZqValue zq_energy_rep(const QDeform& d, const BootstrapParams& p) {
  p.validate();
  const double beta = d.beta();
  ZqValue z = make_status(Representation::energy_rep, beta, p);
  if (z.status != ZqStatus::ok) {
    return z;
  }
  const double k = p.q0_prime_minus_one;
  const double gap = beta - p.beta0;
  const double r = gap / k;
  const double a = p.a_exp;
  auto weight = [&](double E) { return std::exp(-(r + 1.0) * k * q_log1p(E, k)); };

  // Split where the weight has fallen by ~e^-(a+1): below, E = t^(1/(a+1))
  // removes the E^a endpoint behaviour; above, the power-law tail.
  const double split = (a + 1.0) / std::max(gap, k);
  const double inv_ap1 = 1.0 / (a + 1.0);
  auto near = [&](double t) { return weight(std::pow(t, inv_ap1)); };
  const auto head = integrate(near, IntegrandSpec{0.0, std::pow(split, a + 1.0), {}, {}},
                              kBootstrapRelTol, std::numeric_limits<double>::min());
  auto far = [&](double E) { return std::pow(E, a) * weight(E); };
  const auto tail = integrate_qtail(far, split, 1.0 / (r + 1.0), k * (r + 1.0),
                                    kBootstrapRelTol, a);
  finish(z, p.b_const * (head.value * inv_ap1 + tail.value));
  return z;
}

double ln_zq_gamma_closed_form(double beta, const BootstrapParams& p) {
  const double k = p.q0_prime_minus_one;
  const double r = (beta - p.beta0) / k;
  const double a = p.a_exp;
  return std::log(p.b_const) + ln_gamma(a + 1.0) + ln_gamma_ratio(r - a, r + 1.0) -
         (a + 1.0) * std::log(k);
}

ZqValue zq_gamma_closed_form(const QDeform& d, const BootstrapParams& p) {
  p.validate();
  ZqValue z = make_status(Representation::gamma_closed_form, d.beta(), p);
  if (z.status == ZqStatus::ok) {
    finish(z, std::exp(ln_zq_gamma_closed_form(d.beta(), p)));
  }
  return z;
}

ZqValue zq_asymptotic(const QDeform& d, const BootstrapParams& p) {
  p.validate();
  ZqValue z = make_status(Representation::asymptotic, d.beta(), p);
  if (z.status == ZqStatus::ok) {
    const double gap = d.beta() - p.beta0;
    const double ap1 = p.a_exp + 1.0;
    finish(z, std::exp(std::log(p.b_const) + ln_gamma(ap1) - ap1 * std::log(gap)));
  }
  return z;
}

double closed_form_local_exponent(double beta, const BootstrapParams& p) {
  const double r = (beta - p.beta0) / p.q0_prime_minus_one;
  return r * (digamma(r + 1.0) - digamma(r - p.a_exp));
}

double tail_integral_hypergeometric(double q_minus_one, double scale_a, double M) {
  if (!(q_minus_one > 0.0) || !(scale_a > 0.0) || !(M > 0.0)) {
    throw std::domain_error("tail_integral_hypergeometric requires positive arguments");
  }
  const double s = 1.0 / q_minus_one;
  const double u = 1.0 / (scale_a * M * q_minus_one);
  // u^s 2F1(s, s; s+1; -u) = (u/(1+u))^s 2F1(s, 1; s+1; u/(1+u))  (Pfaff)
  const double w = u / (1.0 + u);
  return q_minus_one * std::exp(-s * std::log1p(1.0 / u)) * hyp2f1_series(s, 1.0, s + 1.0, w);
}

TailDivergenceReport tail_log_divergence(const BootstrapParams& p, const CutoffParams& cut,
                                         double beta) {
  p.validate();
  cut.validate();
  const double gap = beta - p.beta0;
  if (!(gap > 0.0)) {
    throw std::domain_error("tail integral diverges for beta <= beta0");
  }
  const double k = p.q0_prime_minus_one;
  TailDivergenceReport rep;
  rep.beta = beta;
  rep.gap = gap;

  auto integrand = [&](double m) { return gap_factor(m, gap, k) / m; };
  const auto tail = integrate_qtail(integrand, cut.M, k / gap, gap, kBootstrapRelTol, -1.0);
  rep.quadrature = tail.value;
  rep.quadrature_error = tail.error_estimate;

  // Same integral in the form [1 + (q-1) a m]^(-1/(q-1)) with a = gap, q - 1 = k/gap.
  try {
    rep.hypergeometric = tail_integral_hypergeometric(k / gap, gap, cut.M);
  } catch (const convergence_error& e) {
    rep.warnings.emplace_back(std::string("hypergeometric route unavailable: ") + e.what());
  }

  const auto inner = integrate(integrand, IntegrandSpec{cut.m_tilde, cut.M, {}, {}},
                               kBootstrapRelTol, std::numeric_limits<double>::min());
  rep.anchored_estimate = std::log(1.0 / gap) + std::log(cut.a_tilde) - inner.value;
  rep.log_estimate = std::log(1.0 / gap) - std::log(k * cut.M);
  rep.anchored_deviation = rep.anchored_estimate - rep.quadrature;
  rep.log_deviation = rep.log_estimate - rep.quadrature;

  rep.anchor_factor = std::exp(-cut.a_tilde * q_log1p(cut.m_tilde, k));
  if (rep.anchor_factor < 0.9) {
    rep.regime_ok = false;
    std::ostringstream msg;
    msg << "anchor factor [1 + (q0'-1) m_tilde]^(-a_tilde/(q0'-1)) = " << rep.anchor_factor
        << " is not ~1 (10% level); decrease a_tilde * m_tilde";
    rep.warnings.push_back(msg.str());
  }
  if (!(cut.a_tilde > gap)) {
    rep.regime_ok = false;
    rep.warnings.emplace_back("a_tilde must exceed beta - beta0 for the anchored estimate");
  }
  if (!(gap > k)) {
    // decay power gap/(q0'-1) <= 1: the far tail ~ (q0'-1)/gap dominates, not ln(1/gap)
    rep.regime_ok = false;
    rep.warnings.emplace_back(
        "(beta - beta0)/(q0'-1) <= 1: the tail is a slow power law and the logarithmic "
        "estimates do not apply");
  }
  return rep;
}

double fq_constant(const BootstrapParams& p, const CutoffParams& cut, double beta) {
  p.validate();
  cut.validate();
  const double gap = beta - p.beta0;
  const double k = p.q0_prime_minus_one;
  auto weight = [&](double m) { return gap_factor(m, gap, k) / m; };
  const double tiny = std::numeric_limits<double>::min();
  const double z1 =
      p.gamma_const *
      integrate(weight, IntegrandSpec{cut.m_min, cut.M, {}, {}}, kBootstrapRelTol, tiny).value;
  const double inner =
      integrate(weight, IntegrandSpec{cut.m_tilde, cut.M, {}, {}}, kBootstrapRelTol, tiny).value;
  return z1 + std::exp(p.alpha(beta) * (std::log(cut.a_tilde) - inner));
}

namespace {

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("QBOOTSTRAP_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) {
      return static_cast<unsigned>(v);
    }
  }
  return 1;
}

ScanRow scan_point(double beta, const BootstrapParams& p) {
  ScanRow row;
  row.beta = beta;
  row.gap = beta - p.beta0;
  if (!(row.gap > 0.0)) {
    row.status = ZqStatus::divergent;
    return row;
  }
  row.ln_inv_gap = -std::log(row.gap);
  if (!convergence_constraint_holds(beta, p)) {
    row.status = ZqStatus::constraint_violation;
    return row;
  }
  const double ln_z = ln_zq_gamma_closed_form(beta, p);
  row.ln_zq = ln_z;
  row.zq = std::exp(ln_z);
  return row;
}

}  // namespace

ScanResult singularity_scan(const BootstrapParams& p, const std::vector<double>& beta_grid,
                            unsigned threads) {
  p.validate();
  ScanResult out;
  out.rows.resize(beta_grid.size());
  out.predicted_slope = p.a_exp + 1.0;

  const unsigned workers =
      std::max(1u, std::min<unsigned>(resolve_threads(threads),
                                      static_cast<unsigned>(beta_grid.size())));
  if (workers <= 1) {
    for (std::size_t i = 0; i < beta_grid.size(); ++i) {
      out.rows[i] = scan_point(beta_grid[i], p);
    }
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (beta_grid.size() + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t lo = w * chunk;
      const std::size_t hi = std::min(beta_grid.size(), lo + chunk);
      pool.emplace_back([&, lo, hi] {
        for (std::size_t i = lo; i < hi; ++i) out.rows[i] = scan_point(beta_grid[i], p);
      });
    }
  }

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, local = 0.0;
  std::size_t n = 0;
  for (const auto& row : out.rows) {
    if (row.status != ZqStatus::ok) continue;
    const double x = *row.ln_inv_gap;
    const double y = *row.ln_zq;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    local += closed_form_local_exponent(row.beta, p);
    ++n;
  }
  out.points_used = n;
  if (n >= 1) {
    out.gamma_corrected_slope = local / static_cast<double>(n);
  }
  if (n >= 2) {
    const double nn = static_cast<double>(n);
    const double denom = nn * sxx - sx * sx;
    if (denom > 0.0) {
      out.slope = (nn * sxy - sx * sy) / denom;
      out.intercept = (sy - *out.slope * sx) / nn;
    }
  }
  return out;
}

ConsistencyReport consistency_report(const BootstrapParams& p, const QDeform& d,
                                     const CutoffParams& cut) {
  p.validate();
  cut.validate();
  ConsistencyReport rep;

  auto& wc = rep.weak_constraint;
  wc.ln_sigma = ln_level_density(wc.x, p);
  wc.ln_rho = ln_mass_spectrum(wc.x, p);
  wc.ratio = wc.ln_sigma / wc.ln_rho;
  wc.pass = std::fabs(wc.ratio - 1.0) <= 0.01;

  auto& md = rep.matched_deformation;
  md.q0_prime_minus_one = p.q0_prime_minus_one;
  md.q_double_prime_minus_one = d.beta() * d.q_minus_one();
  md.pass = std::fabs(md.q_double_prime_minus_one - md.q0_prime_minus_one) <=
            kMatchTol * md.q0_prime_minus_one;

  auto& em = rep.exponent_matching;
  em.a_plus_one = p.a_exp + 1.0;
  em.alpha_at_beta0 = p.alpha(p.beta0);
  em.implied_V0 = closing_volume(p);
  em.implied_a = em.alpha_at_beta0 - 1.0;
  em.pass = std::fabs(em.alpha_at_beta0 - em.a_plus_one) <= kMatchTol * em.a_plus_one;

  auto& fq = rep.fq_constancy;
  fq.fq_near = fq_constant(p, cut, p.beta0 + fq.gap_near);
  fq.fq_far = fq_constant(p, cut, p.beta0 + fq.gap_far);
  fq.rel_diff = std::fabs(fq.fq_far - fq.fq_near) / std::fabs(fq.fq_near);
  fq.pass = fq.rel_diff < 0.01;

  rep.notes.emplace_back(
      "energy representation integrates b E^a [1+(q0'-1)E]^(-(beta-beta0)/(q0'-1)-1); its "
      "q-factor carries exponent -(1/(q0'-1)+...) - 1, not the -q/(q-1) power of the "
      "q-Boltzmann weight");
  rep.notes.emplace_back(
      "mass integral starts at the spectrum threshold m_min: m^(3/2) rho(m) ~ gamma/m is not "
      "integrable at m = 0");
  return rep;
}

double closing_volume(const BootstrapParams& p) {
  return (p.a_exp + 1.0) * 2.0 * kPi * kPi * std::pow(p.beta0, 1.5) / p.gamma_const;
}

double matched_amplitude(const BootstrapParams& p, const CutoffParams& cut) {
  const double ap1 = p.a_exp + 1.0;
  return std::exp(ap1 * (-kEulerGamma - std::log(cut.m_min)) - ln_gamma(ap1));
}

BootstrapParams reference_parameters() {
  BootstrapParams p;
  p.beta0 = 1.0 / 0.110;
  p.q0_prime_minus_one = 1e-4;
  p.gamma_const = 1.0;
  p.a_exp = 1.0;
  p.b_const = 1.0;
  p.V0 = closing_volume(p);
  p.b_const = matched_amplitude(p, CutoffParams::defaults_for(p));
  return p;
}

}  // namespace qboot
