#pragma once

// Self-consistent q-deformed fireball thermodynamics.
//
// The model couples a mass spectrum
//   rho(m)   = gamma m^(-5/2) [1 + (q0'-1) m]^(beta0/(q0'-1))
// and a level density
//   sigma(E) = b E^a [1 + (q0'-1) E]^(beta0/(q0'-1))
// through two representations of the partition function Z_q: one built on
// sigma (an energy integral with a Gamma-function closed form) and one built
// on rho (a mass integral exponentiated, n = 1 term of the cluster sum). Both
// diverge as beta -> beta0+, which fixes the limiting temperature T0 = 1/beta0.
//
// Physics-level failures (beta <= beta0, the energy integral's convergence
// constraint) are reported through ZqValue::status and never as a finite
// number.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qboot/qcalculus.hpp"

namespace qboot {

/// Model constants of the self-consistent spectrum.
struct BootstrapParams {
  double beta0 = 0.0;               // limiting inverse temperature [GeV^-1]
  double q0_prime_minus_one = 0.0;  // q0' - 1 = beta0 (q0 - 1)
  double gamma_const = 0.0;         // mass-spectrum normalization
  double b_const = 0.0;             // level-density normalization
  double a_exp = 0.0;               // level-density power, > -1
  double V0 = 0.0;                  // fireball volume [GeV^-3]

  /// Throws std::invalid_argument naming the first violated invariant.
  void validate() const;

  double q0_prime() const noexcept { return 1.0 + q0_prime_minus_one; }
  /// Entropic index q0 of the undeformed parameterization, from q0'-1 = beta0 (q0-1).
  double q0_minus_one() const noexcept { return q0_prime_minus_one / beta0; }
  /// alpha(beta) = gamma V0 / (2 pi^2 beta^(3/2)).
  double alpha(double beta) const;
};

/// Integration split points and anchors of the mass representation.
struct CutoffParams {
  double M = 0.0;        // split point of the mass integral [GeV]
  double m_tilde = 0.0;  // lower anchor of the tail estimate [GeV]
  double a_tilde = 0.0;  // upper anchor of the a'-integration [GeV^-1]
  double m_min = 0.0;    // lower end of the mass integral (spectrum threshold) [GeV]

  void validate() const;

  /// M = 20/beta0, m_tilde = M/100, a_tilde = 0.05/m_tilde, m_min = pion mass.
  static CutoffParams defaults_for(const BootstrapParams& p);
};

inline constexpr double kPionMassGeV = 0.13957;

enum class Representation { energy_rep, mass_rep, gamma_closed_form, asymptotic };
enum class ZqStatus { ok, divergent, constraint_violation };

std::string_view to_string(Representation r);
std::string_view to_string(ZqStatus s);

/// Which of the model's preconditions held for a particular evaluation.
struct ZqValidity {
  bool above_limiting_temperature = false;  // beta > beta0
  bool convergence_constraint = false;      // (beta - beta0)/(q0'-1) > a + 1
  bool matched_deformation = true;          // q0' == 1 + beta (q - 1); mass rep only
};

struct ZqValue {
  std::optional<double> value;
  Representation representation = Representation::energy_rep;
  ZqStatus status = ZqStatus::ok;
  ZqValidity validity;
  std::string message;

  bool ok() const noexcept { return status == ZqStatus::ok && value.has_value(); }
};

// --- spectra of states -----------------------------------------------------

/// rho(m) = gamma m^(-5/2) [1 + (q0'-1) m]^(beta0/(q0'-1)). Throws for m <= 0.
double mass_spectrum(double m, const BootstrapParams& p);
double ln_mass_spectrum(double m, const BootstrapParams& p);

/// sigma(E) = b E^a [1 + (q0'-1) E]^(beta0/(q0'-1)). Throws for E <= 0.
double level_density(double E, const BootstrapParams& p);
double ln_level_density(double E, const BootstrapParams& p);

// --- momentum integral -----------------------------------------------------

/// I_n(m) = int_0^inf dp p^2 [1 + (q-1) beta sqrt(p^2+m^2)]^(-n q/(q-1)) by
/// quadrature. Throws divergent_integral when n q/(q-1) - 2 <= 1.
double momentum_integral_numeric(double m, int n, const QDeform& d);

/// Closed large-beta*m form m^(3/2)/(n beta)^(3/2) [1 + (q-1) n beta m]^(-1/(q-1)).
double momentum_integral_asymptotic(double m, int n, const QDeform& d);

// --- partition function ----------------------------------------------------

/// Convergence constraint of the energy integral: (beta - beta0)/(q0'-1) > a + 1.
bool convergence_constraint_holds(double beta, const BootstrapParams& p);

/// q such that q'' - 1 = beta (q - 1) equals q0' - 1 (matched deformation).
QDeform matched_deformation(double beta, const BootstrapParams& p);

/// Z_q = exp{ alpha(beta) int_{m_min}^inf dm m^(3/2) rho(m) [1+(q-1) beta m]^(-1/(q-1)) } - 1,
/// split at cut.M, both pieces by quadrature. Uses the q carried by d; a
/// mismatch with the matched deformation is recorded in validity.
ZqValue zq_mass_rep(const QDeform& d, const BootstrapParams& p, const CutoffParams& cut);

/// Z_q = int_0^inf b E^a [1 + (q0'-1) E]^(-(beta-beta0)/(q0'-1) - 1) dE by quadrature.
ZqValue zq_energy_rep(const QDeform& d, const BootstrapParams& p);

/// b Gamma(a+1) Gamma(r-a) / ((q0'-1)^(a+1) Gamma(r+1)), r = (beta-beta0)/(q0'-1).
ZqValue zq_gamma_closed_form(const QDeform& d, const BootstrapParams& p);
double ln_zq_gamma_closed_form(double beta, const BootstrapParams& p);

/// Leading singular form b Gamma(a+1) (beta - beta0)^(-(a+1)) (the q0' -> 1 limit).
ZqValue zq_asymptotic(const QDeform& d, const BootstrapParams& p);

/// Local exponent d ln Z / d ln(1/(beta-beta0)) of the Gamma closed form:
/// r [psi(r+1) - psi(r-a)]. Tends to a + 1 as r grows.
double closed_form_local_exponent(double beta, const BootstrapParams& p);

// --- tail integral and the logarithmic divergence ---------------------------

/// int_M^inf (dm/m) [1 + (q-1) a m]^(-1/(q-1)) through the hypergeometric identity
/// (q-1) u^s 2F1(s, s; s+1; -u), s = 1/(q-1), u = 1/(a M (q-1)).
double tail_integral_hypergeometric(double q_minus_one, double scale_a, double M);

struct TailDivergenceReport {
  double beta = 0.0;
  double gap = 0.0;               // beta - beta0
  double quadrature = 0.0;        // int_M^inf (dm/m)[1+(q0'-1)m]^(-gap/(q0'-1))
  double quadrature_error = 0.0;
  std::optional<double> hypergeometric;  // same integral via 2F1 (exact route)
  double anchored_estimate = 0.0;  // ln(1/gap) + ln a_tilde - int_{m_tilde}^M (...)
  double log_estimate = 0.0;       // ln(1/gap) - ln[(q0'-1) M]
  double anchored_deviation = 0.0; // estimate - quadrature
  double log_deviation = 0.0;
  double anchor_factor = 0.0;      // [1 + (q0'-1) m_tilde]^(-a_tilde/(q0'-1)), ~1 in regime
  bool regime_ok = true;
  std::vector<std::string> warnings;
};

/// Evaluates the high-mass tail integral at beta and compares it with the
/// anchored and logarithmic estimates. Throws std::domain_error for beta <= beta0.
TailDivergenceReport tail_log_divergence(const BootstrapParams& p, const CutoffParams& cut,
                                         double beta);

/// Z_1(M) + exp{alpha(beta) [ln a_tilde - int_{m_tilde}^M (dm/m)(...)]}: the
/// subleading constant of the mass representation near beta0.
double fq_constant(const BootstrapParams& p, const CutoffParams& cut, double beta);

// --- scans and reports -----------------------------------------------------

struct ScanRow {
  double beta = 0.0;
  double gap = 0.0;
  ZqStatus status = ZqStatus::ok;
  std::optional<double> zq;
  std::optional<double> ln_zq;
  std::optional<double> ln_inv_gap;
};

struct ScanResult {
  std::vector<ScanRow> rows;   // same order as the input grid
  std::optional<double> slope; // least-squares d ln Z / d ln(1/gap) over ok rows
  std::optional<double> intercept;
  double predicted_slope = 0.0;                 // a + 1
  std::optional<double> gamma_corrected_slope;  // mean local exponent over ok rows
  std::size_t points_used = 0;
};

/// Evaluates the Gamma closed form along beta_grid and fits the log-log slope.
/// Points violating beta > beta0 or the convergence constraint are kept in the
/// table with their status and excluded from the fit. threads = 0 reads
/// QBOOTSTRAP_THREADS (default 1).
ScanResult singularity_scan(const BootstrapParams& p, const std::vector<double>& beta_grid,
                            unsigned threads = 0);

struct ConsistencyReport {
  struct WeakConstraint {
    double x = 1e6;
    double ln_sigma = 0.0;
    double ln_rho = 0.0;
    double ratio = 0.0;
    bool pass = false;
  } weak_constraint;

  struct MatchedDeformation {
    double q0_prime_minus_one = 0.0;
    double q_double_prime_minus_one = 0.0;  // beta (q - 1)
    bool pass = false;
  } matched_deformation;

  struct ExponentMatching {
    double a_plus_one = 0.0;
    double alpha_at_beta0 = 0.0;
    double implied_V0 = 0.0;  // V0 closing a + 1 = alpha(beta0)
    double implied_a = 0.0;   // a closing a + 1 = alpha(beta0)
    bool pass = false;
  } exponent_matching;

  struct FqConstancy {
    double gap_near = 1e-3;
    double gap_far = 1e-2;
    double fq_near = 0.0;
    double fq_far = 0.0;
    double rel_diff = 0.0;
    bool pass = false;
  } fq_constancy;

  std::vector<std::string> notes;

  bool all_pass() const noexcept {
    return weak_constraint.pass && matched_deformation.pass && exponent_matching.pass &&
           fq_constancy.pass;
  }
};

ConsistencyReport consistency_report(const BootstrapParams& p, const QDeform& d,
                                     const CutoffParams& cut);

// --- parameter closure -----------------------------------------------------

/// V0 solving a + 1 = gamma V0 / (2 pi^2 beta0^(3/2)).
double closing_volume(const BootstrapParams& p);

/// b for which the energy representation's leading amplitude b Gamma(a+1)
/// equals the mass representation's (e^(-gamma_E)/m_min)^(a+1), from the
/// exponential-integral asymptotics of the mass integral as q0' -> 1.
double matched_amplitude(const BootstrapParams& p, const CutoffParams& cut);

/// Reference model: T0 = 110 MeV, q0'-1 = 1e-4, gamma = 1, a = 1, with V0 and b
/// closed by closing_volume and matched_amplitude at the default cutoffs.
BootstrapParams reference_parameters();

}  // namespace qboot
