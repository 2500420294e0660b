#pragma once

// Transverse-momentum spectrum of the q-deformed fireball and chi^2 fitting.
//
//   (1/sigma) dsigma/dpt = c [2(q-1)]^(-1/2) B(1/2, q/(q-1) - 1/2)
//                          u^(3/2) [1 + (q-1) u]^(-q/(q-1) + 1/2),   u = pt / T0
//
// c and the Beta-function prefactor are degenerate; c is the only fitted
// normalization.

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qboot {

struct SpectrumModel {
  double T0 = 0.110;  // effective temperature [GeV]
  double q = 1.2;
  double c = 1.0;

  /// Throws std::invalid_argument naming the violated invariant.
  void validate() const;
};

struct SpectrumPoint {
  double pt = 0.0;  // [GeV]
  double value = 0.0;
  double err = 0.0;
};

struct SpectrumDataset {
  std::vector<SpectrumPoint> points;
  std::string meta;

  /// Throws std::invalid_argument unless pt is strictly increasing and positive
  /// and every value and err is positive and finite.
  void validate() const;
};

/// Parameter slots in covariance and fixed masks.
enum ParamIndex : std::size_t { kT0 = 0, kQ = 1, kC = 2 };

using ParamMask = std::array<bool, 3>;
using Covariance = std::array<std::array<double, 3>, 3>;

struct FitOptions {
  ParamMask fixed{false, false, false};
  double simplex_tol = 1e-8;  // simplex size in log-parameter space
  double chi2_tol = 1e-10;
  std::size_t max_iterations = 10'000;
};

struct FitReport {
  SpectrumModel model;
  double chi2 = 0.0;
  int ndf = 0;
  Covariance covariance{};  // natural parameters (T0, q, c); zero rows/cols for fixed ones
  ParamMask free{true, true, true};
  bool converged = false;
  std::size_t iterations = 0;
  std::vector<double> chi2_history;  // best chi^2 after each iteration

  double sigma(ParamIndex i) const;
};

class degenerate_data : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double pt_density(double pt, const SpectrumModel& m);
/// ln of pt_density; -inf at pt = 0.
double ln_pt_density(double pt, const SpectrumModel& m);

/// Noise is multiplicative Gaussian, clipped positive. err = rel_noise * density,
/// or density itself when rel_noise = 0 (chi^2 needs positive errors).
SpectrumDataset generate_synthetic(const SpectrumModel& m, const std::vector<double>& pt_grid,
                                   double rel_noise, std::uint64_t seed);

/// n log-spaced points on [lo, hi].
std::vector<double> log_grid(double lo, double hi, std::size_t n);

double chi2(const SpectrumDataset& data, const SpectrumModel& m);

/// Nelder-Mead on (ln T0, ln(q-1), ln c), covariance 2 H^-1 from a finite
/// difference Hessian of chi^2 at the optimum. Points with a non-positive or
/// non-finite err are skipped; degenerate_data is thrown when none remain or
/// too few remain for the free parameters.
FitReport fit_spectrum(const SpectrumDataset& data, const SpectrumModel& init,
                       const FitOptions& options = {});

}  // namespace qboot
