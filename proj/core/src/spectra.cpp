#include "qboot/spectra.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "qboot/qcalculus.hpp"

namespace qboot {

namespace {

void check(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

bool positive_finite(double v) {
  return v > 0.0 && std::isfinite(v);
}

// Everything in ln pt_density that does not depend on pt.
double ln_normalization(const SpectrumModel& m) {
  const double qm1 = m.q - 1.0;
  return std::log(m.c) - 0.5 * std::log(2.0 * qm1) + ln_beta(0.5, m.q / qm1 - 0.5);
}

double ln_shape(double pt, const SpectrumModel& m) {
  const double qm1 = m.q - 1.0;
  const double u = pt / m.T0;
  // [1+(q-1)u]^(-q/(q-1)+1/2) = exp(-q L(u) + log1p((q-1)u)/2)
  return 1.5 * std::log(u) - m.q * q_log1p(u, qm1) + 0.5 * std::log1p(qm1 * u);
}

}  // namespace

void SpectrumModel::validate() const {
  check(positive_finite(T0), "T0 must be positive");
  check(std::isfinite(q) && q > 1.0, "q must exceed 1");
  check(positive_finite(c), "c must be positive");
}

void SpectrumDataset::validate() const {
  double prev = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    std::ostringstream where;
    where << "point " << i + 1 << ": ";
    check(positive_finite(p.pt), where.str() + "pt must be positive");
    check(i == 0 || p.pt > prev, where.str() + "pt must be strictly increasing");
    check(positive_finite(p.value), where.str() + "value must be positive");
    check(positive_finite(p.err), where.str() + "err must be positive");
    prev = p.pt;
  }
}

double FitReport::sigma(ParamIndex i) const {
  return std::sqrt(std::max(0.0, covariance[i][i]));
}

double ln_pt_density(double pt, const SpectrumModel& m) {
  m.validate();
  if (pt < 0.0) throw std::domain_error("pt_density requires pt >= 0");
  if (pt == 0.0) return -std::numeric_limits<double>::infinity();
  return ln_normalization(m) + ln_shape(pt, m);
}

double pt_density(double pt, const SpectrumModel& m) {
  return std::exp(ln_pt_density(pt, m));
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  check(positive_finite(lo) && positive_finite(hi) && lo < hi, "grid bounds must satisfy 0 < lo < hi");
  check(n >= 2, "grid needs at least two points");
  std::vector<double> g(n);
  const double step = std::log(hi / lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = lo * std::exp(step * static_cast<double>(i));
  }
  g.back() = hi;
  return g;
}

SpectrumDataset generate_synthetic(const SpectrumModel& m, const std::vector<double>& pt_grid,
                                   double rel_noise, std::uint64_t seed) {
  m.validate();
  check(rel_noise >= 0.0 && rel_noise < 0.5, "rel_noise must lie in [0, 0.5)");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  SpectrumDataset ds;
  ds.points.reserve(pt_grid.size());
  for (double pt : pt_grid) {
    const double truth = pt_density(pt, m);
    double value = truth;
    if (rel_noise > 0.0) {
      value = truth * (1.0 + rel_noise * gauss(rng));
      value = std::max(value, truth * 1e-6);
    }
    ds.points.push_back({pt, value, rel_noise > 0.0 ? rel_noise * truth : truth});
  }
  std::ostringstream meta;
  meta.precision(17);
  meta << "synthetic T0=" << m.T0 << " q=" << m.q << " c=" << m.c << " rel_noise=" << rel_noise
       << " seed=" << seed;
  ds.meta = meta.str();
  ds.validate();
  return ds;
}

double chi2(const SpectrumDataset& data, const SpectrumModel& m) {
  m.validate();
  const double ln_norm = ln_normalization(m);
  double sum = 0.0;
  for (const auto& p : data.points) {
    if (!positive_finite(p.err)) continue;
    const double model = std::exp(ln_norm + ln_shape(p.pt, m));
    const double r = (p.value - model) / p.err;
    sum += r * r;
  }
  return sum;
}

namespace {

using Vec3 = std::array<double, 3>;

Vec3 to_internal(const SpectrumModel& m) {
  return {std::log(m.T0), std::log(m.q - 1.0), std::log(m.c)};
}

SpectrumModel from_internal(const Vec3& x) {
  return SpectrumModel{std::exp(x[0]), 1.0 + std::exp(x[1]), std::exp(x[2])};
}

class Objective {
 public:
  Objective(const SpectrumDataset& data, const SpectrumModel& base, const ParamMask& fixed)
      : data_(data), base_(to_internal(base)), fixed_(fixed) {
    for (std::size_t i = 0; i < 3; ++i) {
      if (!fixed_[i]) free_.push_back(i);
    }
  }

  std::size_t dim() const { return free_.size(); }

  Vec3 expand(const std::vector<double>& y) const {
    Vec3 x = base_;
    for (std::size_t j = 0; j < free_.size(); ++j) x[free_[j]] = y[j];
    return x;
  }

  std::vector<double> start() const {
    std::vector<double> y;
    for (std::size_t i : free_) y.push_back(base_[i]);
    return y;
  }

  double operator()(const std::vector<double>& y) const {
    const Vec3 x = expand(y);
    for (double v : x) {
      if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
    }
    const SpectrumModel m = from_internal(x);
    if (!(m.q > 1.0) || !positive_finite(m.T0) || !positive_finite(m.c)) {
      return std::numeric_limits<double>::infinity();
    }
    const double v = chi2(data_, m);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  }

  const std::vector<std::size_t>& free_indices() const { return free_; }

 private:
  const SpectrumDataset& data_;
  Vec3 base_;
  ParamMask fixed_;
  std::vector<std::size_t> free_;
};

struct Simplex {
  std::vector<std::vector<double>> x;
  std::vector<double> f;
};

Simplex make_simplex(const Objective& obj, const std::vector<double>& center, double step) {
  Simplex s;
  s.x.push_back(center);
  for (std::size_t j = 0; j < center.size(); ++j) {
    auto v = center;
    v[j] += step;
    s.x.push_back(v);
  }
  for (const auto& v : s.x) s.f.push_back(obj(v));
  return s;
}

void sort_simplex(Simplex& s) {
  std::vector<std::size_t> idx(s.x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return s.f[a] < s.f[b]; });
  Simplex out;
  for (auto i : idx) {
    out.x.push_back(s.x[i]);
    out.f.push_back(s.f[i]);
  }
  s = std::move(out);
}

double simplex_size(const Simplex& s) {
  double size = 0.0;
  for (std::size_t i = 1; i < s.x.size(); ++i) {
    for (std::size_t j = 0; j < s.x[0].size(); ++j) {
      size = std::max(size, std::fabs(s.x[i][j] - s.x[0][j]));
    }
  }
  return size;
}

struct NelderMeadResult {
  std::vector<double> best;
  double f = 0.0;
  bool converged = false;
};

// Standard coefficients (1, 2, 1/2, 1/2). The best vertex never gets worse, so
// the recorded history is non-increasing.
NelderMeadResult nelder_mead(const Objective& obj, std::vector<double> start, double step,
                             const FitOptions& opt, std::size_t& iterations,
                             std::vector<double>& history) {
  Simplex s = make_simplex(obj, start, step);
  const std::size_t n = start.size();
  sort_simplex(s);
  while (iterations < opt.max_iterations) {
    const double spread = s.f[n] - s.f[0];
    if (simplex_size(s) < opt.simplex_tol && spread < opt.chi2_tol) {
      return {s.x[0], s.f[0], true};
    }
    ++iterations;
    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) centroid[j] += s.x[i][j] / static_cast<double>(n);
    }
    auto along = [&](double t) {
      std::vector<double> v(n);
      for (std::size_t j = 0; j < n; ++j) v[j] = centroid[j] + t * (s.x[n][j] - centroid[j]);
      return v;
    };
    const auto xr = along(-1.0);
    const double fr = obj(xr);
    if (fr < s.f[0]) {
      const auto xe = along(-2.0);
      const double fe = obj(xe);
      if (fe < fr) {
        s.x[n] = xe;
        s.f[n] = fe;
      } else {
        s.x[n] = xr;
        s.f[n] = fr;
      }
    } else if (fr < s.f[n - 1]) {
      s.x[n] = xr;
      s.f[n] = fr;
    } else {
      const bool outside = fr < s.f[n];
      const auto xc = along(outside ? -0.5 : 0.5);
      const double fc = obj(xc);
      if (fc < (outside ? fr : s.f[n])) {
        s.x[n] = xc;
        s.f[n] = fc;
      } else {
        for (std::size_t i = 1; i <= n; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            s.x[i][j] = s.x[0][j] + 0.5 * (s.x[i][j] - s.x[0][j]);
          }
          s.f[i] = obj(s.x[i]);
        }
      }
    }
    sort_simplex(s);
    history.push_back(s.f[0]);
  }
  return {s.x[0], s.f[0], false};
}

// Central-difference Hessian of chi^2 in the natural parameters of the free slots.
Eigen::MatrixXd hessian(const SpectrumDataset& data, const SpectrumModel& at,
                        const std::vector<std::size_t>& free) {
  const std::size_t k = free.size();
  auto eval = [&](const Vec3& theta) {
    const SpectrumModel m{theta[0], theta[1], theta[2]};
    return chi2(data, m);
  };
  const Vec3 theta0{at.T0, at.q, at.c};
  Vec3 h{};
  h[kT0] = 1e-4 * at.T0;
  h[kQ] = 1e-4 * (at.q - 1.0);
  h[kC] = 1e-4 * at.c;
  Eigen::MatrixXd H(k, k);
  const double f0 = eval(theta0);
  for (std::size_t a = 0; a < k; ++a) {
    const std::size_t i = free[a];
    Vec3 p = theta0, m = theta0;
    p[i] += h[i];
    m[i] -= h[i];
    H(a, a) = (eval(p) - 2.0 * f0 + eval(m)) / (h[i] * h[i]);
    for (std::size_t b = a + 1; b < k; ++b) {
      const std::size_t j = free[b];
      Vec3 pp = theta0, pm = theta0, mp = theta0, mm = theta0;
      pp[i] += h[i]; pp[j] += h[j];
      pm[i] += h[i]; pm[j] -= h[j];
      mp[i] -= h[i]; mp[j] += h[j];
      mm[i] -= h[i]; mm[j] -= h[j];
      H(a, b) = H(b, a) = (eval(pp) - eval(pm) - eval(mp) + eval(mm)) / (4.0 * h[i] * h[j]);
    }
  }
  return H;
}

}  // namespace

FitReport fit_spectrum(const SpectrumDataset& data, const SpectrumModel& init,
                       const FitOptions& options) {
  init.validate();
  std::size_t usable = 0;
  for (const auto& p : data.points) {
    if (positive_finite(p.err) && std::isfinite(p.value) && positive_finite(p.pt)) ++usable;
  }
  if (usable == 0) {
    throw degenerate_data("no data point has a positive, finite error");
  }
  SpectrumDataset clean;
  clean.meta = data.meta;
  for (const auto& p : data.points) {
    if (positive_finite(p.err) && std::isfinite(p.value) && positive_finite(p.pt)) {
      clean.points.push_back(p);
    }
  }

  const Objective obj(clean, init, options.fixed);
  const std::size_t n_free = obj.dim();
  if (usable < n_free + 1) {
    std::ostringstream msg;
    msg << usable << " usable points cannot constrain " << n_free << " free parameters";
    throw degenerate_data(msg.str());
  }

  FitReport rep;
  for (std::size_t i = 0; i < 3; ++i) rep.free[i] = !options.fixed[i];
  rep.ndf = static_cast<int>(usable - n_free);

  if (n_free == 0) {
    rep.model = init;
    rep.chi2 = chi2(clean, init);
    rep.converged = true;
    return rep;
  }

  // Restart from the best vertex until a restart no longer improves chi^2.
  std::vector<double> y = obj.start();
  double best = obj(y);
  if (!std::isfinite(best)) {
    throw degenerate_data("chi^2 is not finite at the initial parameters");
  }
  bool converged = false;
  double step = 0.2;
  for (int restart = 0; restart < 5; ++restart) {
    const auto r = nelder_mead(obj, y, step, options, rep.iterations, rep.chi2_history);
    const double gain = best - r.f;
    y = r.best;
    best = r.f;
    converged = r.converged;
    if (!converged) break;
    if (restart > 0 && gain <= options.chi2_tol) break;
    step = 1e-3;
  }

  rep.model = from_internal(obj.expand(y));
  rep.chi2 = best;
  rep.converged = converged;

  const auto& free = obj.free_indices();
  const Eigen::MatrixXd H = hessian(clean, rep.model, free);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(H);
  if (lu.isInvertible()) {
    const Eigen::MatrixXd cov = 2.0 * lu.inverse();
    for (std::size_t a = 0; a < free.size(); ++a) {
      for (std::size_t b = 0; b < free.size(); ++b) {
        rep.covariance[free[a]][free[b]] = 0.5 * (cov(a, b) + cov(b, a));
      }
    }
  }
  return rep;
}

}  // namespace qboot
