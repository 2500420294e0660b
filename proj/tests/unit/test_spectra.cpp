#include <doctest.h>

#include <cmath>
#include <numeric>

#include "qboot/spectra.hpp"

using namespace qboot;

namespace {

double rel(double got, double want) {
  return std::fabs(got / want - 1.0);
}

// The density coded directly from its definition.
double density_oracle(double pt, double T0, double q, double c) {
  const double u = pt / T0;
  const double y = q / (q - 1.0) - 0.5;
  const double beta = std::tgamma(0.5) * std::tgamma(y) / std::tgamma(0.5 + y);
  return c / std::sqrt(2.0 * (q - 1.0)) * beta * std::pow(u, 1.5) *
         std::pow(1.0 + (q - 1.0) * u, -q / (q - 1.0) + 0.5);
}

struct Stats {
  double mean = 0.0;
  double sd = 0.0;
};

Stats stats(const std::vector<double>& v) {
  Stats s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  for (double x : v) s.sd += (x - s.mean) * (x - s.mean);
  s.sd = std::sqrt(s.sd / (v.size() - 1));
  return s;
}

}  // namespace

TEST_CASE("pt_density matches its definition") {
  for (double q : {1.05, 1.2, 1.5}) {
    for (double pt : {0.05, 0.3, 1.0, 4.0}) {
      CHECK(rel(pt_density(pt, {0.11, q, 2.5}), density_oracle(pt, 0.11, q, 2.5)) < 1e-12);
    }
  }
  CHECK(pt_density(0.0, {0.11, 1.2, 1.0}) == 0.0);
  CHECK_THROWS_AS(pt_density(-1.0, {0.11, 1.2, 1.0}), std::domain_error);
  CHECK_THROWS_AS(pt_density(1.0, {0.11, 1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(pt_density(1.0, {-0.11, 1.2, 1.0}), std::invalid_argument);
}

TEST_CASE("pt_density ratios tend to the Boltzmann shape as q -> 1") {
  const SpectrumModel m{0.2, 1.0 + 1e-6, 1.0};
  for (double u1 : {0.5, 1.0, 3.0}) {
    for (double u2 : {2.0, 5.0}) {
      const double got = pt_density(u1 * m.T0, m) / pt_density(u2 * m.T0, m);
      const double want = std::pow(u1 / u2, 1.5) * std::exp(-(u1 - u2));
      CHECK(rel(got, want) < 1e-4);
    }
  }
}

TEST_CASE("pt_density tail") {
  const SpectrumModel m{0.110, 1.2, 1.0};
  const double got = pt_density(10.0, m) / pt_density(20.0, m);
  CHECK(rel(got, density_oracle(10.0, 0.11, 1.2, 1.0) / density_oracle(20.0, 0.11, 1.2, 1.0)) < 0.01);
  // pure power law u^(2 - q/(q-1)) takes over far out
  const double far = pt_density(1000.0, m) / pt_density(2000.0, m);
  CHECK(rel(far, std::pow(2.0, 1.2 / 0.2 - 2.0)) < 0.01);
}

TEST_CASE("pt_density is unimodal") {
  for (double q : {1.02, 1.2, 1.6}) {
    const SpectrumModel m{0.11, q, 1.0};
    int sign_changes = 0;
    double prev = pt_density(1e-4, m);
    int prev_sign = 1;
    for (double pt = 2e-4; pt < 200.0; pt *= 1.01) {
      const double v = pt_density(pt, m);
      CHECK(v >= 0.0);
      const int s = v > prev ? 1 : -1;
      if (s != prev_sign) ++sign_changes;
      prev_sign = s;
      prev = v;
    }
    CHECK(sign_changes == 1);
  }
}

TEST_CASE("synthetic data") {
  const SpectrumModel m{0.110, 1.2, 1.0};
  const auto grid = log_grid(0.1, 6.0, 50);
  REQUIRE(grid.size() == 50);
  CHECK(grid.front() == 0.1);
  CHECK(grid.back() == 6.0);

  const auto exact = generate_synthetic(m, grid, 0.0, 1);
  for (const auto& p : exact.points) {
    CHECK(p.value == pt_density(p.pt, m));
    CHECK(p.err > 0.0);
  }

  const auto a = generate_synthetic(m, grid, 0.05, 42);
  const auto b = generate_synthetic(m, grid, 0.05, 42);
  const auto c = generate_synthetic(m, grid, 0.05, 43);
  bool differs = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(a.points[i].value == b.points[i].value);
    CHECK(a.points[i].err == doctest::Approx(0.05 * pt_density(grid[i], m)));
    differs = differs || a.points[i].value != c.points[i].value;
  }
  CHECK(differs);
  CHECK_THROWS_AS(generate_synthetic(m, grid, 0.6, 1), std::invalid_argument);
}

TEST_CASE("fit recovers exact data") {
  const SpectrumModel truth{0.110, 1.2, 1.0};
  const auto ds = generate_synthetic(truth, log_grid(0.1, 6.0, 50), 0.0, 1);
  const auto r = fit_spectrum(ds, {0.150, 1.10, 0.5});
  CHECK(r.converged);
  CHECK(rel(r.model.T0, truth.T0) < 1e-4);
  CHECK(rel(r.model.q, truth.q) < 1e-4);
  CHECK(rel(r.model.c, truth.c) < 1e-4);
  CHECK(r.chi2 < 1e-10);
  CHECK(r.ndf == 47);
  for (std::size_t i = 1; i < r.chi2_history.size(); ++i) {
    CHECK(r.chi2_history[i] <= r.chi2_history[i - 1]);
  }
}

TEST_CASE("fit on noisy data") {
  const SpectrumModel truth{0.110, 1.2, 1.0};
  const auto ds = generate_synthetic(truth, log_grid(0.1, 6.0, 50), 0.05, 9);
  const auto r = fit_spectrum(ds, {0.150, 1.10, 0.5});
  CHECK(r.converged);
  CHECK(std::fabs(r.model.T0 - truth.T0) < 3.0 * r.sigma(kT0));
  CHECK(std::fabs(r.model.q - truth.q) < 3.0 * r.sigma(kQ));
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(r.covariance[i][i] > 0.0);
    for (std::size_t j = 0; j < 3; ++j) CHECK(r.covariance[i][j] == r.covariance[j][i]);
  }

  SUBCASE("freezing q adds a degree of freedom") {
    FitOptions opt;
    opt.fixed[kQ] = true;
    const auto f = fit_spectrum(ds, {0.150, 1.2, 0.5}, opt);
    CHECK(f.ndf == r.ndf + 1);
    CHECK(f.model.q == 1.2);
    CHECK_FALSE(f.free[kQ]);
    CHECK(f.covariance[kQ][kQ] == 0.0);
    CHECK(f.covariance[kQ][kT0] == 0.0);
    CHECK(f.sigma(kT0) < r.sigma(kT0));
  }

  SUBCASE("joint rescaling of c and data leaves T0 and q unchanged") {
    auto scaled = ds;
    for (auto& p : scaled.points) {
      p.value *= 10.0;
      p.err *= 10.0;
    }
    const auto s = fit_spectrum(scaled, {0.150, 1.10, 5.0});
    CHECK(rel(s.model.T0, r.model.T0) < 1e-8);
    CHECK(rel(s.model.q, r.model.q) < 1e-8);
    CHECK(rel(s.model.c, 10.0 * r.model.c) < 1e-7);
  }
}

TEST_CASE("freezing q at its true value keeps T0 within 1 sigma of the free fit") {
  // A statistical statement: the free-minus-fixed difference has variance below
  // sigma_free^2, so it falls inside 1 sigma in well over half the datasets.
  const SpectrumModel truth{0.110, 1.2, 1.0};
  const auto grid = log_grid(0.1, 6.0, 50);
  FitOptions opt;
  opt.fixed[kQ] = true;
  int inside = 0;
  const int trials = 50;
  for (int seed = 1; seed <= trials; ++seed) {
    const auto ds = generate_synthetic(truth, grid, 0.05, 1000 + seed);
    const auto free = fit_spectrum(ds, {0.150, 1.10, 0.5});
    const auto fixed = fit_spectrum(ds, {0.150, 1.2, 0.5}, opt);
    CHECK(fixed.ndf == free.ndf + 1);
    inside += std::fabs(fixed.model.T0 - free.model.T0) < free.sigma(kT0);
  }
  CHECK(inside >= 0.6 * trials);
}

TEST_CASE("pull distribution over seeded datasets") {
  const SpectrumModel truth{0.110, 1.2, 1.0};
  const auto grid = log_grid(0.1, 6.0, 50);
  std::vector<double> pt0, pq, pc;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto r = fit_spectrum(generate_synthetic(truth, grid, 0.05, seed), {0.150, 1.10, 0.5});
    REQUIRE(r.converged);
    pt0.push_back((r.model.T0 - truth.T0) / r.sigma(kT0));
    pq.push_back((r.model.q - truth.q) / r.sigma(kQ));
    pc.push_back((r.model.c - truth.c) / r.sigma(kC));
  }
  for (const auto& v : {pt0, pq, pc}) {
    const auto s = stats(v);
    CHECK(std::fabs(s.mean) < 0.3);
    CHECK(s.sd > 0.7);
    CHECK(s.sd < 1.3);
  }
}

TEST_CASE("fit errors") {
  SpectrumDataset bad;
  bad.points = {{0.1, 1.0, 0.0}, {0.2, 1.0, -1.0}, {0.3, 1.0, std::nan("")}};
  CHECK_THROWS_AS(fit_spectrum(bad, {0.15, 1.1, 1.0}), degenerate_data);
  SpectrumDataset few;
  few.points = {{0.1, 1.0, 0.1}, {0.2, 1.0, 0.1}, {0.3, 1.0, 0.1}};
  CHECK_THROWS_AS(fit_spectrum(few, {0.15, 1.1, 1.0}), degenerate_data);
  CHECK_THROWS_AS(fit_spectrum(few, {0.15, 0.9, 1.0}), std::invalid_argument);
}

TEST_CASE("dataset validation") {
  SpectrumDataset ds;
  ds.points = {{0.1, 1.0, 0.1}, {0.1, 1.0, 0.1}};
  CHECK_THROWS_AS(ds.validate(), std::invalid_argument);
  ds.points = {{0.1, 1.0, 0.1}, {0.2, -1.0, 0.1}};
  CHECK_THROWS_AS(ds.validate(), std::invalid_argument);
}
