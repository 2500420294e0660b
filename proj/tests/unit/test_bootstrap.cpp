#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qboot/bootstrap.hpp"
#include "qboot/quadrature.hpp"

using namespace qboot;

namespace {

constexpr double kPi = std::numbers::pi;

double rel(double got, double want) {
  return std::fabs(got / want - 1.0);
}

BootstrapParams toy(double beta0, double k, double a, double b = 1.0) {
  BootstrapParams p;
  p.beta0 = beta0;
  p.q0_prime_minus_one = k;
  p.gamma_const = 1.0;
  p.a_exp = a;
  p.b_const = b;
  p.V0 = 1.0;
  return p;
}

// Hagedorn kernel int_0^inf p^2 exp(-n beta sqrt(p^2 + m^2)) dp, by the same quadrature.
double boltzmann_momentum(double m, int n, double beta) {
  auto f = [&](double p) { return p * p * std::exp(-n * beta * (std::hypot(p, m) - m)); };
  return integrate(f, IntegrandSpec{}, 1e-11, 1e-300).value * std::exp(-n * beta * m);
}

}  // namespace

TEST_CASE("parameter validation") {
  auto p = toy(5.0, 0.1, 1.0);
  CHECK_NOTHROW(p.validate());
  p.a_exp = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = toy(5.0, 0.0, 1.0);
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  CutoffParams c{1.0, 2.0, 1.0, 0.1};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("mass spectrum") {
  const auto p = toy(5.0, 0.1, 0.0);
  const double m = 1e-9;
  CHECK(rel(mass_spectrum(m, p) * std::pow(m, 2.5), 1.0) < 1e-6);
  CHECK(rel(mass_spectrum(10.0, p), std::pow(10.0, -2.5) * std::pow(2.0, 50.0)) < 1e-13);
  CHECK_THROWS_AS(mass_spectrum(0.0, p), std::domain_error);

  const auto h = toy(5.0, 1e-8, 0.0);
  for (double mm : {0.1, 0.5, 1.0, 2.0}) {
    CHECK(rel(mass_spectrum(mm, h), std::pow(mm, -2.5) * std::exp(5.0 * mm)) < 1e-6);
  }
}

TEST_CASE("level density") {
  const auto p = toy(5.0, 0.1, 0.0);
  for (double E : {0.5, 3.0, 40.0}) {
    CHECK(rel(level_density(E, p), std::pow(1.0 + 0.1 * E, 50.0)) < 1e-13);
  }
  const auto w = reference_parameters();
  CHECK(std::fabs(ln_level_density(1e6, w) / ln_mass_spectrum(1e6, w) - 1.0) < 0.01);

  const auto h = toy(5.0, 1e-8, 1.5, 2.0);
  for (double E : {0.1, 1.0, 2.0}) {
    CHECK(rel(level_density(E, h), 2.0 * std::pow(E, 1.5) * std::exp(5.0 * E)) < 1e-6);
  }
  CHECK_THROWS_AS(level_density(-1.0, p), std::domain_error);
}

TEST_CASE("momentum integral: numeric form") {
  const auto d = QDeform::from_q_minus_one(1e-6, 2.0);
  // beta m <= 10: the q-deformation shifts the exponent by ~(q-1)(beta E)^2/2
  for (double m : {0.5, 2.0, 5.0}) {
    for (int n : {1, 2}) {
      CHECK(rel(momentum_integral_numeric(m, n, d), boltzmann_momentum(m, n, 2.0)) < 1e-4);
    }
  }
  const auto d2 = QDeform::from_q(1.1, 5.0);
  CHECK(momentum_integral_numeric(1.0, 2, d2) < momentum_integral_numeric(1.0, 1, d2));
  CHECK(momentum_integral_numeric(2.0, 1, d2) < momentum_integral_numeric(1.0, 1, d2));
  // n q/(q-1) - 2 <= 1 diverges
  CHECK_THROWS_AS(momentum_integral_numeric(1.0, 1, QDeform::from_q(1.6, 1.0)), divergent_integral);
}

TEST_CASE("momentum integral: closed form") {
  const auto d = QDeform::from_q(1.1, 3.0);
  CHECK(momentum_integral_asymptotic(0.7, 4, d) ==
        doctest::Approx(momentum_integral_asymptotic(0.7, 1, QDeform::from_q(1.1, 12.0))).epsilon(1e-14));
  const auto h = QDeform::from_q_minus_one(1e-8, 3.0);
  for (double m : {0.5, 1.0}) {
    for (int n : {1, 3}) {
      const double want = std::pow(m / (n * 3.0), 1.5) * std::exp(-n * 3.0 * m);
      CHECK(rel(momentum_integral_asymptotic(m, n, h), want) < 1e-6);
    }
  }
}

TEST_CASE("momentum integral: the closed form omits the Laplace factor sqrt(pi/2)") {
  // Near q = 1 Laplace's method gives I ~ sqrt(pi/2) (m/beta)^(3/2) e^(-beta m) (1 + 15/(8 beta m)),
  // so the closed form undershoots the integral by the constant factor sqrt(2/pi).
  const auto d = QDeform::from_q_minus_one(1e-6, 1.0);
  double prev = 1.0;
  for (double bm : {10.0, 30.0, 100.0, 300.0}) {
    const double ratio = momentum_integral_asymptotic(bm, 1, d) / momentum_integral_numeric(bm, 1, d);
    const double corrected = ratio * std::sqrt(kPi / 2.0);
    CHECK(std::fabs(corrected - 1.0) < prev);
    prev = std::fabs(corrected - 1.0);
  }
  CHECK(prev < 0.01);
}

TEST_CASE("Gamma closed form: hand instance and limits") {
  const auto p = toy(5.0, 0.1, 1.0);
  const auto d = QDeform::from_q(1.1, 5.5);
  const auto g = zq_gamma_closed_form(d, p);
  const auto e = zq_energy_rep(d, p);
  REQUIRE(g.ok());
  REQUIRE(e.ok());
  CHECK(std::fabs(*g.value - 5.0) < 1e-8);
  CHECK(std::fabs(*e.value - 5.0) < 1e-8);
  CHECK(g.representation == Representation::gamma_closed_form);
  CHECK(e.representation == Representation::energy_rep);

  const auto lim = toy(5.0, 1e-6, 0.5);
  const auto gl = zq_gamma_closed_form(QDeform::from_q(1.1, 5.2), lim);
  CHECK(rel(*gl.value, std::tgamma(1.5) * std::pow(0.2, -1.5)) < 1e-4);

  for (double r : {1.5, 7.0, 123.4, 1e5}) {
    const auto a0 = toy(2.0, 0.01, 0.0, 3.0);
    const double beta = 2.0 + 0.01 * r;
    CHECK(rel(*zq_gamma_closed_form(QDeform::from_q(1.2, beta), a0).value, 3.0 / (beta - 2.0)) < 1e-10);
  }
}

TEST_CASE("Gamma closed form equals the energy quadrature on random valid parameters") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> ub0(0.5, 10.0), lk(std::log(1e-4), std::log(0.3)),
      ua(-0.8, 3.0), ub(0.1, 10.0), lr(0.0, std::log(200.0));
  for (int i = 0; i < 60; ++i) {
    const double a = ua(rng);
    auto p = toy(ub0(rng), std::exp(lk(rng)), a, ub(rng));
    const double r = (a + 1.0) * (1.05 + std::exp(lr(rng)));
    const double beta = p.beta0 + r * p.q0_prime_minus_one;
    const auto d = matched_deformation(beta, p);
    const auto e = zq_energy_rep(d, p);
    const auto g = zq_gamma_closed_form(d, p);
    REQUIRE(e.ok());
    REQUIRE(g.ok());
    CHECK(rel(*e.value, *g.value) < 1e-6);
  }
}

TEST_CASE("energy representation at large beta scales as beta^-(a+1)") {
  const auto p = toy(5.0, 0.1, 1.5, 2.0);
  const double z1 = *zq_energy_rep(QDeform::from_q(1.1, 5000.0), p).value;
  const double z2 = *zq_energy_rep(QDeform::from_q(1.1, 10000.0), p).value;
  CHECK(rel(z1 / z2, std::pow(2.0, 2.5)) < 0.01);
  CHECK(rel(z1, 2.0 * std::tgamma(2.5) * std::pow(5000.0, -2.5)) < 0.01);
}

TEST_CASE("constraint violation and divergence are reported, never as numbers") {
  auto p = toy(5.0, 0.1, 1.0);
  p.V0 = closing_volume(p);
  const auto cut = CutoffParams::defaults_for(p);
  // (beta - beta0)/(q0'-1) = 1.5 <= a + 1 = 2
  for (double beta : {5.15, 5.19}) {
    const auto d = matched_deformation(beta, p);
    for (const auto& z : {zq_energy_rep(d, p), zq_gamma_closed_form(d, p), zq_asymptotic(d, p),
                          zq_mass_rep(d, p, cut)}) {
      CHECK(z.status == ZqStatus::constraint_violation);
      CHECK_FALSE(z.value.has_value());
      CHECK_FALSE(z.validity.convergence_constraint);
      CHECK_FALSE(z.message.empty());
    }
  }
  for (double beta : {5.0, 4.0}) {
    const auto d = matched_deformation(beta, p);
    for (const auto& z : {zq_energy_rep(d, p), zq_gamma_closed_form(d, p), zq_asymptotic(d, p),
                          zq_mass_rep(d, p, cut)}) {
      CHECK(z.status == ZqStatus::divergent);
      CHECK_FALSE(z.value.has_value());
      CHECK_FALSE(z.validity.above_limiting_temperature);
    }
  }
  CHECK(convergence_constraint_holds(5.21, p));
  CHECK_FALSE(convergence_constraint_holds(5.19, p));
}

TEST_CASE("asymptotic form") {
  const auto p = toy(5.0, 1e-4, 1.0, 3.0);
  const auto z = zq_asymptotic(matched_deformation(5.1, p), p);
  REQUIRE(z.ok());
  CHECK(rel(*z.value, 3.0 * 1.0 / (0.1 * 0.1)) < 1e-13);
}

TEST_CASE("mass representation") {
  const auto p = reference_parameters();
  const auto cut = CutoffParams::defaults_for(p);

  SUBCASE("far from beta0: small, positive, decreasing") {
    double prev = std::numeric_limits<double>::infinity();
    for (double f : {10.0, 12.0, 15.0}) {
      const auto z = zq_mass_rep(matched_deformation(f * p.beta0, p), p, cut);
      REQUIRE(z.ok());
      CHECK(*z.value > 0.0);
      CHECK(*z.value < prev);
      prev = *z.value;
    }
    CHECK(prev < 1.0);
  }

  SUBCASE("split point does not change the result") {
    const auto d = matched_deformation(1.05 * p.beta0, p);
    auto doubled = cut;
    doubled.M *= 2.0;
    doubled.m_tilde *= 2.0;
    doubled.a_tilde /= 2.0;
    const auto z1 = zq_mass_rep(d, p, cut);
    const auto z2 = zq_mass_rep(d, p, doubled);
    CHECK(rel(*z2.value, *z1.value) < 1e-6);
  }

  SUBCASE("a mismatched deformation is recorded") {
    const auto z = zq_mass_rep(QDeform::from_q(1.2, 1.05 * p.beta0), p, cut);
    CHECK_FALSE(z.validity.matched_deformation);
    CHECK(z.message.find("not matched") != std::string::npos);
  }

  SUBCASE("agreement with the energy representation improves towards beta0") {
    double prev = std::numeric_limits<double>::infinity();
    for (double f : {0.1, 0.05, 0.02, 0.01, 0.005}) {
      const auto d = matched_deformation(p.beta0 * (1.0 + f), p);
      const auto zm = zq_mass_rep(d, p, cut);
      const auto ze = zq_energy_rep(d, p);
      REQUIRE(zm.ok());
      REQUIRE(ze.ok());
      const double dev = std::fabs(*zm.value / *ze.value - 1.0);
      CHECK(dev < prev);
      prev = dev;
    }
    CHECK(prev < 0.1);
  }
}

TEST_CASE("tail integral") {
  SUBCASE("hypergeometric route equals quadrature") {
    for (double qm1 : {0.02, 0.1, 0.4}) {
      for (double a : {0.01, 0.05, 1.0}) {
        const double M = 100.0;
        auto f = [&](double m) { return std::pow(1.0 + qm1 * a * m, -1.0 / qm1) / m; };
        const double quad = integrate_qtail(f, M, qm1, a, 1e-12, -1.0).value;
        CHECK(rel(tail_integral_hypergeometric(qm1, a, M), quad) < 1e-8);
      }
    }
  }

  const auto p = reference_parameters();
  const auto cut = CutoffParams::defaults_for(p);

  SUBCASE("halving beta - beta0 adds ln 2") {
    const double gap = 5e-3;
    const auto t1 = tail_log_divergence(p, cut, p.beta0 + gap);
    const auto t2 = tail_log_divergence(p, cut, p.beta0 + gap / 2.0);
    CHECK(t1.regime_ok);
    CHECK(t1.warnings.empty());
    REQUIRE(t1.hypergeometric.has_value());
    CHECK(rel(*t1.hypergeometric, t1.quadrature) < 1e-8);
    CHECK(std::fabs((t2.quadrature - t1.quadrature) / std::log(2.0) - 1.0) < 0.05);
    CHECK(t1.anchor_factor > 0.9);
  }

  SUBCASE("tail vanishes monotonically as M grows") {
    double prev = std::numeric_limits<double>::infinity();
    for (double M : {1.0, 10.0, 100.0, 1e3, 1e4}) {
      auto c = cut;
      c.M = M;
      c.m_tilde = M / 100.0;
      c.m_min = std::min(c.m_min, c.m_tilde / 2.0);
      const double v = tail_log_divergence(p, c, p.beta0 + 0.05).quadrature;
      CHECK(v < prev);
      CHECK(v > 0.0);
      prev = v;
    }
    CHECK(prev < 1e-2);
  }

  SUBCASE("regime violation is a warning") {
    auto c = cut;
    c.a_tilde = 1e4;
    const auto t = tail_log_divergence(p, c, p.beta0 + 1e-3);
    CHECK_FALSE(t.regime_ok);
    CHECK_FALSE(t.warnings.empty());
  }

  SUBCASE("slow power-law tail is outside the logarithmic regime") {
    // gap = 1e-3 with q0'-1 = 0.05, M = 10: exact value sum_n t0^(n+s)/(n+s), s = 0.02,
    // t0 = 2/3, is 50.6696703699923; ln(1/gap) - ln((q0'-1) M) gives 7.6.
    BootstrapParams slow = p;
    slow.beta0 = 5.0;
    slow.q0_prime_minus_one = 0.05;
    CutoffParams c{10.0, 0.1, 0.5, 0.05};
    const auto t = tail_log_divergence(slow, c, 5.0 + 1e-3);
    CHECK(rel(t.quadrature, 50.6696703699923) < 1e-8);
    CHECK(rel(*t.hypergeometric, 50.6696703699923) < 1e-8);
    CHECK(std::fabs(t.log_estimate - 7.6009024595) < 1e-8);
    CHECK_FALSE(t.regime_ok);
    CHECK_FALSE(t.warnings.empty());
  }

  CHECK_THROWS_AS(tail_log_divergence(p, cut, p.beta0), std::domain_error);
}

TEST_CASE("singularity scan") {
  auto p = reference_parameters();
  std::vector<double> grid;
  for (int i = 0; i < 30; ++i) grid.push_back(p.beta0 + 1e-3 * std::pow(100.0, i / 29.0));

  SUBCASE("slope a + 1") {
    for (double a : {0.0, 0.5, 1.0, 2.0}) {
      p.a_exp = a;
      const auto s = singularity_scan(p, grid, 1);
      REQUIRE(s.slope.has_value());
      CHECK(std::fabs(*s.slope / (a + 1.0) - 1.0) < 0.02);
      CHECK(s.predicted_slope == a + 1.0);
      REQUIRE(s.gamma_corrected_slope.has_value());
      CHECK(*s.gamma_corrected_slope > a + 1.0 - 1e-12);
    }
    p.a_exp = 0.0;
    CHECK(std::fabs(*singularity_scan(p, grid, 1).slope - 1.0) < 1e-8);
  }

  SUBCASE("bad rows are flagged and skipped") {
    auto g = grid;
    g.insert(g.begin(), p.beta0);
    g.insert(g.begin() + 1, p.beta0 + 1e-4);  // r = 1 < a + 1
    const auto s = singularity_scan(p, g, 1);
    REQUIRE(s.rows.size() == g.size());
    CHECK(s.rows[0].status == ZqStatus::divergent);
    CHECK_FALSE(s.rows[0].zq.has_value());
    CHECK(s.rows[1].status == ZqStatus::constraint_violation);
    CHECK(s.points_used == grid.size());
    CHECK(*s.slope == doctest::Approx(*singularity_scan(p, grid, 1).slope).epsilon(1e-12));
  }

  SUBCASE("thread count does not change the table") {
    const auto a = singularity_scan(p, grid, 1);
    const auto b = singularity_scan(p, grid, 4);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(a.rows[i].beta == b.rows[i].beta);
      CHECK(*a.rows[i].zq == *b.rows[i].zq);
    }
    CHECK(*a.slope == *b.slope);
  }
}

TEST_CASE("consistency report") {
  const auto p = reference_parameters();
  const auto cut = CutoffParams::defaults_for(p);
  const auto rep = consistency_report(p, matched_deformation(p.beta0, p), cut);
  CHECK(rep.weak_constraint.pass);
  CHECK(rep.matched_deformation.pass);
  CHECK(rep.exponent_matching.pass);
  CHECK(rep.fq_constancy.pass);
  CHECK(rep.all_pass());
  CHECK(rep.fq_constancy.rel_diff < 0.01);

  const auto bad = consistency_report(p, QDeform::from_q(1.2, p.beta0), cut);
  CHECK_FALSE(bad.matched_deformation.pass);
  CHECK_FALSE(bad.all_pass());

  auto hand = toy(5.0, 1e-4, 1.0);
  CHECK(closing_volume(hand) == doctest::Approx(4.0 * kPi * kPi * std::pow(5.0, 1.5)).epsilon(1e-14));
  hand.V0 = 2.0 * closing_volume(hand);
  const auto off = consistency_report(hand, matched_deformation(5.0, hand), CutoffParams::defaults_for(hand));
  CHECK_FALSE(off.exponent_matching.pass);
  CHECK(off.exponent_matching.implied_V0 == doctest::Approx(closing_volume(hand)));
  CHECK(off.exponent_matching.implied_a == doctest::Approx(3.0));
}

TEST_CASE("reference parameters close the system") {
  const auto p = reference_parameters();
  CHECK(p.beta0 == doctest::Approx(1.0 / 0.110));
  CHECK(p.alpha(p.beta0) == doctest::Approx(p.a_exp + 1.0).epsilon(1e-14));
  const double m0 = kPionMassGeV;
  CHECK(p.b_const * std::tgamma(p.a_exp + 1.0) ==
        doctest::Approx(std::pow(std::exp(-std::numbers::egamma) / m0, p.a_exp + 1.0)).epsilon(1e-13));
}
