#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "pgmeta/prior.hpp"

using namespace pgmeta;

namespace {

Matrix2d printed_b() {
  Matrix2d b;
  b << 0.754, 0.857, 0.857, 1.480;
  return b;
}

}  // namespace

TEST_CASE("iw_from_moments reproduces the topical-cream scale matrix") {
  // Moments recovered by inverting the printed matrix by hand:
  // sl2 = B22, sd2 = B11 + B22 - 2 B12, rho = (B12 - B22) / sqrt(sl2 sd2).
  const double sl2 = 1.480, sd2 = 0.754 + 1.480 - 2 * 0.857;
  const double rho = (0.857 - 1.480) / std::sqrt(sl2 * sd2);
  CHECK(sd2 == doctest::Approx(0.520));
  CHECK(rho == doctest::Approx(-0.710).epsilon(1e-3));

  const auto rounded = iw_from_moments({0.520, 1.480, -0.710}, 4.0);
  CHECK(rounded.hyper.dof == 4.0);
  CHECK((rounded.hyper.scale - printed_b()).cwiseAbs().maxCoeff() < 5e-4);

  const auto exact = iw_from_moments({sd2, sl2, rho}, 4.0);
  CHECK((exact.hyper.scale - printed_b()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("iw_from_moments zero correlation") {
  const auto e = iw_from_moments({1.0, 1.0, 0.0}, 4.0);
  Matrix2d want;
  want << 2, 1, 1, 1;
  CHECK((e.hyper.scale - want).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(e.warnings.empty());
  const auto scaled = iw_from_moments({1.0, 1.0, 0.0}, 6.0);
  CHECK((scaled.hyper.scale - 3.0 * want).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("iw_from_moments warns near singularity and rejects bad input") {
  const auto e = iw_from_moments({1.0, 1.0, -0.999}, 4.0);
  CHECK_FALSE(e.warnings.empty());
  CHECK_THROWS_AS(iw_from_moments({1.0, 1.0, -1.0}, 4.0), ElicitationError);
  CHECK_THROWS_AS(iw_from_moments({1.0, 1.0, 1.2}, 4.0), ElicitationError);
  CHECK_THROWS_AS(iw_from_moments({0.0, 1.0, 0.0}, 4.0), ElicitationError);
  CHECK_THROWS_AS(iw_from_moments({1.0, -1.0, 0.0}, 4.0), ElicitationError);
  CHECK_THROWS_AS(iw_from_moments({1.0, 1.0, 0.0}, 3.0), ElicitationError);
  CHECK_THROWS_AS(iw_from_moments({NAN, 1.0, 0.0}, 4.0), ElicitationError);
}

TEST_CASE("iw_moments inverts iw_from_moments exactly") {
  for (double sd2 : {0.1, 0.52, 1.0, 7.5}) {
    for (double sl2 : {0.2, 1.48, 3.0}) {
      for (double rho : {-0.95, -0.71, 0.0, 0.4, 0.9}) {
        for (double d : {3.5, 4.0, 10.0}) {
          const auto back = iw_moments(iw_from_moments({sd2, sl2, rho}, d, 1e300).hyper);
          CHECK(std::abs(back.sigma_delta2 - sd2) < 1e-12);
          CHECK(std::abs(back.sigma_lambda2 - sl2) < 1e-12);
          CHECK(std::abs(back.rho - rho) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("iw_prior_mean") {
  CHECK((iw_prior_mean({4.0, printed_b()}) - printed_b()).norm() == 0.0);
  CHECK((iw_prior_mean({5.0, 2.0 * Matrix2d::Identity()}) - Matrix2d::Identity()).norm() < 1e-15);
  CHECK((iw_prior_mean({3.5, Matrix2d::Identity()}) - 2.0 * Matrix2d::Identity()).norm() < 1e-15);
  CHECK_THROWS_AS(iw_prior_mean({3.0, Matrix2d::Identity()}), DomainError);
}

TEST_CASE("prior validation") {
  NormalPrior p;
  CHECK_NOTHROW(validate(p));
  p.cov << 1, 2, 2, 1;
  CHECK_THROWS_AS(validate(p), InvalidParameter);
  p.cov << 1, 0.5, 0.4, 1;
  CHECK_THROWS_AS(validate(p), InvalidParameter);
  p.cov.setIdentity();
  p.mean(0) = INFINITY;
  CHECK_THROWS_AS(validate(p), InvalidParameter);

  CHECK_THROWS_AS(validate(NIWHyper{2.5, Matrix2d::Identity()}), InvalidParameter);
  CHECK_THROWS_AS(validate(NIWHyper{4.0, -Matrix2d::Identity()}), InvalidParameter);
  CHECK_NOTHROW(validate(NIWHyper{4.0, printed_b()}));

  NormalPrior q;
  q.cov << 4, 1, 1, 2;
  CHECK((q.precision() * q.cov - Matrix2d::Identity()).norm() < 1e-14);
}

TEST_CASE("pseudo-counts") {
  const auto t = make_two_arm_table({{3, 10, 0, 12}});
  const auto c = apply_pseudo_counts(t, ZPseudoCounts::jeffreys(1));
  CHECK(c.successes(0, 0) == 3.5);
  CHECK(c.totals(0, 0) == 11.0);
  CHECK(c.successes(0, 1) == 0.5);
  CHECK(c.totals(0, 1) == 13.0);

  const auto same = apply_pseudo_counts(t, ZPseudoCounts::uniform(1, 0.0, 0.0));
  const auto raw = effective_counts(t);
  CHECK(same.successes == raw.successes);
  CHECK(same.totals == raw.totals);

  for (double a : {0.0, 0.5, 2.0}) {
    for (double b : {0.0, 0.5, 3.0}) {
      const auto k = kappa(apply_pseudo_counts(t, ZPseudoCounts::uniform(1, a, b)));
      const auto k0 = kappa(t);
      CHECK((k.array() - k0.array() - (a - b) / 2).abs().maxCoeff() < 1e-14);
    }
  }

  CHECK_THROWS_AS(validate(ZPseudoCounts::uniform(1, -0.5, 0.5)), InvalidParameter);
  CHECK_THROWS_AS(apply_pseudo_counts(t, ZPseudoCounts::jeffreys(2)), InvalidParameter);
}

TEST_CASE("z_log_density") {
  CHECK(z_log_density(0.0, 0.5, 0.5) == doctest::Approx(std::log(1.0 / (2.0 * std::numbers::pi))).epsilon(1e-14));
  for (double psi : {0.3, 1.0, 4.0, 30.0}) {
    for (double a : {0.5, 1.0, 2.0}) {
      CHECK(z_log_density(psi, a, a) == doctest::Approx(z_log_density(-psi, a, a)).epsilon(1e-13));
    }
  }
  // Jeffreys case: (1/pi) e^{psi/2} / (1 + e^psi).
  CHECK(z_log_density(1.3, 0.5, 0.5) ==
        doctest::Approx(std::log(std::exp(0.65) / (1 + std::exp(1.3)) / std::numbers::pi)).epsilon(1e-13));
  CHECK(std::isfinite(z_log_density(-800.0, 0.5, 0.5)));
  CHECK(std::isfinite(z_log_density(800.0, 0.5, 0.5)));
}

TEST_CASE("z density integrates to one") {
  boost::math::quadrature::tanh_sinh<double> integrator;
  for (double a : {0.5, 1.0, 2.0}) {
    for (double b : {0.5, 1.0, 2.0}) {
      auto f = [&](double psi) { return std::exp(z_log_density(psi, a, b)); };
      const double total = integrator.integrate(f, -INFINITY, INFINITY);
      CHECK(std::abs(total - 1.0) < 1e-6);
    }
  }
}
