#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "pgmeta/em.hpp"

using namespace pgmeta;

namespace {

NormalPrior prior_with(double var) {
  NormalPrior p;
  p.cov = var * Matrix2d::Identity();
  return p;
}

oracle::Center oracle_center(const TwoArmTable& t, std::size_t i, const NormalPrior& p) {
  oracle::Center c;
  for (int j = 0; j < 2; ++j) {
    c.y[j] = static_cast<double>(t.centers[i][j].successes);
    c.n[j] = static_cast<double>(t.centers[i][j].total);
    c.mu[j] = p.mean(j);
  }
  const Matrix2d prec = p.precision();
  for (int r = 0; r < 2; ++r)
    for (int s = 0; s < 2; ++s) c.precision[r][s] = prec(r, s);
  return c;
}

double max_gradient(const EMState& s, const EffectiveCounts& c, const NormalPrior& p) {
  return log_posterior_gradient(s.psi, c, p.mean, p.precision()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("e_step weights") {
  ArmMatrixd psi(2, 2), n(2, 2);
  psi << 0.0, -0.8, 2.0, 1.0;
  n << 10, 36, 0, 4;
  const auto w = e_step(psi, n);
  CHECK(w(0, 0) == doctest::Approx(2.5));
  CHECK(w(0, 1) == doctest::Approx(36 * std::tanh(0.4) / 1.6).epsilon(1e-14));
  CHECK(w(1, 0) == 0.0);
  CHECK(w(1, 1) == doctest::Approx(4 * std::tanh(0.5) / 2.0));
}

TEST_CASE("m_step limits") {
  ArmMatrixd omega(3, 2), k(3, 2);
  omega << 1, 2, 3, 4, 0.5, 9;
  k.setZero();
  const auto zero = m_step(omega, k, prior_with(1.0));
  CHECK(zero.cwiseAbs().maxCoeff() == 0.0);

  k << 1, -2, 0.5, 3, -0.25, 4.5;
  const auto flat = m_step(omega, k, Vector2d::Zero(), Matrix2d::Zero());
  CHECK((flat.array() - k.array() / omega.array()).abs().maxCoeff() < 1e-14);

  // Exact 2x2 solve for one center.
  NormalPrior p;
  p.mean << 0.3, -0.2;
  p.cov << 2, 0.5, 0.5, 1;
  const auto psi = m_step(omega, k, p);
  Matrix2d a = p.precision();
  a(0, 0) += omega(1, 0);
  a(1, 1) += omega(1, 1);
  const Vector2d rhs = k.row(1).transpose() + p.precision() * p.mean;
  const Vector2d want = a.inverse() * rhs;
  CHECK((psi.row(1).transpose() - want).norm() < 1e-13);

  ArmMatrixd bad = omega;
  bad(0, 0) = 0;
  bad(0, 1) = 0;
  CHECK_THROWS_AS(m_step(bad, k, Vector2d::Zero(), Matrix2d::Zero()), NumericalError);
}

TEST_CASE("symmetric cells are a fixed point after one iteration") {
  const auto t = make_two_arm_table({{5, 10, 5, 10}});
  const auto s = em_fit(t, prior_with(1.0), std::nullopt, EMConfig{});
  CHECK(s.converged);
  CHECK(s.iterations == 1);
  CHECK(s.psi.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("EM matches the per-center Newton optimizer on the topical-cream table") {
  const auto t = skene_wakefield_table();
  for (double var : {1.0, 4.0}) {
    const auto p = prior_with(var);
    const auto s = em_fit(t, p, std::nullopt, EMConfig{});
    REQUIRE(s.converged);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const auto mode = oracle::newton_mode(oracle_center(t, i, p));
      CHECK(std::abs(s.psi(static_cast<Eigen::Index>(i), 0) - mode[0]) < 1e-4);
      CHECK(std::abs(s.psi(static_cast<Eigen::Index>(i), 1) - mode[1]) < 1e-4);
    }
  }
}

TEST_CASE("EM with a correlated prior matches the oracle") {
  const auto t = skene_wakefield_table();
  NormalPrior p;
  p.mean << -0.4, -1.3;
  p.cov << 0.754, 0.857, 0.857, 1.480;
  const auto s = em_fit(t, p, std::nullopt, EMConfig{});
  REQUIRE(s.converged);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto mode = oracle::newton_mode(oracle_center(t, i, p));
    CHECK(std::abs(s.psi(static_cast<Eigen::Index>(i), 0) - mode[0]) < 1e-4);
    CHECK(std::abs(s.psi(static_cast<Eigen::Index>(i), 1) - mode[1]) < 1e-4);
  }
}

TEST_CASE("EM ascent and stationarity") {
  const auto t = skene_wakefield_table();
  const auto c = effective_counts(t);
  for (double var : {0.25, 1.0, 4.0, 100.0}) {
    const auto p = prior_with(var);
    const auto s = em_fit(c, p, EMConfig{});
    REQUIRE(s.converged);
    REQUIRE(s.objective_trace.size() == static_cast<std::size_t>(s.iterations) + 1);
    for (std::size_t g = 1; g < s.objective_trace.size(); ++g) {
      CHECK(s.objective_trace[g] >= s.objective_trace[g - 1] - 1e-10);
    }
    CHECK(max_gradient(s, c, p) < 1e-7);
    CHECK(s.log_posterior == doctest::Approx(log_posterior(s.psi, c, p.mean, p.precision())).epsilon(1e-14));
  }
}

TEST_CASE("doubled E-step weights do not give a stationary point") {
  // With omega = n tanh(psi/2) / psi the iteration still converges, but to
  // a point where the exact gradient is visibly nonzero.
  const auto t = skene_wakefield_table();
  const auto c = effective_counts(t);
  const auto p = prior_with(4.0);
  ArmMatrixd psi = initial_log_odds(c);
  for (int it = 0; it < 5000; ++it) {
    psi = m_step(2.0 * e_step(psi, c.totals), kappa(c), p);
  }
  const double grad = log_posterior_gradient(psi, c, p.mean, p.precision()).cwiseAbs().maxCoeff();
  CHECK(grad > 0.1);
}

TEST_CASE("Z pseudo-counts give a finite mode for an empty arm") {
  const auto t = make_two_arm_table({{0, 12, 0, 12}});
  const auto p = prior_with(1e6);
  const auto s = em_fit(t, p, ZPseudoCounts::jeffreys(1), EMConfig{});
  REQUIRE(s.converged);
  const double want = oracle::bisect_root(
      [](double x) { return 0.5 - 13.0 * oracle::logistic(x) - x / 1e6; }, -50.0, 50.0);
  CHECK(std::abs(want - std::log(0.5 / 12.5)) < 1e-4);
  CHECK(std::abs(s.psi(0, 0) - want) < 1e-4);
  CHECK(std::abs(s.psi(0, 1) - want) < 1e-4);
}

TEST_CASE("permuting centers permutes the MAP rows") {
  const auto t = skene_wakefield_table();
  const std::vector<std::size_t> order{3, 7, 0, 5, 1, 6, 2, 4};
  TwoArmTable shuffled;
  for (auto i : order) {
    shuffled.centers.push_back(t.centers[i]);
    shuffled.labels.push_back(t.labels[i]);
  }
  const auto a = em_fit(t, prior_with(4.0), std::nullopt, EMConfig{});
  const auto b = em_fit(shuffled, prior_with(4.0), std::nullopt, EMConfig{});
  for (std::size_t r = 0; r < order.size(); ++r) {
    CHECK(std::abs(b.psi(static_cast<Eigen::Index>(r), 0) - a.psi(static_cast<Eigen::Index>(order[r]), 0)) < 1e-10);
    CHECK(std::abs(b.psi(static_cast<Eigen::Index>(r), 1) - a.psi(static_cast<Eigen::Index>(order[r]), 1)) < 1e-10);
  }
}

TEST_CASE("non-convergence is reported, not thrown") {
  EMConfig cfg;
  cfg.max_iter = 1;
  const auto s = em_fit(skene_wakefield_table(), prior_with(4.0), std::nullopt, cfg);
  CHECK_FALSE(s.converged);
  CHECK(s.iterations == 1);
}

TEST_CASE("EM config validation") {
  EMConfig cfg;
  cfg.tol = 0;
  CHECK_THROWS_AS(validate(cfg), InvalidParameter);
  cfg.tol = 1e-8;
  cfg.max_iter = 0;
  CHECK_THROWS_AS(validate(cfg), InvalidParameter);
}

TEST_CASE("initial log-odds are clamped MLEs") {
  const auto c = effective_counts(make_two_arm_table({{0, 12, 7, 7}, {3, 4, 0, 0}}));
  const auto init = initial_log_odds(c);
  CHECK(init(0, 0) == -5.0);
  CHECK(init(0, 1) == 5.0);
  CHECK(init(1, 0) == doctest::Approx(std::log(3.0)));
  CHECK(init(1, 1) == 0.0);
}

TEST_CASE("ECM with identical centers collapses onto the ridge floor") {
  const auto t = make_two_arm_table({{4, 10, 2, 10}, {4, 10, 2, 10}, {4, 10, 2, 10}});
  // With Sigma on the ridge floor mu moves by O(1e-6) per iteration, so
  // convergence takes millions of cheap iterations.
  EMConfig cfg;
  cfg.update_hyper = HyperUpdate::kMuAndSigma;
  cfg.max_iter = 5000000;
  const auto s = ecm_fit(t, prior_with(1.0), cfg);
  CHECK(s.converged);
  CHECK_FALSE(s.warnings.empty());
  CHECK((s.sigma - 1e-6 * Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(s.mu(0) - s.psi(0, 0)) < 1e-8);
  CHECK(std::abs(s.mu(1) - s.psi(0, 1)) < 1e-8);
  CHECK(std::abs(s.mu(0) - std::log(4.0 / 6.0)) < 0.01);
  CHECK(std::abs(s.mu(1) - std::log(2.0 / 8.0)) < 0.01);
}

TEST_CASE("ECM with mu only keeps Sigma fixed and centers mu") {
  EMConfig cfg;
  cfg.update_hyper = HyperUpdate::kMuOnly;
  const auto s = ecm_fit(skene_wakefield_table(), prior_with(1.0), cfg);
  REQUIRE(s.converged);
  CHECK(s.sigma == Matrix2d::Identity());
  const Vector2d mean = s.psi.colwise().mean().transpose();
  CHECK((s.mu - mean).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("ECM objective is nondecreasing with mu updates") {
  EMConfig cfg;
  cfg.update_hyper = HyperUpdate::kMuOnly;
  const auto s = ecm_fit(skene_wakefield_table(), prior_with(1.0), cfg);
  REQUIRE(s.converged);
  for (std::size_t g = 1; g < s.objective_trace.size(); ++g) {
    CHECK(s.objective_trace[g] >= s.objective_trace[g - 1] - 1e-10);
  }
}

TEST_CASE("the ridge step is the only objective decrease on the topical-cream table") {
  EMConfig cfg;
  cfg.update_hyper = HyperUpdate::kMuAndSigma;
  cfg.max_iter = 3000;
  const auto s = ecm_fit(skene_wakefield_table(), prior_with(1.0), cfg);
  REQUIRE(s.warnings.size() == 1);
  int drops = 0;
  for (std::size_t g = 1; g < s.objective_trace.size(); ++g) {
    if (s.objective_trace[g] < s.objective_trace[g - 1] - 1e-10) ++drops;
  }
  CHECK(drops == 1);
}

TEST_CASE("unpenalized ECM lets Sigma degenerate on the topical-cream table") {
  // The joint density is unbounded as Sigma becomes singular; without a
  // penalty the iterates drift toward that boundary.
  EMConfig cfg;
  cfg.update_hyper = HyperUpdate::kMuAndSigma;
  cfg.max_iter = 20000;
  const auto s = ecm_fit(skene_wakefield_table(), prior_with(1.0), cfg);
  CHECK_FALSE(s.converged);
  CHECK(s.sigma.determinant() < 1e-4);
  CHECK(s.objective_trace.back() > s.objective_trace[100]);
}

TEST_CASE("ECM fixed point satisfies the conditional-maximization identities") {
  const auto t = make_two_arm_table({{40, 200, 20, 200},
                                     {90, 200, 60, 200},
                                     {150, 200, 80, 200},
                                     {20, 200, 30, 200},
                                     {120, 200, 140, 200},
                                     {60, 200, 10, 200}});
  EMConfig cfg;
  cfg.update_hyper = HyperUpdate::kMuAndSigma;
  const auto s = ecm_fit(t, prior_with(1.0), cfg);
  REQUIRE(s.converged);
  const Vector2d mean = s.psi.colwise().mean().transpose();
  CHECK((s.mu - mean).cwiseAbs().maxCoeff() < 1e-7);
  const ArmMatrixd centered = s.psi.rowwise() - s.mu.transpose();
  const Matrix2d sigma = centered.transpose() * centered / static_cast<double>(s.psi.rows());
  CHECK((s.sigma - sigma).cwiseAbs().maxCoeff() < 1e-7);
  for (std::size_t g = 1; g < s.objective_trace.size(); ++g) {
    CHECK(s.objective_trace[g] >= s.objective_trace[g - 1] - 1e-10);
  }
}

TEST_CASE("penalized ECM converges to the IW posterior-mode identity") {
  EMConfig cfg;
  cfg.update_hyper = HyperUpdate::kMuAndSigma;
  NIWHyper h{4.0, Matrix2d::Identity()};
  h.scale << 0.754, 0.857, 0.857, 1.480;
  cfg.hyper_penalty = h;
  NormalPrior init;
  init.cov = h.scale;
  const auto s = ecm_fit(skene_wakefield_table(), init, cfg);
  REQUIRE(s.converged);
  const ArmMatrixd centered = s.psi.rowwise() - s.mu.transpose();
  const Matrix2d scatter = centered.transpose() * centered;
  const Matrix2d want = (h.scale + scatter) / (h.dof + 8.0 + 3.0);
  CHECK((s.sigma - want).cwiseAbs().maxCoeff() < 1e-7);
  for (std::size_t g = 1; g < s.objective_trace.size(); ++g) {
    CHECK(s.objective_trace[g] >= s.objective_trace[g - 1] - 1e-10);
  }
}

TEST_CASE("ECM needs two centers to estimate Sigma") {
  EMConfig cfg;
  cfg.update_hyper = HyperUpdate::kMuAndSigma;
  CHECK_THROWS_AS(ecm_fit(make_two_arm_table({{1, 4, 2, 5}}), prior_with(1.0), cfg), InvalidParameter);
  cfg.update_hyper = HyperUpdate::kMuOnly;
  CHECK_NOTHROW(ecm_fit(make_two_arm_table({{1, 4, 2, 5}}), prior_with(1.0), cfg));
}
