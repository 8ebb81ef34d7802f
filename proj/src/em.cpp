#include "pgmeta/em.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pgmeta/polya_gamma.hpp"

namespace pgmeta {

namespace {

constexpr double kInitClamp = 5.0;
constexpr double kRidgeThreshold = 1e-8;
constexpr double kRidge = 1e-6;

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_likelihood(const ArmMatrixd& psi, const EffectiveCounts& counts) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < psi.rows(); ++i) {
    for (int j = 0; j < 2; ++j) {
      const double n = counts.totals(i, j);
      if (n == 0.0) continue;
      total += counts.successes(i, j) * psi(i, j) - n * softplus(psi(i, j));
    }
  }
  return total;
}

void check_shapes(const EffectiveCounts& counts) {
  if (counts.size() < 1) throw InvalidParameter("table has no centers");
  if (counts.totals.rows() != counts.successes.rows()) throw InvalidParameter("count shapes differ");
  if (!counts.successes.allFinite() || !counts.totals.allFinite() ||
      (counts.totals.array() < 0.0).any() || (counts.successes.array() < 0.0).any() ||
      (counts.successes.array() > counts.totals.array()).any()) {
    throw InvalidParameter("effective counts must satisfy 0 <= y <= n");
  }
}

}  // namespace

void validate(const EMConfig& cfg) {
  if (!(cfg.tol > 0.0)) throw InvalidParameter("tolerance must be positive");
  if (cfg.max_iter < 1) throw InvalidParameter("max_iter must be at least 1");
  if (cfg.hyper_penalty) validate(*cfg.hyper_penalty);
}

ArmMatrixd e_step(const ArmMatrixd& psi, const ArmMatrixd& totals) {
  ArmMatrixd omega(psi.rows(), 2);
  for (Eigen::Index i = 0; i < psi.rows(); ++i) {
    for (int j = 0; j < 2; ++j) omega(i, j) = pg_mean(PGParams<double>{totals(i, j), psi(i, j)});
  }
  return omega;
}

ArmMatrixd m_step(const ArmMatrixd& omega, const ArmMatrixd& kappa, const Vector2d& mean,
                  const Matrix2d& precision) {
  ArmMatrixd psi(omega.rows(), 2);
  const Vector2d prior_term = precision * mean;
  for (Eigen::Index i = 0; i < omega.rows(); ++i) {
    Matrix2d lhs = precision;
    lhs.diagonal() += omega.row(i).transpose();
    Eigen::LLT<Matrix2d> llt(lhs);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("M step system is singular at center " + std::to_string(i + 1));
    }
    psi.row(i) = llt.solve(kappa.row(i).transpose() + prior_term).transpose();
  }
  return psi;
}

ArmMatrixd m_step(const ArmMatrixd& omega, const ArmMatrixd& kappa, const NormalPrior& prior) {
  validate(prior);
  return m_step(omega, kappa, prior.mean, prior.precision());
}

double log_posterior(const ArmMatrixd& psi, const EffectiveCounts& counts, const Vector2d& mean,
                     const Matrix2d& precision) {
  double total = log_likelihood(psi, counts);
  for (Eigen::Index i = 0; i < psi.rows(); ++i) {
    const Vector2d d = psi.row(i).transpose() - mean;
    total -= 0.5 * d.dot(precision * d);
  }
  return total;
}

ArmMatrixd log_posterior_gradient(const ArmMatrixd& psi, const EffectiveCounts& counts,
                                  const Vector2d& mean, const Matrix2d& precision) {
  ArmMatrixd grad(psi.rows(), 2);
  for (Eigen::Index i = 0; i < psi.rows(); ++i) {
    const Vector2d d = psi.row(i).transpose() - mean;
    const Vector2d prior_grad = precision * d;
    for (int j = 0; j < 2; ++j) {
      grad(i, j) = counts.successes(i, j) - counts.totals(i, j) * logistic(psi(i, j)) - prior_grad(j);
    }
  }
  return grad;
}

double ecm_objective(const ArmMatrixd& psi, const EffectiveCounts& counts, const Vector2d& mu,
                     const Matrix2d& sigma, const std::optional<NIWHyper>& penalty) {
  Eigen::LLT<Matrix2d> llt(sigma);
  if (llt.info() != Eigen::Success) throw NumericalError("Sigma is not positive definite");
  const Matrix2d precision = llt.solve(Matrix2d::Identity());
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const auto n = static_cast<double>(psi.rows());
  double total = log_posterior(psi, counts, mu, precision) - 0.5 * n * log_det;
  if (penalty) {
    total -= 0.5 * (penalty->dof + 3.0) * log_det + 0.5 * (penalty->scale * precision).trace();
  }
  return total;
}

ArmMatrixd initial_log_odds(const EffectiveCounts& counts) {
  ArmMatrixd psi(counts.size(), 2);
  for (Eigen::Index i = 0; i < counts.size(); ++i) {
    for (int j = 0; j < 2; ++j) {
      const double n = counts.totals(i, j);
      psi(i, j) =
          n > 0.0 ? std::clamp(mle_log_odds(counts.successes(i, j), n), -kInitClamp, kInitClamp) : 0.0;
    }
  }
  return psi;
}

EMState em_fit(const EffectiveCounts& counts, const NormalPrior& prior, const EMConfig& cfg) {
  EMConfig fixed = cfg;
  fixed.update_hyper = HyperUpdate::kNone;
  return ecm_fit(counts, prior, fixed);
}

EMState em_fit(const TwoArmTable& table, const NormalPrior& prior,
               const std::optional<ZPseudoCounts>& z, const EMConfig& cfg) {
  validate(table);
  return em_fit(z ? apply_pseudo_counts(table, *z) : effective_counts(table), prior, cfg);
}

EMState ecm_fit(const EffectiveCounts& counts, const NormalPrior& init, const EMConfig& cfg) {
  check_shapes(counts);
  validate(init);
  validate(cfg);
  const Eigen::Index n = counts.size();
  if (cfg.update_hyper == HyperUpdate::kMuAndSigma && n < 2) {
    throw InvalidParameter("updating Sigma needs at least two centers");
  }

  const ArmMatrixd kappa_ = kappa(counts);
  EMState state;
  state.psi = initial_log_odds(counts);
  state.mu = init.mean;
  state.sigma = init.cov;
  Matrix2d precision = init.precision();

  auto objective = [&] {
    return cfg.update_hyper == HyperUpdate::kNone
               ? log_posterior(state.psi, counts, state.mu, precision)
               : ecm_objective(state.psi, counts, state.mu, state.sigma, cfg.hyper_penalty);
  };
  state.objective_trace.push_back(objective());

  bool ridge_warned = false;
  for (int iter = 1; iter <= cfg.max_iter; ++iter) {
    state.omega = e_step(state.psi, counts.totals);
    const ArmMatrixd next = m_step(state.omega, kappa_, state.mu, precision);
    double delta = (next - state.psi).cwiseAbs().maxCoeff();
    state.psi = next;

    if (cfg.update_hyper != HyperUpdate::kNone) {
      const Vector2d mu = state.psi.colwise().mean().transpose();
      delta = std::max(delta, (mu - state.mu).cwiseAbs().maxCoeff());
      state.mu = mu;
    }
    if (cfg.update_hyper == HyperUpdate::kMuAndSigma) {
      const ArmMatrixd centered = state.psi.rowwise() - state.mu.transpose();
      const Matrix2d scatter = centered.transpose() * centered;
      Matrix2d sigma = cfg.hyper_penalty
                           ? Matrix2d((cfg.hyper_penalty->scale + scatter) /
                                      (cfg.hyper_penalty->dof + static_cast<double>(n) + 3.0))
                           : Matrix2d(scatter / static_cast<double>(n));
      Eigen::SelfAdjointEigenSolver<Matrix2d> eig(sigma);
      if (eig.eigenvalues()(0) < kRidgeThreshold) {
        sigma += kRidge * Matrix2d::Identity();
        if (!ridge_warned) {
          state.warnings.push_back("Sigma update is rank deficient; added ridge 1e-6 I");
          ridge_warned = true;
        }
      }
      delta = std::max(delta, (sigma - state.sigma).cwiseAbs().maxCoeff());
      state.sigma = sigma;
      Eigen::LLT<Matrix2d> llt(state.sigma);
      if (llt.info() != Eigen::Success) throw NumericalError("Sigma update is not positive definite");
      precision = llt.solve(Matrix2d::Identity());
    }

    state.iterations = iter;
    state.objective_trace.push_back(objective());
    if (!std::isfinite(delta)) throw NumericalError("EM iterate became non-finite");
    if (delta < cfg.tol) {
      state.converged = true;
      break;
    }
  }
  state.omega = e_step(state.psi, counts.totals);
  state.log_posterior = state.objective_trace.back();
  return state;
}

EMState ecm_fit(const TwoArmTable& table, const NormalPrior& init, const EMConfig& cfg) {
  validate(table);
  return ecm_fit(effective_counts(table), init, cfg);
}

}  // namespace pgmeta
