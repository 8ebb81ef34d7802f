#ifndef PGMETA_EM_HPP
#define PGMETA_EM_HPP

#include <optional>
#include <string>
#include <vector>

#include "pgmeta/prior.hpp"
#include "pgmeta/table.hpp"
#include "pgmeta/types.hpp"

namespace pgmeta {

enum class HyperUpdate { kNone, kMuOnly, kMuAndSigma };

struct EMConfig {
  double tol = 1e-8;
  int max_iter = 10000;
  HyperUpdate update_hyper = HyperUpdate::kNone;
  // When set, the Sigma conditional-maximization step takes the IW(d, B)
  // posterior mode (B + S) / (d + N + 3) instead of S / N.
  std::optional<NIWHyper> hyper_penalty;
};

void validate(const EMConfig& cfg);

struct EMState {
  ArmMatrixd psi;
  ArmMatrixd omega;
  Vector2d mu = Vector2d::Zero();
  Matrix2d sigma = Matrix2d::Identity();
  int iterations = 0;
  bool converged = false;
  double log_posterior = 0.0;
  // Objective after initialization and after every iteration.
  std::vector<double> objective_trace;
  std::vector<std::string> warnings;
};

/// Expected augmentation weights: omega_ij = pg_mean(n_ij, psi_ij).
ArmMatrixd e_step(const ArmMatrixd& psi, const ArmMatrixd& totals);

/// psi_i = (Omega_i + P)^{-1} (kappa_i + P mu) per center, where P is the
/// prior precision (possibly zero).
ArmMatrixd m_step(const ArmMatrixd& omega, const ArmMatrixd& kappa, const Vector2d& mean,
                  const Matrix2d& precision);
ArmMatrixd m_step(const ArmMatrixd& omega, const ArmMatrixd& kappa, const NormalPrior& prior);

/// Unnormalized log posterior sum_ij [y psi - n log(1 + e^psi)]
/// - 1/2 sum_i (psi_i - mu)' P (psi_i - mu).
double log_posterior(const ArmMatrixd& psi, const EffectiveCounts& counts, const Vector2d& mean,
                     const Matrix2d& precision);

/// Gradient of log_posterior with respect to psi.
ArmMatrixd log_posterior_gradient(const ArmMatrixd& psi, const EffectiveCounts& counts,
                                  const Vector2d& mean, const Matrix2d& precision);

/// Log joint density of (D, Psi, mu, Sigma) up to a constant: the log
/// likelihood plus sum_i log N(psi_i | mu, Sigma), plus the IW kernel when
/// a penalty is given. This is the quantity ECM increases.
double ecm_objective(const ArmMatrixd& psi, const EffectiveCounts& counts, const Vector2d& mu,
                     const Matrix2d& sigma, const std::optional<NIWHyper>& penalty = std::nullopt);

/// Per-cell MLE log-odds clamped to [-5, 5]; empty cells start at 0.
ArmMatrixd initial_log_odds(const EffectiveCounts& counts);

/// MAP estimate of Psi with fixed (mu, Sigma). Non-convergence is
/// reported through EMState::converged.
EMState em_fit(const EffectiveCounts& counts, const NormalPrior& prior, const EMConfig& cfg);
EMState em_fit(const TwoArmTable& table, const NormalPrior& prior,
               const std::optional<ZPseudoCounts>& z, const EMConfig& cfg);

/// ECM: E step, Psi update, then mu and/or Sigma by conditional
/// maximization according to cfg.update_hyper. `init` supplies the
/// starting (mu, Sigma).
EMState ecm_fit(const EffectiveCounts& counts, const NormalPrior& init, const EMConfig& cfg);
EMState ecm_fit(const TwoArmTable& table, const NormalPrior& init, const EMConfig& cfg);

}  // namespace pgmeta

#endif  // PGMETA_EM_HPP
