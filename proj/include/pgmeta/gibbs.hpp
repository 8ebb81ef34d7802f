#ifndef PGMETA_GIBBS_HPP
#define PGMETA_GIBBS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pgmeta/polya_gamma.hpp"
#include "pgmeta/prior.hpp"
#include "pgmeta/random.hpp"
#include "pgmeta/table.hpp"

namespace pgmeta {

enum class HyperMode { kFixedMuSigma, kNIW };

struct GibbsConfig {
  int iters = 20000;
  int burnin = 5000;
  int thin = 1;
  std::uint64_t seed = 20100618;
  TruncationConfig trunc;
  HyperMode hyper_mode = HyperMode::kNIW;
};

void validate(const GibbsConfig& cfg);

/// Number of stored draws: (iters - burnin) / thin.
std::size_t retained_draws(const GibbsConfig& cfg);

/// Prior for the two-arm sampler: either fixed (mu, Sigma) or a flat mu
/// with an IW(d, B) hyperprior on Sigma.
struct GibbsPrior {
  NormalPrior fixed;
  std::optional<NIWHyper> niw;
  std::optional<ZPseudoCounts> z;
};

struct GibbsDraw {
  ArmMatrixd psi;
  Vector2d mu;
  Matrix2d sigma;
};

struct PosteriorChain {
  std::vector<GibbsDraw> draws;
  GibbsConfig config;
  std::vector<std::string> labels;
  int chain_id = 0;
  // Every Gibbs proposal is accepted.
  double acceptance_rate = 1.0;
};

/// omega_ij ~ PG(n_ij, psi_ij); cells with n_ij = 0 get exactly 0.
ArmMatrixd update_omega(const ArmMatrixd& psi, const ArmMatrixd& totals,
                        const TruncationConfig& trunc, Rng& rng);

/// psi_i ~ N(m_i, V_i) with V_i^{-1} = Omega_i + Sigma^{-1} and
/// m_i = V_i (kappa_i + Sigma^{-1} mu).
ArmMatrixd update_psi(const ArmMatrixd& omega, const ArmMatrixd& kappa, const Vector2d& mu,
                      const Matrix2d& sigma, Rng& rng);

/// mu ~ N(mean(psi), Sigma / N), then Sigma ~ IW(d + N, B + sum (psi_i - mu)(psi_i - mu)').
/// `sigma` is the current value used for the mu draw.
std::pair<Vector2d, Matrix2d> update_hyper(const ArmMatrixd& psi, const Matrix2d& sigma,
                                           const NIWHyper& hyper, Rng& rng);

/// Runs iters sweeps of Omega -> Psi -> (mu, Sigma) and keeps every thin-th
/// post-burn-in draw. Deterministic for a fixed seed.
PosteriorChain run_gibbs(const TwoArmTable& table, const GibbsPrior& prior, const GibbsConfig& cfg);
PosteriorChain run_gibbs(const EffectiveCounts& counts, const GibbsPrior& prior,
                         const GibbsConfig& cfg);

/// Runs `chains` independent chains with seeds seed + 0 .. seed + chains - 1,
/// concurrently. Results are ordered by chain index.
std::vector<PosteriorChain> run_gibbs_chains(const TwoArmTable& table, const GibbsPrior& prior,
                                             const GibbsConfig& cfg, int chains);

}  // namespace pgmeta

#endif  // PGMETA_GIBBS_HPP
