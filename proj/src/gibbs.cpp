#include "pgmeta/gibbs.hpp"

#include <exception>
#include <thread>

#include "pgmeta/em.hpp"

namespace pgmeta {

void validate(const GibbsConfig& cfg) {
  if (cfg.iters < 1) throw InvalidParameter("iters must be positive");
  if (cfg.burnin < 0 || cfg.burnin >= cfg.iters) {
    throw InvalidParameter("burn-in must be nonnegative and smaller than iters");
  }
  if (cfg.thin < 1) throw InvalidParameter("thin must be at least 1");
  validate(cfg.trunc);
}

std::size_t retained_draws(const GibbsConfig& cfg) {
  return static_cast<std::size_t>((cfg.iters - cfg.burnin) / cfg.thin);
}

ArmMatrixd update_omega(const ArmMatrixd& psi, const ArmMatrixd& totals,
                        const TruncationConfig& trunc, Rng& rng) {
  ArmMatrixd omega(psi.rows(), 2);
  for (Eigen::Index i = 0; i < psi.rows(); ++i) {
    for (int j = 0; j < 2; ++j) {
      omega(i, j) = pg_sample(pg_tilted_conditional(totals(i, j), psi(i, j)), trunc, rng);
    }
  }
  return omega;
}

ArmMatrixd update_psi(const ArmMatrixd& omega, const ArmMatrixd& kappa, const Vector2d& mu,
                      const Matrix2d& sigma, Rng& rng) {
  Eigen::LLT<Matrix2d> llt(sigma);
  if (llt.info() != Eigen::Success) throw NumericalError("Sigma is not positive definite");
  const Matrix2d prior_precision = llt.solve(Matrix2d::Identity());
  const Vector2d prior_term = prior_precision * mu;

  ArmMatrixd psi(omega.rows(), 2);
  for (Eigen::Index i = 0; i < omega.rows(); ++i) {
    Eigen::MatrixXd precision = prior_precision;
    precision.diagonal() += omega.row(i).transpose();
    const Eigen::VectorXd linear = kappa.row(i).transpose() + prior_term;
    psi.row(i) = draw_normal_canonical(precision, linear, rng).transpose();
  }
  return psi;
}

std::pair<Vector2d, Matrix2d> update_hyper(const ArmMatrixd& psi, const Matrix2d& sigma,
                                           const NIWHyper& hyper, Rng& rng) {
  const Eigen::Index n = psi.rows();
  if (n < 1) throw InvalidParameter("hyperparameter update needs at least one center");
  const Eigen::VectorXd centre = psi.colwise().mean().transpose();
  const Vector2d mu = draw_normal(centre, sigma / static_cast<double>(n), rng);

  const ArmMatrixd centered = psi.rowwise() - mu.transpose();
  const Matrix2d scale = hyper.scale + centered.transpose() * centered;
  const Matrix2d draw = draw_inverse_wishart(hyper.dof + static_cast<double>(n), scale, rng);
  return {mu, draw};
}

PosteriorChain run_gibbs(const EffectiveCounts& counts, const GibbsPrior& prior,
                         const GibbsConfig& cfg) {
  validate(cfg);
  if (counts.size() < 1) throw InvalidParameter("table has no centers");
  const bool use_niw = cfg.hyper_mode == HyperMode::kNIW;
  if (use_niw && !prior.niw) throw InvalidParameter("NIW hyper mode needs an NIW hyperprior");
  if (use_niw) validate(*prior.niw);
  else validate(prior.fixed);

  const EffectiveCounts effective = prior.z ? apply_pseudo_counts(counts, *prior.z) : counts;
  const ArmMatrixd kappa_ = kappa(effective);

  Rng rng(cfg.seed);
  ArmMatrixd psi = initial_log_odds(effective);
  Vector2d mu = prior.fixed.mean;
  Matrix2d sigma = prior.fixed.cov;
  if (use_niw) {
    sigma = iw_prior_mean(*prior.niw);
    mu = psi.colwise().mean().transpose();
  }

  PosteriorChain chain;
  chain.config = cfg;
  chain.draws.reserve(retained_draws(cfg));
  for (int sweep = 0; sweep < cfg.iters; ++sweep) {
    const ArmMatrixd omega = update_omega(psi, effective.totals, cfg.trunc, rng);
    psi = update_psi(omega, kappa_, mu, sigma, rng);
    if (!psi.allFinite()) throw NumericalError("log-odds draw became non-finite");
    if (use_niw) std::tie(mu, sigma) = update_hyper(psi, sigma, *prior.niw, rng);

    const int kept = sweep - cfg.burnin;
    if (kept >= 0 && kept % cfg.thin == cfg.thin - 1) chain.draws.push_back({psi, mu, sigma});
  }
  return chain;
}

PosteriorChain run_gibbs(const TwoArmTable& table, const GibbsPrior& prior, const GibbsConfig& cfg) {
  validate(table);
  PosteriorChain chain = run_gibbs(effective_counts(table), prior, cfg);
  chain.labels = table.labels;
  return chain;
}

std::vector<PosteriorChain> run_gibbs_chains(const TwoArmTable& table, const GibbsPrior& prior,
                                             const GibbsConfig& cfg, int chains) {
  if (chains < 1) throw InvalidParameter("need at least one chain");
  std::vector<PosteriorChain> out(static_cast<std::size_t>(chains));
  std::vector<std::exception_ptr> errors(out.size());
  {
    std::vector<std::jthread> workers;
    for (std::size_t c = 0; c < out.size(); ++c) {
      workers.emplace_back([&, c] {
        try {
          GibbsConfig local = cfg;
          local.seed = cfg.seed + c;
          out[c] = run_gibbs(table, prior, local);
          out[c].chain_id = static_cast<int>(c);
        } catch (...) {
          errors[c] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace pgmeta
