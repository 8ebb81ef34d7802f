#include "pgmeta/multinomial.hpp"

namespace pgmeta {

namespace {

Matrix<double> spd_inverse(const Matrix<double>& m, const char* what) {
  if (!m.allFinite() || (m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + m.cwiseAbs().maxCoeff())) {
    throw InvalidParameter(std::string(what) + " must be symmetric");
  }
  Eigen::LLT<Matrix<double>> llt(m);
  if (llt.info() != Eigen::Success) {
    throw InvalidParameter(std::string(what) + " must be positive definite");
  }
  return llt.solve(Matrix<double>::Identity(m.rows(), m.cols()));
}

}  // namespace

LogitArray::LogitArray(std::size_t centers, std::size_t treatments, std::size_t outcomes) {
  if (centers < 1 || treatments < 1) throw InvalidParameter("logit array needs centers and treatments");
  if (outcomes < 2) throw InvalidParameter("logit array needs at least two outcomes");
  centers_.assign(centers, Matrix<double>::Zero(static_cast<Eigen::Index>(treatments),
                                                static_cast<Eigen::Index>(outcomes)));
}

void LogitArray::set(std::size_t i, Eigen::Index j, Eigen::Index k, double value) {
  if (k == outcomes() - 1) throw InvalidParameter("the baseline logit is fixed at zero");
  centers_[i](j, k) = value;
}

Vector<double> LogitArray::free_values() const {
  const Eigen::Index per_center = treatments() * (outcomes() - 1);
  Vector<double> out(static_cast<Eigen::Index>(centers()) * per_center);
  Eigen::Index p = 0;
  for (const auto& c : centers_) {
    for (Eigen::Index j = 0; j < c.rows(); ++j) {
      for (Eigen::Index k = 0; k + 1 < c.cols(); ++k) out(p++) = c(j, k);
    }
  }
  return out;
}

void validate(const MatrixNormalPrior& prior, Eigen::Index treatments, Eigen::Index outcomes) {
  const Eigen::Index free = outcomes - 1;
  if (prior.mean.rows() != treatments || prior.mean.cols() != free) {
    throw InvalidParameter("matrix-normal mean must be J x (K - 1)");
  }
  if (!prior.mean.allFinite()) throw InvalidParameter("matrix-normal mean must be finite");
  if (prior.row_cov.rows() != treatments || prior.row_cov.cols() != treatments) {
    throw InvalidParameter("Sigma_R must be J x J");
  }
  if (prior.col_cov.rows() != free || prior.col_cov.cols() != free) {
    throw InvalidParameter("Sigma_C must be (K - 1) x (K - 1)");
  }
  spd_inverse(prior.row_cov, "Sigma_R");
  spd_inverse(prior.col_cov, "Sigma_C");
}

std::vector<std::string> free_value_names(const MultinomialTable& table) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < table.centers(); ++i) {
    for (std::size_t j = 0; j < table.treatments(); ++j) {
      for (std::size_t k = 0; k + 1 < table.outcomes(); ++k) {
        names.push_back("psi_" + table.center_labels[i] + "_" + table.treatment_labels[j] + "_" +
                        table.outcome_labels[k]);
      }
    }
  }
  return names;
}

void multinomial_sweep(const MultinomialTable& table, const MatrixNormalPrior& prior,
                       const TruncationConfig& trunc, LogitArray& state, Rng& rng) {
  const auto J = static_cast<Eigen::Index>(table.treatments());
  const auto K = static_cast<Eigen::Index>(table.outcomes());
  const Matrix<double> row_precision = spd_inverse(prior.row_cov, "Sigma_R");
  const Matrix<double> col_precision = spd_inverse(prior.col_cov, "Sigma_C");

  for (std::size_t i = 0; i < table.centers(); ++i) {
    for (Eigen::Index k = 0; k + 1 < K; ++k) {
      const Matrix<double>& logits = state.center(i);

      // Prior mean of column k given the other free columns.
      Vector<double> cond_mean = prior.mean.col(k);
      const double pkk = col_precision(k, k);
      for (Eigen::Index l = 0; l + 1 < K; ++l) {
        if (l == k) continue;
        cond_mean -= (col_precision(k, l) / pkk) * (logits.col(l) - prior.mean.col(l));
      }

      Matrix<double> precision = pkk * row_precision;
      Vector<double> linear = precision * cond_mean;
      for (Eigen::Index j = 0; j < J; ++j) {
        const double offset = compute_offset(logits.row(j), k);
        const auto n = static_cast<double>(table.total(i, static_cast<std::size_t>(j)));
        const double omega =
            pg_sample(pg_tilted_conditional(n, logits(j, k) - offset), trunc, rng);
        precision(j, j) += omega;
        linear(j) += table.kappa(i, static_cast<std::size_t>(j), static_cast<std::size_t>(k)) +
                     omega * offset;
      }

      const Vector<double> column = draw_normal_canonical(precision, linear, rng);
      if (!column.allFinite()) throw NumericalError("log-odds draw became non-finite");
      for (Eigen::Index j = 0; j < J; ++j) state.set(i, j, k, column(j));
    }
  }
}

MultinomialChain multinomial_gibbs(const MultinomialTable& table, const MatrixNormalPrior& prior,
                                   const GibbsConfig& cfg) {
  validate(cfg);
  const auto J = static_cast<Eigen::Index>(table.treatments());
  const auto K = static_cast<Eigen::Index>(table.outcomes());
  if (K < 2) throw InvalidParameter("multinomial sampler needs at least two outcomes");
  validate(prior, J, K);

  LogitArray state(table.centers(), table.treatments(), table.outcomes());
  for (std::size_t i = 0; i < table.centers(); ++i) {
    for (Eigen::Index j = 0; j < J; ++j) {
      for (Eigen::Index k = 0; k + 1 < K; ++k) state.set(i, j, k, prior.mean(j, k));
    }
  }

  MultinomialChain chain;
  chain.names = free_value_names(table);
  chain.config = cfg;
  chain.draws.resize(static_cast<Eigen::Index>(retained_draws(cfg)),
                     static_cast<Eigen::Index>(chain.names.size()));
  Rng rng(cfg.seed);
  Eigen::Index row = 0;
  for (int sweep = 0; sweep < cfg.iters; ++sweep) {
    multinomial_sweep(table, prior, cfg.trunc, state, rng);
    const int kept = sweep - cfg.burnin;
    if (kept >= 0 && kept % cfg.thin == cfg.thin - 1) chain.draws.row(row++) = state.free_values().transpose();
  }
  return chain;
}

}  // namespace pgmeta
