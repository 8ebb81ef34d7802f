#ifndef PGMETA_MULTINOMIAL_HPP
#define PGMETA_MULTINOMIAL_HPP

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "pgmeta/gibbs.hpp"
#include "pgmeta/table.hpp"
#include "pgmeta/types.hpp"

namespace pgmeta {

/// Row-wise softmax of a logit matrix (one row per treatment, one column
/// per outcome), shifted by the row maximum.
template <typename Derived>
Matrix<typename Derived::Scalar> softmax_probs(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  Matrix<Scalar> probs(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const Scalar top = logits.row(r).maxCoeff();
    probs.row(r) = (logits.row(r).array() - top).exp().matrix();
    probs.row(r) /= probs.row(r).sum();
  }
  return probs;
}

/// c = log sum_{l != k} exp(logits(l)), by log-sum-exp. Needs at least two
/// entries.
template <typename Derived>
typename Derived::Scalar compute_offset(const Eigen::MatrixBase<Derived>& logits, Eigen::Index k) {
  using Scalar = typename Derived::Scalar;
  using std::exp;
  using std::log;
  const Eigen::Index size = logits.size();
  if (size < 2) throw InvalidParameter("offset needs at least two outcomes");
  if (k < 0 || k >= size) throw InvalidParameter("outcome index out of range");
  Scalar top = -std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index l = 0; l < size; ++l) {
    if (l != k && logits(l) > top) top = logits(l);
  }
  Scalar sum(0);
  for (Eigen::Index l = 0; l < size; ++l) {
    if (l != k) sum += exp(logits(l) - top);
  }
  return top + log(sum);
}

/// Logits psi_ijk for N centers, each a J x K matrix whose last column (the
/// baseline outcome) is identically zero.
class LogitArray {
 public:
  LogitArray(std::size_t centers, std::size_t treatments, std::size_t outcomes);

  std::size_t centers() const { return centers_.size(); }
  Eigen::Index treatments() const { return centers_.front().rows(); }
  Eigen::Index outcomes() const { return centers_.front().cols(); }

  const Matrix<double>& center(std::size_t i) const { return centers_[i]; }

  double operator()(std::size_t i, Eigen::Index j, Eigen::Index k) const { return centers_[i](j, k); }

  /// Sets a free logit; k must not be the baseline.
  void set(std::size_t i, Eigen::Index j, Eigen::Index k, double value);

  /// Probabilities for center i (J x K).
  Matrix<double> probs(std::size_t i) const { return softmax_probs(centers_[i]); }

  /// Free logits flattened in (i, j, k) order, k < K - 1.
  Vector<double> free_values() const;

 private:
  std::vector<Matrix<double>> centers_;
};

/// psi_i ~ MN(M, Sigma_R, Sigma_C) over the J x (K - 1) free logits:
/// Cov(vec psi_i) = Sigma_C (x) Sigma_R.
struct MatrixNormalPrior {
  Matrix<double> mean;
  Matrix<double> row_cov;
  Matrix<double> col_cov;
};

void validate(const MatrixNormalPrior& prior, Eigen::Index treatments, Eigen::Index outcomes);

struct MultinomialChain {
  // One row per retained sweep; columns as in free_value_names.
  Matrix<double> draws;
  std::vector<std::string> names;
  GibbsConfig config;
};

/// Column names psi_<center>_<treatment>_<outcome> for the free logits.
std::vector<std::string> free_value_names(const MultinomialTable& table);

/// One sweep over (center, outcome) blocks. For block (i, k): offsets
/// c_ijk from the current state, omega_ijk ~ PG(n_ij, psi_ijk - c_ijk), then
/// the J-vector psi_i.k from its Gaussian full conditional.
void multinomial_sweep(const MultinomialTable& table, const MatrixNormalPrior& prior,
                       const TruncationConfig& trunc, LogitArray& state, Rng& rng);

/// Conditional PG Gibbs sampler with fixed hyperparameters, started at the
/// prior mean. cfg.hyper_mode is ignored.
MultinomialChain multinomial_gibbs(const MultinomialTable& table, const MatrixNormalPrior& prior,
                                   const GibbsConfig& cfg);

}  // namespace pgmeta

#endif  // PGMETA_MULTINOMIAL_HPP
