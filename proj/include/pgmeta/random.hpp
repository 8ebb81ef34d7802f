#ifndef PGMETA_RANDOM_HPP
#define PGMETA_RANDOM_HPP

#include <cstdint>
#include <random>

#include "pgmeta/types.hpp"

namespace pgmeta {

/// Seeded random stream. One instance per chain or worker; never shared
/// across threads. Draw sequences are reproducible for a fixed seed on a
/// fixed standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }

  double uniform() { return uniform_(engine_); }

  /// Gamma(shape, 1).
  double gamma(double shape) {
    return gamma_(engine_, std::gamma_distribution<double>::param_type(shape, 1.0));
  }

  double chi_square(double dof) { return 2.0 * gamma(0.5 * dof); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_;
  std::gamma_distribution<double> gamma_;
};

/// Draws from N(Q^{-1} b, Q^{-1}) given the precision Q and linear term b,
/// using the Cholesky factor of Q. Throws NumericalError if Q is not
/// positive definite.
Eigen::VectorXd draw_normal_canonical(const Eigen::MatrixXd& precision,
                                      const Eigen::VectorXd& linear, Rng& rng);

/// Draws from N(mean, cov).
Eigen::VectorXd draw_normal(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, Rng& rng);

/// Wishart W(dof, scale) by the Bartlett decomposition; E = dof * scale.
Eigen::MatrixXd draw_wishart(double dof, const Eigen::MatrixXd& scale, Rng& rng);

/// Inverse-Wishart IW(dof, scale) with E = scale / (dof - p - 1): the
/// inverse of a W(dof, scale^{-1}) draw.
Eigen::MatrixXd draw_inverse_wishart(double dof, const Eigen::MatrixXd& scale, Rng& rng);

}  // namespace pgmeta

#endif  // PGMETA_RANDOM_HPP
