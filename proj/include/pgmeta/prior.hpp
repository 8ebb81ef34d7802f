#ifndef PGMETA_PRIOR_HPP
#define PGMETA_PRIOR_HPP

#include <string>
#include <vector>

#include "pgmeta/table.hpp"
#include "pgmeta/types.hpp"

namespace pgmeta {

/// Bivariate normal prior on (psi_i1, psi_i2).
struct NormalPrior {
  Vector2d mean = Vector2d::Zero();
  Matrix2d cov = Matrix2d::Identity();

  Matrix2d precision() const;
};

/// Throws InvalidParameter unless mean is finite and cov is symmetric
/// positive definite.
void validate(const NormalPrior& prior);

/// Inverse-Wishart IW(d, B) hyperprior on Sigma, parametrized so that
/// E(Sigma) = B / (d - 3) in two dimensions. The mean vector mu gets a flat
/// prior.
struct NIWHyper {
  double dof = 4.0;
  Matrix2d scale = Matrix2d::Identity();
};

/// Requires d > 3 and B symmetric positive definite.
void validate(const NIWHyper& hyper);

/// Prior moments of Sigma = [[sd2 + sl2 + 2 rho sqrt(sd2 sl2), ...], [..., sl2]]
/// used to elicit (d, B).
struct IWMoments {
  double sigma_delta2 = 1.0;
  double sigma_lambda2 = 1.0;
  double rho = 0.0;
};

struct Elicitation {
  NIWHyper hyper;
  std::vector<std::string> warnings;
};

/// B = (d - 3) [[E(sl2) + E(sd2) + 2 E(rho) s, E(sl2) + E(rho) s],
///              [E(sl2) + E(rho) s,           E(sl2)]],  s = sqrt(E(sl2) E(sd2)).
/// Throws ElicitationError when B is not positive definite; warns when
/// its condition number exceeds `warn_condition`.
Elicitation iw_from_moments(const IWMoments& moments, double dof,
                            double warn_condition = 100.0);

/// Inverse of iw_from_moments.
IWMoments iw_moments(const NIWHyper& hyper);

/// E(Sigma) = B / (d - 3). Throws DomainError for d <= 3.
Matrix2d iw_prior_mean(const NIWHyper& hyper);

/// Independent logistic-Z priors Z(a_ij, b_ij, 1, 0) on each log-odds,
/// acting as a_ij prior successes and b_ij prior failures.
struct ZPseudoCounts {
  ArmMatrixd a;
  ArmMatrixd b;

  static ZPseudoCounts uniform(Eigen::Index centers, double a, double b);
  /// a = b = 1/2.
  static ZPseudoCounts jeffreys(Eigen::Index centers);
};

void validate(const ZPseudoCounts& z);

/// y' = y + a, n' = n + a + b per cell.
EffectiveCounts apply_pseudo_counts(const EffectiveCounts& counts, const ZPseudoCounts& z);
EffectiveCounts apply_pseudo_counts(const TwoArmTable& table, const ZPseudoCounts& z);

/// log of e^{a psi} / (1 + e^psi)^{a+b} / Beta(a, b).
double z_log_density(double psi, double a, double b);

}  // namespace pgmeta

#endif  // PGMETA_PRIOR_HPP
