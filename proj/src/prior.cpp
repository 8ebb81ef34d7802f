#include "pgmeta/prior.hpp"

#include <cmath>
#include <sstream>

namespace pgmeta {

namespace {

bool is_spd(const Matrix2d& m) {
  if (!m.allFinite()) return false;
  if (std::abs(m(0, 1) - m(1, 0)) > 1e-12 * (1.0 + m.cwiseAbs().maxCoeff())) return false;
  Eigen::LLT<Matrix2d> llt(m);
  return llt.info() == Eigen::Success;
}

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

Matrix2d NormalPrior::precision() const {
  Eigen::LLT<Matrix2d> llt(cov);
  if (llt.info() != Eigen::Success) throw InvalidParameter("prior covariance is not positive definite");
  return llt.solve(Matrix2d::Identity());
}

void validate(const NormalPrior& prior) {
  if (!prior.mean.allFinite()) throw InvalidParameter("prior mean must be finite");
  if (!is_spd(prior.cov)) {
    throw InvalidParameter("prior covariance must be symmetric positive definite");
  }
}

void validate(const NIWHyper& hyper) {
  if (!(hyper.dof > 3.0) || !std::isfinite(hyper.dof)) {
    throw InvalidParameter("inverse-Wishart degrees of freedom must exceed 3");
  }
  if (!is_spd(hyper.scale)) {
    throw InvalidParameter("inverse-Wishart scale must be symmetric positive definite");
  }
}

Elicitation iw_from_moments(const IWMoments& m, double dof, double warn_condition) {
  if (!std::isfinite(m.sigma_delta2) || !std::isfinite(m.sigma_lambda2) || !std::isfinite(m.rho) ||
      !std::isfinite(dof)) {
    throw ElicitationError("prior moments must be finite");
  }
  if (!(m.sigma_delta2 > 0.0) || !(m.sigma_lambda2 > 0.0)) {
    throw ElicitationError("prior variance moments must be positive");
  }
  if (!(m.rho > -1.0 && m.rho < 1.0)) throw ElicitationError("prior correlation must lie in (-1, 1)");
  if (!(dof > 3.0)) throw ElicitationError("degrees of freedom must exceed 3");

  const double s = std::sqrt(m.sigma_lambda2 * m.sigma_delta2);
  const double off = m.sigma_lambda2 + m.rho * s;
  Matrix2d mean;
  mean << m.sigma_lambda2 + m.sigma_delta2 + 2.0 * m.rho * s, off, off, m.sigma_lambda2;

  Elicitation out{NIWHyper{dof, (dof - 3.0) * mean}, {}};
  if (!is_spd(out.hyper.scale)) throw ElicitationError("elicited scale matrix is not positive definite");

  Eigen::SelfAdjointEigenSolver<Matrix2d> eig(out.hyper.scale);
  const double condition = eig.eigenvalues()(1) / eig.eigenvalues()(0);
  if (condition > warn_condition) {
    std::ostringstream msg;
    msg << "elicited scale matrix is nearly singular (condition number " << condition << ")";
    out.warnings.push_back(msg.str());
  }
  return out;
}

IWMoments iw_moments(const NIWHyper& hyper) {
  const Matrix2d mean = iw_prior_mean(hyper);
  IWMoments m;
  m.sigma_lambda2 = mean(1, 1);
  m.sigma_delta2 = mean(0, 0) + mean(1, 1) - 2.0 * mean(0, 1);
  m.rho = (mean(0, 1) - mean(1, 1)) / std::sqrt(m.sigma_lambda2 * m.sigma_delta2);
  return m;
}

Matrix2d iw_prior_mean(const NIWHyper& hyper) {
  if (!(hyper.dof > 3.0)) throw DomainError("E(Sigma) is undefined for d <= 3");
  return hyper.scale / (hyper.dof - 3.0);
}

ZPseudoCounts ZPseudoCounts::uniform(Eigen::Index centers, double a, double b) {
  ZPseudoCounts z{ArmMatrixd::Constant(centers, 2, a), ArmMatrixd::Constant(centers, 2, b)};
  validate(z);
  return z;
}

ZPseudoCounts ZPseudoCounts::jeffreys(Eigen::Index centers) { return uniform(centers, 0.5, 0.5); }

void validate(const ZPseudoCounts& z) {
  if (z.a.rows() != z.b.rows()) throw InvalidParameter("pseudo-count shapes differ");
  if (!z.a.allFinite() || !z.b.allFinite() || (z.a.array() < 0.0).any() ||
      (z.b.array() < 0.0).any()) {
    throw InvalidParameter("pseudo-counts must be finite and nonnegative");
  }
}

EffectiveCounts apply_pseudo_counts(const EffectiveCounts& counts, const ZPseudoCounts& z) {
  validate(z);
  if (z.a.rows() != counts.size()) throw InvalidParameter("pseudo-counts do not match the table");
  return {counts.successes + z.a, counts.totals + z.a + z.b};
}

EffectiveCounts apply_pseudo_counts(const TwoArmTable& table, const ZPseudoCounts& z) {
  return apply_pseudo_counts(effective_counts(table), z);
}

double z_log_density(double psi, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw InvalidParameter("Z prior parameters must be positive");
  const double log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  return a * psi - (a + b) * softplus(psi) - log_beta;
}

}  // namespace pgmeta
