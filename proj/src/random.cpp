#include "pgmeta/random.hpp"

#include <cmath>

namespace pgmeta {

namespace {

Eigen::VectorXd standard_normals(Eigen::Index dim, Rng& rng) {
  Eigen::VectorXd z(dim);
  for (Eigen::Index i = 0; i < dim; ++i) z(i) = rng.normal();
  return z;
}

}  // namespace

Eigen::VectorXd draw_normal_canonical(const Eigen::MatrixXd& precision,
                                      const Eigen::VectorXd& linear, Rng& rng) {
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("conditional precision is not positive definite");
  }
  Eigen::VectorXd mean = llt.solve(linear);
  // Q = L L', so L'^{-1} z has covariance Q^{-1}.
  Eigen::VectorXd z = standard_normals(linear.size(), rng);
  return mean + llt.matrixU().solve(z);
}

Eigen::VectorXd draw_normal(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, Rng& rng) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("covariance is not positive definite");
  }
  return mean + llt.matrixL() * standard_normals(mean.size(), rng);
}

Eigen::MatrixXd draw_wishart(double dof, const Eigen::MatrixXd& scale, Rng& rng) {
  const Eigen::Index p = scale.rows();
  if (!(dof > static_cast<double>(p) - 1.0)) {
    throw InvalidParameter("Wishart degrees of freedom must exceed dimension - 1");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(scale);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("Wishart scale is not positive definite");
  }
  Eigen::MatrixXd bartlett = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    bartlett(i, i) = std::sqrt(rng.chi_square(dof - static_cast<double>(i)));
    for (Eigen::Index j = 0; j < i; ++j) bartlett(i, j) = rng.normal();
  }
  const Eigen::MatrixXd factor = llt.matrixL() * bartlett;
  return factor * factor.transpose();
}

Eigen::MatrixXd draw_inverse_wishart(double dof, const Eigen::MatrixXd& scale, Rng& rng) {
  Eigen::LLT<Eigen::MatrixXd> llt(scale);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("inverse-Wishart scale is not positive definite");
  }
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(scale.rows(), scale.cols());
  const Eigen::MatrixXd precision = draw_wishart(dof, llt.solve(identity), rng);
  Eigen::LLT<Eigen::MatrixXd> inv(precision);
  if (inv.info() != Eigen::Success) {
    throw NumericalError("Wishart draw is not positive definite");
  }
  Eigen::MatrixXd sigma = inv.solve(identity);
  return 0.5 * (sigma + sigma.transpose());
}

}  // namespace pgmeta
