#ifndef PGMETA_POLYA_GAMMA_HPP
#define PGMETA_POLYA_GAMMA_HPP

#include <cmath>
#include <numbers>

#include "pgmeta/random.hpp"
#include "pgmeta/types.hpp"

namespace pgmeta {

/// Polya-Gamma law PG(a, c): shape a >= 0 and tilt c. The law depends on
/// c only through c^2. Shape 0 is the point mass at zero.
template <typename Scalar = double>
struct PGParams {
  Scalar shape{1};
  Scalar tilt{0};
};

/// Number of gamma terms kept from the infinite series.
struct TruncationConfig {
  int terms = 200;
};

template <typename Scalar>
void validate(const PGParams<Scalar>& params) {
  using std::isfinite;
  if (!isfinite(params.shape) || !isfinite(params.tilt)) {
    throw InvalidParameter("Polya-Gamma parameters must be finite");
  }
  if (params.shape < Scalar(0)) {
    throw InvalidParameter("Polya-Gamma shape must be nonnegative");
  }
}

inline void validate(const TruncationConfig& trunc) {
  if (trunc.terms < 1) throw InvalidParameter("truncation must keep at least one term");
}

/// tanh(c/2) / (2c), with its Taylor expansion near zero.
template <typename Scalar>
Scalar half_tanh_ratio(Scalar c) {
  using std::abs;
  using std::tanh;
  if (abs(c) < Scalar(1e-4)) {
    const Scalar c2 = c * c;
    return Scalar(0.25) - c2 / Scalar(48) + c2 * c2 / Scalar(480);
  }
  return tanh(c / Scalar(2)) / (Scalar(2) * c);
}

/// E[omega] for omega ~ PG(a, c): a tanh(c/2) / (2c), limit a/4 at c = 0.
template <typename Scalar>
Scalar pg_mean(const PGParams<Scalar>& params) {
  validate(params);
  if (params.shape == Scalar(0)) return Scalar(0);
  return params.shape * half_tanh_ratio(params.tilt);
}

/// log cosh(x) without overflow.
template <typename Scalar>
Scalar log_cosh(Scalar x) {
  using std::abs;
  using std::exp;
  using std::log1p;
  const Scalar ax = abs(x);
  return ax + log1p(exp(Scalar(-2) * ax)) - Scalar(std::numbers::ln2);
}

/// E[exp(-omega t / 2)] = [cosh(c/2) / cosh(sqrt(c^2 + t) / 2)]^a.
template <typename Scalar>
Scalar pg_laplace(const PGParams<Scalar>& params, Scalar t) {
  using std::exp;
  using std::sqrt;
  validate(params);
  if (!(t >= Scalar(0))) throw DomainError("Laplace argument must be nonnegative");
  const Scalar c = params.tilt;
  return exp(params.shape *
             (log_cosh(c / Scalar(2)) - log_cosh(sqrt(c * c + t) / Scalar(2))));
}

/// Conditional law of the augmentation variable for a cell with total n
/// at log-odds psi: PG(n, psi).
template <typename Scalar>
PGParams<Scalar> pg_tilted_conditional(Scalar n, Scalar psi) {
  using std::isfinite;
  if (!(n >= Scalar(0)) || !isfinite(n)) {
    throw InvalidParameter("cell total must be a nonnegative finite number");
  }
  PGParams<Scalar> params{n, psi};
  validate(params);
  return params;
}

/// One draw from the truncated series
///   (1 / 2 pi^2) sum_{k=1..K} g_k / ((k - 1/2)^2 + c^2 / (4 pi^2)),
/// g_k ~ Gamma(a, 1) i.i.d. Returns exactly 0 when a = 0.
double pg_sample(const PGParams<double>& params, const TruncationConfig& trunc, Rng& rng);

}  // namespace pgmeta

#endif  // PGMETA_POLYA_GAMMA_HPP
