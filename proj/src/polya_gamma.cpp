#include "pgmeta/polya_gamma.hpp"

namespace pgmeta {

double pg_sample(const PGParams<double>& params, const TruncationConfig& trunc, Rng& rng) {
  validate(params);
  validate(trunc);
  if (params.shape == 0.0) return 0.0;

  constexpr double pi2 = std::numbers::pi * std::numbers::pi;
  const double tilt_term = params.tilt * params.tilt / (4.0 * pi2);
  double sum = 0.0;
  for (int k = 1; k <= trunc.terms; ++k) {
    const double h = k - 0.5;
    sum += rng.gamma(params.shape) / (h * h + tilt_term);
  }
  return sum / (2.0 * pi2);
}

}  // namespace pgmeta
