#ifndef PGMETA_SUMMARY_HPP
#define PGMETA_SUMMARY_HPP

#include <span>
#include <string>
#include <vector>

#include "pgmeta/gibbs.hpp"
#include "pgmeta/types.hpp"

namespace pgmeta {

struct ScalarSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double lower = 0.0;  // 2.5% quantile
  double upper = 0.0;  // 97.5% quantile
};

struct PosteriorSummary {
  std::vector<ScalarSummary> parameters;
  // Fraction of draws with mu_1 > mu_2.
  double prob_mu1_gt_mu2 = 0.0;
  std::size_t draws = 0;

  const ScalarSummary& at(const std::string& name) const;
};

/// Column-per-parameter view of a chain: draws in rows.
struct DrawMatrix {
  std::vector<std::string> names;
  Matrix<double> values;
};

/// Column names psi_<center>_<arm> (arm 1 = treatment, 2 = control),
/// mu_1, mu_2, sigma_11, sigma_12, sigma_22.
std::vector<std::string> chain_column_names(const std::vector<std::string>& labels);

/// Stacks one or more chains into a draw matrix (rows in chain order).
DrawMatrix to_draw_matrix(std::span<const PosteriorChain> chains);

/// Empirical quantile with linear interpolation between order statistics
/// (R type 7). `sorted` must be ascending and nonempty.
double quantile_sorted(std::span<const double> sorted, double prob);

ScalarSummary summarize_scalar(std::string name, std::span<const double> values);

/// Per-column mean, sd, and central 95% interval; P(mu_1 > mu_2) when the
/// mu columns exist. Throws InvalidParameter on an empty matrix.
PosteriorSummary summarize(const DrawMatrix& draws);
PosteriorSummary summarize(const PosteriorChain& chain);

/// Monte-Carlo standard error of the mean by non-overlapping batch means.
double batch_means_se(std::span<const double> values, int batches = 20);

}  // namespace pgmeta

#endif  // PGMETA_SUMMARY_HPP
