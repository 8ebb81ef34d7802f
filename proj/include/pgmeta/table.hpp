#ifndef PGMETA_TABLE_HPP
#define PGMETA_TABLE_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "pgmeta/types.hpp"

namespace pgmeta {

enum class Arm : int { kTreatment = 0, kControl = 1 };

inline const char* arm_name(Arm arm) {
  return arm == Arm::kTreatment ? "treatment" : "control";
}

struct BinomialCell {
  std::int64_t successes = 0;
  std::int64_t total = 0;
};

void validate(const BinomialCell& cell);

/// N centers, each a (treatment, control) pair of binomial cells.
struct TwoArmTable {
  std::vector<std::array<BinomialCell, 2>> centers;
  std::vector<std::string> labels;

  std::size_t size() const { return centers.size(); }

  const BinomialCell& cell(std::size_t center, Arm arm) const {
    return centers[center][static_cast<int>(arm)];
  }

  bool operator==(const TwoArmTable&) const;
};

/// Builds a table from rows of (treatment y, n, control y, n). Labels
/// default to "1".."N".
TwoArmTable make_two_arm_table(const std::vector<std::array<std::int64_t, 4>>& rows,
                               std::vector<std::string> labels = {});

/// Throws InvalidParameter unless N >= 1, every cell has 0 <= y <= n and
/// labels are unique.
void validate(const TwoArmTable& table);

/// Real-valued successes and totals per cell (N x 2). Pseudo-count priors
/// make these fractional.
struct EffectiveCounts {
  ArmMatrixd successes;
  ArmMatrixd totals;

  Eigen::Index size() const { return successes.rows(); }
};

EffectiveCounts effective_counts(const TwoArmTable& table);

double kappa(double successes, double total);
double kappa(const BinomialCell& cell);
ArmMatrixd kappa(const TwoArmTable& table);
ArmMatrixd kappa(const EffectiveCounts& counts);

/// log(y / (n - y)), with -inf at y = 0 and +inf at y = n. Throws
/// InvalidParameter when n = 0.
double mle_log_odds(const BinomialCell& cell);
double mle_log_odds(double successes, double total);

/// Table 1 of the topical-cream multi-center trial (8 centers).
TwoArmTable skene_wakefield_table();

// CSV: header `center,arm,successes,total`, two rows per center.
TwoArmTable parse_two_arm_csv(std::istream& in);
TwoArmTable load_two_arm_csv(const std::filesystem::path& path);
void write_two_arm_csv(const TwoArmTable& table, std::ostream& out);

/// Counts y_ijk for centers i, treatments j, outcomes k. Outcome K - 1
/// (zero-based) is the baseline category.
class MultinomialTable {
 public:
  MultinomialTable(std::size_t centers, std::size_t treatments, std::size_t outcomes);

  std::size_t centers() const { return centers_; }
  std::size_t treatments() const { return treatments_; }
  std::size_t outcomes() const { return outcomes_; }

  std::int64_t& count(std::size_t i, std::size_t j, std::size_t k) {
    return counts_[index(i, j, k)];
  }
  std::int64_t count(std::size_t i, std::size_t j, std::size_t k) const {
    return counts_[index(i, j, k)];
  }

  /// n_ij = sum_k y_ijk.
  std::int64_t total(std::size_t i, std::size_t j) const;

  /// kappa_ijk = y_ijk - n_ij / 2.
  double kappa(std::size_t i, std::size_t j, std::size_t k) const;

  std::vector<std::string> center_labels;
  std::vector<std::string> treatment_labels;
  std::vector<std::string> outcome_labels;

 private:
  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
    return (i * treatments_ + j) * outcomes_ + k;
  }

  std::size_t centers_;
  std::size_t treatments_;
  std::size_t outcomes_;
  std::vector<std::int64_t> counts_;
};

/// A two-outcome multinomial table equal to the binomial table: outcome
/// "success" first, "failure" as the baseline.
MultinomialTable to_multinomial(const TwoArmTable& table);

// CSV: header `center,treatment,outcome,count`. Labels are indexed in
// first-seen order; `baseline`, when non-empty, is moved to the last
// outcome index. Absent combinations count as zero.
MultinomialTable parse_multinomial_csv(std::istream& in, const std::string& baseline = {});
MultinomialTable load_multinomial_csv(const std::filesystem::path& path,
                                      const std::string& baseline = {});

}  // namespace pgmeta

#endif  // PGMETA_TABLE_HPP
