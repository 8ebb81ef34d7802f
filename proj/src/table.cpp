#include "pgmeta/table.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <tuple>

#include "csv.hpp"

namespace pgmeta {

void validate(const BinomialCell& cell) {
  if (cell.successes < 0 || cell.total < 0) {
    throw InvalidParameter("counts must be nonnegative");
  }
  if (cell.successes > cell.total) {
    throw InvalidParameter("successes " + std::to_string(cell.successes) + " exceed total " +
                           std::to_string(cell.total));
  }
}

bool TwoArmTable::operator==(const TwoArmTable& other) const {
  if (labels != other.labels || centers.size() != other.centers.size()) return false;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    for (int j = 0; j < 2; ++j) {
      if (centers[i][j].successes != other.centers[i][j].successes ||
          centers[i][j].total != other.centers[i][j].total) {
        return false;
      }
    }
  }
  return true;
}

TwoArmTable make_two_arm_table(const std::vector<std::array<std::int64_t, 4>>& rows,
                               std::vector<std::string> labels) {
  TwoArmTable table;
  for (const auto& r : rows) {
    table.centers.push_back({BinomialCell{r[0], r[1]}, BinomialCell{r[2], r[3]}});
  }
  if (labels.empty()) {
    for (std::size_t i = 0; i < rows.size(); ++i) labels.push_back(std::to_string(i + 1));
  }
  table.labels = std::move(labels);
  validate(table);
  return table;
}

void validate(const TwoArmTable& table) {
  if (table.centers.empty()) throw InvalidParameter("table has no centers");
  if (table.labels.size() != table.centers.size()) {
    throw InvalidParameter("one label per center required");
  }
  std::set<std::string> seen;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (!seen.insert(table.labels[i]).second) {
      throw InvalidParameter("duplicate center label '" + table.labels[i] + "'");
    }
    for (const auto& cell : table.centers[i]) {
      try {
        validate(cell);
      } catch (const InvalidParameter& e) {
        throw InvalidParameter("center " + table.labels[i] + ": " + e.what());
      }
    }
  }
}

EffectiveCounts effective_counts(const TwoArmTable& table) {
  const auto n = static_cast<Eigen::Index>(table.size());
  EffectiveCounts counts{ArmMatrixd(n, 2), ArmMatrixd(n, 2)};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < 2; ++j) {
      const auto& cell = table.centers[static_cast<std::size_t>(i)][j];
      counts.successes(i, j) = static_cast<double>(cell.successes);
      counts.totals(i, j) = static_cast<double>(cell.total);
    }
  }
  return counts;
}

double kappa(double successes, double total) { return successes - 0.5 * total; }

double kappa(const BinomialCell& cell) {
  return kappa(static_cast<double>(cell.successes), static_cast<double>(cell.total));
}

ArmMatrixd kappa(const EffectiveCounts& counts) {
  return counts.successes - 0.5 * counts.totals;
}

ArmMatrixd kappa(const TwoArmTable& table) { return kappa(effective_counts(table)); }

double mle_log_odds(double successes, double total) {
  if (!(total > 0.0)) throw InvalidParameter("MLE of the log-odds is undefined for an empty cell");
  if (successes <= 0.0) return -std::numeric_limits<double>::infinity();
  if (successes >= total) return std::numeric_limits<double>::infinity();
  return std::log(successes / (total - successes));
}

double mle_log_odds(const BinomialCell& cell) {
  validate(cell);
  return mle_log_odds(static_cast<double>(cell.successes), static_cast<double>(cell.total));
}

TwoArmTable skene_wakefield_table() {
  return make_two_arm_table({{11, 36, 10, 37},
                             {16, 20, 22, 32},
                             {14, 19, 7, 19},
                             {2, 16, 1, 17},
                             {6, 17, 0, 12},
                             {1, 11, 0, 10},
                             {1, 5, 1, 9},
                             {4, 6, 6, 7}});
}

namespace {

void expect_header(const std::vector<std::string>& fields,
                   const std::vector<std::string>& expected, std::size_t line_no) {
  if (fields != expected) {
    std::string want;
    for (const auto& f : expected) want += (want.empty() ? "" : ",") + f;
    throw ParseError(line_no, "expected header '" + want + "'");
  }
}

}  // namespace

TwoArmTable parse_two_arm_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!csv::next_record(in, line, line_no)) throw ParseError(0, "no data rows");
  expect_header(csv::split(line), {"center", "arm", "successes", "total"}, line_no);

  struct Pending {
    std::optional<BinomialCell> arms[2];
  };
  std::vector<std::string> order;
  std::map<std::string, Pending> rows;

  while (csv::next_record(in, line, line_no)) {
    const auto fields = csv::split(line);
    if (fields.size() != 4) throw ParseError(line_no, "expected 4 fields");
    const std::string& center = fields[0];
    if (center.empty()) throw ParseError(line_no, "empty center label");
    int arm = -1;
    if (fields[1] == "treatment") arm = 0;
    if (fields[1] == "control") arm = 1;
    if (arm < 0) throw ParseError(line_no, "arm must be 'treatment' or 'control'");
    BinomialCell cell{csv::parse_count(fields[2], line_no, "successes"),
                      csv::parse_count(fields[3], line_no, "total")};
    if (cell.successes > cell.total) throw ParseError(line_no, "successes exceed total");

    auto [it, inserted] = rows.try_emplace(center);
    if (inserted) order.push_back(center);
    if (it->second.arms[arm]) {
      throw ParseError(line_no, "duplicate " + fields[1] + " row for center '" + center + "'");
    }
    it->second.arms[arm] = cell;
  }
  if (order.empty()) throw ParseError(0, "no data rows");

  TwoArmTable table;
  for (const auto& center : order) {
    const auto& p = rows.at(center);
    if (!p.arms[0] || !p.arms[1]) {
      throw ParseError(0, "center '" + center + "' needs exactly one treatment and one control row");
    }
    table.centers.push_back({*p.arms[0], *p.arms[1]});
    table.labels.push_back(center);
  }
  return table;
}

TwoArmTable load_two_arm_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("cannot open '" + path.string() + "'");
  return parse_two_arm_csv(in);
}

void write_two_arm_csv(const TwoArmTable& table, std::ostream& out) {
  out << "center,arm,successes,total\n";
  for (std::size_t i = 0; i < table.size(); ++i) {
    for (Arm arm : {Arm::kTreatment, Arm::kControl}) {
      const auto& cell = table.cell(i, arm);
      out << table.labels[i] << ',' << arm_name(arm) << ',' << cell.successes << ','
          << cell.total << '\n';
    }
  }
}

MultinomialTable::MultinomialTable(std::size_t centers, std::size_t treatments,
                                   std::size_t outcomes)
    : centers_(centers),
      treatments_(treatments),
      outcomes_(outcomes),
      counts_(centers * treatments * outcomes, 0) {
  if (centers < 1 || treatments < 1) {
    throw InvalidParameter("multinomial table needs at least one center and treatment");
  }
  if (outcomes < 2) throw InvalidParameter("multinomial table needs at least two outcomes");
  for (std::size_t i = 0; i < centers; ++i) center_labels.push_back(std::to_string(i + 1));
  for (std::size_t j = 0; j < treatments; ++j) treatment_labels.push_back(std::to_string(j + 1));
  for (std::size_t k = 0; k < outcomes; ++k) outcome_labels.push_back(std::to_string(k + 1));
}

std::int64_t MultinomialTable::total(std::size_t i, std::size_t j) const {
  std::int64_t n = 0;
  for (std::size_t k = 0; k < outcomes_; ++k) n += count(i, j, k);
  return n;
}

double MultinomialTable::kappa(std::size_t i, std::size_t j, std::size_t k) const {
  return static_cast<double>(count(i, j, k)) - 0.5 * static_cast<double>(total(i, j));
}

MultinomialTable to_multinomial(const TwoArmTable& table) {
  validate(table);
  MultinomialTable m(table.size(), 2, 2);
  for (std::size_t i = 0; i < table.size(); ++i) {
    for (Arm arm : {Arm::kTreatment, Arm::kControl}) {
      const auto& cell = table.cell(i, arm);
      const auto j = static_cast<std::size_t>(arm);
      m.count(i, j, 0) = cell.successes;
      m.count(i, j, 1) = cell.total - cell.successes;
    }
  }
  m.center_labels = table.labels;
  m.treatment_labels = {"treatment", "control"};
  m.outcome_labels = {"success", "failure"};
  return m;
}

MultinomialTable parse_multinomial_csv(std::istream& in, const std::string& baseline) {
  std::string line;
  std::size_t line_no = 0;
  if (!csv::next_record(in, line, line_no)) throw ParseError(0, "no data rows");
  expect_header(csv::split(line), {"center", "treatment", "outcome", "count"}, line_no);

  std::vector<std::string> centers, treatments, outcomes;
  auto index_of = [](std::vector<std::string>& labels, const std::string& label) {
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it != labels.end()) return static_cast<std::size_t>(it - labels.begin());
    labels.push_back(label);
    return labels.size() - 1;
  };

  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::int64_t> cells;
  while (csv::next_record(in, line, line_no)) {
    const auto fields = csv::split(line);
    if (fields.size() != 4) throw ParseError(line_no, "expected 4 fields");
    for (int f = 0; f < 3; ++f) {
      if (fields[f].empty()) throw ParseError(line_no, "empty label");
    }
    const auto key = std::make_tuple(index_of(centers, fields[0]), index_of(treatments, fields[1]),
                                     index_of(outcomes, fields[2]));
    const auto value = csv::parse_count(fields[3], line_no, "count");
    if (!cells.emplace(key, value).second) throw ParseError(line_no, "duplicate cell");
  }
  if (cells.empty()) throw ParseError(0, "no data rows");
  if (outcomes.size() < 2) throw ParseError(0, "at least two outcome categories required");

  // Permutation that moves the declared baseline to the last outcome index.
  std::vector<std::size_t> outcome_slot(outcomes.size());
  for (std::size_t k = 0; k < outcomes.size(); ++k) outcome_slot[k] = k;
  if (!baseline.empty()) {
    auto it = std::find(outcomes.begin(), outcomes.end(), baseline);
    if (it == outcomes.end()) throw ParseError(0, "baseline outcome '" + baseline + "' not found");
    const auto b = static_cast<std::size_t>(it - outcomes.begin());
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
      outcome_slot[k] = k < b ? k : (k == b ? outcomes.size() - 1 : k - 1);
    }
  }

  MultinomialTable table(centers.size(), treatments.size(), outcomes.size());
  table.center_labels = centers;
  table.treatment_labels = treatments;
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    table.outcome_labels[outcome_slot[k]] = outcomes[k];
  }
  for (const auto& [key, value] : cells) {
    const auto [i, j, k] = key;
    table.count(i, j, outcome_slot[k]) = value;
  }
  return table;
}

MultinomialTable load_multinomial_csv(const std::filesystem::path& path,
                                      const std::string& baseline) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("cannot open '" + path.string() + "'");
  return parse_multinomial_csv(in, baseline);
}

}  // namespace pgmeta
