#ifndef PGMETA_IO_HPP
#define PGMETA_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "pgmeta/em.hpp"
#include "pgmeta/multinomial.hpp"
#include "pgmeta/prior.hpp"
#include "pgmeta/summary.hpp"
#include "pgmeta/table.hpp"

namespace pgmeta {

/// Independent logistic-Z pseudo-counts shared by every cell.
struct ZPrior {
  double a = 0.5;
  double b = 0.5;
};

using PriorSpec = std::variant<NormalPrior, NIWHyper, ZPrior, MatrixNormalPrior>;

struct ParsedPrior {
  PriorSpec spec;
  std::string type;
  std::vector<std::string> warnings;
};

/// Accepts {"type":"normal","mu":[..],"sigma":[[..]]}, {"type":"niw","d":..,"B":[[..]]},
/// {"type":"niw-moments","E_sd2":..,"E_sl2":..,"E_rho":..,"d":..},
/// {"type":"z","a":..,"b":..} (a and b default to 1/2) and
/// {"type":"matrix-normal","M":[[..]],"Sigma_R":[[..]],"Sigma_C":[[..]]}.
/// Throws InvalidParameter on malformed or invalid specifications.
ParsedPrior parse_prior_json(const nlohmann::json& j);
ParsedPrior load_prior_json(const std::filesystem::path& path);

/// Shortest decimal that reads back to the same double; "inf", "-inf",
/// "nan" for non-finite values.
std::string format_double(double value);

/// "+inf" / "-inf" for infinite MLEs, otherwise format_double.
std::string format_mle(double value);

struct ChainFile {
  DrawMatrix draws;
  std::vector<int> chain_ids;
  std::string manifest;
};

/// Draw CSV: optional `# manifest: <ref>` line, header `chain,<names...>`,
/// one row per retained sweep.
void write_draws_csv(const DrawMatrix& draws, const std::vector<int>& chain_ids,
                     std::ostream& out, const std::string& manifest = {});
ChainFile read_draws_csv(std::istream& in);
ChainFile load_draws_csv(const std::filesystem::path& path);

std::vector<int> chain_ids_of(std::span<const PosteriorChain> chains);

/// Checks that a draw file matches a table: psi_<label>_<arm> for every
/// center, in order, followed by the hyperparameter columns.
void check_draws_match(const DrawMatrix& draws, const TwoArmTable& table);

/// Summary JSON. When `table` is given, psi entries carry the MLE.
nlohmann::json summary_to_json(const PosteriorSummary& summary, const TwoArmTable* table);

nlohmann::json fit_report_json(const EMState& state, const TwoArmTable& table,
                               const EffectiveCounts& counts, const NormalPrior& prior,
                               const std::string& method);

/// Plot data for per-center intervals: center,arm,mle,mean,lower,upper.
void write_plot_data_csv(const PosteriorSummary& summary, const TwoArmTable& table,
                         std::ostream& out, const std::string& manifest = {});

/// Evenly spaced subsample of (mu_1, mu_2) draws.
void write_mu_scatter_csv(const DrawMatrix& draws, std::size_t max_points, std::ostream& out,
                          const std::string& manifest = {});

}  // namespace pgmeta

#endif  // PGMETA_IO_HPP
