#include "pgmeta/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>

#include "csv.hpp"

namespace pgmeta {

namespace {

using nlohmann::json;

double number(const json& j, const char* key) {
  if (!j.contains(key)) throw InvalidParameter(std::string("prior is missing '") + key + "'");
  const auto& v = j.at(key);
  if (!v.is_number()) throw InvalidParameter(std::string("prior field '") + key + "' must be a number");
  return v.get<double>();
}

Matrix<double> matrix(const json& j, const char* key) {
  if (!j.contains(key)) throw InvalidParameter(std::string("prior is missing '") + key + "'");
  const auto& rows = j.at(key);
  if (!rows.is_array() || rows.empty()) {
    throw InvalidParameter(std::string("prior field '") + key + "' must be a nested array");
  }
  const auto r = static_cast<Eigen::Index>(rows.size());
  Eigen::Index c = -1;
  Matrix<double> out;
  for (Eigen::Index i = 0; i < r; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || row.empty()) {
      throw InvalidParameter(std::string("prior field '") + key + "' must be a nested array");
    }
    if (c < 0) {
      c = static_cast<Eigen::Index>(row.size());
      out.resize(r, c);
    }
    if (static_cast<Eigen::Index>(row.size()) != c) {
      throw InvalidParameter(std::string("prior field '") + key + "' has ragged rows");
    }
    for (Eigen::Index k = 0; k < c; ++k) {
      const auto& v = row[static_cast<std::size_t>(k)];
      if (!v.is_number()) throw InvalidParameter(std::string("prior field '") + key + "' must be numeric");
      out(i, k) = v.get<double>();
    }
  }
  return out;
}

Matrix2d matrix2(const json& j, const char* key) {
  const Matrix<double> m = matrix(j, key);
  if (m.rows() != 2 || m.cols() != 2) throw InvalidParameter(std::string("'") + key + "' must be 2 x 2");
  return m;
}

Vector2d vector2(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array() || j.at(key).size() != 2) {
    throw InvalidParameter(std::string("prior field '") + key + "' must be a 2-vector");
  }
  Vector2d v;
  for (int i = 0; i < 2; ++i) {
    const auto& x = j.at(key)[static_cast<std::size_t>(i)];
    if (!x.is_number()) throw InvalidParameter(std::string("prior field '") + key + "' must be numeric");
    v(i) = x.get<double>();
  }
  return v;
}

json matrix_json(const Matrix2d& m) {
  return json::array({json::array({m(0, 0), m(0, 1)}), json::array({m(1, 0), m(1, 1)})});
}

}  // namespace

ParsedPrior parse_prior_json(const json& j) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
    throw InvalidParameter("prior JSON must be an object with a string 'type'");
  }
  ParsedPrior out{NormalPrior{}, j.at("type").get<std::string>(), {}};
  const auto& type = out.type;
  if (type == "normal") {
    NormalPrior p{vector2(j, "mu"), matrix2(j, "sigma")};
    validate(p);
    out.spec = p;
  } else if (type == "niw") {
    NIWHyper h{number(j, "d"), matrix2(j, "B")};
    validate(h);
    out.spec = h;
  } else if (type == "niw-moments") {
    auto e = iw_from_moments(IWMoments{number(j, "E_sd2"), number(j, "E_sl2"), number(j, "E_rho")},
                             number(j, "d"));
    out.spec = e.hyper;
    out.warnings = std::move(e.warnings);
  } else if (type == "z") {
    ZPrior z;
    if (j.contains("a")) z.a = number(j, "a");
    if (j.contains("b")) z.b = number(j, "b");
    if (!(z.a > 0.0) || !(z.b > 0.0) || !std::isfinite(z.a) || !std::isfinite(z.b)) {
      throw InvalidParameter("Z prior pseudo-counts must be positive and finite");
    }
    out.spec = z;
  } else if (type == "matrix-normal") {
    MatrixNormalPrior p{matrix(j, "M"), matrix(j, "Sigma_R"), matrix(j, "Sigma_C")};
    validate(p, p.mean.rows(), p.mean.cols() + 1);
    out.spec = p;
  } else {
    throw InvalidParameter("unknown prior type '" + type + "'");
  }
  return out;
}

ParsedPrior load_prior_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("cannot open '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InvalidParameter("malformed prior JSON: " + std::string(e.what()));
  }
  return parse_prior_json(j);
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string format_mle(double value) {
  if (std::isinf(value)) return value > 0 ? "+inf" : "-inf";
  return format_double(value);
}

void write_draws_csv(const DrawMatrix& draws, const std::vector<int>& chain_ids,
                     std::ostream& out, const std::string& manifest) {
  if (static_cast<Eigen::Index>(chain_ids.size()) != draws.values.rows()) {
    throw InvalidParameter("one chain id per draw required");
  }
  if (!manifest.empty()) out << "# manifest: " << manifest << '\n';
  out << "chain";
  for (const auto& n : draws.names) out << ',' << n;
  out << '\n';
  for (Eigen::Index r = 0; r < draws.values.rows(); ++r) {
    out << chain_ids[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < draws.values.cols(); ++c) out << ',' << format_double(draws.values(r, c));
    out << '\n';
  }
}

ChainFile read_draws_csv(std::istream& in) {
  ChainFile file;
  std::string line;
  std::size_t line_no = 0;
  // The manifest reference is the only comment the reader keeps.
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = csv::trim(line);
    if (body.empty()) continue;
    if (body.rfind("# manifest: ", 0) == 0) {
      file.manifest = std::string(body.substr(12));
      continue;
    }
    if (body.front() == '#') continue;
    break;
  }
  if (csv::trim(line).empty() || csv::trim(line).front() == '#') throw ParseError(0, "draw file has no header");
  auto header = csv::split(line);
  if (header.empty() || header.front() != "chain") throw ParseError(line_no, "draw header must start with 'chain'");
  header.erase(header.begin());
  file.draws.names = header;

  std::vector<std::vector<double>> rows;
  while (csv::next_record(in, line, line_no)) {
    const auto fields = csv::split(line);
    if (fields.size() != header.size() + 1) throw ParseError(line_no, "wrong number of fields");
    file.chain_ids.push_back(static_cast<int>(csv::parse_count(fields[0], line_no, "chain id")));
    std::vector<double> row;
    row.reserve(header.size());
    for (std::size_t c = 1; c < fields.size(); ++c) row.push_back(csv::parse_real(fields[c], line_no));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(0, "draw file has no rows");
  file.draws.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(header.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      file.draws.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return file;
}

ChainFile load_draws_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("cannot open '" + path.string() + "'");
  return read_draws_csv(in);
}

std::vector<int> chain_ids_of(std::span<const PosteriorChain> chains) {
  std::vector<int> ids;
  for (const auto& c : chains) ids.insert(ids.end(), c.draws.size(), c.chain_id);
  return ids;
}

void check_draws_match(const DrawMatrix& draws, const TwoArmTable& table) {
  const auto expected = chain_column_names(table.labels);
  if (draws.names != expected) {
    throw InvalidParameter("draw columns do not match the table (expected " +
                           std::to_string(expected.size()) + " columns psi_<center>_<arm>, mu, sigma)");
  }
}

json summary_to_json(const PosteriorSummary& summary, const TwoArmTable* table) {
  json params = json::array();
  for (std::size_t p = 0; p < summary.parameters.size(); ++p) {
    const auto& s = summary.parameters[p];
    json entry = {{"name", s.name}, {"mean", s.mean}, {"sd", s.sd}, {"lower", s.lower}, {"upper", s.upper}};
    if (table && p < 2 * table->size()) {
      const auto& cell = table->cell(p / 2, p % 2 == 0 ? Arm::kTreatment : Arm::kControl);
      entry["mle"] = cell.total > 0 ? json(format_mle(mle_log_odds(cell))) : json(nullptr);
    }
    params.push_back(std::move(entry));
  }
  return {{"draws", summary.draws}, {"parameters", params}, {"prob_mu1_gt_mu2", summary.prob_mu1_gt_mu2}};
}

json fit_report_json(const EMState& state, const TwoArmTable& table, const EffectiveCounts& counts,
                     const NormalPrior& prior, const std::string& method) {
  const Matrix2d precision = method == "em" ? prior.precision() : Matrix2d(state.sigma.inverse());
  const Vector2d mean = method == "em" ? prior.mean : state.mu;
  const ArmMatrixd grad = log_posterior_gradient(state.psi, counts, mean, precision);
  json psi = json::array();
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    psi.push_back({{"center", table.labels[i]}, {"treatment", state.psi(r, 0)}, {"control", state.psi(r, 1)}});
  }
  return {{"method", method},
          {"converged", state.converged},
          {"iterations", state.iterations},
          {"log_posterior", state.log_posterior},
          {"max_abs_gradient", grad.cwiseAbs().maxCoeff()},
          {"psi", psi},
          {"mu", json::array({state.mu(0), state.mu(1)})},
          {"sigma", matrix_json(state.sigma)},
          {"warnings", state.warnings}};
}

void write_plot_data_csv(const PosteriorSummary& summary, const TwoArmTable& table, std::ostream& out,
                         const std::string& manifest) {
  if (!manifest.empty()) out << "# manifest: " << manifest << '\n';
  out << "center,arm,mle,mean,lower,upper\n";
  for (std::size_t i = 0; i < table.size(); ++i) {
    for (Arm arm : {Arm::kTreatment, Arm::kControl}) {
      const auto& s = summary.parameters[2 * i + static_cast<std::size_t>(arm)];
      const auto& cell = table.cell(i, arm);
      out << table.labels[i] << ',' << arm_name(arm) << ','
          << (cell.total > 0 ? format_mle(mle_log_odds(cell)) : std::string("nan")) << ','
          << format_double(s.mean) << ',' << format_double(s.lower) << ',' << format_double(s.upper) << '\n';
    }
  }
}

void write_mu_scatter_csv(const DrawMatrix& draws, std::size_t max_points, std::ostream& out,
                          const std::string& manifest) {
  Eigen::Index mu1 = -1, mu2 = -1;
  for (std::size_t c = 0; c < draws.names.size(); ++c) {
    if (draws.names[c] == "mu_1") mu1 = static_cast<Eigen::Index>(c);
    if (draws.names[c] == "mu_2") mu2 = static_cast<Eigen::Index>(c);
  }
  if (mu1 < 0 || mu2 < 0) throw InvalidParameter("draws have no mu columns");
  if (!manifest.empty()) out << "# manifest: " << manifest << '\n';
  out << "mu_1,mu_2\n";
  const auto rows = static_cast<std::size_t>(draws.values.rows());
  const std::size_t points = std::min(rows, max_points);
  for (std::size_t p = 0; p < points; ++p) {
    const auto r = static_cast<Eigen::Index>(p * rows / points);
    out << format_double(draws.values(r, mu1)) << ',' << format_double(draws.values(r, mu2)) << '\n';
  }
}

}  // namespace pgmeta
