// pgmeta: Polya-Gamma EM / Gibbs inference for multi-center contingency tables.
//
//   pgmeta fit --data t.csv --prior p.json --method gibbs --save-draws d.csv
//   pgmeta fit --example skene-wakefield --out summary.json
//   pgmeta pg-sample --a 1 --c 0 --n 1000 --seed 7
//   pgmeta summarize --draws d.csv --data t.csv --plot-data plot.csv
//
// Exit codes: 0 success, 2 invalid input, 3 numerical failure.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pgmeta/em.hpp"
#include "pgmeta/gibbs.hpp"
#include "pgmeta/io.hpp"
#include "pgmeta/multinomial.hpp"
#include "pgmeta/polya_gamma.hpp"
#include "pgmeta/prior.hpp"
#include "pgmeta/summary.hpp"
#include "pgmeta/table.hpp"
#include "pgmeta/version.hpp"

namespace {

using nlohmann::json;
using namespace pgmeta;

constexpr int kExitInvalid = 2;
constexpr int kExitNumerical = 3;

// Diffuse normal base used when only Z pseudo-counts are given.
constexpr double kDiffuseVariance = 1e6;

struct FitOptions {
  std::string data;
  std::string prior;
  std::string example;
  std::string method;
  std::string update_hyper = "mu-sigma";
  bool penalize = false;
  double tol = 1e-8;
  int max_iter = 10000;
  int iters = 20000;
  int burnin = 5000;
  int thin = 1;
  std::uint64_t seed = 20100618;
  int trunc_k = 200;
  int chains = 1;
  std::string baseline;
  std::string out;
  std::string save_draws;
  std::string manifest;
};

struct PgSampleOptions {
  double a = 1.0;
  double c = 0.0;
  long long n = 1;
  std::uint64_t seed = 1;
  int trunc_k = 200;
};

struct SummarizeOptions {
  std::string draws;
  std::string data;
  std::string out;
  std::string plot_data;
  std::string mu_scatter;
  std::size_t scatter_size = 1000;
  std::string manifest;
};

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw InvalidParameter("cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

std::string default_manifest(const std::string& out, const std::string& requested) {
  if (!requested.empty()) return requested;
  if (out.empty()) return {};
  return out + ".manifest.json";
}

void write_manifest(const std::string& path, json manifest,
                    std::chrono::steady_clock::time_point start) {
  if (path.empty()) return;
  manifest["version"] = kVersion;
  manifest["wall_clock_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ofstream out(path);
  if (!out) throw InvalidParameter("cannot write manifest '" + path + "'");
  out << manifest.dump(2) << '\n';
}

void emit_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

NormalPrior diffuse_normal() {
  return NormalPrior{Vector2d::Zero(), kDiffuseVariance * Matrix2d::Identity()};
}

json prior_json(const ParsedPrior& p) {
  json j = {{"type", p.type}};
  if (const auto* n = std::get_if<NormalPrior>(&p.spec)) {
    j["mu"] = {n->mean(0), n->mean(1)};
    j["sigma"] = {{n->cov(0, 0), n->cov(0, 1)}, {n->cov(1, 0), n->cov(1, 1)}};
  } else if (const auto* h = std::get_if<NIWHyper>(&p.spec)) {
    j["d"] = h->dof;
    j["B"] = {{h->scale(0, 0), h->scale(0, 1)}, {h->scale(1, 0), h->scale(1, 1)}};
  } else if (const auto* z = std::get_if<ZPrior>(&p.spec)) {
    j["a"] = z->a;
    j["b"] = z->b;
  }
  return j;
}

ParsedPrior skene_wakefield_prior() {
  NIWHyper h;
  h.dof = 4.0;
  h.scale << 0.754, 0.857, 0.857, 1.480;
  return ParsedPrior{h, "niw", {}};
}

GibbsConfig gibbs_config(const FitOptions& o) {
  GibbsConfig cfg;
  cfg.iters = o.iters;
  cfg.burnin = o.burnin;
  cfg.thin = o.thin;
  cfg.seed = o.seed;
  cfg.trunc.terms = o.trunc_k;
  validate(cfg);
  return cfg;
}

int cmd_fit(const FitOptions& o, const std::vector<std::string>& argv) {
  const auto start = std::chrono::steady_clock::now();
  if (!o.example.empty() && o.example != "skene-wakefield") {
    throw InvalidParameter("unknown example '" + o.example + "'");
  }
  const bool example = !o.example.empty();
  if (!example && (o.data.empty() || o.prior.empty())) {
    throw InvalidParameter("--data and --prior are required unless --example is given");
  }
  const std::string method = o.method.empty() ? (example ? "gibbs" : "") : o.method;
  if (method.empty()) throw InvalidParameter("--method is required");

  ParsedPrior prior = (example && o.prior.empty()) ? skene_wakefield_prior() : load_prior_json(o.prior);
  emit_warnings(prior.warnings);

  const std::string manifest_path = default_manifest(o.out, o.manifest);
  json manifest = {{"command", "fit"},
                   {"argv", argv},
                   {"input", example && o.data.empty() ? "example:" + o.example : o.data},
                   {"prior", prior_json(prior)},
                   {"config",
                    {{"method", method},
                     {"tol", o.tol},
                     {"max_iter", o.max_iter},
                     {"update_hyper", o.update_hyper},
                     {"iters", o.iters},
                     {"burnin", o.burnin},
                     {"thin", o.thin},
                     {"seed", o.seed},
                     {"trunc_k", o.trunc_k},
                     {"chains", o.chains}}},
                   {"outputs", json::array()}};
  if (!o.out.empty()) manifest["outputs"].push_back(o.out);
  if (!o.save_draws.empty()) manifest["outputs"].push_back(o.save_draws);

  json result;
  if (method == "multinomial-gibbs") {
    const auto* mn = std::get_if<MatrixNormalPrior>(&prior.spec);
    if (!mn) throw InvalidParameter("multinomial-gibbs needs a matrix-normal prior");
    const MultinomialTable table = load_multinomial_csv(o.data, o.baseline);
    const MultinomialChain chain = multinomial_gibbs(table, *mn, gibbs_config(o));
    const DrawMatrix draws{chain.names, chain.draws};
    if (!o.save_draws.empty()) {
      Output out(o.save_draws);
      write_draws_csv(draws, std::vector<int>(static_cast<std::size_t>(draws.values.rows()), 0),
                      out.stream(), manifest_path);
    }
    result = summary_to_json(summarize(draws), nullptr);
    result.erase("prob_mu1_gt_mu2");
    result["method"] = method;
  } else {
    const TwoArmTable table = o.data.empty() ? skene_wakefield_table() : load_two_arm_csv(o.data);
    const auto centers = static_cast<Eigen::Index>(table.size());

    if (method == "em" || method == "ecm") {
      EMConfig cfg;
      cfg.tol = o.tol;
      cfg.max_iter = o.max_iter;
      NormalPrior normal;
      std::optional<ZPseudoCounts> z;
      if (const auto* n = std::get_if<NormalPrior>(&prior.spec)) {
        normal = *n;
      } else if (const auto* zp = std::get_if<ZPrior>(&prior.spec); zp && method == "em") {
        normal = diffuse_normal();
        z = ZPseudoCounts::uniform(centers, zp->a, zp->b);
      } else if (const auto* h = std::get_if<NIWHyper>(&prior.spec); h && method == "ecm") {
        normal = NormalPrior{Vector2d::Zero(), iw_prior_mean(*h)};
        if (o.penalize) cfg.hyper_penalty = *h;
      } else {
        throw InvalidParameter("prior type '" + prior.type + "' is not supported by method " + method);
      }
      if (o.penalize && !cfg.hyper_penalty) throw InvalidParameter("--penalize needs an niw prior with --method ecm");

      const EffectiveCounts counts = z ? apply_pseudo_counts(table, *z) : effective_counts(table);
      EMState state;
      if (method == "em") {
        state = em_fit(table, normal, z, cfg);
      } else {
        if (o.update_hyper == "none") cfg.update_hyper = HyperUpdate::kNone;
        else if (o.update_hyper == "mu") cfg.update_hyper = HyperUpdate::kMuOnly;
        else if (o.update_hyper == "mu-sigma") cfg.update_hyper = HyperUpdate::kMuAndSigma;
        else throw InvalidParameter("--update-hyper must be none, mu or mu-sigma");
        state = ecm_fit(table, normal, cfg);
      }
      emit_warnings(state.warnings);
      result = fit_report_json(state, table, counts, normal, method);
      if (!state.converged) std::cerr << "warning: did not converge in " << cfg.max_iter << " iterations\n";
    } else if (method == "gibbs") {
      GibbsConfig cfg = gibbs_config(o);
      GibbsPrior gp;
      if (const auto* h = std::get_if<NIWHyper>(&prior.spec)) {
        gp.niw = *h;
        cfg.hyper_mode = HyperMode::kNIW;
      } else if (const auto* n = std::get_if<NormalPrior>(&prior.spec)) {
        gp.fixed = *n;
        cfg.hyper_mode = HyperMode::kFixedMuSigma;
      } else if (const auto* zp = std::get_if<ZPrior>(&prior.spec)) {
        gp.fixed = diffuse_normal();
        gp.z = ZPseudoCounts::uniform(centers, zp->a, zp->b);
        cfg.hyper_mode = HyperMode::kFixedMuSigma;
      } else {
        throw InvalidParameter("prior type '" + prior.type + "' is not supported by method gibbs");
      }
      const auto chains = run_gibbs_chains(table, gp, cfg, o.chains);
      const DrawMatrix draws = to_draw_matrix(chains);
      if (!o.save_draws.empty()) {
        Output out(o.save_draws);
        write_draws_csv(draws, chain_ids_of(chains), out.stream(), manifest_path);
      }
      result = summary_to_json(summarize(draws), &table);
      result["method"] = method;
      result["chains"] = o.chains;
      result["acceptance_rate"] = 1.0;
    } else {
      throw InvalidParameter("unknown method '" + method + "'");
    }
  }

  result["manifest"] = manifest_path.empty() ? json(nullptr) : json(manifest_path);
  {
    Output out(o.out);
    out.stream() << result.dump(2) << '\n';
  }
  write_manifest(manifest_path, manifest, start);
  return 0;
}

int cmd_pg_sample(const PgSampleOptions& o) {
  if (o.n < 1) throw InvalidParameter("--n must be positive");
  const PGParams<double> params{o.a, o.c};
  validate(params);
  const TruncationConfig trunc{o.trunc_k};
  validate(trunc);
  Rng rng(o.seed);
  double sum = 0.0;
  for (long long i = 0; i < o.n; ++i) {
    const double draw = pg_sample(params, trunc, rng);
    sum += draw;
    std::cout << format_double(draw) << '\n';
  }
  std::cout << "# mean=" << format_double(sum / static_cast<double>(o.n))
            << " pg_mean=" << format_double(pg_mean(params)) << '\n';
  return 0;
}

int cmd_summarize(const SummarizeOptions& o, const std::vector<std::string>& argv) {
  const auto start = std::chrono::steady_clock::now();
  const TwoArmTable table = load_two_arm_csv(o.data);
  const ChainFile file = load_draws_csv(o.draws);
  check_draws_match(file.draws, table);
  const PosteriorSummary summary = summarize(file.draws);

  const std::string manifest_path = default_manifest(o.out, o.manifest);
  json result = summary_to_json(summary, &table);
  result["method"] = "summarize";
  result["source_manifest"] = file.manifest.empty() ? json(nullptr) : json(file.manifest);
  result["manifest"] = manifest_path.empty() ? json(nullptr) : json(manifest_path);
  {
    Output out(o.out);
    out.stream() << result.dump(2) << '\n';
  }
  if (!o.plot_data.empty()) {
    Output out(o.plot_data);
    write_plot_data_csv(summary, table, out.stream(), manifest_path);
  }
  if (!o.mu_scatter.empty()) {
    Output out(o.mu_scatter);
    write_mu_scatter_csv(file.draws, o.scatter_size, out.stream(), manifest_path);
  }

  json outputs = json::array();
  for (const auto* p : {&o.out, &o.plot_data, &o.mu_scatter}) {
    if (!p->empty()) outputs.push_back(*p);
  }
  write_manifest(manifest_path,
                 {{"command", "summarize"}, {"argv", argv}, {"input", o.data}, {"draws", o.draws},
                  {"config", {{"scatter_size", o.scatter_size}}}, {"outputs", outputs}},
                 start);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polya-Gamma inference for multi-center contingency tables"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  const std::vector<std::string> args(argv, argv + argc);

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a model by EM, ECM or Gibbs sampling");
  fit_cmd->add_option("--data", fit.data, "Table CSV (two-arm, or long multinomial format)");
  fit_cmd->add_option("--prior", fit.prior, "Prior specification JSON");
  fit_cmd->add_option("--example", fit.example, "Embedded example data and prior (skene-wakefield)");
  fit_cmd->add_option("--method", fit.method, "em | ecm | gibbs | multinomial-gibbs")
      ->check(CLI::IsMember({"em", "ecm", "gibbs", "multinomial-gibbs"}));
  fit_cmd->add_option("--update-hyper", fit.update_hyper, "ECM hyperparameter updates: none | mu | mu-sigma")
      ->check(CLI::IsMember({"none", "mu", "mu-sigma"}));
  fit_cmd->add_flag("--penalize", fit.penalize, "ECM: regularize Sigma with the niw prior");
  fit_cmd->add_option("--tol", fit.tol, "EM convergence tolerance")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--max-iter", fit.max_iter, "EM iteration limit")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--iters", fit.iters, "Gibbs sweeps")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--burnin", fit.burnin, "Gibbs burn-in sweeps")->check(CLI::NonNegativeNumber);
  fit_cmd->add_option("--thin", fit.thin, "Keep every n-th sweep")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--seed", fit.seed, "Random seed");
  fit_cmd->add_option("--trunc-k", fit.trunc_k, "Gamma terms per Polya-Gamma draw")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--chains", fit.chains, "Independent chains (seeds seed+0..n-1)")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--baseline", fit.baseline, "Multinomial baseline outcome label");
  fit_cmd->add_option("--out", fit.out, "Summary / report JSON path (default stdout)");
  fit_cmd->add_option("--save-draws", fit.save_draws, "Write the retained draws to this CSV");
  fit_cmd->add_option("--manifest", fit.manifest, "Run manifest path (default <out>.manifest.json)");

  PgSampleOptions pg;
  auto* pg_cmd = app.add_subcommand("pg-sample", "Draw from PG(a, c) by the truncated gamma series");
  pg_cmd->add_option("--a", pg.a, "Shape a >= 0")->required();
  pg_cmd->add_option("--c", pg.c, "Tilt c")->required();
  pg_cmd->add_option("--n", pg.n, "Number of draws")->required();
  pg_cmd->add_option("--seed", pg.seed, "Random seed")->required();
  pg_cmd->add_option("--trunc-k", pg.trunc_k, "Gamma terms per draw");

  SummarizeOptions sum;
  auto* sum_cmd = app.add_subcommand("summarize", "Summarize saved two-arm draws");
  sum_cmd->add_option("--draws", sum.draws, "Draw CSV written by fit --save-draws")->required();
  sum_cmd->add_option("--data", sum.data, "Two-arm table CSV")->required();
  sum_cmd->add_option("--out", sum.out, "Summary JSON path (default stdout)");
  sum_cmd->add_option("--plot-data", sum.plot_data, "Per-center interval CSV");
  sum_cmd->add_option("--mu-scatter", sum.mu_scatter, "Subsampled (mu_1, mu_2) CSV");
  sum_cmd->add_option("--scatter-size", sum.scatter_size, "Maximum scatter points");
  sum_cmd->add_option("--manifest", sum.manifest, "Run manifest path (default <out>.manifest.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(fit, args);
    if (pg_cmd->parsed()) return cmd_pg_sample(pg);
    if (sum_cmd->parsed()) return cmd_summarize(sum, args);
  } catch (const InvalidParameter& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitInvalid;
}
