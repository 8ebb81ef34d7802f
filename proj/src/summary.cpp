#include "pgmeta/summary.hpp"

#include <algorithm>
#include <cmath>

namespace pgmeta {

const ScalarSummary& PosteriorSummary::at(const std::string& name) const {
  for (const auto& p : parameters) {
    if (p.name == name) return p;
  }
  throw InvalidParameter("no summary for parameter '" + name + "'");
}

std::vector<std::string> chain_column_names(const std::vector<std::string>& labels) {
  std::vector<std::string> names;
  for (const auto& label : labels) {
    names.push_back("psi_" + label + "_1");
    names.push_back("psi_" + label + "_2");
  }
  for (const char* n : {"mu_1", "mu_2", "sigma_11", "sigma_12", "sigma_22"}) names.emplace_back(n);
  return names;
}

DrawMatrix to_draw_matrix(std::span<const PosteriorChain> chains) {
  if (chains.empty()) throw InvalidParameter("no chains to summarize");
  std::vector<std::string> labels = chains.front().labels;
  Eigen::Index rows = 0;
  Eigen::Index centers = -1;
  for (const auto& chain : chains) {
    rows += static_cast<Eigen::Index>(chain.draws.size());
    if (!chain.draws.empty()) centers = chain.draws.front().psi.rows();
  }
  if (centers < 0) centers = static_cast<Eigen::Index>(labels.size());
  if (labels.empty()) {
    for (Eigen::Index i = 0; i < centers; ++i) labels.push_back(std::to_string(i + 1));
  }

  DrawMatrix out{chain_column_names(labels), Matrix<double>(rows, 2 * centers + 5)};
  Eigen::Index r = 0;
  for (const auto& chain : chains) {
    for (const auto& d : chain.draws) {
      for (Eigen::Index i = 0; i < centers; ++i) {
        out.values(r, 2 * i) = d.psi(i, 0);
        out.values(r, 2 * i + 1) = d.psi(i, 1);
      }
      const Eigen::Index base = 2 * centers;
      out.values(r, base) = d.mu(0);
      out.values(r, base + 1) = d.mu(1);
      out.values(r, base + 2) = d.sigma(0, 0);
      out.values(r, base + 3) = d.sigma(0, 1);
      out.values(r, base + 4) = d.sigma(1, 1);
      ++r;
    }
  }
  return out;
}

double quantile_sorted(std::span<const double> sorted, double prob) {
  if (sorted.empty()) throw InvalidParameter("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

ScalarSummary summarize_scalar(std::string name, std::span<const double> values) {
  if (values.empty()) throw InvalidParameter("cannot summarize an empty chain");
  ScalarSummary s{std::move(name)};
  const auto n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.sd = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  s.lower = quantile_sorted(sorted, 0.025);
  s.upper = quantile_sorted(sorted, 0.975);
  // The running sum can round a constant column's mean just outside its
  // own range.
  s.mean = std::clamp(s.mean, sorted.front(), sorted.back());
  return s;
}

PosteriorSummary summarize(const DrawMatrix& draws) {
  if (draws.values.rows() == 0) throw InvalidParameter("cannot summarize an empty chain");
  if (static_cast<Eigen::Index>(draws.names.size()) != draws.values.cols()) {
    throw InvalidParameter("column names do not match the draw matrix");
  }
  PosteriorSummary out;
  out.draws = static_cast<std::size_t>(draws.values.rows());
  std::vector<double> column(out.draws);
  Eigen::Index mu1 = -1, mu2 = -1;
  for (Eigen::Index c = 0; c < draws.values.cols(); ++c) {
    for (Eigen::Index r = 0; r < draws.values.rows(); ++r) column[static_cast<std::size_t>(r)] = draws.values(r, c);
    const auto& name = draws.names[static_cast<std::size_t>(c)];
    out.parameters.push_back(summarize_scalar(name, column));
    if (name == "mu_1") mu1 = c;
    if (name == "mu_2") mu2 = c;
  }
  if (mu1 >= 0 && mu2 >= 0) {
    std::size_t wins = 0;
    for (Eigen::Index r = 0; r < draws.values.rows(); ++r) {
      if (draws.values(r, mu1) > draws.values(r, mu2)) ++wins;
    }
    out.prob_mu1_gt_mu2 = static_cast<double>(wins) / static_cast<double>(out.draws);
  }
  return out;
}

PosteriorSummary summarize(const PosteriorChain& chain) {
  return summarize(to_draw_matrix(std::span<const PosteriorChain>(&chain, 1)));
}

double batch_means_se(std::span<const double> values, int batches) {
  if (batches < 2) throw InvalidParameter("batch means need at least two batches");
  const std::size_t size = values.size() / static_cast<std::size_t>(batches);
  if (size < 1) throw InvalidParameter("too few draws for batch means");
  std::vector<double> means(static_cast<std::size_t>(batches), 0.0);
  for (std::size_t b = 0; b < means.size(); ++b) {
    for (std::size_t k = 0; k < size; ++k) means[b] += values[b * size + k];
    means[b] /= static_cast<double>(size);
  }
  double grand = 0.0;
  for (double m : means) grand += m;
  grand /= static_cast<double>(batches);
  double ss = 0.0;
  for (double m : means) ss += (m - grand) * (m - grand);
  return std::sqrt(ss / (static_cast<double>(batches) - 1.0) / static_cast<double>(batches));
}

}  // namespace pgmeta
