#include "wellcap/fit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "wellcap/csv.hpp"
#include "wellcap/diagnostics.hpp"
#include "wellcap/errors.hpp"
#include "wellcap/stats.hpp"

namespace wellcap::sampler {

double FitResult::max_rhat() const {
  double best = kUndefined;
  for (const auto& s : summary) {
    if (is_undefined(s.rhat)) continue;
    if (is_undefined(best) || s.rhat > best) best = s.rhat;
  }
  return best;
}

bool FitResult::rhat_flagged() const {
  const double m = max_rhat();
  return !is_undefined(m) && m > kRhatThreshold;
}

std::vector<ParameterSummary> summarize(const PosteriorDraws& draws,
                                        const std::vector<std::string>& names) {
  if (names.size() != draws.dim) {
    throw DimensionError("summary: " + std::to_string(names.size()) + " names for " +
                         std::to_string(draws.dim) + " parameters");
  }
  const bool diagnosable = draws.chains >= 2 && draws.draws_per_chain >= 4;
  std::vector<ParameterSummary> out;
  out.reserve(draws.dim);
  for (std::size_t k = 0; k < draws.dim; ++k) {
    std::vector<double> pooled = draws.pooled(k);
    ParameterSummary s;
    s.name = names[k];
    s.mean = stats::mean(pooled);
    s.sd = std::sqrt(stats::sample_variance(pooled));
    std::sort(pooled.begin(), pooled.end());
    s.q05 = stats::quantile_sorted(pooled, 0.05);
    s.q95 = stats::quantile_sorted(pooled, 0.95);
    if (diagnosable) {
      const ChainDraws chains = draws.parameter(k);
      s.rhat = split_rhat(chains);
      s.ess_bulk = ess_bulk(chains);
    } else {
      s.rhat = kUndefined;
      s.ess_bulk = kUndefined;
    }
    out.push_back(std::move(s));
  }
  return out;
}

FitResult fit(const model::Model& model, const SamplerConfig& config) {
  const GradientFn grad = [&model](std::span<const double> q, std::span<double> g) {
    return model.log_posterior_gradient(q, g);
  };
  FitResult res;
  res.kind = model.kind();
  res.names = model.layout().names();
  res.draws = run_nuts(grad, model.dim(), config);
  res.summary = summarize(res.draws, res.names);
  return res;
}

FitResult fit(ModelKind kind, const data::PreparedDataset& data,
              const model::PriorConfig& prior, const SamplerConfig& config) {
  if (kind != data.kind) {
    throw DimensionError("dataset was prepared for kind " + to_string(data.kind) +
                         ", fit requested kind " + to_string(kind));
  }
  const model::Model m(kind, model::ModelData::from(data), prior);
  return fit(m, config);
}

void write_draws_csv(const PosteriorDraws& draws, const std::vector<std::string>& names,
                     const std::filesystem::path& path) {
  if (names.size() != draws.dim) throw DimensionError("draws file: name count mismatch");
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  std::vector<std::string> header{"chain", "draw"};
  header.insert(header.end(), names.begin(), names.end());
  out << csv::join(header) << '\n';
  for (int c = 0; c < draws.chains; ++c) {
    for (int d = 0; d < draws.draws_per_chain; ++d) {
      out << (c + 1) << ',' << (d + 1);
      for (std::size_t k = 0; k < draws.dim; ++k) {
        out << ',' << csv::format_double(draws.at(c, d, k));
      }
      out << '\n';
    }
  }
}

DrawsFile read_draws_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open draws file '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("draws file is empty");
  std::vector<std::string> header = csv::split_line(line);
  if (header.size() < 3 || header[0] != "chain" || header[1] != "draw") {
    throw SchemaError("draws file header must start with chain,draw");
  }
  DrawsFile f;
  f.names.assign(header.begin() + 2, header.end());
  const std::size_t dim = f.names.size();

  std::vector<std::vector<std::vector<double>>> by_chain;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> cells = csv::split_line(line);
    if (cells.size() != dim + 2) throw RowError("wrong number of fields", line_no);
    const auto chain = csv::parse_double(cells[0]);
    if (!chain || *chain < 1) throw RowError("bad chain index", line_no);
    const auto c = static_cast<std::size_t>(*chain) - 1;
    if (c >= by_chain.size()) by_chain.resize(c + 1);
    std::vector<double> row(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      const auto v = csv::parse_double(cells[k + 2]);
      if (!v) throw RowError("cannot parse '" + cells[k + 2] + "'", line_no);
      row[k] = *v;
    }
    by_chain[c].push_back(std::move(row));
  }
  if (by_chain.empty()) throw SchemaError("draws file has no rows");
  const std::size_t per_chain = by_chain.front().size();
  for (const auto& ch : by_chain) {
    if (ch.size() != per_chain || per_chain == 0) {
      throw SchemaError("draws file chains differ in length");
    }
  }
  f.draws.chains = static_cast<int>(by_chain.size());
  f.draws.draws_per_chain = static_cast<int>(per_chain);
  f.draws.dim = dim;
  for (const auto& ch : by_chain) {
    for (const auto& row : ch) f.draws.values.insert(f.draws.values.end(), row.begin(), row.end());
  }
  return f;
}

}  // namespace wellcap::sampler
