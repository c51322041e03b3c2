#include "wellcap/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <sstream>

#include "wellcap/csv.hpp"
#include "wellcap/errors.hpp"
#include "wellcap/model.hpp"
#include "wellcap/stats.hpp"

namespace wellcap::report {

namespace {

void same_length(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionError("prediction and observation lengths differ (" +
                         std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
  if (a.empty()) throw DimensionError("empty prediction vector");
}

std::string format_cell(double v, int decimals) {
  if (decimals < 0) return csv::format_double(v);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

EstimateTable empty_table(const data::PreparedDataset& d, Provenance p) {
  EstimateTable t;
  for (const auto& c : d.block_codes) t.block_codes.push_back(c.str());
  t.time_labels = d.time_labels;
  t.values.assign(t.rows() * t.cols(), std::nullopt);
  t.counts.assign(t.rows() * t.cols(), 0);
  t.provenance = p;
  return t;
}

EstimateTable cell_means(std::span<const double> values, const data::PreparedDataset& d,
                         Provenance p) {
  if (values.size() != d.size()) {
    throw DimensionError("table values are not aligned with the dataset rows");
  }
  EstimateTable t = empty_table(d, p);
  std::vector<double> sums(t.values.size(), 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const std::size_t t_idx = d.time_of.empty() ? 0 : static_cast<std::size_t>(d.time_of[i]);
    const std::size_t cell = static_cast<std::size_t>(d.block_of[i]) * t.cols() + t_idx;
    sums[cell] += values[i];
    ++t.counts[cell];
  }
  for (std::size_t c = 0; c < sums.size(); ++c) {
    if (t.counts[c] > 0) t.values[c] = sums[c] / static_cast<double>(t.counts[c]);
  }
  return t;
}

}  // namespace

double rmsd(std::span<const double> pred, std::span<const double> obs) {
  same_length(pred, obs);
  double ss = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) ss += (pred[i] - obs[i]) * (pred[i] - obs[i]);
  return std::sqrt(ss / static_cast<double>(pred.size()));
}

Interval discrepancy_interval(std::span<const double> pred, std::span<const double> obs,
                              double lo, double hi) {
  same_length(pred, obs);
  if (!(lo <= hi)) throw DomainError("discrepancy interval: lo must not exceed hi");
  std::vector<double> diff(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) diff[i] = obs[i] - pred[i];
  std::sort(diff.begin(), diff.end());
  return {stats::quantile_sorted(diff, lo), stats::quantile_sorted(diff, hi)};
}

std::vector<double> posterior_mean_predictions(const sampler::PosteriorDraws& draws,
                                               ModelKind kind,
                                               const data::PreparedDataset& data,
                                               bool clamp_negative) {
  const model::Model m(kind, model::ModelData::from(data), model::PriorConfig::defaults_for(kind));
  if (draws.dim != m.dim()) {
    throw DimensionError("draws have " + std::to_string(draws.dim) +
                         " parameters, kind " + to_string(kind) + " layout needs " +
                         std::to_string(m.dim()));
  }
  const std::size_t n = data.size();
  std::vector<double> sum(n, 0.0), mu(n);
  for (int c = 0; c < draws.chains; ++c) {
    for (int d = 0; d < draws.draws_per_chain; ++d) {
      m.predict_mean(draws.draw(c, d), mu);
      for (std::size_t i = 0; i < n; ++i) sum[i] += mu[i];
    }
  }
  const double count = static_cast<double>(draws.total_draws());
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = data.to_original_outcome(sum[i] / count);
    if (clamp_negative && v < 0.0) v = 0.0;
    out[i] = v;
  }
  return out;
}

Histogram histogram_data(std::span<const double> pred, std::span<const double> obs,
                         int bin_count) {
  if (bin_count < 1) throw DomainError("histogram needs at least one bin");
  if (pred.empty() || obs.empty()) throw DimensionError("histogram of an empty vector");
  double lo = pred.front(), hi = pred.front();
  for (auto series : {pred, obs}) {
    for (double v : series) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  Histogram h;
  const double width = (hi - lo) / bin_count;
  for (int i = 0; i <= bin_count; ++i) h.edges.push_back(lo + i * width);
  h.edges.back() = hi;
  h.predicted.assign(bin_count, 0);
  h.observed.assign(bin_count, 0);
  auto bin_of = [&](double v) {
    const auto b = static_cast<int>(std::floor((v - lo) / width));
    return static_cast<std::size_t>(std::clamp(b, 0, bin_count - 1));
  };
  for (double v : pred) ++h.predicted[bin_of(v)];
  for (double v : obs) ++h.observed[bin_of(v)];
  return h;
}

std::string histogram_csv(const Histogram& h) {
  std::ostringstream out;
  out << "bin_low,bin_high,predicted,observed\n";
  for (std::size_t i = 0; i < h.predicted.size(); ++i) {
    out << csv::format_double(h.edges[i]) << ',' << csv::format_double(h.edges[i + 1]) << ','
        << h.predicted[i] << ',' << h.observed[i] << '\n';
  }
  return out.str();
}

std::size_t EstimateTable::row_of(std::string_view code) const {
  for (std::size_t b = 0; b < block_codes.size(); ++b) {
    if (block_codes[b] == code) return b;
  }
  throw DomainError("block '" + std::string(code) + "' is not in the table");
}

EstimateTable EstimateTable::rows_with_prefix(std::string_view prefix) const {
  EstimateTable out;
  out.time_labels = time_labels;
  out.provenance = provenance;
  for (std::size_t b = 0; b < rows(); ++b) {
    if (block_codes[b].compare(0, prefix.size(), prefix) != 0) continue;
    out.block_codes.push_back(block_codes[b]);
    for (std::size_t t = 0; t < cols(); ++t) {
      out.values.push_back(at(b, t));
      out.counts.push_back(count(b, t));
    }
  }
  return out;
}

std::string EstimateTable::to_csv(int decimals) const {
  std::ostringstream out;
  out << "MHB";
  for (const auto& label : time_labels) out << ',' << label;
  out << '\n';
  for (std::size_t b = 0; b < rows(); ++b) {
    out << block_codes[b];
    for (std::size_t t = 0; t < cols(); ++t) {
      const auto& v = at(b, t);
      out << ',' << (v ? format_cell(*v, decimals) : "NA");
    }
    out << '\n';
  }
  return out.str();
}

EstimateTable table_from_csv(std::istream& in, Provenance provenance) {
  EstimateTable t;
  t.provenance = provenance;
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("table is empty");
  const auto header = csv::split_line(line);
  if (header.empty() || header[0] != "MHB") throw SchemaError("table header must start with MHB");
  t.time_labels.assign(header.begin() + 1, header.end());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = csv::split_line(line);
    if (cells.size() != header.size()) throw RowError("wrong number of fields", line_no);
    t.block_codes.push_back(cells[0]);
    for (std::size_t c = 1; c < cells.size(); ++c) {
      if (cells[c] == "NA") {
        t.values.emplace_back();
        t.counts.push_back(0);
        continue;
      }
      const auto v = csv::parse_double(cells[c]);
      if (!v) throw RowError("cannot parse '" + cells[c] + "'", line_no);
      t.values.emplace_back(*v);
      t.counts.push_back(1);
    }
  }
  return t;
}

EstimateTable estimate_table(std::span<const double> predictions,
                             const data::PreparedDataset& data) {
  return cell_means(predictions, data, Provenance::model_based);
}

EstimateTable observed_table(const data::PreparedDataset& data) {
  return cell_means(data.y_original, data, Provenance::observed_average);
}

std::vector<std::optional<double>> aggregate_blocks(const EstimateTable& table,
                                                    const std::vector<std::string>& blocks,
                                                    const std::vector<double>& weights) {
  if (blocks.empty()) throw DomainError("aggregation needs at least one block");
  if (weights.size() != blocks.size()) {
    throw DimensionError("aggregation: one weight per block required");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw DomainError("aggregation weights must be non-negative");
    total += w;
  }
  if (!(total > 0.0)) throw DomainError("aggregation weights are all zero");

  std::vector<std::size_t> rows;
  for (const auto& code : blocks) rows.push_back(table.row_of(code));

  std::vector<std::optional<double>> out(table.cols());
  for (std::size_t t = 0; t < table.cols(); ++t) {
    double num = 0.0;
    bool complete = true;
    for (std::size_t j = 0; j < rows.size(); ++j) {
      const auto& v = table.at(rows[j], t);
      if (!v) {
        complete = false;
        break;
      }
      num += *v * weights[j];
    }
    if (complete) out[t] = num / total;
  }
  return out;
}

std::vector<std::optional<double>> aggregate_blocks(const EstimateTable& table,
                                                    const std::vector<std::string>& blocks,
                                                    Weighting weighting) {
  if (weighting == Weighting::equal) {
    return aggregate_blocks(table, blocks, std::vector<double>(blocks.size(), 1.0));
  }
  // cell counts differ per time, so weigh each time separately
  std::vector<std::optional<double>> out(table.cols());
  std::vector<std::size_t> rows;
  for (const auto& code : blocks) rows.push_back(table.row_of(code));
  for (std::size_t t = 0; t < table.cols(); ++t) {
    double num = 0.0, den = 0.0;
    bool complete = true;
    for (std::size_t r : rows) {
      const auto& v = table.at(r, t);
      if (!v) {
        complete = false;
        break;
      }
      num += *v * static_cast<double>(table.count(r, t));
      den += static_cast<double>(table.count(r, t));
    }
    if (complete && den > 0.0) out[t] = num / den;
  }
  return out;
}

std::vector<TrajectorySeries> time_trajectories(const sampler::PosteriorDraws& draws,
                                                ModelKind kind, int blocks,
                                                const std::vector<std::string>& time_labels) {
  if (kind == ModelKind::spatial) {
    throw DomainError("model kind A has no time-indexed parameters");
  }
  const int times = static_cast<int>(time_labels.size());
  const model::ParamLayout layout(kind, blocks, times);
  if (draws.dim != layout.size()) {
    throw DimensionError("draws do not match the kind " + to_string(kind) + " layout");
  }
  const std::vector<std::string> families =
      kind == ModelKind::spatio_temporal ? std::vector<std::string>{"tau", "gamma_t"}
                                         : std::vector<std::string>{"tau", "phi", "omega"};
  std::vector<TrajectorySeries> out;
  for (const auto& name : families) {
    const auto& seg = layout.segment(name);
    TrajectorySeries s;
    s.parameter = name;
    s.time_labels = time_labels;
    for (int t = 0; t < times; ++t) {
      std::vector<double> v = draws.pooled(seg.offset + t);
      std::sort(v.begin(), v.end());
      s.mean.push_back(stats::mean(v));
      s.q05.push_back(stats::quantile_sorted(v, 0.05));
      s.q95.push_back(stats::quantile_sorted(v, 0.95));
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string trajectories_csv(const std::vector<TrajectorySeries>& series) {
  std::ostringstream out;
  out << "parameter,time,mean,q05,q95\n";
  for (const auto& s : series) {
    for (std::size_t t = 0; t < s.mean.size(); ++t) {
      out << s.parameter << ',' << s.time_labels[t] << ',' << csv::format_double(s.mean[t])
          << ',' << csv::format_double(s.q05[t]) << ',' << csv::format_double(s.q95[t]) << '\n';
    }
  }
  return out.str();
}

}  // namespace wellcap::report
