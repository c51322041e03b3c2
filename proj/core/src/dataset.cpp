#include "wellcap/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "wellcap/csv.hpp"
#include "wellcap/errors.hpp"

namespace wellcap::data {

PipelinePolicy PipelinePolicy::defaults_for(ModelKind kind) {
  PipelinePolicy p;
  switch (kind) {
    case ModelKind::spatial:
      p.scale_k = 1;
      break;
    case ModelKind::spatio_temporal:
      p.scale_k = 2;
      break;
    case ModelKind::expanded:
      p.scale_k = 2;
      p.log_transform = true;
      p.impute_zeros = true;
      p.imputation_grouping = ImputationGrouping::prefix4;
      break;
  }
  return p;
}

// ---------------------------------------------------------------------------
// Reading

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::optional<std::chrono::year_month_day> parse_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
  }
  const int y = std::stoi(s.substr(0, 4));
  const unsigned m = static_cast<unsigned>(std::stoi(s.substr(5, 2)));
  const unsigned d = static_cast<unsigned>(std::stoi(s.substr(8, 2)));
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return ymd;
}

WellType parse_well_type(const std::string& s) {
  const std::string t = lower(s);
  if (t == "horizontal" || t == "h") return WellType::horizontal;
  if (t == "vertical" || t == "v") return WellType::vertical;
  return WellType::other;
}

}  // namespace

std::vector<WellRecord> read_wells(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open well file '" + path.string() + "'");
  return read_wells(in);
}

std::vector<WellRecord> read_wells(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("well file is empty (header required)");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  const std::vector<std::string> header = csv::split_line(line);
  std::unordered_map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[trim(header[i])] = i;

  std::vector<std::string> missing;
  for (const char* name : kWellColumns) {
    if (!col.contains(name)) missing.emplace_back(name);
  }
  if (!missing.empty()) {
    std::string msg = "well file is missing columns:";
    for (const auto& m : missing) msg += " " + m;
    throw SchemaError(msg);
  }

  std::vector<WellRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || trim(line) == "\r") continue;
    const std::vector<std::string> f = csv::split_line(line);
    if (f.size() != header.size()) {
      throw RowError("expected " + std::to_string(header.size()) + " fields, got " +
                         std::to_string(f.size()),
                     line_no);
    }
    auto cell = [&](const char* name) { return trim(f[col.at(name)]); };
    auto number = [&](const char* name) {
      const std::string text = cell(name);
      const auto v = csv::parse_double(text);
      if (!v) {
        throw RowError("column '" + std::string(name) + "': cannot parse '" + text + "'",
                       line_no);
      }
      return *v;
    };

    const auto date = parse_date(cell("date"));
    if (!date) {
      throw RowError("column 'date': expected YYYY-MM-DD, got '" + cell("date") + "'",
                     line_no);
    }

    const bool has_lat = !cell("lat").empty();
    const bool has_lon = !cell("lon").empty();
    const bool has_loc = !cell("locator").empty();
    if (has_lat != has_lon) {
      throw SchemaError("line " + std::to_string(line_no) +
                        ": lat and lon must be given together");
    }
    if (has_lat == has_loc) {
      throw SchemaError("line " + std::to_string(line_no) +
                        ": exactly one of lat/lon or locator must be populated");
    }

    std::optional<grid::Locator6> loc;
    try {
      if (has_loc) {
        loc = grid::Locator6::parse(cell("locator"));
      } else {
        loc = grid::encode_locator(number("lat"), number("lon"));
      }
    } catch (const RowError&) {
      throw;
    } catch (const Error& e) {
      throw RowError(e.what(), line_no);
    }

    const std::string type_text = cell("well_type");
    if (type_text.empty()) throw RowError("column 'well_type' is empty", line_no);

    out.push_back(WellRecord{cell("well_id"), *date, *loc, number("oil_bbl"),
                             number("water_gal"), number("sand_lb"),
                             number("lateral_ft"), parse_well_type(type_text)});
  }
  return out;
}

std::string to_string(WellType t) {
  switch (t) {
    case WellType::horizontal: return "horizontal";
    case WellType::vertical: return "vertical";
    case WellType::other: return "other";
  }
  return "other";
}

void write_wells(const std::vector<WellRecord>& records, std::ostream& out) {
  out << csv::join({kWellColumns.begin(), kWellColumns.end()}) << '\n';
  char date[16];
  for (const auto& r : records) {
    std::snprintf(date, sizeof(date), "%04d-%02u-%02u", static_cast<int>(r.date.year()),
                  static_cast<unsigned>(r.date.month()), static_cast<unsigned>(r.date.day()));
    out << csv::join({r.well_id, date, "", "", r.locator.str(), csv::format_double(r.oil),
                      csv::format_double(r.water), csv::format_double(r.sand),
                      csv::format_double(r.lateral), to_string(r.well_type)})
        << '\n';
  }
}

void write_wells(const std::vector<WellRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write well file '" + path.string() + "'");
  write_wells(records, out);
}

// ---------------------------------------------------------------------------
// Filtering, imputation, transforms

FilterResult filter_wells(std::vector<WellRecord> records) {
  FilterResult res;
  res.kept.reserve(records.size());
  for (auto& r : records) {
    if (r.well_type != WellType::horizontal) {
      ++res.rejected.not_horizontal;
    } else if (!(r.oil >= 0.0)) {
      ++res.rejected.negative_oil;
    } else if (!(r.water >= 0.0)) {
      ++res.rejected.negative_water;
    } else if (!(r.sand >= 0.0)) {
      ++res.rejected.negative_sand;
    } else if (!(r.lateral > 0.0)) {
      ++res.rejected.nonpositive_lateral;
    } else {
      res.kept.push_back(std::move(r));
    }
  }
  return res;
}

std::string to_string(Variable v) {
  switch (v) {
    case Variable::oil:
      return "oil";
    case Variable::water:
      return "water";
    case Variable::sand:
      return "sand";
    case Variable::lateral:
      return "lateral";
  }
  return "?";
}

double& value_of(WellRecord& r, Variable v) {
  switch (v) {
    case Variable::oil:
      return r.oil;
    case Variable::water:
      return r.water;
    case Variable::sand:
      return r.sand;
    case Variable::lateral:
      return r.lateral;
  }
  return r.oil;
}

double value_of(const WellRecord& r, Variable v) {
  return value_of(const_cast<WellRecord&>(r), v);
}

ImputationResult impute_zeros(std::vector<WellRecord> records,
                              ImputationGrouping grouping) {
  auto key = [grouping](const WellRecord& r) {
    return grouping == ImputationGrouping::prefix4 ? grid::prefix4(r.locator).str()
                                                   : r.locator.str();
  };

  ImputationResult res;
  for (Variable var : kAllVariables) {
    std::map<std::string, std::pair<double, std::size_t>> donors;
    double global_sum = 0.0;
    std::size_t global_n = 0;
    bool any_zero = false;
    for (const auto& r : records) {
      const double v = value_of(r, var);
      if (v > 0.0) {
        auto& d = donors[key(r)];
        d.first += v;
        ++d.second;
        global_sum += v;
        ++global_n;
      } else if (v == 0.0) {
        any_zero = true;
      }
    }
    if (!any_zero) continue;
    if (global_n == 0) {
      throw PipelineError("cannot impute zeros of '" + to_string(var) +
                          "': no positive values in the data");
    }
    const double global_mean = global_sum / static_cast<double>(global_n);
    for (auto& r : records) {
      double& v = value_of(r, var);
      if (v != 0.0) continue;
      const auto it = donors.find(key(r));
      v = it != donors.end() ? it->second.first / static_cast<double>(it->second.second)
                             : global_mean;
      ++res.imputed[static_cast<std::size_t>(var)];
    }
  }
  res.records = std::move(records);
  return res;
}

std::vector<WellRecord> log_transform(std::vector<WellRecord> records) {
  for (auto& r : records) {
    for (Variable var : kAllVariables) {
      double& v = value_of(r, var);
      if (!(v > 0.0)) {
        std::ostringstream msg;
        msg << "log transform of non-positive " << to_string(var) << " value " << v
            << " (well '" << r.well_id << "')";
        throw PipelineError(msg.str());
      }
      v = std::log(v);
    }
  }
  return records;
}

Intensities intensities(double water, double sand, double lateral) {
  if (lateral == 0.0) return {};
  return {(water + sand) / lateral, water / lateral, sand / lateral};
}

Intensities intensities(const WellRecord& r) {
  return intensities(r.water, r.sand, r.lateral);
}

Standardized standardize(std::span<const double> values, int k) {
  if (k != 1 && k != 2) throw DomainError("scale k must be 1 or 2");
  const std::size_t n = values.size();
  if (n < 2) throw PipelineError("standardization needs at least two values");
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : values) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0)) {
    throw PipelineError("cannot standardize a constant variable");
  }
  Standardized out;
  out.standardizer = {mean, sd, k};
  out.z.reserve(n);
  for (double x : values) out.z.push_back(out.standardizer.apply(x));
  return out;
}

std::vector<std::optional<double>> group_averages(std::span<const double> values,
                                                  std::span<const int> index,
                                                  int group_count) {
  if (values.size() != index.size()) {
    throw DimensionError("group_averages: values and index differ in length");
  }
  std::vector<double> sum(group_count, 0.0);
  std::vector<std::size_t> count(group_count, 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const int g = index[i];
    if (g < 0 || g >= group_count) {
      throw DimensionError("group index " + std::to_string(g) + " out of range");
    }
    sum[g] += values[i];
    ++count[g];
  }
  std::vector<std::optional<double>> out(group_count);
  for (int g = 0; g < group_count; ++g) {
    if (count[g] > 0) out[g] = sum[g] / static_cast<double>(count[g]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Design

double PreparedDataset::to_original_outcome(double z) const {
  const double v = standardizers.at("y").invert(z);
  return policy.log_transform ? std::exp(v) : v;
}

std::string time_label(const std::chrono::year_month_day& date,
                       TimeGranularity granularity) {
  char buf[16];
  const int y = static_cast<int>(date.year());
  if (granularity == TimeGranularity::year) {
    std::snprintf(buf, sizeof(buf), "%04d", y);
  } else {
    std::snprintf(buf, sizeof(buf), "%04d-%02u", y,
                  static_cast<unsigned>(date.month()));
  }
  return buf;
}

namespace {

int time_key(const std::chrono::year_month_day& date, TimeGranularity g) {
  const int y = static_cast<int>(date.year());
  return g == TimeGranularity::year ? y * 100
                                    : y * 100 + static_cast<int>(static_cast<unsigned>(date.month()));
}

std::vector<double> averages_or_throw(std::span<const double> values,
                                      std::span<const int> index, int count) {
  std::vector<double> out;
  out.reserve(count);
  for (const auto& g : group_averages(values, index, count)) {
    // dense indices guarantee membership
    out.push_back(g.value());
  }
  return out;
}

}  // namespace

PreparedDataset build_design(std::vector<WellRecord> records,
                             const PipelinePolicy& policy, ModelKind kind) {
  if (records.size() < 2) {
    throw PipelineError("at least two wells are required, got " +
                        std::to_string(records.size()));
  }

  auto sort_key = [](const WellRecord& r) {
    return std::make_tuple(std::cref(r.locator), r.date, std::cref(r.well_id), r.oil,
                           r.water, r.sand, r.lateral,
                           static_cast<int>(r.well_type));
  };
  std::sort(records.begin(), records.end(),
            [&](const WellRecord& a, const WellRecord& b) { return sort_key(a) < sort_key(b); });

  PreparedDataset d;
  d.kind = kind;
  d.policy = policy;

  std::map<grid::Locator6, int> block_index;
  std::map<int, std::string> times;
  for (const auto& r : records) {
    block_index.emplace(r.locator, 0);
    times.emplace(time_key(r.date, policy.time_granularity),
                  time_label(r.date, policy.time_granularity));
  }
  int b = 0;
  for (auto& [code, idx] : block_index) {
    idx = b++;
    d.block_codes.push_back(code);
  }
  std::map<int, int> time_index;
  int t = 0;
  for (const auto& [key, label] : times) {
    time_index[key] = t++;
    d.time_labels.push_back(label);
  }
  if (has_time_effects(kind) && d.times() < 2) {
    throw PipelineError("model kind " + to_string(kind) +
                        " needs at least two time periods, data span one");
  }

  const std::size_t n = records.size();
  std::vector<double> oil(n), lat(n);
  d.block_of.resize(n);
  d.time_of.resize(n);
  d.n_per_block.assign(d.blocks(), 0);
  d.n_per_time.assign(d.times(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = records[i];
    d.well_ids.push_back(r.well_id);
    oil[i] = r.oil;
    lat[i] = r.lateral;
    d.block_of[i] = block_index.at(r.locator);
    d.time_of[i] = time_index.at(time_key(r.date, policy.time_granularity));
    ++d.n_per_block[d.block_of[i]];
    ++d.n_per_time[d.time_of[i]];
    d.y_original.push_back(policy.log_transform ? std::exp(r.oil) : r.oil);
  }

  const int k = policy.scale_k;
  auto keep = [&d](const char* name, Standardized s) {
    d.standardizers[name] = s.standardizer;
    return std::move(s.z);
  };
  d.y = keep("y", standardize(oil, k));
  d.l = keep("l", standardize(lat, k));

  switch (kind) {
    case ModelKind::spatial: {
      std::vector<double> water(n);
      for (std::size_t i = 0; i < n; ++i) water[i] = records[i].water;
      d.w = keep("w", standardize(water, k));
      d.w_bar_b = averages_or_throw(d.w, d.block_of, d.blocks());
      break;
    }
    case ModelKind::spatio_temporal: {
      std::vector<double> e(n);
      for (std::size_t i = 0; i < n; ++i) e[i] = intensities(records[i]).e;
      d.e = keep("e", standardize(e, k));
      d.e_bar_b = averages_or_throw(d.e, d.block_of, d.blocks());
      break;
    }
    case ModelKind::expanded: {
      std::vector<double> ew(n), es(n);
      for (std::size_t i = 0; i < n; ++i) {
        const Intensities in = intensities(records[i]);
        ew[i] = in.ew;
        es[i] = in.es;
      }
      d.ew = keep("ew", standardize(ew, k));
      d.es = keep("es", standardize(es, k));
      d.ew_bar_b = averages_or_throw(d.ew, d.block_of, d.blocks());
      d.es_bar_b = averages_or_throw(d.es, d.block_of, d.blocks());
      d.ew_bar_t = averages_or_throw(d.ew, d.time_of, d.times());
      d.es_bar_t = averages_or_throw(d.es, d.time_of, d.times());
      break;
    }
  }
  return d;
}

PipelineResult run_pipeline(std::vector<WellRecord> records,
                            const PipelinePolicy& policy, ModelKind kind) {
  PipelineResult res;
  res.input_count = records.size();
  FilterResult filtered = filter_wells(std::move(records));
  res.rejected = filtered.rejected;
  std::vector<WellRecord> work = std::move(filtered.kept);
  if (policy.impute_zeros) {
    ImputationResult imp = impute_zeros(std::move(work), policy.imputation_grouping);
    res.imputed = imp.imputed;
    work = std::move(imp.records);
  }
  if (policy.log_transform) work = log_transform(std::move(work));
  res.dataset = build_design(std::move(work), policy, kind);
  return res;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

nlohmann::json policy_json(const PipelinePolicy& p) {
  return {{"time_granularity",
           p.time_granularity == TimeGranularity::year ? "year" : "year_month"},
          {"scale_k", p.scale_k},
          {"log_transform", p.log_transform},
          {"impute_zeros", p.impute_zeros},
          {"imputation_grouping",
           p.imputation_grouping == ImputationGrouping::prefix4 ? "prefix4" : "full6"}};
}

PipelinePolicy policy_from_json(const nlohmann::json& j) {
  PipelinePolicy p;
  p.time_granularity = j.at("time_granularity").get<std::string>() == "year"
                           ? TimeGranularity::year
                           : TimeGranularity::year_month;
  p.scale_k = j.at("scale_k").get<int>();
  p.log_transform = j.at("log_transform").get<bool>();
  p.impute_zeros = j.at("impute_zeros").get<bool>();
  p.imputation_grouping = j.at("imputation_grouping").get<std::string>() == "prefix4"
                              ? ImputationGrouping::prefix4
                              : ImputationGrouping::full6;
  return p;
}

}  // namespace

nlohmann::json to_json(const PreparedDataset& d) {
  nlohmann::json j;
  j["format"] = "wellcap-dataset/1";
  j["kind"] = to_string(d.kind);
  j["policy"] = policy_json(d.policy);
  j["N"] = d.size();
  j["B"] = d.blocks();
  j["T"] = d.times();
  j["well_ids"] = d.well_ids;
  j["y"] = d.y;
  j["l"] = d.l;
  j["e"] = d.e;
  j["ew"] = d.ew;
  j["es"] = d.es;
  j["w"] = d.w;
  j["y_original"] = d.y_original;
  j["block_of"] = d.block_of;
  j["time_of"] = d.time_of;
  j["n_per_block"] = d.n_per_block;
  j["n_per_time"] = d.n_per_time;
  j["w_bar_b"] = d.w_bar_b;
  j["e_bar_b"] = d.e_bar_b;
  j["ew_bar_b"] = d.ew_bar_b;
  j["es_bar_b"] = d.es_bar_b;
  j["ew_bar_t"] = d.ew_bar_t;
  j["es_bar_t"] = d.es_bar_t;
  nlohmann::json st = nlohmann::json::object();
  for (const auto& [name, s] : d.standardizers) {
    st[name] = {{"mean", s.mean}, {"sd", s.sd}, {"k", s.k}};
  }
  j["standardizers"] = st;
  std::vector<std::string> codes;
  for (const auto& c : d.block_codes) codes.push_back(c.str());
  j["block_codes"] = codes;
  j["time_labels"] = d.time_labels;
  return j;
}

PreparedDataset dataset_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "wellcap-dataset/1") {
    throw SchemaError("not a wellcap dataset file (format tag missing or unknown)");
  }
  PreparedDataset d;
  d.kind = parse_model_kind(j.at("kind").get<std::string>());
  d.policy = policy_from_json(j.at("policy"));
  j.at("well_ids").get_to(d.well_ids);
  j.at("y").get_to(d.y);
  j.at("l").get_to(d.l);
  j.at("e").get_to(d.e);
  j.at("ew").get_to(d.ew);
  j.at("es").get_to(d.es);
  j.at("w").get_to(d.w);
  j.at("y_original").get_to(d.y_original);
  j.at("block_of").get_to(d.block_of);
  j.at("time_of").get_to(d.time_of);
  j.at("n_per_block").get_to(d.n_per_block);
  j.at("n_per_time").get_to(d.n_per_time);
  j.at("w_bar_b").get_to(d.w_bar_b);
  j.at("e_bar_b").get_to(d.e_bar_b);
  j.at("ew_bar_b").get_to(d.ew_bar_b);
  j.at("es_bar_b").get_to(d.es_bar_b);
  j.at("ew_bar_t").get_to(d.ew_bar_t);
  j.at("es_bar_t").get_to(d.es_bar_t);
  for (const auto& [name, s] : j.at("standardizers").items()) {
    d.standardizers[name] = {s.at("mean").get<double>(), s.at("sd").get<double>(),
                             s.at("k").get<int>()};
  }
  for (const auto& c : j.at("block_codes")) {
    d.block_codes.push_back(grid::Locator6::parse(c.get<std::string>()));
  }
  j.at("time_labels").get_to(d.time_labels);

  const std::size_t n = d.y.size();
  if (d.l.size() != n || d.block_of.size() != n || d.time_of.size() != n ||
      d.y_original.size() != n) {
    throw DimensionError("dataset file has inconsistent vector lengths");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (d.block_of[i] < 0 || d.block_of[i] >= d.blocks() || d.time_of[i] < 0 ||
        d.time_of[i] >= d.times()) {
      throw DimensionError("dataset file has an out-of-range group index");
    }
  }
  return d;
}

void write_dataset(const PreparedDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << to_json(data).dump(1) << '\n';
}

PreparedDataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("dataset '" + path.string() + "': " + e.what());
  }
  return dataset_from_json(j);
}

}  // namespace wellcap::data
