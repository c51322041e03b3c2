#pragma once

#include <chrono>
#include <random>
#include <string>
#include <vector>

#include "wellcap/dataset.hpp"
#include "wellcap/grid.hpp"

namespace fixture {

inline wellcap::data::WellRecord well(std::string id, int year, std::string loc, double oil,
                                      double water, double sand, double lateral,
                                      wellcap::data::WellType type =
                                          wellcap::data::WellType::horizontal) {
  using namespace std::chrono;
  return {std::move(id),
          year_month_day{std::chrono::year{year}, month{6}, day{15}},
          wellcap::grid::Locator6::parse(loc),
          oil,
          water,
          sand,
          lateral,
          type};
}

// Random wells over B blocks of DN87 and T years from 2015; every block and
// year gets at least one well. Values are positive.
inline std::vector<wellcap::data::WellRecord> random_wells(int B, int T, int N,
                                                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick_b(0, B - 1), pick_t(0, T - 1);
  std::lognormal_distribution<double> oil(5.5, 0.6), water(16.5, 0.5), sand(16.0, 0.5),
      lateral(9.2, 0.3);
  std::vector<wellcap::data::WellRecord> out;
  for (int i = 0; i < N; ++i) {
    const int b = i < std::max(B, T) ? i % B : pick_b(rng);
    const int t = i < std::max(B, T) ? i % T : pick_t(rng);
    std::string loc = "DN87";
    loc += static_cast<char>('a' + b % 24);
    loc += static_cast<char>('a' + b / 24);
    out.push_back(well("W" + std::to_string(i), 2015 + t, loc, oil(rng), water(rng), sand(rng),
                       lateral(rng)));
  }
  return out;
}

inline wellcap::data::PreparedDataset random_dataset(wellcap::ModelKind kind, int B, int T,
                                                     int N, std::uint64_t seed) {
  return wellcap::data::run_pipeline(random_wells(B, T, N, seed),
                                     wellcap::data::PipelinePolicy::defaults_for(kind), kind)
      .dataset;
}

inline std::vector<double> uniform_point(std::size_t dim, std::mt19937_64& rng, double r = 2.0) {
  std::uniform_real_distribution<double> u(-r, r);
  std::vector<double> p(dim);
  for (double& v : p) v = u(rng);
  return p;
}

}  // namespace fixture
