#include <filesystem>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "wellcap/cli/commands.hpp"
#include "wellcap/errors.hpp"

namespace wellcap::cli {

namespace {

bool given(CLI::App* sub, const std::string& name) {
  const CLI::Option* opt = sub->get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Moves "--config FILE" / "--config=FILE" out of `args` and splices the file's
// settings in right after the subcommand, so explicit flags still win. Keys
// that belong to other subcommands are skipped, so one file can serve all of
// them; keys no subcommand knows are kept and rejected by the parser.
std::vector<std::string> expand_config(std::vector<std::string> args, const CLI::App& app) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    std::size_t erase = 0;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      erase = 2;
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      erase = 1;
    } else {
      continue;
    }
    args.erase(args.begin() + i, args.begin() + i + erase);
    std::size_t at = 0;
    while (at < args.size() && args[at].rfind('-', 0) == 0) ++at;
    const CLI::App* active = at < args.size() ? app.get_subcommand_no_throw(args[at]) : nullptr;
    if (at < args.size()) ++at;

    std::vector<std::string> extra;
    for (const auto& a : config_file_arguments(path)) {
      const std::string name = a.substr(0, a.find('='));
      auto known = [&](const CLI::App* sub) {
        return sub != nullptr && sub->get_option_no_throw(name) != nullptr;
      };
      bool elsewhere = false;
      for (const CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; })) {
        elsewhere = elsewhere || known(sub);
      }
      if (known(active) || !elsewhere) extra.push_back(a);
    }
    args.insert(args.begin() + at, extra.begin(), extra.end());
    return args;
  }
  return args;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Small-area production capacity estimation for horizontal wells", "wellcap"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_version_flag("--version", "wellcap 0.1.0");

  RunConfig cfg;
  SimulationSpec spec;
  std::string kind_text = "B";
  std::string granularity = "year", grouping = "prefix4", weighting = "equal";
  int scale_k = 2;
  bool log_transform = false, impute_zeros = false, no_strict = false, serial = false;
  std::vector<std::string> aggregate;
  model::PriorConfig prior;
  std::string config_unused;

  auto common = [&](CLI::App* sub) {
    sub->add_option("-o,--output-dir", cfg.output_dir, "Output directory")
        ->envname("WELLCAP_OUTPUT_DIR");
    sub->add_option("--config", config_unused, "key=value settings file (flags override it)");
    sub->add_option("--kind", kind_text, "Model kind: A (spatial), B (spatio-temporal), C (expanded)");
  };
  auto prior_options = [&](CLI::App* sub) {
    sub->add_option("--prior-scale-loc", prior.scale_loc, "Sd of block and scalar coefficients");
    sub->add_option("--prior-scale-walk", prior.scale_walk, "Sd of random-walk increments");
    sub->add_option("--prior-scale-sigma", prior.scale_sigma, "Scale of the normal+ sd priors");
    sub->add_option("--prior-sigma-y-location", prior.sigma_y_location,
                    "Location of the normal+ prior on sigma_Y");
  };

  CLI::App* pre = app.add_subcommand("preprocess", "Filter, impute and standardize a well CSV");
  common(pre);
  pre->add_option("-i,--input", cfg.input, "Well CSV")->required();
  pre->add_option("--time-granularity", granularity, "year or year_month")
      ->check(CLI::IsMember({"year", "year_month"}));
  pre->add_option("--scale-k", scale_k, "Standardize by k standard deviations (1 or 2)");
  pre->add_option("--log-transform", log_transform, "Log oil, water, sand and lateral");
  pre->add_option("--impute-zeros", impute_zeros, "Replace zeros by block means");
  pre->add_option("--imputation-grouping", grouping, "prefix4 or full6")
      ->check(CLI::IsMember({"prefix4", "full6"}));

  CLI::App* sim = app.add_subcommand("simulate", "Generate synthetic wells from known parameters");
  common(sim);
  prior_options(sim);
  sim->add_option("--blocks", spec.blocks, "Number of blocks");
  sim->add_option("--times", spec.times, "Number of yearly periods");
  sim->add_option("--wells", spec.wells, "Number of wells");
  sim->add_option("--seed", spec.seed, "Random seed");
  sim->add_option("--first-year", spec.first_year, "Year of the first period");
  sim->add_option("--cell-concentration", spec.cell_concentration,
                  "Dirichlet concentration of wells over cells");
  sim->add_option("--zero-fraction", spec.zero_fraction, "Share of water/sand values set to 0");
  sim->add_option("--lateral-log-mean", spec.lateral_log_mean);
  sim->add_option("--lateral-log-sd", spec.lateral_log_sd);
  sim->add_option("--water-log-mean", spec.water_log_mean);
  sim->add_option("--water-log-sd", spec.water_log_sd);
  sim->add_option("--sand-log-mean", spec.sand_log_mean);
  sim->add_option("--sand-log-sd", spec.sand_log_sd);

  CLI::App* fit = app.add_subcommand("fit", "Sample the posterior of a prepared dataset");
  common(fit);
  prior_options(fit);
  fit->add_option("--dataset", cfg.dataset, "Prepared dataset (default <output-dir>/dataset.json)");
  fit->add_option("--chains", cfg.sampler.chains);
  fit->add_option("--warmup", cfg.sampler.warmup);
  fit->add_option("--draws", cfg.sampler.draws_per_chain, "Post-warm-up draws per chain");
  fit->add_option("--target-accept", cfg.sampler.target_accept);
  fit->add_option("--max-tree-depth", cfg.sampler.max_tree_depth);
  fit->add_option("--seed", cfg.sampler.seed);
  fit->add_option("--step-size-init", cfg.sampler.step_size_init);
  fit->add_option("--init-radius", cfg.sampler.init_radius);
  fit->add_flag("--serial", serial, "Run chains one after another");
  fit->add_flag("--no-strict", no_strict, "Exit 0 even when diagnostics fail");

  CLI::App* rep = app.add_subcommand("report", "Tables, checks and trajectories from draws");
  common(rep);
  rep->add_option("--dataset", cfg.dataset, "Prepared dataset (default <output-dir>/dataset.json)");
  rep->add_option("--draws", cfg.draws, "Draws CSV (default <output-dir>/draws.csv)");
  rep->add_flag("--clamp-negative", cfg.clamp_negative, "Set negative estimates to 0");
  rep->add_option("--aggregate", aggregate, "Comma-separated block set; repeatable")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  rep->add_option("--aggregate-weighting", weighting, "equal or counts")
      ->check(CLI::IsMember({"equal", "counts"}));
  rep->add_option("--bins", cfg.histogram_bins, "Histogram bins");
  rep->add_option("--decimals", cfg.table_decimals, "Decimals in table CSVs (-1: shortest)");

  try {
    std::vector<std::string> args = expand_config(raw_args, app);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kSuccess : kUsageError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    const bool kind_given = given(sub, "--kind");
    if (kind_given) cfg.kind = parse_model_kind(kind_text);
    if ((sub == fit || sub == rep) && !kind_given) {
      const auto path = cfg.dataset_path();
      if (!std::filesystem::is_regular_file(path)) {
        throw Error("dataset '" + path.string() + "' does not exist");
      }
      cfg.kind = data::read_dataset(path).kind;
    }

    cfg.policy = data::PipelinePolicy::defaults_for(cfg.kind);
    if (given(sub, "--time-granularity")) {
      cfg.policy.time_granularity =
          granularity == "year" ? data::TimeGranularity::year : data::TimeGranularity::year_month;
    }
    if (given(sub, "--scale-k")) cfg.policy.scale_k = scale_k;
    if (given(sub, "--log-transform")) cfg.policy.log_transform = log_transform;
    if (given(sub, "--impute-zeros")) cfg.policy.impute_zeros = impute_zeros;
    if (given(sub, "--imputation-grouping")) {
      cfg.policy.imputation_grouping = grouping == "prefix4" ? data::ImputationGrouping::prefix4
                                                             : data::ImputationGrouping::full6;
    }

    cfg.prior = model::PriorConfig::defaults_for(cfg.kind);
    if (given(sub, "--prior-scale-loc")) cfg.prior.scale_loc = prior.scale_loc;
    if (given(sub, "--prior-scale-walk")) cfg.prior.scale_walk = prior.scale_walk;
    if (given(sub, "--prior-scale-sigma")) cfg.prior.scale_sigma = prior.scale_sigma;
    if (given(sub, "--prior-sigma-y-location")) {
      cfg.prior.sigma_y_location = prior.sigma_y_location;
    }

    cfg.sampler.parallel_chains = !serial;
    cfg.strict = !no_strict;
    for (const auto& set : aggregate) cfg.aggregations.push_back(split_commas(set));
    cfg.aggregation_weighting =
        weighting == "equal" ? report::Weighting::equal : report::Weighting::well_counts;

    if (sub == pre) return cmd_preprocess(cfg, out);
    if (sub == sim) {
      spec.kind = cfg.kind;
      spec.prior = cfg.prior;
      return cmd_simulate(spec, cfg, out);
    }
    if (sub == fit) return cmd_fit(cfg, out);
    return cmd_report(cfg, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed input: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kUsageError;
}

}  // namespace wellcap::cli
