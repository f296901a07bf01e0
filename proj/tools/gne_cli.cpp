// Command-line driver: run | compare | oracle | validate.
#include "gne/errors.hpp"
#include "gne/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

struct Flags {
  std::string config;
  std::vector<std::uint64_t> seeds;
  std::string out;
  std::string variant;
  std::string schedule;
  std::string game;
  bool desync = false;
};

gne::ExperimentConfig load_config(const Flags& f) {
  gne::json j = gne::json::object();
  std::filesystem::path base;
  if (!f.config.empty()) {
    j = gne::read_json_file(f.config);
    base = std::filesystem::path(f.config).parent_path();
  }
  if (!f.game.empty()) {
    if (f.game == "cournot") j["game"] = {{"source", "cournot"}};
    else j["game"] = {{"source", "json"}, {"path", std::filesystem::absolute(f.game).string()}};
  }
  if (!f.variant.empty()) j["variant"] = f.variant;
  if (!f.schedule.empty()) {
    if (!j.contains("schedule") || !j["schedule"].is_object()) j["schedule"] = gne::json::object();
    if (f.schedule == "fair") {
      j["schedule"]["activation"] = "random";
      if (!j["schedule"].contains("fairness_window")) j["schedule"]["fairness_window"] = 0;
    } else {
      j["schedule"]["activation"] = f.schedule == "uniform" ? "random" : f.schedule;
    }
  }
  gne::ExperimentConfig cfg = gne::config_from_json(j, base);
  if (!f.seeds.empty()) cfg.seeds = f.seeds;
  if (!f.out.empty()) cfg.output_dir = f.out;
  if (f.desync && cfg.compare_seed_offset == 0) cfg.compare_seed_offset = 1;
  if (!f.schedule.empty() && f.schedule == "fair" && cfg.schedule.value("fairness_window", 0) == 0) {
    // 20 N steps per window, N taken from the configured game.
    const auto prep = gne::prepare_run(cfg, cfg.seeds.front());
    cfg.schedule["fairness_window"] = 20 * prep.game().num_players();
  }
  return cfg;
}

int report(const gne::Outcome& o) {
  if (o.code == gne::exit_code::ok || o.code == gne::exit_code::not_converged) std::cout << o.message;
  else std::cerr << o.message << (o.message.empty() || o.message.back() == '\n' ? "" : "\n");
  if (!o.report.empty()) std::cout << o.report.dump(2) << '\n';
  return o.code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed generalized Nash equilibrium seeking: synchronous and asynchronous solvers"};
  app.require_subcommand(1);
  Flags f;

  auto add_common = [&f](CLI::App* sub) {
    sub->add_option("--config", f.config, "experiment config (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--seed", f.seeds, "run seed(s); overrides the config");
    sub->add_option("--game", f.game, "'cournot' or a game JSON file");
  };

  auto* run = app.add_subcommand("run", "run solver variants and write traces plus report.json");
  add_common(run);
  run->add_option("--out", f.out, "output directory (default $GNE_OUTPUT_ROOT or ./gne_out)");
  run->add_option("--variant", f.variant, "sync | e_adagnes | ad_geno | all")
      ->check(CLI::IsMember({"sync", "e_adagnes", "ad_geno", "all"}));
  run->add_option("--schedule", f.schedule, "activation: uniform | round_robin | fair")
      ->check(CLI::IsMember({"uniform", "random", "round_robin", "fair"}));

  auto* compare = app.add_subcommand("compare", "check that E-ADAGNES and AD-GENO produce the same iterates");
  add_common(compare);
  compare->add_option("--out", f.out, "directory for compare_report.json");
  compare->add_option("--schedule", f.schedule, "activation: uniform | round_robin | fair")
      ->check(CLI::IsMember({"uniform", "random", "round_robin", "fair"}));
  compare->add_flag("--desync", f.desync, "give AD-GENO a different schedule seed (negative control)");

  auto* oracle = app.add_subcommand("oracle", "brute-force v-GNE of a tiny affine game");
  add_common(oracle);

  auto* validate = app.add_subcommand("validate", "check step sizes against the configured gate");
  add_common(validate);
  validate->add_option("--variant", f.variant, "sync | e_adagnes | ad_geno | all")
      ->check(CLI::IsMember({"sync", "e_adagnes", "ad_geno", "all"}));
  validate->add_option("--schedule", f.schedule, "activation: uniform | round_robin | fair")
      ->check(CLI::IsMember({"uniform", "random", "round_robin", "fair"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : gne::exit_code::config;
  }

  gne::ExperimentConfig cfg;
  try {
    cfg = load_config(f);
  } catch (const gne::AssumptionViolation& e) {
    std::cerr << "assumption violated: " << e.what() << '\n';
    return gne::exit_code::assumption;
  } catch (const gne::Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return gne::exit_code::config;
  }

  try {
    if (*run) return report(gne::run_experiment(cfg));
    if (*compare) return report(gne::compare_experiment(cfg));
    if (*oracle) return report(gne::oracle_experiment(cfg));
    return report(gne::validate_experiment(cfg));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
