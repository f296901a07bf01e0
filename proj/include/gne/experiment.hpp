#pragma once

#include "gne/async_engine.hpp"
#include "gne/cournot.hpp"
#include "gne/serialization.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace gne {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int config = 2;
inline constexpr int assumption = 3;
inline constexpr int not_converged = 4;
}  // namespace exit_code

/// Which convergence certificate a run must pass before it starts.
enum class Gate {
  theorem,  // step sizes satisfy the synchronous/asynchronous convergence theorems
  phi_pd,   // Phi > 0 and eta in (0, 1), the practice of the Cournot benchmark
};

struct ExperimentConfig {
  // game
  bool cournot = true;
  CournotConfig cournot_config;
  bool cournot_seed_pinned = false;  // otherwise the run seed picks the instance
  std::filesystem::path game_path;
  std::filesystem::path graph_path;  // empty: the game file carries "graph"

  std::vector<std::string> variants{"sync", "e_adagnes", "ad_geno"};

  // step sizes
  std::optional<SolverParams> params;  // absent: sampled per seed
  std::optional<StepPolicy> policy;    // absent: practical under phi_pd, certified under theorem
  std::optional<double> eta;           // absent: 0.35 under phi_pd, 0.9 x bound under theorem
  double theta_margin = 1.05;
  double c = 0.99;                     // constant of the asynchronous step bound
  std::optional<Gate> gate;            // absent: phi_pd for cournot, theorem otherwise

  json schedule = json::object();      // AsyncSchedule fields; seed defaults to the run seed
  StopRule stop;
  int trace_stride = 10;
  bool reference = true;               // compute x_ref with a tight sync run
  double reference_tol = 1e-12;
  long reference_max_iters = 1'000'000;
  bool event_log = true;

  long compare_steps = 10'000;
  std::uint64_t compare_seed_offset = 0;  // nonzero desynchronizes the AD-GENO schedule

  std::vector<std::uint64_t> seeds{42};
  std::filesystem::path output_dir;
};

/// Parses and validates; throws ConfigError. Relative paths resolve against
/// base_dir.
[[nodiscard]] ExperimentConfig config_from_json(const json& j, const std::filesystem::path& base_dir = {});

/// Default output root: $GNE_OUTPUT_ROOT, else ./gne_out.
[[nodiscard]] std::filesystem::path default_output_root();

/// Game, graph and steps for one seed, before any run.
struct PreparedRun {
  std::uint64_t seed = 0;
  std::optional<CournotInstance> instance;  // set for generated games
  std::optional<GameModel> game_storage;
  std::optional<CommGraph> graph_storage;
  MonotonicityConstants constants;
  SolverParams params;
  AsyncSchedule schedule;
  Gate gate = Gate::theorem;
  ValidationReport validation;
  std::optional<AsyncEtaBound> eta_bound;  // when theta admits one
  std::vector<std::string> gate_failures;

  [[nodiscard]] const GameModel& game() const { return instance ? instance->game : *game_storage; }
  [[nodiscard]] const CommGraph& graph() const { return instance ? instance->graph : *graph_storage; }
};

/// Throws ConfigError or AssumptionViolation (gate failure included).
[[nodiscard]] PreparedRun prepare_run(const ExperimentConfig& config, std::uint64_t seed);

struct Outcome {
  int code = exit_code::ok;
  json report;
  std::string message;
};

/// Writes <out>/seed_<s>/<variant>.csv, <variant>_events.jsonl (async) and
/// <out>/report.json. Exit 0 iff every run met its stop rule.
[[nodiscard]] Outcome run_experiment(const ExperimentConfig& config);

/// E-ADAGNES / AD-GENO equivalence per seed; exit 0 iff every seed passes.
[[nodiscard]] Outcome compare_experiment(const ExperimentConfig& config);

/// Gate report per seed without running; exit 3 if any seed fails its gate.
[[nodiscard]] Outcome validate_experiment(const ExperimentConfig& config);

/// Brute-force solution of the configured game (first seed).
[[nodiscard]] Outcome oracle_experiment(const ExperimentConfig& config);

}  // namespace gne
