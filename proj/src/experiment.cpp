#include "gne/experiment.hpp"

#include "gne/errors.hpp"
#include "gne/oracle.hpp"
#include "gne/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

namespace gne {

namespace {

constexpr std::uint64_t kParamsTag = 0x5354455053ULL;

const std::set<std::string> kTopLevelKeys{
    "game",    "variant", "params",    "step_policy", "eta",     "theta_margin", "c",          "gate",
    "schedule", "stop",   "trace_stride", "reference", "event_log", "compare",   "seeds",      "output_dir"};

template <class T>
T as(const json& j, const std::string& what) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("field '" + what + "' has the wrong type");
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

Gate gate_from_string(const std::string& s) {
  if (s == "theorem") return Gate::theorem;
  if (s == "phi_pd") return Gate::phi_pd;
  throw ConfigError("unknown gate '" + s + "' (theorem | phi_pd)");
}

std::string to_string(Gate g) { return g == Gate::theorem ? "theorem" : "phi_pd"; }

std::vector<std::string> variants_from_json(const json& j) {
  std::vector<std::string> names;
  auto add = [&](const std::string& v) {
    if (v == "all") {
      names = {"sync", "e_adagnes", "ad_geno"};
    } else if (v == "sync" || v == "e_adagnes" || v == "ad_geno") {
      if (std::find(names.begin(), names.end(), v) == names.end()) names.push_back(v);
    } else {
      throw ConfigError("unknown variant '" + v + "' (sync | e_adagnes | ad_geno | all)");
    }
  };
  if (j.is_string()) add(j.get<std::string>());
  else if (j.is_array())
    for (const auto& v : j) add(as<std::string>(v, "variant"));
  else
    throw ConfigError("variant must be a string or an array");
  if (names.empty()) throw ConfigError("no variant selected");
  return names;
}

StopRule stop_from_json(const json& j) {
  StopRule s;
  if (!j.is_object()) throw ConfigError("stop must be an object");
  for (const auto& [key, val] : j.items()) {
    if (key == "max_iters") s.max_iters = as<long>(val, "stop.max_iters");
    else if (key == "tol_fixed_point") s.tol_fixed_point = as<double>(val, "stop.tol_fixed_point");
    else if (key == "tol_kkt") s.tol_kkt = as<double>(val, "stop.tol_kkt");
    else if (key == "tol_consensus") s.tol_consensus = as<double>(val, "stop.tol_consensus");
    else if (key == "targets") {
      MetricTargets t;
      t.normalized_distance = val.value("normalized_distance", t.normalized_distance);
      t.disagreement = val.value("disagreement", t.disagreement);
      t.avg_violation = val.value("avg_violation", t.avg_violation);
      s.targets = t;
    } else {
      throw ConfigError("unknown stop field '" + key + "'");
    }
  }
  s.validate();
  return s;
}

bool has_async(const std::vector<std::string>& variants) {
  return std::any_of(variants.begin(), variants.end(), [](const std::string& v) { return v != "sync"; });
}

bool has_sync(const std::vector<std::string>& variants) {
  return std::find(variants.begin(), variants.end(), "sync") != variants.end();
}

std::string timestamp_utc() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json eta_bound_json(const PreparedRun& prep) {
  json j{{"eta_used", prep.params.eta}, {"sync_max", prep.validation.eta_max_sync}};
  if (prep.eta_bound) {
    j["async_stated"] = prep.eta_bound->stated;
    j["async_proof_variant"] = prep.eta_bound->proof_variant;
    j["async_gating"] = prep.eta_bound->gating;
    j["eta_within_async_bound"] = prep.params.eta > 0 && prep.params.eta <= prep.eta_bound->gating;
  } else {
    j["async_stated"] = nullptr;
    j["async_proof_variant"] = nullptr;
    j["async_gating"] = nullptr;
    j["eta_within_async_bound"] = false;
  }
  return j;
}

json seed_header(const PreparedRun& prep) {
  json j{{"seed", prep.seed},
         {"alpha", prep.constants.alpha},
         {"ell", prep.constants.ell},
         {"gate", to_string(prep.gate)},
         {"gate_failures", prep.gate_failures},
         {"params", params_to_json(prep.params)},
         {"validation", validation_to_json(prep.validation)},
         {"eta_bounds", eta_bound_json(prep)},
         {"schedule", schedule_to_json(prep.schedule)}};
  if (prep.instance) j["game_seed"] = prep.instance->seed;
  return j;
}

json final_json(const TraceRecord& r) {
  auto num = [](double v) -> json { return std::isfinite(v) ? json(v) : json(nullptr); };
  return {{"k", r.k},
          {"fp_residual", num(r.fp_residual)},
          {"kkt_residual", num(r.kkt_residual)},
          {"consensus_residual", num(r.consensus_residual)},
          {"max_violation", num(r.max_violation)},
          {"normalized_distance", num(r.normalized_distance)},
          {"disagreement", num(r.disagreement)},
          {"avg_violation", num(r.avg_violation)}};
}

// Per-seed error handling shared by the subcommands.
template <class Fn>
Outcome guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    return {exit_code::config, json::object(), std::string("config error: ") + e.what()};
  } catch (const DimensionError& e) {
    return {exit_code::config, json::object(), std::string("config error: ") + e.what()};
  } catch (const GraphError& e) {
    return {exit_code::config, json::object(), std::string("config error: ") + e.what()};
  } catch (const UnsupportedError& e) {
    return {exit_code::config, json::object(), std::string("unsupported: ") + e.what()};
  } catch (const AssumptionViolation& e) {
    return {exit_code::assumption, json::object(), std::string("assumption violated: ") + e.what()};
  } catch (const GeneratorError& e) {
    return {exit_code::assumption, json::object(), std::string("generator: ") + e.what()};
  } catch (const OracleError& e) {
    return {exit_code::assumption, json::object(), std::string("oracle: ") + e.what()};
  }
}

}  // namespace

ExperimentConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, val] : j.items())
    if (!kTopLevelKeys.count(key)) throw ConfigError("unknown config field '" + key + "'");

  ExperimentConfig c;
  if (j.contains("game")) {
    const json& g = j["game"];
    const std::string source = g.is_string() ? g.get<std::string>() : as<std::string>(g.value("source", json("cournot")), "game.source");
    if (source == "cournot") {
      c.cournot = true;
      if (g.is_object()) {
        if (g.contains("seed")) {
          c.cournot_config.seed = as<std::uint64_t>(g["seed"], "game.seed");
          c.cournot_seed_pinned = true;
        }
        if (g.contains("pattern")) {
          const json& p = g["pattern"];
          if (p.is_string()) {
            const auto name = p.get<std::string>();
            if (name == "reference") c.cournot_config.pattern = reference_market_pattern();
            else if (name != "random") throw ConfigError("game.pattern must be 'random', 'reference' or an array");
          } else {
            c.cournot_config.pattern = as<std::vector<std::vector<int>>>(p, "game.pattern");
          }
        }
        c.cournot_config.companies = g.value("companies", c.cournot_config.companies);
        c.cournot_config.markets = g.value("markets", c.cournot_config.markets);
        c.cournot_config.strategies = g.value("strategies", c.cournot_config.strategies);
      }
      c.cournot_config.validate();
    } else if (source == "json") {
      c.cournot = false;
      if (!g.is_object() || !g.contains("path")) throw ConfigError("game.path is required for a JSON game");
      c.game_path = resolve(base_dir, as<std::string>(g["path"], "game.path"));
      if (g.contains("graph")) c.graph_path = resolve(base_dir, as<std::string>(g["graph"], "game.graph"));
    } else {
      throw ConfigError("game.source must be 'cournot' or 'json'");
    }
  }
  if (j.contains("variant")) c.variants = variants_from_json(j["variant"]);
  if (j.contains("params")) {
    const json& p = j["params"];
    if (p.is_string()) {
      if (p.get<std::string>() != "auto") throw ConfigError("params must be 'auto' or an object");
    } else {
      c.params = params_from_json(p);
    }
  }
  if (j.contains("step_policy")) {
    const auto s = as<std::string>(j["step_policy"], "step_policy");
    if (s == "practical") c.policy = StepPolicy::practical;
    else if (s == "certified") c.policy = StepPolicy::certified;
    else throw ConfigError("step_policy must be 'practical' or 'certified'");
  }
  if (j.contains("eta") && !(j["eta"].is_string() && j["eta"].get<std::string>() == "auto"))
    c.eta = as<double>(j["eta"], "eta");
  if (j.contains("theta_margin")) c.theta_margin = as<double>(j["theta_margin"], "theta_margin");
  if (!(c.theta_margin > 1.0)) throw ConfigError("theta_margin must exceed 1");
  if (j.contains("c")) c.c = as<double>(j["c"], "c");
  if (!(c.c > 0 && c.c < 1)) throw ConfigError("c must lie in (0, 1)");
  if (j.contains("gate")) c.gate = gate_from_string(as<std::string>(j["gate"], "gate"));
  if (j.contains("schedule")) {
    const json& s = j["schedule"];
    if (s.is_string()) {
      const auto name = s.get<std::string>();
      c.schedule = json::object();
      c.schedule["activation"] = name == "uniform" ? "random" : name;
      (void)activation_from_string(c.schedule["activation"].get<std::string>());
    } else if (s.is_object()) {
      c.schedule = s;
    } else {
      throw ConfigError("schedule must be an object or an activation name");
    }
  }
  if (j.contains("stop")) c.stop = stop_from_json(j["stop"]);
  if (j.contains("trace_stride")) c.trace_stride = as<int>(j["trace_stride"], "trace_stride");
  if (c.trace_stride < 1) throw ConfigError("trace_stride must be at least 1");
  if (j.contains("reference")) {
    const json& r = j["reference"];
    if (r.is_boolean()) {
      c.reference = r.get<bool>();
    } else if (r.is_object()) {
      c.reference = r.value("enabled", true);
      c.reference_tol = r.value("tol", c.reference_tol);
      c.reference_max_iters = r.value("max_iters", c.reference_max_iters);
    } else {
      throw ConfigError("reference must be a boolean or an object");
    }
  }
  if (j.contains("event_log")) c.event_log = as<bool>(j["event_log"], "event_log");
  if (j.contains("compare")) {
    const json& cm = j["compare"];
    c.compare_steps = cm.value("steps", c.compare_steps);
    c.compare_seed_offset = cm.value("seed_offset", c.compare_seed_offset);
  }
  if (j.contains("seeds")) {
    const json& s = j["seeds"];
    c.seeds = s.is_array() ? as<std::vector<std::uint64_t>>(s, "seeds")
                           : std::vector<std::uint64_t>{as<std::uint64_t>(s, "seeds")};
    if (c.seeds.empty()) throw ConfigError("seeds must not be empty");
  }
  if (j.contains("output_dir")) c.output_dir = resolve(base_dir, as<std::string>(j["output_dir"], "output_dir"));
  return c;
}

std::filesystem::path default_output_root() {
  if (const char* env = std::getenv("GNE_OUTPUT_ROOT"); env && *env) return env;
  return "gne_out";
}

PreparedRun prepare_run(const ExperimentConfig& config, std::uint64_t seed) {
  PreparedRun prep;
  prep.seed = seed;
  if (config.cournot) {
    CournotConfig cc = config.cournot_config;
    if (!config.cournot_seed_pinned) cc.seed = seed;
    prep.instance = generate_cournot(cc);
  } else {
    const json gj = read_json_file(config.game_path);
    prep.game_storage = game_from_json(gj);
    if (!config.graph_path.empty()) prep.graph_storage = graph_from_json(read_json_file(config.graph_path));
    else if (gj.contains("graph")) prep.graph_storage = graph_from_json(gj["graph"]);
    else throw ConfigError("no communication graph: add 'graph' to the game file or set game.graph");
    if (prep.graph_storage->num_nodes() != prep.game_storage->num_players())
      throw ConfigError("graph and game disagree on the number of players");
  }
  const GameModel& game = prep.game();
  const CommGraph& graph = prep.graph();
  const int N = game.num_players();
  prep.constants = monotonicity_constants(game);
  prep.gate = config.gate.value_or(config.cournot ? Gate::phi_pd : Gate::theorem);

  json sj = config.schedule;
  if (!sj.contains("seed")) sj["seed"] = seed;
  if (!sj.contains("phi_bar") && config.cournot) sj["phi_bar"] = 4;
  prep.schedule = schedule_from_json(sj, N);

  if (config.params) {
    prep.params = *config.params;
    check_params_shape(game, prep.params);
  } else {
    const StepPolicy policy =
        config.policy.value_or(prep.gate == Gate::phi_pd ? StepPolicy::practical : StepPolicy::certified);
    Rng rng(counter_hash(seed, kParamsTag));
    prep.params = sample_step_sizes(game, graph, prep.constants, 0.35, rng, policy, config.theta_margin);
  }

  const double p_min = prep.schedule.p.minCoeff();
  const MonotonicityConstants& mc = prep.constants;
  if (prep.params.theta > mc.ell * mc.ell / (2.0 * mc.alpha) && p_min > 0)
    prep.eta_bound = async_eta_bound(mc.alpha, mc.ell, prep.params.theta, p_min, prep.schedule.phi_bar, config.c, N);

  // eta: explicit, params file, or derived from the gate.
  if (config.eta) {
    prep.params.eta = *config.eta;
  } else if (!config.params) {
    if (prep.gate == Gate::phi_pd) {
      prep.params.eta = 0.35;
    } else {
      const double at = mc.alpha * prep.params.theta;
      double bound = (4.0 * at - mc.ell * mc.ell) / (2.0 * at);
      if (has_async(config.variants) && prep.eta_bound) bound = std::min(bound, prep.eta_bound->gating);
      prep.params.eta = bound > 0 ? 0.9 * bound : 0.35;
    }
  }
  prep.validation = validate_step_sizes(game, graph, prep.params, prep.constants);

  const ValidationReport& v = prep.validation;
  std::ostringstream os;
  if (prep.gate == Gate::theorem) {
    const bool sync = has_sync(config.variants);
    for (const auto& f : v.failures) {
      // The synchronous eta interval only gates synchronous runs.
      if (!sync && f.find("eta in") != std::string::npos) continue;
      prep.gate_failures.push_back(f);
    }
    if (has_async(config.variants)) {
      if (!prep.eta_bound) {
        prep.gate_failures.push_back("Theorem 3: bound undefined (needs theta > ell^2/(2 alpha) and p_min > 0)");
      } else if (!(prep.params.eta > 0 && prep.params.eta <= prep.eta_bound->gating)) {
        os << "Theorem 3: eta in (0, " << prep.eta_bound->gating << "] violated (eta = " << prep.params.eta
           << "; stated bound " << prep.eta_bound->stated << ", proof variant " << prep.eta_bound->proof_variant
           << ")";
        prep.gate_failures.push_back(os.str());
      }
    }
  } else {
    if (!v.phi_pd) {
      os << "Phi > 0 violated (min eig Phi = " << v.phi_min_eigenvalue << ")";
      prep.gate_failures.push_back(os.str());
      os.str("");
    }
    if (!(prep.params.eta > 0 && prep.params.eta < 1)) {
      os << "eta in (0, 1) violated (eta = " << prep.params.eta << ")";
      prep.gate_failures.push_back(os.str());
    }
  }
  return prep;
}

Outcome run_experiment(const ExperimentConfig& config) {
  return guarded([&]() -> Outcome {
    const std::filesystem::path out = config.output_dir.empty() ? default_output_root() : config.output_dir;
    Outcome result;
    json seeds = json::array();
    bool assumption_failed = false;
    bool not_converged = false;
    std::ostringstream msg;

    for (std::uint64_t seed : config.seeds) {
      const PreparedRun prep = prepare_run(config, seed);
      json entry = seed_header(prep);
      if (!prep.gate_failures.empty()) {
        assumption_failed = true;
        msg << "seed " << seed << ": step sizes rejected by the " << to_string(prep.gate) << " gate\n";
        for (const auto& f : prep.gate_failures) msg << "  " << f << '\n';
        entry["runs"] = json::array();
        seeds.push_back(std::move(entry));
        continue;
      }
      const GameModel& game = prep.game();
      const CommGraph& graph = prep.graph();
      const std::filesystem::path dir = out / ("seed_" + std::to_string(seed));
      std::filesystem::create_directories(dir);
      write_text_file(dir / "instance.json",
                      json{{"game", game_to_json(game)},
                           {"graph", graph_to_json(graph)},
                           {"params", params_to_json(prep.params)},
                           {"schedule", schedule_to_json(prep.schedule)}}
                              .dump(2) +
                          "\n");

      std::optional<Vec> x_ref;
      if (config.reference) {
        StopRule rs;
        rs.max_iters = config.reference_max_iters;
        rs.tol_fixed_point = config.reference_tol;
        SolverParams rp = prep.params;
        const RunResult ref =
            run_sync(game, graph, rp, rs, default_init(game), TraceOptions{std::max(1, static_cast<int>(rs.max_iters)), {}});
        x_ref = ref.state.x;
        entry["reference"] = {{"converged", ref.converged()},
                              {"iterations", ref.iterations},
                              {"fp_residual", ref.trace.records.back().fp_residual},
                              {"x", to_json(ref.state.x)}};
      }

      json runs = json::array();
      for (const auto& name : config.variants) {
        const TraceOptions topt{config.trace_stride, x_ref};
        json run{{"variant", name}};
        Trace trace;
        if (name == "sync") {
          const RunResult r = run_sync(game, graph, prep.params, config.stop, default_init(game), topt);
          trace = r.trace;
          run["reason"] = to_string(r.reason);
          run["converged"] = r.converged();
          run["iterations"] = r.iterations;
          run["lambda_bar"] = to_json(r.lambda_bar);
          run["kkt"] = kkt_to_json(r.final_kkt);
          not_converged |= !r.converged();
        } else {
          const AsyncVariant variant = variant_from_string(name);
          std::ofstream events;
          AsyncOptions aopt;
          aopt.trace = topt;
          if (config.event_log) {
            events.open(dir / (name + "_events.jsonl"), std::ios::binary);
            if (!events) throw Error("cannot write event log in " + dir.string());
            const bool with_mu = variant == AsyncVariant::ad_geno;
            aopt.on_event = [&events, with_mu](const AsyncEvent& ev) { events << event_to_json(ev, with_mu).dump() << '\n'; };
          }
          const AsyncResult r = run_async(variant, game, graph, prep.params, prep.schedule, config.stop, aopt);
          trace = r.trace;
          run["reason"] = to_string(r.reason);
          run["converged"] = r.converged();
          run["iterations"] = r.updates;
          run["per_agent_updates"] = r.per_agent_updates;
          run["max_staleness"] = r.max_staleness;
          run["phi_bar"] = prep.schedule.phi_bar;
          run["lambda_bar"] = to_json(r.lambda_bar);
          run["kkt"] = kkt_to_json(r.final_kkt);
          not_converged |= !r.converged();
        }
        run["final"] = final_json(trace.records.back());
        run["trace"] = name + ".csv";
        write_text_file(dir / (name + ".csv"), trace_csv(trace));
        msg << "seed " << seed << " " << name << ": " << run["reason"].get<std::string>() << " after "
            << run["iterations"].get<long>() << " iterations, kkt " << format_double(trace.records.back().kkt_residual)
            << '\n';
        runs.push_back(std::move(run));
      }
      entry["runs"] = std::move(runs);
      seeds.push_back(std::move(entry));
    }

    result.code = assumption_failed ? exit_code::assumption : not_converged ? exit_code::not_converged : exit_code::ok;
    result.report = {{"command", "run"},
                     {"exit_code", result.code},
                     {"variants", config.variants},
                     {"seeds", std::move(seeds)},
                     {"generated_at", timestamp_utc()}};
    std::filesystem::create_directories(out);
    write_text_file(out / "report.json", result.report.dump(2) + "\n");
    result.message = msg.str();
    return result;
  });
}

Outcome compare_experiment(const ExperimentConfig& config) {
  return guarded([&]() -> Outcome {
    Outcome result;
    json seeds = json::array();
    bool all_pass = true;
    std::ostringstream msg;
    for (std::uint64_t seed : config.seeds) {
      const PreparedRun prep = prepare_run(config, seed);
      AsyncSchedule node_schedule = prep.schedule;
      node_schedule.seed += config.compare_seed_offset;
      const EquivalenceReport rep = compare_variants(prep.game(), prep.graph(), prep.params, prep.schedule,
                                                     node_schedule, config.compare_steps);
      all_pass &= rep.pass;
      msg << "seed " << seed << ": " << (rep.pass ? "PASS" : "FAIL") << " max deviation "
          << format_double(rep.max_deviation) << ", probe " << format_double(rep.max_probe_deviation);
      if (!rep.pass) msg << ", first divergence at step " << rep.first_divergence;
      msg << '\n';
      seeds.push_back({{"seed", seed},
                       {"edge_schedule_seed", prep.schedule.seed},
                       {"node_schedule_seed", node_schedule.seed},
                       {"pass", rep.pass},
                       {"steps", rep.steps},
                       {"tolerance", rep.tolerance},
                       {"max_deviation", rep.max_deviation},
                       {"max_probe_deviation", rep.max_probe_deviation},
                       {"first_divergence", rep.first_divergence},
                       {"gate_failures", prep.gate_failures}});
    }
    result.code = all_pass ? exit_code::ok : exit_code::not_converged;
    result.report = {{"command", "compare"},
                     {"exit_code", result.code},
                     {"seeds", std::move(seeds)},
                     {"generated_at", timestamp_utc()}};
    if (!config.output_dir.empty()) write_text_file(config.output_dir / "compare_report.json", result.report.dump(2) + "\n");
    result.message = msg.str();
    return result;
  });
}

Outcome validate_experiment(const ExperimentConfig& config) {
  return guarded([&]() -> Outcome {
    Outcome result;
    json seeds = json::array();
    bool ok = true;
    std::ostringstream msg;
    for (std::uint64_t seed : config.seeds) {
      const PreparedRun prep = prepare_run(config, seed);
      ok &= prep.gate_failures.empty();
      msg << "seed " << seed << ": " << (prep.gate_failures.empty() ? "accepted" : "rejected") << " by the "
          << to_string(prep.gate) << " gate\n";
      for (const auto& f : prep.gate_failures) msg << "  " << f << '\n';
      seeds.push_back(seed_header(prep));
    }
    result.code = ok ? exit_code::ok : exit_code::assumption;
    result.report = {{"command", "validate"},
                     {"exit_code", result.code},
                     {"seeds", std::move(seeds)},
                     {"generated_at", timestamp_utc()}};
    result.message = msg.str();
    return result;
  });
}

Outcome oracle_experiment(const ExperimentConfig& config) {
  return guarded([&]() -> Outcome {
    std::optional<GameModel> game;
    if (config.cournot) {
      CournotConfig cc = config.cournot_config;
      if (!config.cournot_seed_pinned) cc.seed = config.seeds.front();
      game.emplace(generate_cournot(cc).game);
    } else {
      game.emplace(game_from_json(read_json_file(config.game_path)));
    }
    const OracleSolution s = solve_vgne_bruteforce(*game);
    Outcome result;
    result.report = {{"command", "oracle"},
                     {"exit_code", 0},
                     {"x", to_json(s.x)},
                     {"lambda", to_json(s.lambda)},
                     {"kkt_residual", s.kkt},
                     {"candidates", s.candidates},
                     {"accepted", s.accepted},
                     {"generated_at", timestamp_utc()}};
    std::ostringstream msg;
    msg << "v-GNE found among " << s.candidates << " active sets, kkt " << format_double(s.kkt) << '\n';
    result.message = msg.str();
    return result;
  });
}

}  // namespace gne
