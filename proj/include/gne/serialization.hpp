#pragma once

#include "gne/async_engine.hpp"
#include "gne/comm_graph.hpp"
#include "gne/game_model.hpp"
#include "gne/schedule.hpp"
#include "gne/splitting.hpp"
#include "gne/sync_solver.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>

namespace gne {

using json = nlohmann::json;

/// %.17g, "nan"/"inf"/"-inf" for non-finite values.
[[nodiscard]] std::string format_double(double v);

[[nodiscard]] json to_json(const Vec& v);
[[nodiscard]] json to_json(const Mat& m);  // row-major nested arrays
[[nodiscard]] Vec vec_from_json(const json& j, const std::string& what);
[[nodiscard]] Mat mat_from_json(const json& j, const std::string& what);

/// {players: [{dim, lower, upper, A_i, b_i, Q_i, q_i}], b, m, price: {Pbar, D}}.
/// Quadratic costs only.
[[nodiscard]] json game_to_json(const GameModel& game);
[[nodiscard]] GameModel game_from_json(const json& j);

/// {N, edges: [[i, j], ...]} with 1-based node indices.
[[nodiscard]] json graph_to_json(const CommGraph& graph);
[[nodiscard]] CommGraph graph_from_json(const json& j);

/// {p, seed, phi_bar, delay_model, fairness_window, activation, stale_own_reads}
[[nodiscard]] json schedule_to_json(const AsyncSchedule& s);
/// Missing p means uniform over num_agents.
[[nodiscard]] AsyncSchedule schedule_from_json(const json& j, int num_agents);

[[nodiscard]] json params_to_json(const SolverParams& p);
[[nodiscard]] SolverParams params_from_json(const json& j);

[[nodiscard]] json validation_to_json(const ValidationReport& r);
[[nodiscard]] json kkt_to_json(const KktBreakdown& k);

/// Header: k,fp_residual,kkt_residual,consensus_residual,max_violation,
/// normalized_distance,disagreement,avg_violation
void write_trace_csv(std::ostream& os, const Trace& trace);
[[nodiscard]] std::string trace_csv(const Trace& trace);

/// {k, agent, staleness_map, committed_norms: {x, lambda, aux}, mu_read, mu_deltas}
[[nodiscard]] json event_to_json(const AsyncEvent& ev, bool with_mu);

[[nodiscard]] json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace gne
