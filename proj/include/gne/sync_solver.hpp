#pragma once

#include "gne/metrics.hpp"
#include "gne/splitting.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gne {

struct MetricTargets {
  double normalized_distance = 1e-3;
  double disagreement = 1e-3;
  double avg_violation = 1e-6;
};

/// Termination tests, evaluated at every trace checkpoint (the fixed-point
/// test of the synchronous solver runs every iteration).
struct StopRule {
  long max_iters = 1'000'000;
  double tol_fixed_point = 1e-10;
  // Fires when both hold; tol_consensus defaults to tol_kkt.
  std::optional<double> tol_kkt;
  std::optional<double> tol_consensus;
  // Needs a reference profile.
  std::optional<MetricTargets> targets;

  void validate() const;
};

enum class StopReason { fixed_point, kkt, targets, max_iters };

[[nodiscard]] std::string to_string(StopReason r);

struct TraceRecord {
  long k = 0;
  double fp_residual = 0;         // ||T(state) - state||_inf
  double kkt_residual = 0;        // at (x, mean lambda)
  double consensus_residual = 0;  // ||(L (x) I) lambda||_inf
  double max_violation = 0;
  double normalized_distance = 0; // NaN without reference
  double disagreement = 0;
  double avg_violation = 0;
  double z_sum = 0;               // ||sum_i z_i||_inf
};

struct Trace {
  int stride = 10;
  std::vector<TraceRecord> records;
};

struct TraceOptions {
  int stride = 10;
  std::optional<Vec> x_ref;
};

struct RunResult {
  Trace trace;
  NodeState state;
  StopReason reason = StopReason::max_iters;
  long iterations = 0;
  Vec lambda_bar;
  KktBreakdown final_kkt;

  [[nodiscard]] bool converged() const { return reason != StopReason::max_iters; }
};

/// x = proj(0), z = 0, lambda = 0.
[[nodiscard]] NodeState default_init(const GameModel& game);

/// state + eta (T(state) - state)
[[nodiscard]] NodeState sd_geno_step(const SolverContext& ctx, const NodeState& state);
[[nodiscard]] EdgeState sd_geno_step(const SolverContext& ctx, const EdgeState& state);

/// Checkpoint record for a node-form state whose sweep is already known.
[[nodiscard]] TraceRecord observe(const SolverContext& ctx, long k, const NodeState& state,
                                  const NodeState& tilde, const std::optional<Vec>& x_ref);

/// Returns the reason a run should stop at this checkpoint, if any.
[[nodiscard]] std::optional<StopReason> check_stop(const StopRule& stop, const TraceRecord& rec, bool have_ref);

/// SD-GENO. Requires z0 = 0, x0 in the local sets and lambda0 >= 0.
[[nodiscard]] RunResult run_sync(const GameModel& game, const CommGraph& graph, const SolverParams& params,
                                 const StopRule& stop, const NodeState& init, const TraceOptions& options = {});

}  // namespace gne
