#include "gne/sync_solver.hpp"

#include "gne/errors.hpp"

#include <cmath>

namespace gne {

void StopRule::validate() const {
  if (max_iters < 0) throw ConfigError("max_iters must be nonnegative");
  if (!(tol_fixed_point > 0)) throw ConfigError("tol_fixed_point must be positive");
  if (tol_kkt && !(*tol_kkt > 0)) throw ConfigError("tol_kkt must be positive");
  if (tol_consensus && !(*tol_consensus > 0)) throw ConfigError("tol_consensus must be positive");
  if (targets && (!(targets->normalized_distance > 0) || !(targets->disagreement > 0) ||
                  !(targets->avg_violation > 0)))
    throw ConfigError("metric targets must be positive");
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::fixed_point: return "fixed_point";
    case StopReason::kkt: return "kkt";
    case StopReason::targets: return "targets";
    case StopReason::max_iters: return "max_iters";
  }
  return "unknown";
}

NodeState default_init(const GameModel& game) {
  const int mN = game.num_constraints() * game.num_players();
  return {game.project(Vec::Zero(game.total_dim())), Vec::Zero(mN), Vec::Zero(mN)};
}

NodeState sd_geno_step(const SolverContext& ctx, const NodeState& state) {
  const NodeState t = sweep(ctx, state);
  const double eta = ctx.params.eta;
  return {state.x + eta * (t.x - state.x), state.z + eta * (t.z - state.z),
          state.lambda + eta * (t.lambda - state.lambda)};
}

EdgeState sd_geno_step(const SolverContext& ctx, const EdgeState& state) {
  const EdgeState t = sweep(ctx, state);
  const double eta = ctx.params.eta;
  return {state.x + eta * (t.x - state.x), state.sigma + eta * (t.sigma - state.sigma),
          state.lambda + eta * (t.lambda - state.lambda)};
}

TraceRecord observe(const SolverContext& ctx, long k, const NodeState& state, const NodeState& tilde,
                    const std::optional<Vec>& x_ref) {
  const GameModel& game = ctx.game;
  const int m = game.num_constraints();
  const int N = game.num_players();
  TraceRecord r;
  r.k = k;
  r.fp_residual = inf_distance(tilde, state);
  r.kkt_residual = kkt_residual(game, state.x, mean_dual(state.lambda, N, m));
  r.consensus_residual = consensus_residual(ctx.graph, state.lambda, m);
  r.max_violation = max_violation(game, state.x);
  const BenchMetrics b = bench_metrics(game, ctx.graph, state.x, state.lambda, x_ref);
  r.normalized_distance = b.normalized_distance;
  r.disagreement = b.disagreement;
  r.avg_violation = b.avg_violation;
  r.z_sum = m > 0 ? node_sum(state.z, N, m).lpNorm<Eigen::Infinity>() : 0.0;
  return r;
}

std::optional<StopReason> check_stop(const StopRule& stop, const TraceRecord& rec, bool have_ref) {
  if (rec.fp_residual <= stop.tol_fixed_point) return StopReason::fixed_point;
  if (stop.tol_kkt) {
    const double tol_c = stop.tol_consensus.value_or(*stop.tol_kkt);
    if (rec.kkt_residual <= *stop.tol_kkt && rec.consensus_residual <= tol_c) return StopReason::kkt;
  }
  if (stop.targets && have_ref && rec.normalized_distance <= stop.targets->normalized_distance &&
      rec.disagreement <= stop.targets->disagreement && rec.avg_violation <= stop.targets->avg_violation)
    return StopReason::targets;
  return std::nullopt;
}

RunResult run_sync(const GameModel& game, const CommGraph& graph, const SolverParams& params,
                   const StopRule& stop, const NodeState& init, const TraceOptions& options) {
  stop.validate();
  check_params_shape(game, params);
  if (options.stride < 1) throw ConfigError("trace stride must be at least 1");
  const int mN = game.num_constraints() * game.num_players();
  if (init.x.size() != game.total_dim() || init.z.size() != mN || init.lambda.size() != mN)
    throw DimensionError("initial state does not match the game");
  if (mN > 0 && init.z.cwiseAbs().maxCoeff() != 0.0) throw PreconditionError("SD-GENO requires z0 = 0");
  if ((game.project(init.x) - init.x).cwiseAbs().maxCoeff() > 0.0)
    throw PreconditionError("initial x must lie in the local feasible sets");
  if (mN > 0 && init.lambda.minCoeff() < 0.0) throw PreconditionError("initial lambda must be nonnegative");

  const SolverContext ctx{game, graph, params};
  RunResult out;
  out.trace.stride = options.stride;
  NodeState state = init;
  const double eta = params.eta;
  for (long k = 0;; ++k) {
    const NodeState t = sweep(ctx, state);
    const double fp = inf_distance(t, state);
    std::optional<StopReason> reason;
    if (fp <= stop.tol_fixed_point) reason = StopReason::fixed_point;
    else if (k >= stop.max_iters) reason = StopReason::max_iters;

    if (k % options.stride == 0 || reason) {
      const TraceRecord rec = observe(ctx, k, state, t, options.x_ref);
      out.trace.records.push_back(rec);
      if (!reason) reason = check_stop(stop, rec, options.x_ref.has_value());
    }
    if (reason) {
      out.reason = *reason;
      out.iterations = k;
      break;
    }
    state.x += eta * (t.x - state.x);
    state.z += eta * (t.z - state.z);
    state.lambda += eta * (t.lambda - state.lambda);
  }
  out.lambda_bar = mean_dual(state.lambda, game.num_players(), game.num_constraints());
  out.final_kkt = kkt_breakdown(game, state.x, out.lambda_bar);
  out.state = std::move(state);
  return out;
}

}  // namespace gne
