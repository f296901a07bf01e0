#include "gne/async_engine.hpp"

#include "gne/errors.hpp"

#include <algorithm>
#include <cmath>

namespace gne {

std::string to_string(AsyncVariant v) { return v == AsyncVariant::e_adagnes ? "e_adagnes" : "ad_geno"; }

AsyncVariant variant_from_string(const std::string& s) {
  if (s == "e_adagnes") return AsyncVariant::e_adagnes;
  if (s == "ad_geno") return AsyncVariant::ad_geno;
  throw ConfigError("unknown async variant '" + s + "'");
}

MemoryBoard::MemoryBoard(const GameModel& game, const CommGraph& graph, int phi_bar, const Vec& x0,
                         const Vec& lambda0)
    : phi_bar_(phi_bar), num_agents_(game.num_players()), m_(game.num_constraints()) {
  if (graph.num_nodes() != num_agents_) throw DimensionError("graph and game disagree on the number of agents");
  if (x0.size() != game.total_dim() || lambda0.size() != m_ * num_agents_)
    throw DimensionError("initial state does not match the game");
  offsets_.resize(num_agents_);
  history_.resize(num_agents_);
  for (int i = 0; i < num_agents_; ++i) {
    offsets_[i] = game.offset(i);
    history_[i].push_back({0, game.block(x0, i), lambda0.segment(i * m_, m_)});
  }
  sigma = Vec::Zero(static_cast<Eigen::Index>(graph.num_edges()) * m_);
  z = Vec::Zero(static_cast<Eigen::Index>(num_agents_) * m_);
  mu = Vec::Zero(static_cast<Eigen::Index>(num_agents_) * m_);
}

const Commit& MemoryBoard::value_at(int agent, long t) const {
  const auto& h = history_[agent];
  for (auto it = h.rbegin(); it != h.rend(); ++it)
    if (it->time <= t) return *it;
  throw PreconditionError("read at time " + std::to_string(t) + " is older than the kept history");
}

void MemoryBoard::commit(int agent, long time, Vec x, Vec lambda) {
  auto& h = history_[agent];
  if (time <= h.back().time) throw PreconditionError("commits must have increasing times");
  h.push_back({time, std::move(x), std::move(lambda)});
  while (static_cast<int>(h.size()) > phi_bar_ + 1) h.pop_front();
}

Vec MemoryBoard::x() const {
  Eigen::Index n = 0;
  for (const auto& h : history_) n += h.back().x.size();
  Vec out(n);
  for (int i = 0; i < num_agents_; ++i) out.segment(offsets_[i], history_[i].back().x.size()) = history_[i].back().x;
  return out;
}

Vec MemoryBoard::lambda() const {
  Vec out(static_cast<Eigen::Index>(num_agents_) * m_);
  for (int i = 0; i < num_agents_; ++i) out.segment(i * m_, m_) = history_[i].back().lambda;
  return out;
}

Snapshot read_snapshot(const MemoryBoard& board, const ScheduleSampler& sampler, const GameModel& game, int agent,
                       long k) {
  const int N = game.num_players();
  const int m = game.num_constraints();
  Snapshot s;
  s.agent = agent;
  s.k = k;
  s.staleness.resize(N);
  s.x.resize(game.total_dim());
  s.lambda.resize(static_cast<Eigen::Index>(N) * m);
  for (int j = 0; j < N; ++j) {
    const int d = sampler.staleness(k, agent, j);
    const Commit& c = board.value_at(j, k - d);
    s.staleness[j] = d;
    s.x.segment(game.offset(j), game.dim(j)) = c.x;
    s.lambda.segment(j * m, m) = c.lambda;
  }
  return s;
}

namespace {

struct LocalUpdate {
  Vec x_new;
  Vec lambda_new;
};

// Shared by both variants: x~_i from the snapshot, then lambda~_i with the
// node auxiliary `aux` standing for E_i' sigma (equivalently z_i).
LocalUpdate local_update(const SolverContext& ctx, const Snapshot& snap, const Vec& aux) {
  const GameModel& game = ctx.game;
  const SolverParams& prm = ctx.params;
  const int i = snap.agent;
  const int m = game.num_constraints();
  const PlayerSpec& p = game.player(i);
  const Vec xi = game.block(snap.x, i);
  const Vec li = snap.lambda.segment(i * m, m);

  const Vec grad = game.partial_gradient(i, snap.x) + p.coupling_block.transpose() * li;
  const Vec xt = project_local(p, xi - prm.tau(i) * grad);

  Vec lap = Vec::Zero(m);
  for (int j : ctx.graph.neighbors(i)) lap += li - snap.lambda.segment(j * m, m);
  const Vec inner = p.coupling_block * (2.0 * xt - xi) - p.coupling_offset - aux - 2.0 * prm.delta * lap;
  const Vec lt = (li + prm.eps(i) * inner).cwiseMax(0.0);

  return {xi + prm.eta * (xt - xi), li + prm.eta * (lt - li)};
}

Vec node_aux_from_sigma(const CommGraph& graph, const Vec& sigma, int i, int m) {
  Vec aux = Vec::Zero(m);
  for (int l : graph.out_edges(i)) aux += sigma.segment(l * m, m);
  for (int l : graph.in_edges(i)) aux -= sigma.segment(l * m, m);
  return aux;
}

}  // namespace

AsyncEvent e_adagnes_step(const SolverContext& ctx, MemoryBoard& board, const ScheduleSampler& sampler, long k) {
  const int m = ctx.game.num_constraints();
  const int i = sampler.agent(k);
  const Snapshot snap = read_snapshot(board, sampler, ctx.game, i, k);
  const Vec aux = node_aux_from_sigma(ctx.graph, board.sigma, i, m);
  LocalUpdate u = local_update(ctx, snap, aux);

  AsyncEvent ev;
  ev.k = k;
  ev.agent = i;
  ev.staleness = snap.staleness;
  ev.aux_used = aux;
  const Vec li = snap.lambda.segment(i * m, m);
  const double step = ctx.params.eta * ctx.params.delta;
  double aux_sq = 0;
  for (int l : ctx.graph.out_edges(i)) {
    const int j = ctx.graph.edges()[l].tail;
    board.sigma.segment(l * m, m) += step * (li - snap.lambda.segment(j * m, m));
    aux_sq += board.sigma.segment(l * m, m).squaredNorm();
  }
  ev.aux_norm = std::sqrt(aux_sq);
  ev.x_norm = u.x_new.norm();
  ev.lambda_norm = u.lambda_new.norm();
  board.commit(i, k + 1, std::move(u.x_new), std::move(u.lambda_new));
  return ev;
}

AsyncEvent ad_geno_step(const SolverContext& ctx, MemoryBoard& board, const ScheduleSampler& sampler, long k) {
  const int m = ctx.game.num_constraints();
  const int i = sampler.agent(k);
  const double step = ctx.params.eta * ctx.params.delta;

  // Reading: the snapshot and the reset of mu_i form one atomic event.
  const Snapshot snap = read_snapshot(board, sampler, ctx.game, i, k);
  AsyncEvent ev;
  ev.mu_read = board.mu.segment(i * m, m);
  board.mu.segment(i * m, m).setZero();
  const Vec aux = board.z.segment(i * m, m) + step * ev.mu_read;
  LocalUpdate u = local_update(ctx, snap, aux);

  ev.k = k;
  ev.agent = i;
  ev.staleness = snap.staleness;
  ev.aux_used = aux;
  const Vec li = snap.lambda.segment(i * m, m);
  Vec zi = aux;
  for (int l : ctx.graph.out_edges(i)) {
    const int j = ctx.graph.edges()[l].tail;
    const Vec lj = snap.lambda.segment(j * m, m);
    zi += step * (li - lj);
    Vec inc = lj - li;
    board.mu.segment(j * m, m) += inc;
    ev.mu_deltas.emplace_back(j, std::move(inc));
  }
  board.z.segment(i * m, m) = zi;
  ev.aux_norm = zi.norm();
  ev.x_norm = u.x_new.norm();
  ev.lambda_norm = u.lambda_new.norm();
  board.commit(i, k + 1, std::move(u.x_new), std::move(u.lambda_new));
  return ev;
}

NodeState observed_state(const SolverContext& ctx, const MemoryBoard& board, AsyncVariant variant) {
  const int m = ctx.game.num_constraints();
  NodeState s;
  s.x = board.x();
  s.lambda = board.lambda();
  if (variant == AsyncVariant::e_adagnes)
    s.z = ctx.graph.apply_incidence_transpose(board.sigma, m);
  else
    s.z = board.z + ctx.params.eta * ctx.params.delta * board.mu;
  return s;
}

AsyncResult run_async(AsyncVariant variant, const GameModel& game, const CommGraph& graph,
                      const SolverParams& params, const AsyncSchedule& schedule, const StopRule& stop,
                      const AsyncOptions& options) {
  stop.validate();
  check_params_shape(game, params);
  if (options.trace.stride < 1) throw ConfigError("trace stride must be at least 1");
  const int N = game.num_players();
  const int m = game.num_constraints();
  const ScheduleSampler sampler(schedule, N);
  const SolverContext ctx{game, graph, params};
  const NodeState init = default_init(game);
  MemoryBoard board(game, graph, schedule.phi_bar, init.x, init.lambda);

  AsyncResult out;
  out.trace.stride = options.trace.stride;
  out.per_agent_updates.assign(N, 0);
  for (long k = 0;; ++k) {
    if (k % options.trace.stride == 0 || k >= stop.max_iters) {
      const NodeState state = observed_state(ctx, board, variant);
      const TraceRecord rec = observe(ctx, k, state, sweep(ctx, state), options.trace.x_ref);
      out.trace.records.push_back(rec);
      std::optional<StopReason> reason = check_stop(stop, rec, options.trace.x_ref.has_value());
      if (!reason && k >= stop.max_iters) reason = StopReason::max_iters;
      if (reason) {
        out.reason = *reason;
        out.updates = k;
        out.state = state;
        break;
      }
    }
    AsyncEvent ev = variant == AsyncVariant::e_adagnes ? e_adagnes_step(ctx, board, sampler, k)
                                                       : ad_geno_step(ctx, board, sampler, k);
    ++out.per_agent_updates[ev.agent];
    out.max_staleness = std::max(out.max_staleness, *std::max_element(ev.staleness.begin(), ev.staleness.end()));
    if (options.on_event) options.on_event(ev);
    if (options.keep_events) out.events.push_back(std::move(ev));
  }
  out.lambda_bar = mean_dual(out.state.lambda, N, m);
  out.final_kkt = kkt_breakdown(game, out.state.x, out.lambda_bar);
  return out;
}

EquivalenceReport compare_variants(const GameModel& game, const CommGraph& graph, const SolverParams& params,
                                   const AsyncSchedule& edge_schedule, const AsyncSchedule& node_schedule, long steps,
                                   double tolerance) {
  if (!edge_schedule.same_except_seed(node_schedule))
    throw ConfigError("compare_variants needs schedules that differ at most in their seed");
  if (steps < 0) throw ConfigError("steps must be nonnegative");
  check_params_shape(game, params);
  const int N = game.num_players();
  const int m = game.num_constraints();
  const ScheduleSampler s_edge(edge_schedule, N);
  const ScheduleSampler s_node(node_schedule, N);
  const SolverContext ctx{game, graph, params};
  const NodeState init = default_init(game);
  MemoryBoard b_edge(game, graph, edge_schedule.phi_bar, init.x, init.lambda);
  MemoryBoard b_node(game, graph, node_schedule.phi_bar, init.x, init.lambda);

  EquivalenceReport rep;
  rep.steps = steps;
  rep.tolerance = tolerance;
  for (long k = 0; k < steps; ++k) {
    const int i = s_node.agent(k);
    const Vec edge_aux = node_aux_from_sigma(graph, b_edge.sigma, i, m);
    (void)e_adagnes_step(ctx, b_edge, s_edge, k);
    const AsyncEvent ev = ad_geno_step(ctx, b_node, s_node, k);
    const double probe = m > 0 ? (ev.aux_used - edge_aux).lpNorm<Eigen::Infinity>() : 0.0;
    double dev = (b_edge.latest(i).x - b_node.latest(i).x).lpNorm<Eigen::Infinity>();
    // Only agent i changed in each board; other agents were compared earlier,
    // unless the two runs activated different agents.
    if (s_edge.agent(k) != i) {
      dev = std::max(dev, (b_edge.x() - b_node.x()).lpNorm<Eigen::Infinity>());
      if (m > 0) dev = std::max(dev, (b_edge.lambda() - b_node.lambda()).lpNorm<Eigen::Infinity>());
    } else if (m > 0) {
      dev = std::max(dev, (b_edge.latest(i).lambda - b_node.latest(i).lambda).lpNorm<Eigen::Infinity>());
    }
    rep.max_probe_deviation = std::max(rep.max_probe_deviation, probe);
    rep.max_deviation = std::max(rep.max_deviation, dev);
    if (rep.first_divergence < 0 && std::max(dev, probe) > tolerance) rep.first_divergence = k;
  }
  rep.pass = rep.first_divergence < 0;
  return rep;
}

AsyncEtaBound async_eta_bound(double alpha, double ell, double theta, double p_min, int phi_bar, double c,
                              int num_agents) {
  if (!(c > 0.0 && c < 1.0)) throw ConfigError("c must lie in (0, 1)");
  if (!(p_min > 0.0 && p_min <= 1.0)) throw ConfigError("p_min must lie in (0, 1]");
  if (phi_bar < 0) throw ConfigError("phi_bar must be nonnegative");
  if (num_agents < 1) throw ConfigError("need at least one agent");
  if (!(alpha > 0.0)) throw AssumptionViolation("Standing Assumption 3: alpha must be positive");
  if (!(theta > ell * ell / (2.0 * alpha)))
    throw AssumptionViolation("Theorem 3: theta > ell^2/(2 alpha) violated");
  const double at = alpha * theta;
  const double gap = 4.0 * at - ell * ell;
  const double sq = std::sqrt(p_min);
  const double scale = c * num_agents * p_min;
  AsyncEtaBound b;
  b.stated = gap / at * scale / (4.0 * phi_bar * sq + 1.0);
  b.proof_variant = gap / (2.0 * at) * scale / (2.0 * phi_bar * sq + 1.0);
  b.stated_is_smaller = b.stated <= b.proof_variant;
  b.gating = std::min(b.stated, b.proof_variant);
  return b;
}

}  // namespace gne
