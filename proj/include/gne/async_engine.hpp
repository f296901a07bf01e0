#pragma once

#include "gne/schedule.hpp"
#include "gne/sync_solver.hpp"

#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace gne {

enum class AsyncVariant { e_adagnes, ad_geno };

[[nodiscard]] std::string to_string(AsyncVariant v);
[[nodiscard]] AsyncVariant variant_from_string(const std::string& s);

/// One committed value of an agent's (x_i, lambda_i). `time` is the global
/// step at which it became visible: a commit made during step k has time k+1,
/// so the state "at time t" is everything committed at steps < t.
struct Commit {
  long time = 0;
  Vec x;
  Vec lambda;
};

/// Public memory. Primal and dual cells keep the last phi_bar + 1 commits, which
/// is enough to answer any read at time >= k - phi_bar. The accumulators
/// (sigma, z, mu) are read at their latest value.
class MemoryBoard {
 public:
  MemoryBoard(const GameModel& game, const CommGraph& graph, int phi_bar, const Vec& x0, const Vec& lambda0);

  /// Latest commit with time <= t. Throws if t is older than the kept history.
  [[nodiscard]] const Commit& value_at(int agent, long t) const;
  [[nodiscard]] const Commit& latest(int agent) const { return history_[agent].back(); }
  void commit(int agent, long time, Vec x, Vec lambda);

  [[nodiscard]] Vec x() const;
  [[nodiscard]] Vec lambda() const;

  Vec sigma;  // M*m, E-ADAGNES
  Vec z;      // N*m, AD-GENO
  Vec mu;     // N*m, AD-GENO

 private:
  int phi_bar_;
  int num_agents_;
  int m_;
  std::vector<int> offsets_;
  std::vector<std::deque<Commit>> history_;
};

/// Private copy taken by the active agent.
struct Snapshot {
  int agent = 0;
  long k = 0;
  std::vector<int> staleness;  // per agent whose cells were read
  Vec x;                       // full profile as seen by the agent
  Vec lambda;                  // stacked duals as seen by the agent
};

[[nodiscard]] Snapshot read_snapshot(const MemoryBoard& board, const ScheduleSampler& sampler,
                                     const GameModel& game, int agent, long k);

/// What one update did, for the event log and replay checks.
struct AsyncEvent {
  long k = 0;
  int agent = 0;
  std::vector<int> staleness;
  double x_norm = 0;       // committed x_i
  double lambda_norm = 0;  // committed lambda_i
  double aux_norm = 0;     // committed z_i, or the agent's out-edge sigmas
  Vec aux_used;            // the node auxiliary entering lambda~: E_i' sigma or z_i + eta delta mu_i
  Vec mu_read;             // AD-GENO: mu_i as read (then reset)
  std::vector<std::pair<int, Vec>> mu_deltas;  // AD-GENO: (j, increment of mu_j)
};

[[nodiscard]] AsyncEvent e_adagnes_step(const SolverContext& ctx, MemoryBoard& board,
                                        const ScheduleSampler& sampler, long k);
[[nodiscard]] AsyncEvent ad_geno_step(const SolverContext& ctx, MemoryBoard& board,
                                      const ScheduleSampler& sampler, long k);

/// (x, z, lambda) implied by the public memory: z = E' sigma for E-ADAGNES and
/// z + eta delta mu for AD-GENO.
[[nodiscard]] NodeState observed_state(const SolverContext& ctx, const MemoryBoard& board, AsyncVariant variant);

struct AsyncOptions {
  TraceOptions trace;
  bool keep_events = false;
  std::function<void(const AsyncEvent&)> on_event;
};

struct AsyncResult {
  Trace trace;
  NodeState state;  // observed_state at termination
  StopReason reason = StopReason::max_iters;
  long updates = 0;
  std::vector<long> per_agent_updates;
  int max_staleness = 0;
  Vec lambda_bar;
  KktBreakdown final_kkt;
  std::vector<AsyncEvent> events;

  [[nodiscard]] bool converged() const { return reason != StopReason::max_iters; }
};

/// Starts from default_init. Stop tests run at every trace checkpoint;
/// max_iters counts agent updates.
[[nodiscard]] AsyncResult run_async(AsyncVariant variant, const GameModel& game, const CommGraph& graph,
                                    const SolverParams& params, const AsyncSchedule& schedule,
                                    const StopRule& stop, const AsyncOptions& options = {});

struct EquivalenceReport {
  bool pass = false;
  long steps = 0;
  double max_deviation = 0;        // max over steps of ||(x, lambda)_E - (x, lambda)_AD||_inf
  double max_probe_deviation = 0;  // max over updates of |z_i + eta delta mu_i - E_i' sigma|_inf
  long first_divergence = -1;      // first step exceeding the tolerance
  double tolerance = 1e-10;
};

/// Runs E-ADAGNES on `edge_schedule` and AD-GENO on `node_schedule` in
/// lockstep. Throws ConfigError if the schedules differ in anything but the
/// seed; a seed mismatch simply runs and is expected to FAIL.
[[nodiscard]] EquivalenceReport compare_variants(const GameModel& game, const CommGraph& graph,
                                                 const SolverParams& params, const AsyncSchedule& edge_schedule,
                                                 const AsyncSchedule& node_schedule, long steps,
                                                 double tolerance = 1e-10);

struct AsyncEtaBound {
  double stated = 0;        // (4 a t - l^2)/(a t) * c N p_min / (4 phi sqrt(p_min) + 1)
  double proof_variant = 0; // (4 a t - l^2)/(2 a t) * c N p_min / (2 phi sqrt(p_min) + 1)
  double gating = 0;        // the smaller of the two
  bool stated_is_smaller = false;
};

[[nodiscard]] AsyncEtaBound async_eta_bound(double alpha, double ell, double theta, double p_min, int phi_bar,
                                            double c, int num_agents);

}  // namespace gne
