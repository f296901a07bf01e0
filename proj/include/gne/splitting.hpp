#pragma once

#include "gne/comm_graph.hpp"
#include "gne/game_model.hpp"
#include "gne/random.hpp"

#include <string>
#include <vector>

namespace gne {

/// Step sizes of the preconditioned forward-backward map. The outer step
/// gamma is fixed to 1; tau, delta and eps absorb it.
struct SolverParams {
  Vec tau;           // per player
  double delta = 0;  // edge / node auxiliary step
  Vec eps;           // per player
  double eta = 0;    // Krasnosel'skii relaxation
  double theta = 0;  // lower bound requested on the preconditioner spectrum
};

/// (x, z, lambda) with one m-vector of z and lambda per node.
struct NodeState {
  Vec x;
  Vec z;
  Vec lambda;
};

/// (x, sigma, lambda) with one m-vector of sigma per edge.
struct EdgeState {
  Vec x;
  Vec sigma;
  Vec lambda;
};

/// References bundled for the solvers. Does not own anything.
struct SolverContext {
  const GameModel& game;
  const CommGraph& graph;
  const SolverParams& params;
};

void check_params_shape(const GameModel& game, const SolverParams& params);

/// Dense preconditioner over (x, sigma, lambda):
///   [ tau^-1      0          -Lambda' ]
///   [ 0           delta^-1 I  E (x) I ]
///   [ -Lambda     E' (x) I    eps^-1  ]
[[nodiscard]] Mat build_preconditioner(const GameModel& game, const CommGraph& graph,
                                       const SolverParams& params);

[[nodiscard]] double min_eigenvalue(const Mat& symmetric);

struct ValidationReport {
  double alpha = 0;
  double ell = 0;
  double theta = 0;
  double theta_lower = 0;       // ell^2 / (2 alpha)
  double phi_min_eigenvalue = 0;
  double eta_max_sync = 0;      // (4 alpha theta - ell^2) / (2 alpha theta)
  bool theta_ok = false;        // theta > ell^2 / (2 alpha)
  bool phi_pd = false;          // Phi > 0
  bool phi_psd = false;         // Phi - theta I >= 0
  bool eta_ok = false;          // eta in (0, eta_max_sync)
  std::vector<std::string> failures;

  [[nodiscard]] bool certified() const { return failures.empty(); }
};

/// Checks the synchronous convergence conditions. Never throws on a failed
/// inequality; failures are listed in the report.
[[nodiscard]] ValidationReport validate_step_sizes(const GameModel& game, const CommGraph& graph,
                                                   const SolverParams& params,
                                                   const MonotonicityConstants& constants);

/// Throws AssumptionViolation naming every failed inequality.
void require_certified(const ValidationReport& report);

/// Sufficient condition for Phi - theta I >= 0 by Gershgorin discs.
[[nodiscard]] bool diagonal_dominance_precheck(const GameModel& game, const CommGraph& graph,
                                               const SolverParams& params, double theta);

/// x~ = proj(x - tau (F(x) + Lambda' lambda))
[[nodiscard]] Vec forward_backward_primal(const GameModel& game, const SolverParams& params,
                                          const Vec& x, const Vec& lambda);

/// One evaluation of T in node coordinates.
[[nodiscard]] NodeState sweep(const SolverContext& ctx, const NodeState& state);
/// One evaluation of T in edge coordinates, where Phi is defined.
[[nodiscard]] EdgeState sweep(const SolverContext& ctx, const EdgeState& state);

[[nodiscard]] Vec stack(const EdgeState& state);
[[nodiscard]] EdgeState unstack(const Vec& v, const GameModel& game, const CommGraph& graph);
/// sqrt(v' Phi v)
[[nodiscard]] double phi_norm(const Mat& phi, const Vec& v);

[[nodiscard]] double inf_distance(const NodeState& a, const NodeState& b);

enum class StepPolicy {
  /// Satisfies the synchronous convergence theorem: theta = margin * ell^2/(2 alpha)
  /// and the drawn steps are shrunk by a common factor until Phi - theta I >= 0.
  certified,
  /// Phi > 0 only, with steps rescaled to the instance's Lipschitz constant.
  practical,
};

/// Draws heterogeneous steps: delta from [0.2, 0.5], tau_i and eps_i from
/// [0.03, 0.5], then adapts them to the instance according to the policy.
[[nodiscard]] SolverParams sample_step_sizes(const GameModel& game, const CommGraph& graph,
                                             const MonotonicityConstants& constants, double eta, Rng& rng,
                                             StepPolicy policy, double theta_margin = 1.05);

}  // namespace gne
