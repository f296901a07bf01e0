#include "gne/splitting.hpp"

#include "gne/errors.hpp"

#include <cmath>
#include <sstream>

namespace gne {

void check_params_shape(const GameModel& game, const SolverParams& params) {
  const int N = game.num_players();
  if (params.tau.size() != N || params.eps.size() != N)
    throw DimensionError("tau and eps need one entry per player");
  if ((params.tau.array() <= 0).any() || (params.eps.array() <= 0).any() || !(params.delta > 0))
    throw AssumptionViolation("step sizes tau, delta, eps must be strictly positive");
}

Mat build_preconditioner(const GameModel& game, const CommGraph& graph, const SolverParams& params) {
  check_params_shape(game, params);
  const int n = game.total_dim();
  const int m = game.num_constraints();
  const int N = game.num_players();
  const int M = graph.num_edges();
  const int sig0 = n;
  const int lam0 = n + M * m;
  Mat phi = Mat::Zero(n + (M + N) * m, n + (M + N) * m);

  for (int i = 0; i < N; ++i) {
    const int off = game.offset(i);
    const int ni = game.dim(i);
    phi.block(off, off, ni, ni).diagonal().setConstant(1.0 / params.tau(i));
    phi.block(lam0 + i * m, lam0 + i * m, m, m).diagonal().setConstant(1.0 / params.eps(i));
    const Mat& Ai = game.player(i).coupling_block;
    phi.block(off, lam0 + i * m, ni, m) = -Ai.transpose();
    phi.block(lam0 + i * m, off, m, ni) = -Ai;
  }
  phi.block(sig0, sig0, M * m, M * m).diagonal().setConstant(1.0 / params.delta);
  for (int l = 0; l < M; ++l) {
    const auto& e = graph.edges()[l];
    for (int j = 0; j < m; ++j) {
      const int s = sig0 + l * m + j;
      phi(s, lam0 + e.head * m + j) = 1.0;
      phi(s, lam0 + e.tail * m + j) = -1.0;
      phi(lam0 + e.head * m + j, s) = 1.0;
      phi(lam0 + e.tail * m + j, s) = -1.0;
    }
  }
  return phi;
}

double min_eigenvalue(const Mat& symmetric) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(symmetric, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

ValidationReport validate_step_sizes(const GameModel& game, const CommGraph& graph,
                                     const SolverParams& params, const MonotonicityConstants& constants) {
  ValidationReport r;
  r.alpha = constants.alpha;
  r.ell = constants.ell;
  r.theta = params.theta;
  r.theta_lower = constants.ell * constants.ell / (2.0 * constants.alpha);
  r.phi_min_eigenvalue = min_eigenvalue(build_preconditioner(game, graph, params));

  r.theta_ok = params.theta > r.theta_lower;
  r.phi_pd = r.phi_min_eigenvalue > 0.0;
  r.phi_psd = r.phi_min_eigenvalue >= params.theta;
  const double at = constants.alpha * params.theta;
  r.eta_max_sync = (4.0 * at - constants.ell * constants.ell) / (2.0 * at);
  r.eta_ok = r.theta_ok && params.eta > 0.0 && params.eta < r.eta_max_sync;

  auto fail = [&](const std::string& what) { r.failures.push_back(what); };
  std::ostringstream os;
  if (!r.theta_ok) {
    os << "Theorem 2: theta > ell^2/(2 alpha) violated (theta = " << params.theta
       << ", ell^2/(2 alpha) = " << r.theta_lower << ")";
    fail(os.str());
    os.str("");
  }
  if (!r.phi_psd) {
    os << "Theorem 2: Phi - theta I >= 0 violated (min eig Phi = " << r.phi_min_eigenvalue
       << ", theta = " << params.theta << ")";
    fail(os.str());
    os.str("");
  }
  if (!r.eta_ok) {
    os << "Theorem 2: eta in (0, (4 alpha theta - ell^2)/(2 alpha theta)) violated (eta = " << params.eta
       << ", bound = " << r.eta_max_sync << ")";
    fail(os.str());
  }
  return r;
}

void require_certified(const ValidationReport& report) {
  if (report.certified()) return;
  std::string msg = "step sizes rejected:";
  for (const auto& f : report.failures) msg += "\n  " + f;
  throw AssumptionViolation(msg);
}

bool diagonal_dominance_precheck(const GameModel& game, const CommGraph& graph, const SolverParams& params,
                                 double theta) {
  check_params_shape(game, params);
  const int m = game.num_constraints();
  if (m > 0 && graph.num_edges() > 0 && 1.0 / params.delta - theta < 2.0) return false;
  if (1.0 / params.delta < theta) return false;
  for (int i = 0; i < game.num_players(); ++i) {
    const Mat absA = game.player(i).coupling_block.cwiseAbs();
    const double col_max = absA.size() > 0 ? absA.colwise().sum().maxCoeff() : 0.0;
    const double row_max = absA.size() > 0 ? absA.rowwise().sum().maxCoeff() : 0.0;
    if (1.0 / params.tau(i) - theta < col_max) return false;
    if (m > 0 && 1.0 / params.eps(i) - theta < row_max + graph.degree(i)) return false;
    if (1.0 / params.eps(i) < theta) return false;
  }
  return true;
}

Vec forward_backward_primal(const GameModel& game, const SolverParams& params, const Vec& x,
                            const Vec& lambda) {
  const Vec direction = game.pseudo_gradient(x) + game.coupling_transpose_stacked(lambda);
  Vec out(x.size());
  for (int i = 0; i < game.num_players(); ++i) {
    const int off = game.offset(i);
    const int ni = game.dim(i);
    out.segment(off, ni) = project_local(game.player(i), x.segment(off, ni) - params.tau(i) * direction.segment(off, ni));
  }
  return out;
}

namespace {

// lambda~ = proj_{>=0}(lambda + eps (Lambda (2 x~ - x) - b - aux)), aux being
// E'(2 sigma~ - sigma) or 2 z~ - z.
Vec dual_update(const GameModel& game, const SolverParams& params, const Vec& x, const Vec& x_tilde,
                const Vec& lambda, const Vec& aux) {
  const int m = game.num_constraints();
  Vec out(lambda.size());
  const Vec extrapolated = 2.0 * x_tilde - x;
  for (int i = 0; i < game.num_players(); ++i) {
    const auto& p = game.player(i);
    const Vec inner = p.coupling_block * game.block(extrapolated, i) - p.coupling_offset - aux.segment(i * m, m);
    out.segment(i * m, m) = (lambda.segment(i * m, m) + params.eps(i) * inner).cwiseMax(0.0);
  }
  return out;
}

void check_state(const GameModel& game, int aux_len, const Vec& x, const Vec& aux, const Vec& lambda) {
  const int m = game.num_constraints();
  if (x.size() != game.total_dim() || lambda.size() != m * game.num_players() || aux.size() != aux_len)
    throw DimensionError("iterate does not match the game/graph dimensions");
}

}  // namespace

NodeState sweep(const SolverContext& ctx, const NodeState& state) {
  const int m = ctx.game.num_constraints();
  check_params_shape(ctx.game, ctx.params);
  check_state(ctx.game, m * ctx.game.num_players(), state.x, state.z, state.lambda);
  NodeState out;
  out.x = forward_backward_primal(ctx.game, ctx.params, state.x, state.lambda);
  out.z = state.z + ctx.params.delta * ctx.graph.apply_laplacian(state.lambda, m);
  out.lambda = dual_update(ctx.game, ctx.params, state.x, out.x, state.lambda, 2.0 * out.z - state.z);
  return out;
}

EdgeState sweep(const SolverContext& ctx, const EdgeState& state) {
  const int m = ctx.game.num_constraints();
  check_params_shape(ctx.game, ctx.params);
  check_state(ctx.game, m * ctx.graph.num_edges(), state.x, state.sigma, state.lambda);
  EdgeState out;
  out.x = forward_backward_primal(ctx.game, ctx.params, state.x, state.lambda);
  out.sigma = state.sigma + ctx.params.delta * ctx.graph.apply_incidence(state.lambda, m);
  out.lambda = dual_update(ctx.game, ctx.params, state.x, out.x, state.lambda,
                           ctx.graph.apply_incidence_transpose(2.0 * out.sigma - state.sigma, m));
  return out;
}

Vec stack(const EdgeState& state) {
  Vec v(state.x.size() + state.sigma.size() + state.lambda.size());
  v << state.x, state.sigma, state.lambda;
  return v;
}

EdgeState unstack(const Vec& v, const GameModel& game, const CommGraph& graph) {
  const int n = game.total_dim();
  const int m = game.num_constraints();
  const int ms = m * graph.num_edges();
  const int ml = m * game.num_players();
  if (v.size() != n + ms + ml) throw DimensionError("stacked vector has wrong length");
  return {v.head(n), v.segment(n, ms), v.tail(ml)};
}

double phi_norm(const Mat& phi, const Vec& v) { return std::sqrt(std::max(0.0, v.dot(phi * v))); }

double inf_distance(const NodeState& a, const NodeState& b) {
  double d = (a.x - b.x).lpNorm<Eigen::Infinity>();
  if (a.z.size() > 0) d = std::max(d, (a.z - b.z).lpNorm<Eigen::Infinity>());
  if (a.lambda.size() > 0) d = std::max(d, (a.lambda - b.lambda).lpNorm<Eigen::Infinity>());
  return d;
}

SolverParams sample_step_sizes(const GameModel& game, const CommGraph& graph,
                               const MonotonicityConstants& constants, double eta, Rng& rng, StepPolicy policy,
                               double theta_margin) {
  const int N = game.num_players();
  SolverParams raw;
  raw.eta = eta;
  raw.delta = uniform(rng, 0.2, 0.5);
  raw.tau.resize(N);
  raw.eps.resize(N);
  for (int i = 0; i < N; ++i) {
    raw.tau(i) = uniform(rng, 0.03, 0.5);
    raw.eps(i) = uniform(rng, 0.03, 0.5);
  }

  if (policy == StepPolicy::practical) {
    SolverParams p = raw;
    p.tau = (raw.tau.array() + 0.5) / constants.ell;
    p.delta = raw.delta / 10.0;
    p.eps = 2.0 * (raw.eps.array() + 0.5);
    double eig = min_eigenvalue(build_preconditioner(game, graph, p));
    for (int tries = 0; eig <= 0.0; ++tries) {
      if (tries == 60) throw AssumptionViolation("could not make the preconditioner positive definite");
      p.eps *= 0.5;
      eig = min_eigenvalue(build_preconditioner(game, graph, p));
    }
    p.theta = eig;
    return p;
  }

  const double theta = theta_margin * constants.ell * constants.ell / (2.0 * constants.alpha);
  auto scaled = [&](double s) {
    SolverParams p = raw;
    p.tau *= s;
    p.delta *= s;
    p.eps *= s;
    p.theta = theta;
    return p;
  };
  auto admissible = [&](double s) {
    return min_eigenvalue(build_preconditioner(game, graph, scaled(s))) >= theta;
  };
  // min eig of Phi(s) decreases monotonically in s.
  double hi = 1.0;
  if (admissible(hi)) return scaled(hi);
  double lo = 0.5;
  while (!admissible(lo)) {
    hi = lo;
    lo *= 0.5;
    if (lo < 1e-300) throw AssumptionViolation("no admissible step scale found");
  }
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (admissible(mid) ? lo : hi) = mid;
  }
  return scaled(lo);
}

}  // namespace gne
