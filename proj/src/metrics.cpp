#include "gne/metrics.hpp"

#include "gne/errors.hpp"

#include <limits>

namespace gne {

double normalized_distance(const Vec& x, const Vec& x_ref) {
  if (x.size() != x_ref.size()) throw DimensionError("reference profile has wrong length");
  const double scale = x_ref.norm();
  if (!(scale > 1e-12)) throw PreconditionError("reference profile is zero; normalized distance undefined");
  return (x - x_ref).norm() / scale;
}

double disagreement(const CommGraph& graph, const Vec& lambda, int m) {
  return graph.apply_laplacian(lambda, m).norm();
}

double consensus_residual(const CommGraph& graph, const Vec& lambda, int m) {
  if (lambda.size() == 0) return 0.0;
  return graph.apply_laplacian(lambda, m).lpNorm<Eigen::Infinity>();
}

double avg_violation(const GameModel& game, const Vec& x) {
  const int m = game.num_constraints();
  if (m == 0) return 0.0;
  return coupling_violation(game, x).cwiseMax(0.0).sum() / m;
}

double max_violation(const GameModel& game, const Vec& x) {
  if (game.num_constraints() == 0) return 0.0;
  return coupling_violation(game, x).cwiseMax(0.0).maxCoeff();
}

Vec node_sum(const Vec& stacked, int num_nodes, int m) {
  if (stacked.size() != static_cast<Eigen::Index>(num_nodes) * m)
    throw DimensionError("node-stacked vector has wrong length");
  Vec s = Vec::Zero(m);
  for (int i = 0; i < num_nodes; ++i) s += stacked.segment(i * m, m);
  return s;
}

Vec mean_dual(const Vec& lambda, int num_nodes, int m) { return node_sum(lambda, num_nodes, m) / num_nodes; }

BenchMetrics bench_metrics(const GameModel& game, const CommGraph& graph, const Vec& x, const Vec& lambda,
                           const std::optional<Vec>& x_ref) {
  const int m = game.num_constraints();
  BenchMetrics out;
  out.normalized_distance = x_ref ? normalized_distance(x, *x_ref) : std::numeric_limits<double>::quiet_NaN();
  out.disagreement = m > 0 ? disagreement(graph, lambda, m) : 0.0;
  out.avg_violation = avg_violation(game, x);
  return out;
}

}  // namespace gne
