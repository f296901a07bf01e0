#pragma once

#include "gne/comm_graph.hpp"
#include "gne/game_model.hpp"

#include <optional>

namespace gne {

/// ||x - x_ref||_2 / ||x_ref||_2. Throws PreconditionError when x_ref is ~0.
[[nodiscard]] double normalized_distance(const Vec& x, const Vec& x_ref);

/// ||(L (x) I_m) lambda||_2
[[nodiscard]] double disagreement(const CommGraph& graph, const Vec& lambda, int m);

/// ||(L (x) I_m) lambda||_inf
[[nodiscard]] double consensus_residual(const CommGraph& graph, const Vec& lambda, int m);

/// (1/m) sum_j max(0, [A x - b]_j)
[[nodiscard]] double avg_violation(const GameModel& game, const Vec& x);

/// ||max(0, A x - b)||_inf
[[nodiscard]] double max_violation(const GameModel& game, const Vec& x);

/// Average of the N stacked m-vectors.
[[nodiscard]] Vec mean_dual(const Vec& lambda, int num_nodes, int m);

/// Sum of the N stacked m-vectors.
[[nodiscard]] Vec node_sum(const Vec& stacked, int num_nodes, int m);

struct BenchMetrics {
  double normalized_distance = 0;  // NaN without a reference
  double disagreement = 0;
  double avg_violation = 0;
};

[[nodiscard]] BenchMetrics bench_metrics(const GameModel& game, const CommGraph& graph, const Vec& x,
                                         const Vec& lambda, const std::optional<Vec>& x_ref);

}  // namespace gne
