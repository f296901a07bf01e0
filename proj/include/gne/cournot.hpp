#pragma once

#include "gne/comm_graph.hpp"
#include "gne/game_model.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace gne {

struct Range {
  double lo = 0;
  double hi = 0;
};

/// Networked Cournot competition: N companies, m markets, each company
/// places its strategies on markets; price P(x) = pbar - D A x.
struct CournotConfig {
  int companies = 8;
  int markets = 4;
  int strategies = 4;
  Range capacity{10, 45};    // upper bounds of the local boxes
  Range coupling{0.6, 1.0};  // nonzeros of A
  Range market_cap{20, 100}; // b
  Range pbar{250, 500};
  Range slope{1, 5};         // diagonal of D
  Range quad{1, 8};          // diagonal of Q_i
  Range lin{1, 4};           // q_i
  // market index of each strategy, per company; drawn from the seed if absent
  std::optional<std::vector<std::vector<int>>> pattern;
  std::uint64_t seed = 42;
  int max_seed_retries = 100;

  void validate() const;
};

struct CournotInstance {
  GameModel game;
  CommGraph graph;
  std::vector<std::vector<int>> pattern;
  std::uint64_t seed = 0;  // seed actually used after monotonicity retries
};

/// Deterministic per seed. Regenerates with seed + 1, seed + 2, ... if the
/// pseudo-gradient is not strongly monotone; throws GeneratorError after
/// max_seed_retries attempts.
[[nodiscard]] CournotInstance generate_cournot(const CournotConfig& config);

/// Hand-written 8 x 4 company/market layout standing in for the published
/// figure.
[[nodiscard]] std::vector<std::vector<int>> reference_market_pattern();

/// Companies are neighbors iff they share a market; head = smaller index.
[[nodiscard]] std::vector<Edge> market_sharing_edges(const std::vector<std::vector<int>>& pattern);

}  // namespace gne
