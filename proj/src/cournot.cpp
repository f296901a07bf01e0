#include "gne/cournot.hpp"

#include "gne/errors.hpp"
#include "gne/random.hpp"

#include <algorithm>
#include <string>

namespace gne {

namespace {

bool shares_market(const std::vector<int>& a, const std::vector<int>& b) {
  for (int x : a)
    if (std::find(b.begin(), b.end(), x) != b.end()) return true;
  return false;
}

bool pattern_ok(const std::vector<std::vector<int>>& pattern, int markets) {
  for (int j = 0; j < markets; ++j) {
    int players = 0;
    for (const auto& row : pattern)
      if (std::find(row.begin(), row.end(), j) != row.end()) ++players;
    if (players < 2) return false;
  }
  return count_components(static_cast<int>(pattern.size()), market_sharing_edges(pattern)) == 1;
}

std::vector<std::vector<int>> draw_pattern(const CournotConfig& cfg, Rng& rng) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    std::vector<std::vector<int>> pattern(cfg.companies, std::vector<int>(cfg.strategies));
    for (auto& row : pattern)
      for (int& mk : row) mk = std::min(cfg.markets - 1, static_cast<int>(uniform01(rng) * cfg.markets));
    if (pattern_ok(pattern, cfg.markets)) return pattern;
  }
  throw GeneratorError("could not draw a market pattern with a connected company network");
}

Vec draw(Rng& rng, Range r, int n) {
  Vec v(n);
  for (int k = 0; k < n; ++k) v(k) = uniform(rng, r.lo, r.hi);
  return v;
}

std::optional<CournotInstance> build(const CournotConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  const auto pattern = cfg.pattern ? *cfg.pattern : draw_pattern(cfg, rng);
  const int N = cfg.companies;
  const int m = cfg.markets;
  const int ns = cfg.strategies;

  const Vec b = draw(rng, cfg.market_cap, m);
  PriceModel price{draw(rng, cfg.pbar, m), draw(rng, cfg.slope, m).asDiagonal()};
  std::vector<PlayerSpec> players;
  players.reserve(N);
  for (int i = 0; i < N; ++i) {
    PlayerSpec p;
    p.lower = Vec::Zero(ns);
    p.upper = draw(rng, cfg.capacity, ns);
    p.coupling_block = Mat::Zero(m, ns);
    for (int s = 0; s < ns; ++s) p.coupling_block(pattern[i][s], s) = uniform(rng, cfg.coupling.lo, cfg.coupling.hi);
    p.coupling_offset = b / N;
    QuadraticCost cost;
    cost.Q = draw(rng, cfg.quad, ns).asDiagonal();
    cost.q = draw(rng, cfg.lin, ns);
    p.cost = std::move(cost);
    players.push_back(std::move(p));
  }
  GameModel game(std::move(players), b, std::move(price));
  if (!(monotonicity_constants(game.affine().matrix).alpha > 0)) return std::nullopt;
  CommGraph graph = CommGraph::build(N, market_sharing_edges(pattern));
  return CournotInstance{std::move(game), std::move(graph), pattern, seed};
}

}  // namespace

void CournotConfig::validate() const {
  if (companies < 2 || markets < 1 || strategies < 1) throw ConfigError("cournot sizes must be positive");
  for (Range r : {capacity, coupling, market_cap, pbar, slope, quad, lin})
    if (!(r.lo <= r.hi)) throw ConfigError("cournot range with lo > hi");
  if (capacity.lo < 0 || coupling.lo <= 0 || quad.lo < 0 || slope.lo < 0)
    throw ConfigError("cournot ranges must keep bounds, coupling, costs and slopes nonnegative");
  if (max_seed_retries < 1) throw ConfigError("max_seed_retries must be positive");
  if (pattern) {
    if (static_cast<int>(pattern->size()) != companies) throw ConfigError("pattern needs one row per company");
    for (const auto& row : *pattern) {
      if (static_cast<int>(row.size()) != strategies) throw ConfigError("pattern row needs one market per strategy");
      for (int mk : row)
        if (mk < 0 || mk >= markets) throw ConfigError("pattern references an unknown market");
    }
    if (!pattern_ok(*pattern, markets))
      throw ConfigError("pattern leaves a market with fewer than two companies or a disconnected network");
  }
}

CournotInstance generate_cournot(const CournotConfig& config) {
  config.validate();
  for (int attempt = 0; attempt < config.max_seed_retries; ++attempt) {
    try {
      if (auto inst = build(config, config.seed + attempt)) return std::move(*inst);
    } catch (const AssumptionViolation&) {
    }
  }
  throw GeneratorError("no strongly monotone instance after " + std::to_string(config.max_seed_retries) + " seeds");
}

std::vector<std::vector<int>> reference_market_pattern() {
  // Markets A..D = 0..3.
  return {
      {0, 0, 1, 1},  // 1
      {0, 1, 1, 2},  // 2
      {1, 2, 2, 3},  // 3
      {2, 3, 3, 3},  // 4
      {0, 3, 3, 0},  // 5
      {1, 1, 2, 2},  // 6
      {0, 2, 0, 2},  // 7
      {1, 3, 1, 3},  // 8
  };
}

std::vector<Edge> market_sharing_edges(const std::vector<std::vector<int>>& pattern) {
  std::vector<Edge> edges;
  const int N = static_cast<int>(pattern.size());
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j)
      if (shares_market(pattern[i], pattern[j])) edges.push_back({i, j});
  return edges;
}

}  // namespace gne
