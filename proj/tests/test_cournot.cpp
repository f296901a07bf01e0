#include "gne/cournot.hpp"
#include "gne/errors.hpp"
#include "gne/metrics.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace gne;
using namespace testutil;

namespace {

bool within(double v, Range r) { return v >= r.lo && v <= r.hi; }

}  // namespace

TEST_CASE("generator is deterministic per seed") {
  const auto a = generate_cournot({.seed = 42});
  const auto b = generate_cournot({.seed = 42});
  CHECK(a.seed == b.seed);
  CHECK(a.pattern == b.pattern);
  CHECK(a.game.coupling_matrix() == b.game.coupling_matrix());
  CHECK(a.game.affine().matrix == b.game.affine().matrix);
  CHECK(a.game.affine().offset == b.game.affine().offset);
  CHECK(a.game.b() == b.game.b());
  CHECK(a.graph.edges() == b.graph.edges());
  const auto c = generate_cournot({.seed = 43});
  CHECK(c.game.b() != a.game.b());
}

TEST_CASE("instance shape and parameter ranges") {
  const CournotConfig cfg;
  for (std::uint64_t s = 0; s < 10; ++s) {
    CournotConfig c = cfg;
    c.seed = 1000 + s;
    const auto inst = generate_cournot(c);
    const GameModel& g = inst.game;
    REQUIRE(g.num_players() == 8);
    REQUIRE(g.num_constraints() == 4);
    REQUIRE(g.total_dim() == 32);
    for (int j = 0; j < 4; ++j) {
      CHECK(within(g.b()(j), cfg.market_cap));
      CHECK(within(g.price()->pbar(j), cfg.pbar));
      CHECK(within(g.price()->slope(j, j), cfg.slope));
    }
    CHECK(g.price()->slope.isDiagonal());
    for (int i = 0; i < 8; ++i) {
      const PlayerSpec& p = g.player(i);
      CHECK((p.coupling_offset - g.b() / 8).cwiseAbs().maxCoeff() <= 1e-15);
      CHECK(p.lower.isZero());
      const auto& q = std::get<QuadraticCost>(p.cost);
      CHECK(q.Q.isDiagonal());
      for (int s2 = 0; s2 < 4; ++s2) {
        CHECK(within(p.upper(s2), cfg.capacity));
        CHECK(within(q.Q(s2, s2), cfg.quad));
        CHECK(within(q.q(s2), cfg.lin));
        // one nonzero per column, in the market named by the pattern
        for (int j = 0; j < 4; ++j) {
          const double a = p.coupling_block(j, s2);
          if (j == inst.pattern[i][s2]) CHECK(within(a, cfg.coupling));
          else CHECK(a == 0.0);
        }
      }
    }
  }
}

TEST_CASE("network links exactly the companies sharing a market") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto inst = generate_cournot({.seed = 77 + s});
    const Mat& A = inst.game.coupling_matrix();
    std::set<std::pair<int, int>> expect;
    for (int i = 0; i < 8; ++i)
      for (int j = i + 1; j < 8; ++j)
        for (int r = 0; r < A.rows(); ++r)
          if (A.block(r, 4 * i, 1, 4).cwiseAbs().sum() > 0 && A.block(r, 4 * j, 1, 4).cwiseAbs().sum() > 0)
            expect.insert({i, j});
    std::set<std::pair<int, int>> got;
    for (const Edge& e : inst.graph.edges()) got.insert({std::min(e.head, e.tail), std::max(e.head, e.tail)});
    CHECK(got == expect);
    // every market served by at least two companies
    for (int r = 0; r < A.rows(); ++r) {
      int served = 0;
      for (int i = 0; i < 8; ++i) served += A.block(r, 4 * i, 1, 4).cwiseAbs().sum() > 0;
      CHECK(served >= 2);
    }
  }
}

TEST_CASE("strong monotonicity holds on nearly every seed") {
  int ok = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    CournotConfig c;
    c.seed = s;
    c.max_seed_retries = 1;
    try {
      const auto inst = generate_cournot(c);
      ok += monotonicity_constants(inst.game).alpha > 0;
    } catch (const GeneratorError&) {
    }
  }
  CHECK(ok >= 95);
}

TEST_CASE("reference pattern and configuration errors") {
  CournotConfig c;
  c.pattern = reference_market_pattern();
  const auto inst = generate_cournot(c);
  CHECK(inst.pattern == reference_market_pattern());

  CournotConfig bad;
  bad.capacity = {45, 10};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CournotConfig lonely;
  lonely.pattern = std::vector<std::vector<int>>(8, std::vector<int>{0, 0, 0, 3});
  lonely.pattern->at(0) = {1, 1, 2, 2};
  CHECK_THROWS_AS(lonely.validate(), ConfigError);
  CournotConfig shape;
  shape.pattern = std::vector<std::vector<int>>(7, std::vector<int>{0, 1, 2, 3});
  CHECK_THROWS_AS(shape.validate(), ConfigError);
}

TEST_CASE("benchmark metrics") {
  const auto inst = generate_cournot({.seed = 5});
  const GameModel& g = inst.game;
  const Vec x = Vec::Zero(32);
  CHECK(avg_violation(g, x) == 0.0);
  CHECK(max_violation(g, x) == 0.0);
  const Vec lam = Vec::Constant(32, 1.5);
  CHECK(disagreement(inst.graph, lam, 4) == 0.0);
  CHECK(consensus_residual(inst.graph, lam, 4) == 0.0);
  const Vec ref = Vec::LinSpaced(32, 1, 32);
  CHECK(normalized_distance(ref, ref) == 0.0);
  CHECK(normalized_distance(Vec::Zero(32), ref) == doctest::Approx(1.0));
  CHECK_THROWS_AS((void)normalized_distance(ref, Vec::Zero(32)), PreconditionError);

  // one market overfilled by 4 units
  Vec over = Vec::Zero(32);
  const Mat& A = g.coupling_matrix();
  int col = 0;
  while (A(0, col) == 0.0) ++col;
  over(col) = (g.b()(0) + 4.0) / A(0, col);
  CHECK(max_violation(g, over) == doctest::Approx(4.0));
  CHECK(avg_violation(g, over) == doctest::Approx(1.0));

  const Vec stacked = Vec::LinSpaced(8, 1, 8).replicate(1, 4).transpose().reshaped();
  CHECK(mean_dual(stacked, 8, 4) == Vec::Constant(4, 4.5));
  CHECK(node_sum(stacked, 8, 4) == Vec::Constant(4, 36.0));

  const BenchMetrics b = bench_metrics(g, inst.graph, ref, lam, std::nullopt);
  CHECK(std::isnan(b.normalized_distance));
}
