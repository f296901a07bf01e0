#pragma once

#include "gne/comm_graph.hpp"
#include "gne/game_model.hpp"
#include "gne/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace testutil {

using gne::Mat;
using gne::Vec;

inline Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  std::copy(v.begin(), v.end(), out.data());
  return out;
}

inline Mat mat(int rows, int cols, std::initializer_list<double> row_major) {
  Mat out(rows, cols);
  auto it = row_major.begin();
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) out(r, c) = *it++;
  return out;
}

inline gne::PlayerSpec quad_player(Vec lower, Vec upper, Mat A, Vec b, Mat Q, Vec q) {
  gne::PlayerSpec p;
  p.lower = std::move(lower);
  p.upper = std::move(upper);
  p.coupling_block = std::move(A);
  p.coupling_offset = std::move(b);
  p.cost = gne::QuadraticCost{std::move(Q), std::move(q)};
  return p;
}

/// Two scalar Cournot players: Q = 1, q = 0, D = 1, A = [1, 1], Pbar = 10,
/// boxes [0, ub], shared capacity b split evenly.
inline gne::GameModel cournot_toy(double capacity, double ub = 10.0) {
  std::vector<gne::PlayerSpec> ps;
  for (int i = 0; i < 2; ++i)
    ps.push_back(quad_player(vec({0}), vec({ub}), mat(1, 1, {1}), vec({capacity / 2}), mat(1, 1, {1}), vec({0})));
  return gne::GameModel(std::move(ps), vec({capacity}), gne::PriceModel{vec({10}), mat(1, 1, {1})});
}

inline gne::CommGraph pair_graph() { return gne::CommGraph::build(2, {{0, 1}}); }

inline gne::CommGraph path_graph(int n) {
  std::vector<gne::Edge> e;
  for (int i = 0; i + 1 < n; ++i) e.push_back({i, i + 1});
  return gne::CommGraph::build(n, e);
}

/// Random strongly monotone two-player instance with n_i in {1, 2}, m = 1.
inline gne::GameModel random_tiny_game(std::uint64_t seed) {
  gne::Rng rng(seed);
  auto u = [&](double lo, double hi) { return gne::uniform(rng, lo, hi); };
  std::vector<gne::PlayerSpec> ps;
  const double cap = u(0.5, 3.0);
  for (int i = 0; i < 2; ++i) {
    const int ni = u(0, 1) < 0.5 ? 1 : 2;
    Vec lower = Vec::Zero(ni), upper(ni), q(ni);
    Mat A(1, ni), Q = Mat::Zero(ni, ni);
    for (int k = 0; k < ni; ++k) {
      upper(k) = u(1.0, 3.0);
      A(0, k) = u(0.2, 1.0);
      Q(k, k) = u(0.5, 2.0);
      q(k) = u(-1.0, 1.0);
    }
    ps.push_back(quad_player(lower, upper, A, vec({cap / 2}), Q, q));
  }
  return gne::GameModel(std::move(ps), vec({cap}), gne::PriceModel{vec({u(2.0, 6.0)}), mat(1, 1, {u(0.5, 1.5)})});
}

/// Euclidean projection onto {lo <= y <= hi, a'y <= b} by bisection on the
/// multiplier of the halfspace.
inline Vec project_box_halfspace(const Vec& v, const Vec& lo, const Vec& hi, const Vec& a, double b) {
  auto y = [&](double mu) { return (v - mu * a).cwiseMax(lo).cwiseMin(hi).eval(); };
  if (a.dot(y(0.0)) <= b) return y(0.0);
  double l = 0.0, h = 1.0;
  while (a.dot(y(h)) > b) h *= 2.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (l + h);
    (a.dot(y(mid)) > b ? l : h) = mid;
  }
  return y(h);
}

inline Vec stacked_bound(const gne::GameModel& game, bool upper) {
  Vec out(game.total_dim());
  for (int i = 0; i < game.num_players(); ++i)
    out.segment(game.offset(i), game.dim(i)) = upper ? game.player(i).upper : game.player(i).lower;
  return out;
}

/// Natural residual ||x - proj_X(x - F(x))||_inf of the VI over a 2-D
/// feasible set with one coupling row; independent of the library's solvers.
struct GridResult {
  Vec x;
  double residual = std::numeric_limits<double>::infinity();
  double step = 0;
};

inline GridResult grid_search_vi(const gne::GameModel& game, int points = 2001) {
  const Mat& M = game.affine().matrix;
  const Vec& h = game.affine().offset;
  const Vec lo = stacked_bound(game, false);
  const Vec hi = stacked_bound(game, true);
  const Vec a = game.coupling_matrix().row(0).transpose();
  const double b = game.b()(0);
  GridResult best;
  best.step = (hi(0) - lo(0)) / (points - 1);
  Vec x(2);
  for (int r = 0; r < points; ++r) {
    x(0) = lo(0) + (hi(0) - lo(0)) * r / (points - 1);
    for (int c = 0; c < points; ++c) {
      x(1) = lo(1) + (hi(1) - lo(1)) * c / (points - 1);
      if (a.dot(x) > b + 1e-12) continue;
      const Vec F = M * x + h;
      const double res = (x - project_box_halfspace(x - F, lo, hi, a, b)).lpNorm<Eigen::Infinity>();
      if (res < best.residual) {
        best.residual = res;
        best.x = x;
      }
    }
  }
  best.step = std::max(best.step, (hi(1) - lo(1)) / (points - 1));
  return best;
}

}  // namespace testutil
