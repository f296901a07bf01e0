#include "gne/oracle.hpp"

#include "gne/errors.hpp"

#include <cmath>
#include <optional>
#include <string>

namespace gne {

namespace {

constexpr double kAccept = 1e-10;
constexpr double kSameX = 1e-8;

std::optional<OracleSolution> try_candidate(const GameModel& game, const AffineMap& F,
                                            const ActiveSetCandidate& c) {
  const int n = game.total_dim();
  const int m = game.num_constraints();
  const Mat& A = game.coupling_matrix();
  Vec lo(n), hi(n);
  for (int i = 0; i < game.num_players(); ++i) {
    lo.segment(game.offset(i), game.dim(i)) = game.player(i).lower;
    hi.segment(game.offset(i), game.dim(i)) = game.player(i).upper;
  }

  // Unknowns (x, lambda). One equation per coordinate and per coupling row.
  Mat K = Mat::Zero(n + m, n + m);
  Vec rhs = Vec::Zero(n + m);
  for (int k = 0; k < n; ++k) {
    if (c.box[k] == BoxStatus::free) {
      K.block(k, 0, 1, n) = F.matrix.row(k);
      K.block(k, n, 1, m) = A.col(k).transpose();
      rhs(k) = -F.offset(k);
    } else {
      K(k, k) = 1.0;
      rhs(k) = c.box[k] == BoxStatus::at_lower ? lo(k) : hi(k);
    }
  }
  for (int j = 0; j < m; ++j) {
    if (c.tight[j]) {
      K.block(n + j, 0, 1, n) = A.row(j);
      rhs(n + j) = game.b()(j);
    } else {
      K(n + j, n + j) = 1.0;
    }
  }
  Eigen::FullPivLU<Mat> lu(K);
  if (!lu.isInvertible()) return std::nullopt;
  const Vec sol = lu.solve(rhs);
  const Vec x = sol.head(n);
  const Vec lambda = sol.tail(m);

  const double tol = 1e-9 * (1.0 + sol.cwiseAbs().maxCoeff());
  const Vec g = F(x) + A.transpose() * lambda;
  for (int k = 0; k < n; ++k) {
    if (x(k) < lo(k) - tol || x(k) > hi(k) + tol) return std::nullopt;
    if (c.box[k] == BoxStatus::at_lower && g(k) < -tol) return std::nullopt;
    if (c.box[k] == BoxStatus::at_upper && g(k) > tol) return std::nullopt;
  }
  const Vec viol = A * x - game.b();
  for (int j = 0; j < m; ++j) {
    if (viol(j) > tol) return std::nullopt;
    if (c.tight[j] && lambda(j) < -tol) return std::nullopt;
  }
  const double res = kkt_residual(game, x, lambda);
  if (!(res <= kAccept)) return std::nullopt;
  OracleSolution s;
  s.x = x;
  s.lambda = lambda;
  s.kkt = res;
  return s;
}

}  // namespace

OracleSolution solve_vgne_bruteforce(const GameModel& game) {
  const int n = game.total_dim();
  const int m = game.num_constraints();
  if (n > 6 || m > 2)
    throw UnsupportedError("brute-force oracle handles n <= 6 and m <= 2 (got n = " + std::to_string(n) +
                           ", m = " + std::to_string(m) + ")");
  const AffineMap& F = game.affine();

  long box_combos = 1;
  for (int k = 0; k < n; ++k) box_combos *= 3;
  const long tight_combos = 1L << m;

  std::optional<OracleSolution> best;
  long enumerated = 0;
  int accepted = 0;
  ActiveSetCandidate c;
  c.box.resize(n);
  c.tight.resize(m);
  for (long bc = 0; bc < box_combos; ++bc) {
    long code = bc;
    for (int k = 0; k < n; ++k, code /= 3) c.box[k] = static_cast<BoxStatus>(code % 3);
    for (long tc = 0; tc < tight_combos; ++tc) {
      for (int j = 0; j < m; ++j) c.tight[j] = (tc >> j) & 1;
      ++enumerated;
      auto s = try_candidate(game, F, c);
      if (!s) continue;
      ++accepted;
      if (!best) {
        best = std::move(s);
      } else if ((best->x - s->x).lpNorm<Eigen::Infinity>() > kSameX) {
        throw OracleError("two distinct v-GNE candidates found; the game is not strongly monotone");
      } else if (s->kkt < best->kkt) {
        best = std::move(s);
      }
    }
  }
  if (!best) throw OracleError("no active set satisfies the KKT conditions");
  best->candidates = enumerated;
  best->accepted = accepted;
  return *best;
}

}  // namespace gne
