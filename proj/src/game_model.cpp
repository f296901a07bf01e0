#include "gne/game_model.hpp"

#include "gne/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gne {

namespace {

std::string player_label(int i) { return "player " + std::to_string(i + 1); }

}  // namespace

GameModel::GameModel(std::vector<PlayerSpec> players, Vec b, std::optional<PriceModel> price)
    : players_(std::move(players)), b_(std::move(b)), price_(std::move(price)) {
  if (players_.empty()) throw DimensionError("game needs at least one player");
  const auto m = b_.size();

  offsets_.reserve(players_.size());
  for (int i = 0; i < num_players(); ++i) {
    const auto& p = players_[i];
    const auto ni = p.lower.size();
    if (ni == 0) throw DimensionError(player_label(i) + " has zero dimension");
    if (p.upper.size() != ni)
      throw DimensionError(player_label(i) + ": lower/upper sizes differ");
    if (!p.lower.allFinite() || !p.upper.allFinite())
      throw AssumptionViolation(player_label(i) + ": box bounds must be finite (compact local set)");
    if ((p.lower.array() > p.upper.array()).any())
      throw AssumptionViolation(player_label(i) + ": lower bound exceeds upper bound (empty local set)");
    if (p.coupling_block.rows() != m || p.coupling_block.cols() != ni)
      throw DimensionError(player_label(i) + ": coupling block must be " + std::to_string(m) + " x " +
                           std::to_string(ni));
    if (p.coupling_offset.size() != m)
      throw DimensionError(player_label(i) + ": coupling offset must have length " + std::to_string(m));
    if (const auto* quad = std::get_if<QuadraticCost>(&p.cost)) {
      if (quad->Q.rows() != ni || quad->Q.cols() != ni || quad->q.size() != ni)
        throw DimensionError(player_label(i) + ": quadratic cost has wrong shape");
    } else if (!std::get<GenericGradient>(p.cost).gradient) {
      throw DimensionError(player_label(i) + ": empty gradient callback");
    }
    offsets_.push_back(total_dim_);
    total_dim_ += static_cast<int>(ni);
  }

  Vec offset_sum = Vec::Zero(m);
  for (const auto& p : players_) offset_sum += p.coupling_offset;
  const double scale = 1.0 + (m > 0 ? b_.cwiseAbs().maxCoeff() : 0.0);
  if (m > 0 && (offset_sum - b_).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw DimensionError("coupling offsets b_i do not sum to b");

  coupling_.resize(m, total_dim_);
  for (int i = 0; i < num_players(); ++i)
    coupling_.middleCols(offsets_[i], dim(i)) = players_[i].coupling_block;

  if (price_) {
    if (price_->pbar.size() != m || price_->slope.rows() != m || price_->slope.cols() != m)
      throw DimensionError("price model must be m-dimensional");
  }

  const bool all_quadratic = std::all_of(players_.begin(), players_.end(), [](const PlayerSpec& p) {
    return std::holds_alternative<QuadraticCost>(p.cost);
  });
  if (all_quadratic) {
    AffineMap map{Mat::Zero(total_dim_, total_dim_), Vec::Zero(total_dim_)};
    for (int i = 0; i < num_players(); ++i) {
      const auto& quad = std::get<QuadraticCost>(players_[i].cost);
      const auto& Ai = players_[i].coupling_block;
      const int off = offsets_[i];
      const int ni = dim(i);
      map.matrix.block(off, off, ni, ni) += quad.Q + quad.Q.transpose();
      map.offset.segment(off, ni) = quad.q;
      if (price_) {
        // grad of -(pbar - D A x)' A_i x_i w.r.t. x_i
        map.matrix.middleRows(off, ni) += Ai.transpose() * price_->slope * coupling_;
        map.matrix.block(off, off, ni, ni) += Ai.transpose() * price_->slope.transpose() * Ai;
        map.offset.segment(off, ni) -= Ai.transpose() * price_->pbar;
      }
    }
    affine_ = std::move(map);
  }
}

const AffineMap& GameModel::affine() const {
  if (!affine_) throw UnsupportedError("pseudo-gradient is not affine (non-quadratic cost present)");
  return *affine_;
}

void GameModel::check_profile(const Vec& x) const {
  if (x.size() != total_dim_)
    throw DimensionError("strategy profile has length " + std::to_string(x.size()) + ", expected " +
                         std::to_string(total_dim_));
}

Vec GameModel::pseudo_gradient(const Vec& x) const {
  check_profile(x);
  if (affine_) return (*affine_)(x);
  Vec out(total_dim_);
  for (int i = 0; i < num_players(); ++i) out.segment(offsets_[i], dim(i)) = partial_gradient(i, x);
  return out;
}

Vec GameModel::partial_gradient(int i, const Vec& x) const {
  check_profile(x);
  const int off = offsets_[i];
  const int ni = dim(i);
  if (affine_) return affine_->matrix.middleRows(off, ni) * x + affine_->offset.segment(off, ni);
  Vec g = std::get<GenericGradient>(players_[i].cost).gradient(x);
  if (g.size() != ni) throw DimensionError(player_label(i) + ": gradient callback returned wrong size");
  return g;
}

double GameModel::player_cost(int i, const Vec& x) const {
  check_profile(x);
  const auto* quad = std::get_if<QuadraticCost>(&players_[i].cost);
  if (!quad) throw UnsupportedError("cost value is only available for quadratic costs");
  const Vec xi = block(x, i);
  double value = xi.dot(quad->Q * xi) + quad->q.dot(xi);
  if (price_) {
    const Vec price = price_->pbar - price_->slope * (coupling_ * x);
    value -= price.dot(players_[i].coupling_block * xi);
  }
  return value;
}

Vec GameModel::project(const Vec& x) const {
  check_profile(x);
  Vec out(total_dim_);
  for (int i = 0; i < num_players(); ++i)
    out.segment(offsets_[i], dim(i)) = project_local(players_[i], block(x, i));
  return out;
}

Vec GameModel::stacked_offsets() const {
  const int m = num_constraints();
  Vec out(m * num_players());
  for (int i = 0; i < num_players(); ++i) out.segment(i * m, m) = players_[i].coupling_offset;
  return out;
}

Vec GameModel::coupling_transpose_stacked(const Vec& lambda_stacked) const {
  const int m = num_constraints();
  if (lambda_stacked.size() != m * num_players())
    throw DimensionError("stacked dual has wrong length");
  Vec out(total_dim_);
  for (int i = 0; i < num_players(); ++i)
    out.segment(offsets_[i], dim(i)) =
        players_[i].coupling_block.transpose() * lambda_stacked.segment(i * m, m);
  return out;
}

Vec project_local(const PlayerSpec& player, const Vec& v) {
  return v.cwiseMax(player.lower).cwiseMin(player.upper);
}

MonotonicityConstants monotonicity_constants(const Mat& matrix) {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0)
    throw DimensionError("monotonicity constants need a nonempty square matrix");
  const Mat sym = 0.5 * (matrix + matrix.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> eig(sym, Eigen::EigenvaluesOnly);
  Eigen::JacobiSVD<Mat> svd(matrix);
  MonotonicityConstants out{eig.eigenvalues().minCoeff(), svd.singularValues().maxCoeff()};
  if (!(out.alpha > 0.0))
    throw AssumptionViolation("Standing Assumption 3 violated: pseudo-gradient is not strongly monotone (alpha = " +
                              std::to_string(out.alpha) + ")");
  return out;
}

MonotonicityConstants monotonicity_constants(const GameModel& game) {
  return monotonicity_constants(game.affine().matrix);
}

double KktBreakdown::max() const {
  return std::max({stationarity, primal, complementarity, dual});
}

KktBreakdown kkt_breakdown(const GameModel& game, const Vec& x, const Vec& lambda) {
  if (x.size() != game.total_dim()) throw DimensionError("kkt: profile has wrong length");
  if (lambda.size() != game.num_constraints()) throw DimensionError("kkt: dual has wrong length");
  const Mat& A = game.coupling_matrix();
  const Vec grad = game.pseudo_gradient(x) + A.transpose() * lambda;
  const Vec slack = game.b() - A * x;

  KktBreakdown out;
  out.stationarity = (x - game.project(x - grad)).lpNorm<Eigen::Infinity>();
  if (lambda.size() > 0) {
    out.primal = (-slack).cwiseMax(0.0).maxCoeff();
    out.complementarity = std::abs(lambda.dot(slack));
    out.dual = (-lambda).cwiseMax(0.0).maxCoeff();
  }
  return out;
}

double kkt_residual(const GameModel& game, const Vec& x, const Vec& lambda) {
  return kkt_breakdown(game, x, lambda).max();
}

Vec coupling_violation(const GameModel& game, const Vec& x) {
  if (x.size() != game.total_dim()) throw DimensionError("profile has wrong length");
  return game.coupling_matrix() * x - game.b();
}

}  // namespace gne
