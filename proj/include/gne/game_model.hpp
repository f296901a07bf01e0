#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <variant>
#include <vector>

namespace gne {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// c_i(x_i) = x_i' Q x_i + q' x_i, plus the shared price term of the game.
struct QuadraticCost {
  Mat Q;
  Vec q;
};

/// Callback returning the partial gradient of player i's cost at the full
/// strategy profile.
using GradientFn = std::function<Vec(const Vec& profile)>;

struct GenericGradient {
  GradientFn gradient;
};

using CostModel = std::variant<QuadraticCost, GenericGradient>;

/// One player: box feasible set, its slice of the shared coupling
/// constraint, and its cost.
struct PlayerSpec {
  Vec lower;
  Vec upper;
  Mat coupling_block;   // A_i, m x n_i
  Vec coupling_offset;  // b_i
  CostModel cost;

  [[nodiscard]] int dim() const { return static_cast<int>(lower.size()); }
};

/// Linear inverse demand P(x) = pbar - slope * A x.
struct PriceModel {
  Vec pbar;
  Mat slope;
};

/// F(x) = matrix * x + offset.
struct AffineMap {
  Mat matrix;
  Vec offset;

  [[nodiscard]] Vec operator()(const Vec& x) const { return matrix * x + offset; }
};

struct MonotonicityConstants {
  double alpha = 0.0;
  double ell = 0.0;
};

/// N-player game with box local sets and the affine coupling A x <= b.
/// Immutable after construction.
class GameModel {
 public:
  GameModel(std::vector<PlayerSpec> players, Vec b,
            std::optional<PriceModel> price = std::nullopt);

  [[nodiscard]] int num_players() const { return static_cast<int>(players_.size()); }
  [[nodiscard]] int total_dim() const { return total_dim_; }
  [[nodiscard]] int num_constraints() const { return static_cast<int>(b_.size()); }
  [[nodiscard]] int offset(int i) const { return offsets_[i]; }
  [[nodiscard]] int dim(int i) const { return players_[i].dim(); }
  [[nodiscard]] const PlayerSpec& player(int i) const { return players_[i]; }
  [[nodiscard]] const std::vector<PlayerSpec>& players() const { return players_; }
  [[nodiscard]] const Vec& b() const { return b_; }
  [[nodiscard]] const Mat& coupling_matrix() const { return coupling_; }
  [[nodiscard]] const std::optional<PriceModel>& price() const { return price_; }

  /// Lipschitz constant of the costs. Kept as metadata; no update rule uses it.
  [[nodiscard]] std::optional<double> cost_lipschitz() const { return cost_lipschitz_; }
  void set_cost_lipschitz(double beta) { cost_lipschitz_ = beta; }

  [[nodiscard]] bool is_affine() const { return affine_.has_value(); }
  /// Throws UnsupportedError unless every cost is quadratic.
  [[nodiscard]] const AffineMap& affine() const;

  [[nodiscard]] Vec pseudo_gradient(const Vec& x) const;
  [[nodiscard]] Vec partial_gradient(int i, const Vec& x) const;
  /// f_i(x_i, x_{-i}); quadratic costs only.
  [[nodiscard]] double player_cost(int i, const Vec& x) const;

  /// proj onto the product of boxes.
  [[nodiscard]] Vec project(const Vec& x) const;
  /// Stacked col(b_1, ..., b_N).
  [[nodiscard]] Vec stacked_offsets() const;
  /// Lambda' * lambda_stacked, with Lambda = blkdiag(A_1, ..., A_N).
  [[nodiscard]] Vec coupling_transpose_stacked(const Vec& lambda_stacked) const;

  [[nodiscard]] auto block(const Vec& x, int i) const {
    return x.segment(offsets_[i], players_[i].dim());
  }

 private:
  void check_profile(const Vec& x) const;

  std::vector<PlayerSpec> players_;
  Vec b_;
  std::optional<PriceModel> price_;
  std::vector<int> offsets_;
  int total_dim_ = 0;
  Mat coupling_;
  std::optional<AffineMap> affine_;
  std::optional<double> cost_lipschitz_;
};

[[nodiscard]] Vec project_local(const PlayerSpec& player, const Vec& v);

[[nodiscard]] MonotonicityConstants monotonicity_constants(const Mat& matrix);
[[nodiscard]] MonotonicityConstants monotonicity_constants(const GameModel& game);

/// The four terms whose max is the KKT residual of the VI.
struct KktBreakdown {
  double stationarity = 0.0;
  double primal = 0.0;
  double complementarity = 0.0;
  double dual = 0.0;

  [[nodiscard]] double max() const;
};

[[nodiscard]] KktBreakdown kkt_breakdown(const GameModel& game, const Vec& x, const Vec& lambda);
[[nodiscard]] double kkt_residual(const GameModel& game, const Vec& x, const Vec& lambda);

/// A x - b, signed.
[[nodiscard]] Vec coupling_violation(const GameModel& game, const Vec& x);

}  // namespace gne
