#pragma once

#include "gne/game_model.hpp"

#include <vector>

namespace gne {

enum class BoxStatus { free, at_lower, at_upper };

struct ActiveSetCandidate {
  std::vector<BoxStatus> box;  // per coordinate
  std::vector<bool> tight;     // per coupling row
};

struct OracleSolution {
  Vec x;
  Vec lambda;  // m
  double kkt = 0;
  long candidates = 0;  // active sets enumerated
  int accepted = 0;     // candidates passing every check (duplicates included)
};

/// Exhaustive active-set solve of the VI's KKT system for affine F.
/// Limited to n <= 6 and m <= 2 (3^n 2^m linear solves).
/// Throws OracleError when nothing passes or two distinct x pass.
[[nodiscard]] OracleSolution solve_vgne_bruteforce(const GameModel& game);

}  // namespace gne
