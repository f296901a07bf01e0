#pragma once

#include "gne/game_model.hpp"

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace gne {

enum class DelayModel { zero, uniform_iid, fixed_lag };
enum class ActivationMode { random, round_robin };

/// Everything that drives an asynchronous run besides the game: who wakes up
/// at step k and how stale each of its reads is.
struct AsyncSchedule {
  Vec p;                  // activation law, sums to 1
  std::uint64_t seed = 0;
  int phi_bar = 0;
  DelayModel delay_model = DelayModel::uniform_iid;
  ActivationMode activation = ActivationMode::random;
  // 0 disables. Otherwise steps are grouped in windows of this length and each
  // window is a seeded shuffle holding round(W p_i) activations of agent i.
  int fairness_window = 0;
  bool stale_own_reads = true;

  static AsyncSchedule uniform(int num_agents, std::uint64_t seed, int phi_bar);

  /// Throws ConfigError.
  void validate(int num_agents) const;

  /// True if the two differ at most in their seed.
  [[nodiscard]] bool same_except_seed(const AsyncSchedule& other) const;
};

[[nodiscard]] std::string to_string(DelayModel d);
[[nodiscard]] std::string to_string(ActivationMode a);
[[nodiscard]] DelayModel delay_model_from_string(const std::string& s);
[[nodiscard]] ActivationMode activation_from_string(const std::string& s);

/// Deterministic, random-access sampler: every draw is a function of
/// (seed, k, cell) only.
class ScheduleSampler {
 public:
  ScheduleSampler(AsyncSchedule schedule, int num_agents);

  [[nodiscard]] int agent(long k) const;
  /// Staleness of agent i's read of agent j's cells at step k; always in
  /// [0, min(phi_bar, k)].
  [[nodiscard]] int staleness(long k, int reader, int cell) const;

  [[nodiscard]] const AsyncSchedule& schedule() const { return schedule_; }
  [[nodiscard]] int num_agents() const { return num_agents_; }

 private:
  const std::vector<int>& window(long w) const;

  AsyncSchedule schedule_;
  int num_agents_;
  Vec cdf_;
  std::vector<int> window_counts_;
  mutable std::unordered_map<long, std::vector<int>> windows_;
};

/// Stateless convenience wrapper around ScheduleSampler::agent.
[[nodiscard]] int sample_activation(const AsyncSchedule& schedule, long k);

}  // namespace gne
