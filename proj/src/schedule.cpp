#include "gne/schedule.hpp"

#include "gne/errors.hpp"
#include "gne/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gne {

namespace {

enum : std::uint64_t { kActivationTag = 1, kDelayTag = 2, kWindowTag = 3 };

// Largest-remainder rounding of W p onto integers summing to W.
std::vector<int> apportion(const Vec& p, int W) {
  const int N = static_cast<int>(p.size());
  std::vector<int> counts(N);
  std::vector<std::pair<double, int>> rem(N);
  int used = 0;
  for (int i = 0; i < N; ++i) {
    const double share = W * p(i);
    counts[i] = static_cast<int>(std::floor(share));
    used += counts[i];
    rem[i] = {share - counts[i], i};
  }
  std::stable_sort(rem.begin(), rem.end(), [](auto a, auto b) { return a.first > b.first; });
  for (int r = 0; used < W; ++r, ++used) ++counts[rem[r % N].second];
  return counts;
}

}  // namespace

AsyncSchedule AsyncSchedule::uniform(int num_agents, std::uint64_t seed, int phi_bar) {
  AsyncSchedule s;
  s.p = Vec::Constant(num_agents, 1.0 / num_agents);
  s.seed = seed;
  s.phi_bar = phi_bar;
  return s;
}

void AsyncSchedule::validate(int num_agents) const {
  if (p.size() != num_agents) throw ConfigError("schedule p needs one probability per agent");
  if ((p.array() < 0).any() || !p.allFinite()) throw ConfigError("activation probabilities must be nonnegative");
  if (std::abs(p.sum() - 1.0) > 1e-9) throw ConfigError("activation probabilities must sum to 1");
  if (phi_bar < 0) throw ConfigError("phi_bar must be nonnegative");
  if (fairness_window < 0) throw ConfigError("fairness_window must be nonnegative");
  if (fairness_window > 0 && activation != ActivationMode::random)
    throw ConfigError("fairness_window only applies to random activation");
}

bool AsyncSchedule::same_except_seed(const AsyncSchedule& o) const {
  return p.size() == o.p.size() && p == o.p && phi_bar == o.phi_bar && delay_model == o.delay_model &&
         activation == o.activation && fairness_window == o.fairness_window &&
         stale_own_reads == o.stale_own_reads;
}

std::string to_string(DelayModel d) {
  switch (d) {
    case DelayModel::zero: return "zero";
    case DelayModel::uniform_iid: return "uniform_iid";
    case DelayModel::fixed_lag: return "fixed_lag";
  }
  return "unknown";
}

std::string to_string(ActivationMode a) { return a == ActivationMode::random ? "random" : "round_robin"; }

DelayModel delay_model_from_string(const std::string& s) {
  if (s == "zero") return DelayModel::zero;
  if (s == "uniform_iid") return DelayModel::uniform_iid;
  if (s == "fixed_lag") return DelayModel::fixed_lag;
  throw ConfigError("unknown delay_model '" + s + "'");
}

ActivationMode activation_from_string(const std::string& s) {
  if (s == "random" || s == "uniform") return ActivationMode::random;
  if (s == "round_robin") return ActivationMode::round_robin;
  throw ConfigError("unknown activation '" + s + "'");
}

ScheduleSampler::ScheduleSampler(AsyncSchedule schedule, int num_agents)
    : schedule_(std::move(schedule)), num_agents_(num_agents) {
  schedule_.validate(num_agents);
  cdf_.resize(num_agents);
  std::partial_sum(schedule_.p.begin(), schedule_.p.end(), cdf_.begin());
  if (schedule_.fairness_window > 0) window_counts_ = apportion(schedule_.p, schedule_.fairness_window);
}

const std::vector<int>& ScheduleSampler::window(long w) const {
  auto it = windows_.find(w);
  if (it != windows_.end()) return it->second;
  if (windows_.size() > 64) windows_.clear();
  std::vector<int> order;
  order.reserve(schedule_.fairness_window);
  for (int i = 0; i < num_agents_; ++i) order.insert(order.end(), window_counts_[i], i);
  Rng rng(counter_hash(schedule_.seed, kWindowTag, static_cast<std::uint64_t>(w)));
  // Fisher-Yates with the portable uniform draw.
  for (int a = static_cast<int>(order.size()) - 1; a > 0; --a) {
    const int b = static_cast<int>(uniform01(rng) * (a + 1));
    std::swap(order[a], order[b]);
  }
  return windows_.emplace(w, std::move(order)).first->second;
}

int ScheduleSampler::agent(long k) const {
  if (schedule_.activation == ActivationMode::round_robin) return static_cast<int>(k % num_agents_);
  if (schedule_.fairness_window > 0) {
    const long W = schedule_.fairness_window;
    return window(k / W)[k % W];
  }
  const double u = counter_uniform01(schedule_.seed, kActivationTag, static_cast<std::uint64_t>(k));
  for (int i = 0; i < num_agents_; ++i)
    if (u < cdf_(i) && schedule_.p(i) > 0) return i;
  // Rounding in the cdf tail: last agent with positive mass.
  for (int i = num_agents_ - 1; i >= 0; --i)
    if (schedule_.p(i) > 0) return i;
  return 0;
}

int ScheduleSampler::staleness(long k, int reader, int cell) const {
  if (reader == cell && !schedule_.stale_own_reads) return 0;
  const int cap = static_cast<int>(std::min<long>(schedule_.phi_bar, k));
  switch (schedule_.delay_model) {
    case DelayModel::zero: return 0;
    case DelayModel::fixed_lag: return cap;
    case DelayModel::uniform_iid: {
      const double u = counter_uniform01(schedule_.seed, kDelayTag, static_cast<std::uint64_t>(k),
                                         static_cast<std::uint64_t>(cell));
      return std::min(cap, static_cast<int>(u * (cap + 1)));
    }
  }
  return 0;
}

int sample_activation(const AsyncSchedule& schedule, long k) {
  return ScheduleSampler(schedule, static_cast<int>(schedule.p.size())).agent(k);
}

}  // namespace gne
