#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "ccmp/agent.hpp"
#include "ccmp/rng.hpp"

namespace ccmp {

/// Repo-default wind profile: a downdraft window pushing the agent toward the
/// lower bound of the safe region. Magnitude and timing are repository
/// defaults, chosen so the draft forces interventions at the default wind
/// variance.
inline double default_wind_profile(int t) {
  return (t >= 5 && t < 10) ? -1.0 : 0.0;
}

inline double zero_wind_profile(int) { return 0.0; }

struct EnvironmentConfig {
  std::function<double(int)> wind_mean = default_wind_profile;
  double wind_variance = 0.2;
  int horizon_length = 20;  // closed-loop episode length L
  double initial_elevation = 2.0;
  std::uint64_t rng_seed = 42;
  /// Region against which realized elevations are flagged; matches the
  /// chance driver's region for chance-driven runs.
  SafeRegion evaluation_region{1.0, std::numeric_limits<double>::infinity()};

  void validate() const {
    if (horizon_length < 1) {
      throw ModelError("EnvironmentConfig: horizon_length must be >= 1");
    }
    if (!(wind_variance > 0.0) || !std::isfinite(wind_variance)) {
      throw ModelError("EnvironmentConfig: wind variance must be positive");
    }
    if (!std::isfinite(initial_elevation)) {
      throw ModelError("EnvironmentConfig: initial elevation must be finite");
    }
    evaluation_region.validate();
  }
};

struct SimulationRecord {
  std::vector<double> elevations;     // x_0 .. x_L
  std::vector<double> actions;        // a_0 .. a_{L-1}
  std::vector<double> winds;          // w_0 .. w_{L-1}
  std::vector<std::uint8_t> violations;  // per time; [0] is the given state
  bool completed = false;
  int failed_at = -1;
  std::string error;
};

struct MonteCarloSummary {
  struct Band {
    double q05 = 0.0;
    double q50 = 0.0;
    double q95 = 0.0;
  };
  int runs = 0;
  int failed_runs = 0;
  std::vector<double> violation_ratio;  // per time over completed runs
  double max_violation_ratio = 0.0;
  std::vector<Band> elevation_bands;  // per time 0..L
  std::vector<Band> action_bands;     // per time 0..L-1
  std::vector<std::string> failure_messages;
};

/// One environment transition: sample the wind for step t from the run's
/// generator and advance the elevation.
inline double step(double elevation, double action, int t,
                   const EnvironmentConfig& env, CounterRng& rng) {
  const double wind = rng.next_gaussian(env.wind_mean(t), env.wind_variance);
  return elevation + action + wind;
}

/// Closed loop: observe the elevation, infer a policy, take its first action,
/// execute, repeat. The agent shares the environment's wind statistics: the
/// variances must match and the expected-wind profile is taken from the
/// environment.
inline SimulationRecord run_episode(const EnvironmentConfig& env,
                                    const AgentConfig& agent_in) {
  env.validate();
  agent_in.validate();
  if (env.wind_variance != agent_in.wind_variance) {
    throw ModelError(
        "run_episode: agent and environment must share the wind variance");
  }
  AgentConfig agent = agent_in;
  agent.wind_mean = env.wind_mean;

  CounterRng rng(env.rng_seed);
  SimulationRecord record;
  record.elevations.push_back(env.initial_elevation);
  record.violations.push_back(0);  // the initial state is given, not realized

  for (int t = 0; t < env.horizon_length; ++t) {
    const double x_t = record.elevations.back();
    double action = 0.0;
    try {
      const Policy policy = infer_policy(agent, x_t, t);
      action = policy.actions.at(0);
    } catch (const Error& err) {
      record.failed_at = t;
      record.error = err.what();
      return record;
    }
    const double wind = rng.next_gaussian(env.wind_mean(t), env.wind_variance);
    const double x_next = x_t + action + wind;
    record.actions.push_back(action);
    record.winds.push_back(wind);
    record.elevations.push_back(x_next);
    record.violations.push_back(env.evaluation_region.contains(x_next) ? 0 : 1);
  }
  record.completed = true;
  return record;
}

namespace detail {

inline MonteCarloSummary::Band band_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const auto at = [&](double q) {
    if (values.empty()) return 0.0;
    const double pos = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
  };
  return {at(0.05), at(0.50), at(0.95)};
}

}  // namespace detail

/// Independent seeded episodes (seed_i = base_seed + i) with a shared
/// expected-wind profile. Episodes may run in parallel; aggregation is a
/// deterministic reduction over run indices. Failed episodes are excluded
/// from the statistics and reported.
inline MonteCarloSummary monte_carlo(const EnvironmentConfig& env,
                                     const AgentConfig& agent, int runs,
                                     int threads = 0) {
  if (runs < 1) throw ModelError("monte_carlo: runs must be >= 1");
  env.validate();
  agent.validate();

  std::vector<SimulationRecord> records(static_cast<std::size_t>(runs));
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int n_threads =
      threads > 0 ? threads : static_cast<int>(std::min<unsigned>(hw, 8));

  std::atomic<int> next_run{0};
  const auto worker = [&]() {
    for (;;) {
      const int i = next_run.fetch_add(1);
      if (i >= runs) return;
      EnvironmentConfig env_i = env;
      env_i.rng_seed = env.rng_seed + static_cast<std::uint64_t>(i);
      records[static_cast<std::size_t>(i)] = run_episode(env_i, agent);
    }
  };
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  const int L = env.horizon_length;
  MonteCarloSummary summary;
  summary.runs = runs;
  summary.violation_ratio.assign(static_cast<std::size_t>(L) + 1, 0.0);

  std::vector<std::vector<double>> elevations(static_cast<std::size_t>(L) + 1);
  std::vector<std::vector<double>> actions(static_cast<std::size_t>(L));
  int completed = 0;
  for (const SimulationRecord& r : records) {
    if (!r.completed) {
      ++summary.failed_runs;
      if (summary.failure_messages.size() < 8) {
        summary.failure_messages.push_back(
            "t=" + std::to_string(r.failed_at) + ": " + r.error);
      }
      continue;
    }
    ++completed;
    for (int t = 0; t <= L; ++t) {
      summary.violation_ratio[static_cast<std::size_t>(t)] +=
          r.violations[static_cast<std::size_t>(t)];
      elevations[static_cast<std::size_t>(t)].push_back(
          r.elevations[static_cast<std::size_t>(t)]);
    }
    for (int t = 0; t < L; ++t) {
      actions[static_cast<std::size_t>(t)].push_back(
          r.actions[static_cast<std::size_t>(t)]);
    }
  }
  if (completed == 0) {
    throw InferenceError("monte_carlo: every episode failed; first error: " +
                         (summary.failure_messages.empty()
                              ? std::string("unknown")
                              : summary.failure_messages.front()));
  }
  for (double& v : summary.violation_ratio) v /= completed;
  summary.max_violation_ratio =
      *std::max_element(summary.violation_ratio.begin(),
                        summary.violation_ratio.end());
  for (auto& column : elevations) {
    summary.elevation_bands.push_back(detail::band_of(std::move(column)));
  }
  for (auto& column : actions) {
    summary.action_bands.push_back(detail::band_of(std::move(column)));
  }
  return summary;
}

}  // namespace ccmp
