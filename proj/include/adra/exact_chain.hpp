#pragma once

// Exact joint Markov chain on (age_1, ..., age_N) for tiny networks. Used
// to measure how far the decoupled single-device model is from the truth.
// Ages saturate at age_cap, so the reported mean is biased low by at most
// the mass that would otherwise live beyond the cap.

#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "adra/analytic.hpp"
#include "adra/error.hpp"

namespace adra {

struct ExactChainResult {
  double average_aoi = 0.0;   // marginal mean age, averaged over devices
  int iterations = 0;
  double residual = 0.0;      // ||pi P - pi||_1 at return
  bool degenerate = false;    // p = 1: eligible devices collide forever
  double saturated_mass = 0.0;  // stationary mass with some device at age_cap
  std::int64_t states = 0;
};

inline constexpr int kExactChainMaxDevices = 3;
inline constexpr std::int64_t kExactChainMaxStates = std::int64_t{1} << 22;
inline constexpr double kExactChainTailBound = 1e-8;
inline constexpr double kExactChainResidual = 1e-12;
inline constexpr int kExactChainMaxIterations = 200000;

// Smallest cap >= threshold whose decoupled tail mass is below `tail_bound`.
inline int recommended_age_cap(const ProtocolConfig& config,
                               double tail_bound = kExactChainTailBound) {
  const auto dist = StationaryAgeDistribution::from(config, solve_success_probability(config));
  if (!(dist.decay < 1.0)) throw SolverError("decoupled chain has no resets (p q = 0)");
  // Closed-form guess, then walk to the exact boundary.
  const double lead = dist.head_mass * dist.decay / (1.0 - dist.decay);
  std::int64_t cap = config.threshold;
  if (lead >= tail_bound) {
    cap += static_cast<std::int64_t>(std::ceil(std::log(tail_bound / lead) / std::log(dist.decay)));
  }
  while (cap > config.threshold && dist.tail_mass_beyond(cap - 1) < tail_bound) --cap;
  while (dist.tail_mass_beyond(cap) >= tail_bound) ++cap;
  return static_cast<int>(cap);
}

inline ExactChainResult exact_small_n_average_aoi(const ProtocolConfig& config, int age_cap) {
  config.validate();
  const int n = config.n_devices;
  if (n > kExactChainMaxDevices) {
    throw InvalidArgument("exact chain supports at most 3 devices, got " + std::to_string(n));
  }
  if (age_cap < config.threshold || age_cap < 2) {
    throw InvalidArgument("age_cap must be >= max(threshold, 2)");
  }
  std::int64_t states = 1;
  for (int i = 0; i < n; ++i) states *= age_cap;
  if (states > kExactChainMaxStates) {
    throw InvalidArgument("exact chain state space too large: " + std::to_string(states) +
                          " states");
  }

  ExactChainResult out;
  out.states = states;
  const double p = config.cap;
  out.degenerate = p >= 1.0;
  if (!out.degenerate) {
    const auto dist =
        StationaryAgeDistribution::from(config, solve_success_probability(config));
    const double tail = dist.tail_mass_beyond(age_cap);
    if (!(tail < kExactChainTailBound)) {
      throw InvalidArgument("age_cap " + std::to_string(age_cap) +
                            " too small: decoupled tail mass beyond it is " +
                            std::to_string(tail));
    }
  }

  // Successor tables. Device i's age is digit i of the state index in base age_cap.
  std::vector<std::int64_t> stride(n);
  stride[0] = 1;
  for (int i = 1; i < n; ++i) stride[i] = stride[i - 1] * age_cap;

  const auto count = static_cast<std::size_t>(states);
  std::vector<std::uint32_t> advance(count);
  std::vector<std::uint32_t> reset(count * n);
  std::vector<std::uint8_t> eligible(count);
  std::vector<std::uint8_t> any_saturated(count);
  std::vector<double> age_sum(count);

  for (std::int64_t s = 0; s < states; ++s) {
    std::int64_t next = 0;
    int ages[kExactChainMaxDevices] = {};
    std::uint8_t mask = 0;
    bool sat = false;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      ages[i] = static_cast<int>((s / stride[i]) % age_cap) + 1;
      sum += ages[i];
      if (ages[i] >= config.threshold) mask |= static_cast<std::uint8_t>(1u << i);
      if (ages[i] == age_cap) sat = true;
      next += (std::min(ages[i] + 1, age_cap) - 1) * stride[i];
    }
    advance[s] = static_cast<std::uint32_t>(next);
    for (int i = 0; i < n; ++i) {
      const std::int64_t grown = std::min(ages[i] + 1, age_cap) - 1;
      reset[s * n + i] = static_cast<std::uint32_t>(next - grown * stride[i]);
    }
    eligible[s] = mask;
    any_saturated[s] = sat ? 1 : 0;
    age_sum[s] = sum;
  }

  // P(exactly one specific eligible device transmits | k eligible).
  double single[kExactChainMaxDevices + 1] = {};
  for (int k = 1; k <= n; ++k) single[k] = p * std::pow(1.0 - p, k - 1);

  // Lazy power iteration from all ages = 1; the lazy chain is aperiodic and
  // shares the stationary law.
  std::vector<double> cur(count, 0.0), next(count, 0.0);
  cur[0] = 1.0;
  int it = 0;
  double residual = 1.0;
  while (it < kExactChainMaxIterations) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t s = 0; s < count; ++s) {
      const double m = cur[s];
      if (m == 0.0) continue;
      const std::uint8_t mask = eligible[s];
      const int k = std::popcount(mask);
      double stay = m;
      if (k > 0) {
        const double each = m * single[k];
        for (int i = 0; i < n; ++i) {
          if (mask & (1u << i)) next[reset[s * n + i]] += each;
        }
        stay = m - each * k;
      }
      next[advance[s]] += stay;
    }
    residual = 0.0;
    double total = 0.0;
    for (std::size_t s = 0; s < count; ++s) {
      residual += std::abs(next[s] - cur[s]);
      cur[s] = 0.5 * (cur[s] + next[s]);
      total += cur[s];
    }
    for (double& v : cur) v /= total;
    ++it;
    if (residual < kExactChainResidual) break;
  }
  if (!(residual < kExactChainResidual)) {
    throw SolverError("exact chain power iteration did not converge (residual " +
                      std::to_string(residual) + ")");
  }

  double mean = 0.0, sat = 0.0;
  for (std::size_t s = 0; s < count; ++s) {
    mean += cur[s] * age_sum[s];
    if (any_saturated[s]) sat += cur[s];
  }
  out.average_aoi = mean / n;
  out.iterations = it;
  out.residual = residual;
  out.saturated_mass = sat;
  return out;
}

}  // namespace adra
