#pragma once

// Slot-level simulation of N devices sharing a collision channel. Every
// slot each device draws one uniform, transmits iff the draw is below its
// age-indexed access probability, and a slot delivers iff exactly one
// device transmitted. Ages are recorded at the start of each slot.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <type_traits>
#include <variant>
#include <vector>

#include "adra/analytic.hpp"
#include "adra/error.hpp"
#include "adra/rng.hpp"

namespace adra {

namespace detail {
inline void require_probability(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    std::ostringstream os;
    os << what << " must lie in [0, 1], got " << v;
    throw InvalidArgument(os.str());
  }
}
}  // namespace detail

// Age-indexed channel access probability.
class CapPolicy {
 public:
  // 0 below the threshold, `cap` from it on.
  struct Adra {
    int threshold = 1;
    double cap = 0.0;
    double operator()(std::int64_t age) const noexcept { return age >= threshold ? cap : 0.0; }
  };
  // Age-independent (plain slotted ALOHA).
  struct Aira {
    double cap = 0.0;
    double operator()(std::int64_t) const noexcept { return cap; }
  };
  // table[l-1] for age l; the last entry repeats for older ages.
  struct General {
    std::vector<double> table;
    double operator()(std::int64_t age) const noexcept {
      const auto last = static_cast<std::int64_t>(table.size());
      return table[static_cast<std::size_t>(std::min(age, last) - 1)];
    }
  };

  static CapPolicy adra(int threshold, double cap) {
    if (threshold < 1) throw InvalidArgument("threshold must be >= 1");
    detail::require_probability(cap, "cap");
    return CapPolicy(Adra{threshold, cap});
  }
  static CapPolicy aira(double cap) {
    detail::require_probability(cap, "cap");
    return CapPolicy(Aira{cap});
  }
  static CapPolicy general(std::vector<double> table) {
    if (table.empty()) throw InvalidArgument("general CAP table must be non-empty");
    for (double v : table) detail::require_probability(v, "CAP table entry");
    return CapPolicy(General{std::move(table)});
  }

  double operator()(std::int64_t age) const {
    return std::visit([age](const auto& p) { return p(age); }, rep_);
  }

  template <class Visitor>
  decltype(auto) visit(Visitor&& v) const {
    return std::visit(std::forward<Visitor>(v), rep_);
  }

  // Age scale used to size the default pmf histogram.
  std::int64_t characteristic_age() const {
    return std::visit(
        [](const auto& p) -> std::int64_t {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, Adra>) return p.threshold;
          else if constexpr (std::is_same_v<T, General>) return static_cast<std::int64_t>(p.table.size());
          else return 1;
        },
        rep_);
  }

 private:
  explicit CapPolicy(std::variant<Adra, Aira, General> rep) : rep_(std::move(rep)) {}
  std::variant<Adra, Aira, General> rep_;
};

template <class P>
concept AccessPolicy = requires(const P& p, std::int64_t age) {
  { p(age) } -> std::convertible_to<double>;
};

struct DeviceState {
  std::int64_t aoi = 1;
};

struct Idle {
  bool operator==(const Idle&) const = default;
};
struct Success {
  int device = 0;
  bool operator==(const Success&) const = default;
};
struct Collision {
  int transmitters = 2;
  bool operator==(const Collision&) const = default;
};
using SlotOutcome = std::variant<Idle, Success, Collision>;

// Advances every device by one slot in place. Device i transmits iff
// draws[i] < policy(age_i). A sole transmitter's age resets to 1; every
// other age grows by one.
template <AccessPolicy Policy>
SlotOutcome step(std::span<DeviceState> states, const Policy& policy,
                 std::span<const double> draws) {
  int transmitters = 0;
  int last = -1;
  const int n = static_cast<int>(states.size());
  for (int i = 0; i < n; ++i) {
    if (draws[static_cast<std::size_t>(i)] < policy(states[static_cast<std::size_t>(i)].aoi)) {
      ++transmitters;
      last = i;
    }
  }
  for (auto& s : states) ++s.aoi;
  if (transmitters == 1) {
    states[static_cast<std::size_t>(last)].aoi = 1;
    return Success{last};
  }
  if (transmitters == 0) return Idle{};
  return Collision{transmitters};
}

inline constexpr std::int64_t kDefaultWarmup = 10'000;
inline constexpr int kBatchCount = 20;

struct SimConfig {
  std::int64_t horizon = 1'000'000;  // total slots, warmup included
  std::int64_t warmup = kDefaultWarmup;
  std::uint64_t seed = 1;
  int replications = 1;
  std::int64_t pmf_cap = 0;  // 0: max(100 * characteristic age, 1000)
  int threads = 1;

  void validate() const {
    if (warmup < 0) throw InvalidArgument("warmup must be >= 0");
    if (horizon <= warmup) throw InvalidArgument("horizon must exceed warmup");
    if (replications < 1) throw InvalidArgument("replications must be >= 1");
    if (pmf_cap < 0) throw InvalidArgument("pmf_cap must be >= 1 (or 0 for the default)");
    if (threads < 1) throw InvalidArgument("threads must be >= 1");
  }

  std::int64_t measured_slots() const { return horizon - warmup; }

  std::int64_t resolved_pmf_cap(const CapPolicy& policy) const {
    if (pmf_cap > 0) return pmf_cap;
    return std::max<std::int64_t>(100 * policy.characteristic_age(), 1000);
  }
};

enum class StderrMethod { Replications, BatchMeans };

struct SimReport {
  int n_devices = 0;
  int replications = 0;
  std::int64_t measured_slots = 0;  // summed over replications

  std::vector<double> per_device_avg_aoi;
  std::vector<double> per_device_stderr;
  std::vector<double> replication_avg_aoi;
  double network_avg_aoi = 0.0;
  double avg_aoi_stderr = 0.0;
  StderrMethod stderr_method = StderrMethod::Replications;

  // empirical_pmf[l-1] = frequency of age l for l <= pmf_cap; larger ages
  // land in overflow_mass.
  std::int64_t pmf_cap = 0;
  std::vector<double> empirical_pmf;
  double overflow_mass = 0.0;

  std::int64_t idle_slots = 0;
  std::int64_t success_slots = 0;
  std::int64_t collision_slots = 0;
  std::int64_t attempts = 0;  // total transmissions

  double success_rate = 0.0;
  double collision_rate = 0.0;
  double idle_rate = 0.0;
  double conditional_success_rate = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

struct ReplicationTally {
  std::vector<std::uint64_t> age_sum;            // per device
  std::vector<std::uint64_t> batch_age_sum;      // [batch * n + device]
  std::vector<std::int64_t> batch_slots;         // per batch
  std::vector<std::uint64_t> pmf_counts;         // ages 1..cap, then overflow
  std::int64_t idle = 0, success = 0, collision = 0, attempts = 0;
};

template <AccessPolicy Policy>
ReplicationTally run_replication(int n, const Policy& policy, const SimConfig& cfg,
                                 std::int64_t pmf_cap, std::uint64_t replication) {
  ReplicationTally t;
  const auto nn = static_cast<std::size_t>(n);
  t.age_sum.assign(nn, 0);
  t.batch_age_sum.assign(nn * kBatchCount, 0);
  t.batch_slots.assign(kBatchCount, 0);
  t.pmf_counts.assign(static_cast<std::size_t>(pmf_cap) + 1, 0);

  UniformStream rng(replication_seed(cfg.seed, replication));
  std::vector<DeviceState> states(nn);
  std::vector<double> draws(nn);
  const std::int64_t measured = cfg.measured_slots();

  for (std::int64_t slot = 0; slot < cfg.horizon; ++slot) {
    const std::int64_t m = slot - cfg.warmup;
    if (m >= 0) {
      const auto batch = static_cast<std::size_t>((m * kBatchCount) / measured);
      ++t.batch_slots[batch];
      std::uint64_t* batch_sum = &t.batch_age_sum[batch * nn];
      for (std::size_t i = 0; i < nn; ++i) {
        const std::int64_t age = states[i].aoi;
        t.age_sum[i] += static_cast<std::uint64_t>(age);
        batch_sum[i] += static_cast<std::uint64_t>(age);
        ++t.pmf_counts[static_cast<std::size_t>(std::min(age, pmf_cap + 1) - 1)];
      }
    }
    for (auto& d : draws) d = rng.next();
    const SlotOutcome outcome = step(std::span<DeviceState>(states), policy,
                                     std::span<const double>(draws));
    if (m >= 0) {
      if (std::holds_alternative<Idle>(outcome)) {
        ++t.idle;
      } else if (std::holds_alternative<Success>(outcome)) {
        ++t.success;
        ++t.attempts;
      } else {
        ++t.collision;
        t.attempts += std::get<Collision>(outcome).transmitters;
      }
    }
  }
  return t;
}

inline double sample_stderr(std::span<const double> xs) {
  const auto k = static_cast<double>(xs.size());
  if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= k;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (k - 1.0) / k);
}

}  // namespace detail

// Runs `sim.replications` independent replications starting from all ages
// equal to 1 and pools statistics over the measured (post-warmup) slots.
// Standard errors come from replication means when there are at least two
// replications, otherwise from 20 contiguous batch means.
inline SimReport run(int n_devices, const CapPolicy& policy, const SimConfig& sim) {
  if (n_devices < 1) throw InvalidArgument("n_devices must be >= 1");
  sim.validate();
  if (sim.measured_slots() < kBatchCount) {
    throw InvalidArgument("need at least 20 measured slots");
  }
  const std::int64_t pmf_cap = sim.resolved_pmf_cap(policy);
  const auto reps = static_cast<std::size_t>(sim.replications);

  std::vector<detail::ReplicationTally> tallies(reps);
  auto run_one = [&](std::size_t r) {
    tallies[r] = policy.visit([&](const auto& concrete) {
      return detail::run_replication(n_devices, concrete, sim, pmf_cap, r);
    });
  };
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(sim.threads), reps);
  if (workers <= 1) {
    for (std::size_t r = 0; r < reps; ++r) run_one(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < reps; r = next++) run_one(r);
      });
    }
  }

  // Reduction in replication order keeps the report independent of scheduling.
  const auto nn = static_cast<std::size_t>(n_devices);
  const std::int64_t per_rep = sim.measured_slots();
  SimReport rep;
  rep.n_devices = n_devices;
  rep.replications = sim.replications;
  rep.measured_slots = per_rep * sim.replications;
  rep.pmf_cap = pmf_cap;

  std::vector<std::uint64_t> age_sum(nn, 0);
  std::vector<std::uint64_t> pmf(static_cast<std::size_t>(pmf_cap) + 1, 0);
  std::vector<std::vector<double>> device_samples(nn);
  for (const auto& t : tallies) {
    std::uint64_t rep_total = 0;
    for (std::size_t i = 0; i < nn; ++i) {
      age_sum[i] += t.age_sum[i];
      rep_total += t.age_sum[i];
      if (reps >= 2) device_samples[i].push_back(static_cast<double>(t.age_sum[i]) / per_rep);
    }
    rep.replication_avg_aoi.push_back(static_cast<double>(rep_total) /
                                      (static_cast<double>(per_rep) * n_devices));
    for (std::size_t b = 0; b < pmf.size(); ++b) pmf[b] += t.pmf_counts[b];
    rep.idle_slots += t.idle;
    rep.success_slots += t.success;
    rep.collision_slots += t.collision;
    rep.attempts += t.attempts;
  }

  std::uint64_t network_sum = 0;
  for (std::size_t i = 0; i < nn; ++i) {
    network_sum += age_sum[i];
    rep.per_device_avg_aoi.push_back(static_cast<double>(age_sum[i]) /
                                     static_cast<double>(rep.measured_slots));
  }
  rep.network_avg_aoi = static_cast<double>(network_sum) /
                        (static_cast<double>(rep.measured_slots) * n_devices);

  if (reps >= 2) {
    rep.stderr_method = StderrMethod::Replications;
    rep.avg_aoi_stderr = detail::sample_stderr(rep.replication_avg_aoi);
    for (std::size_t i = 0; i < nn; ++i) {
      rep.per_device_stderr.push_back(detail::sample_stderr(device_samples[i]));
    }
  } else {
    rep.stderr_method = StderrMethod::BatchMeans;
    const auto& t = tallies.front();
    std::vector<double> network_batches(kBatchCount);
    std::vector<double> device_batches(kBatchCount);
    for (int b = 0; b < kBatchCount; ++b) {
      std::uint64_t s = 0;
      for (std::size_t i = 0; i < nn; ++i) s += t.batch_age_sum[b * nn + i];
      network_batches[b] = static_cast<double>(s) /
                           (static_cast<double>(t.batch_slots[b]) * n_devices);
    }
    rep.avg_aoi_stderr = detail::sample_stderr(network_batches);
    for (std::size_t i = 0; i < nn; ++i) {
      for (int b = 0; b < kBatchCount; ++b) {
        device_batches[b] = static_cast<double>(t.batch_age_sum[b * nn + i]) /
                            static_cast<double>(t.batch_slots[b]);
      }
      rep.per_device_stderr.push_back(detail::sample_stderr(device_batches));
    }
  }

  const double observations = static_cast<double>(rep.measured_slots) * n_devices;
  rep.empirical_pmf.resize(static_cast<std::size_t>(pmf_cap));
  for (std::size_t b = 0; b < rep.empirical_pmf.size(); ++b) {
    rep.empirical_pmf[b] = static_cast<double>(pmf[b]) / observations;
  }
  rep.overflow_mass = static_cast<double>(pmf.back()) / observations;

  const auto slots = static_cast<double>(rep.measured_slots);
  rep.idle_rate = static_cast<double>(rep.idle_slots) / slots;
  rep.success_rate = static_cast<double>(rep.success_slots) / slots;
  rep.collision_rate = static_cast<double>(rep.collision_slots) / slots;
  if (rep.attempts > 0) {
    rep.conditional_success_rate =
        static_cast<double>(rep.success_slots) / static_cast<double>(rep.attempts);
  }
  return rep;
}

// Successes per transmission attempt: the empirical counterpart of q.
inline double empirical_success_probability(const SimReport& report) {
  if (report.attempts <= 0) {
    throw DomainError("empirical success probability undefined: no transmission attempts");
  }
  return static_cast<double>(report.success_slots) / static_cast<double>(report.attempts);
}

// Total-variation distance between the simulated age histogram (with its
// overflow bucket) and a stationary law lumped the same way.
inline double pmf_total_variation(const SimReport& report,
                                  const StationaryAgeDistribution& law) {
  double tv = 0.0;
  for (std::int64_t l = 1; l <= report.pmf_cap; ++l) {
    tv += std::abs(report.empirical_pmf[static_cast<std::size_t>(l - 1)] - law.pmf(l));
  }
  tv += std::abs(report.overflow_mass - law.tail_mass_beyond(report.pmf_cap));
  return 0.5 * tv;
}

}  // namespace adra
