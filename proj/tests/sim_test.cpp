#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "adra/analytic.hpp"
#include "adra/sim.hpp"

namespace {

using adra::CapPolicy;
using adra::DeviceState;
using adra::SimConfig;

std::vector<DeviceState> ages(std::initializer_list<std::int64_t> xs) {
  std::vector<DeviceState> v;
  for (auto x : xs) v.push_back({x});
  return v;
}

TEST(CapPolicy, Evaluation) {
  const auto a = CapPolicy::adra(3, 0.4);
  EXPECT_EQ(a(1), 0.0);
  EXPECT_EQ(a(2), 0.0);
  EXPECT_EQ(a(3), 0.4);
  EXPECT_EQ(a(1000), 0.4);
  const auto b = CapPolicy::aira(0.2);
  EXPECT_EQ(b(1), 0.2);
  EXPECT_EQ(b(77), 0.2);
  const auto g = CapPolicy::general({0.0, 0.1, 0.5});
  EXPECT_EQ(g(1), 0.0);
  EXPECT_EQ(g(2), 0.1);
  EXPECT_EQ(g(3), 0.5);
  EXPECT_EQ(g(4000), 0.5);
}

TEST(CapPolicy, Validation) {
  EXPECT_THROW(CapPolicy::adra(0, 0.5), adra::InvalidArgument);
  EXPECT_THROW(CapPolicy::adra(2, 1.5), adra::InvalidArgument);
  EXPECT_THROW(CapPolicy::aira(-0.1), adra::InvalidArgument);
  EXPECT_THROW(CapPolicy::general({}), adra::InvalidArgument);
  EXPECT_THROW(CapPolicy::general({0.2, 1.1}), adra::InvalidArgument);
}

TEST(Step, BelowThresholdNeverTransmits) {
  auto s = ages({5, 5, 5});
  const std::vector<double> draws{0.0, 0.0, 0.0};
  const auto out = adra::step(std::span(s), CapPolicy::adra(10, 0.5), std::span<const double>(draws));
  EXPECT_TRUE(std::holds_alternative<adra::Idle>(out));
  for (const auto& d : s) EXPECT_EQ(d.aoi, 6);
}

TEST(Step, ForcedSingleton) {
  auto s = ages({4, 2});
  const std::vector<double> draws{0.3, 0.3};
  const auto out = adra::step(std::span(s), CapPolicy::adra(3, 1.0), std::span<const double>(draws));
  ASSERT_TRUE(std::holds_alternative<adra::Success>(out));
  EXPECT_EQ(std::get<adra::Success>(out).device, 0);
  EXPECT_EQ(s[0].aoi, 1);
  EXPECT_EQ(s[1].aoi, 3);
}

TEST(Step, CertainCollision) {
  auto s = ages({5, 5, 5});
  const std::vector<double> draws{0.99, 0.0, 0.5};
  const auto out = adra::step(std::span(s), CapPolicy::aira(1.0), std::span<const double>(draws));
  ASSERT_TRUE(std::holds_alternative<adra::Collision>(out));
  EXPECT_EQ(std::get<adra::Collision>(out).transmitters, 3);
  for (const auto& d : s) EXPECT_EQ(d.aoi, 6);
}

// Every slot: new age is 1 or old + 1, and 1 exactly for the sole transmitter.
TEST(Step, AgeEvolutionProperty) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 8)(gen);
    const int delta = std::uniform_int_distribution<int>(1, 6)(gen);
    const auto policy = CapPolicy::adra(delta, u(gen));
    std::vector<DeviceState> s(n);
    std::vector<double> draws(n);
    for (int slot = 0; slot < 2000; ++slot) {
      const auto before = s;
      for (auto& d : draws) d = u(gen);
      int tx = 0;
      for (int i = 0; i < n; ++i) tx += draws[i] < policy(before[i].aoi) ? 1 : 0;
      const auto out = adra::step(std::span(s), policy, std::span<const double>(draws));
      EXPECT_EQ(std::holds_alternative<adra::Success>(out), tx == 1);
      EXPECT_EQ(std::holds_alternative<adra::Idle>(out), tx == 0);
      for (int i = 0; i < n; ++i) {
        const bool won = std::holds_alternative<adra::Success>(out) &&
                         std::get<adra::Success>(out).device == i;
        ASSERT_EQ(s[i].aoi, won ? 1 : before[i].aoi + 1);
      }
    }
  }
}

TEST(Run, SingleDeviceAlwaysSucceeds) {
  SimConfig sim;
  sim.horizon = 50'000;
  sim.warmup = 100;
  const auto r = adra::run(1, CapPolicy::aira(1.0), sim);
  EXPECT_DOUBLE_EQ(r.network_avg_aoi, 1.0);
  EXPECT_DOUBLE_EQ(r.empirical_pmf[0], 1.0);
  EXPECT_DOUBLE_EQ(r.success_rate, 1.0);
  EXPECT_DOUBLE_EQ(adra::empirical_success_probability(r), 1.0);
}

TEST(Run, SingleDeviceEmpiricalQIsOne) {
  SimConfig sim;
  sim.horizon = 50'000;
  EXPECT_DOUBLE_EQ(adra::empirical_success_probability(adra::run(1, CapPolicy::adra(4, 0.3), sim)), 1.0);
}

TEST(Run, AiraMatchesClosedForm) {
  SimConfig sim;
  sim.seed = 3;
  const auto r = adra::run(10, CapPolicy::aira(0.1), sim);
  EXPECT_NEAR(r.network_avg_aoi, 25.811747917131964, 0.02 * 25.811747917131964);
  EXPECT_NEAR(adra::empirical_success_probability(r), std::pow(0.9, 9), 0.01 * std::pow(0.9, 9));
}

TEST(Run, ThresholdEmpiricalQNearFixedPoint) {
  SimConfig sim;
  sim.seed = 4;
  sim.replications = 4;
  const auto r = adra::run(10, CapPolicy::adra(5, 0.15), sim);
  const double q = adra::solve_success_probability({10, 0.15, 5}).q;
  // Decoupling is approximate at N = 10; a 3% band covers it.
  EXPECT_NEAR(adra::empirical_success_probability(r), q, 0.03 * q);
  EXPECT_NEAR(r.network_avg_aoi, adra::analytic_average_aoi({10, 0.15, 5}).average_aoi,
              0.05 * r.network_avg_aoi);
}

TEST(Run, AccountingAndNormalization) {
  SimConfig sim;
  sim.horizon = 200'000;
  sim.warmup = 1'000;
  sim.replications = 3;
  sim.pmf_cap = 40;
  const auto r = adra::run(6, CapPolicy::adra(4, 0.3), sim);
  EXPECT_EQ(r.idle_slots + r.success_slots + r.collision_slots, r.measured_slots);
  EXPECT_EQ(r.measured_slots, 3 * 199'000);
  EXPECT_NEAR(r.success_rate + r.collision_rate + r.idle_rate, 1.0, 1e-12);
  const double mass = std::accumulate(r.empirical_pmf.begin(), r.empirical_pmf.end(), 0.0) +
                      r.overflow_mass;
  EXPECT_NEAR(mass, 1.0, 1e-12);
  EXPECT_GT(r.overflow_mass, 0.0);
  EXPECT_EQ(r.stderr_method, adra::StderrMethod::Replications);
}

TEST(Run, DefaultPmfCap) {
  SimConfig sim;
  EXPECT_EQ(sim.resolved_pmf_cap(CapPolicy::adra(50, 0.04)), 5000);
  EXPECT_EQ(sim.resolved_pmf_cap(CapPolicy::aira(0.1)), 1000);
}

TEST(Run, Deterministic) {
  SimConfig sim;
  sim.horizon = 100'000;
  sim.warmup = 500;
  sim.seed = 0xDEADBEEF;
  sim.replications = 3;
  const auto a = adra::run(5, CapPolicy::adra(3, 0.3), sim);
  const auto b = adra::run(5, CapPolicy::adra(3, 0.3), sim);
  sim.threads = 3;
  const auto c = adra::run(5, CapPolicy::adra(3, 0.3), sim);
  for (const auto* other : {&b, &c}) {
    EXPECT_EQ(a.per_device_avg_aoi, other->per_device_avg_aoi);
    EXPECT_EQ(a.replication_avg_aoi, other->replication_avg_aoi);
    EXPECT_EQ(a.empirical_pmf, other->empirical_pmf);
    EXPECT_EQ(a.attempts, other->attempts);
    EXPECT_EQ(a.success_slots, other->success_slots);
    EXPECT_EQ(a.network_avg_aoi, other->network_avg_aoi);
    EXPECT_EQ(a.avg_aoi_stderr, other->avg_aoi_stderr);
  }
  sim.seed = 1;
  EXPECT_NE(adra::run(5, CapPolicy::adra(3, 0.3), sim).attempts, a.attempts);
}

TEST(Run, DevicesAreStatisticallySymmetric) {
  SimConfig sim;
  sim.seed = 21;
  sim.replications = 5;
  sim.horizon = 300'000;
  const auto r = adra::run(8, CapPolicy::adra(6, 0.2), sim);
  for (int i = 0; i < 8; ++i) {
    for (int j = i + 1; j < 8; ++j) {
      const double se = std::hypot(r.per_device_stderr[i], r.per_device_stderr[j]);
      EXPECT_LE(std::abs(r.per_device_avg_aoi[i] - r.per_device_avg_aoi[j]), 4.0 * se);
    }
  }
}

TEST(Run, BatchMeansWithOneReplication) {
  SimConfig sim;
  sim.horizon = 100'000;
  const auto r = adra::run(4, CapPolicy::aira(0.25), sim);
  EXPECT_EQ(r.stderr_method, adra::StderrMethod::BatchMeans);
  EXPECT_GT(r.avg_aoi_stderr, 0.0);
  EXPECT_TRUE(std::isfinite(r.avg_aoi_stderr));
}

TEST(Run, GeneralPolicy) {
  SimConfig sim;
  sim.horizon = 100'000;
  // Same as ADRA(3, 0.2) written as a table.
  const auto table = adra::run(5, CapPolicy::general({0.0, 0.0, 0.2}), sim);
  const auto threshold = adra::run(5, CapPolicy::adra(3, 0.2), sim);
  EXPECT_EQ(table.network_avg_aoi, threshold.network_avg_aoi);
}

TEST(Run, RejectsBadConfig) {
  SimConfig sim;
  sim.horizon = 100;
  sim.warmup = 100;
  EXPECT_THROW(adra::run(3, CapPolicy::aira(0.1), sim), adra::InvalidArgument);
  sim.horizon = 1000;
  sim.replications = 0;
  EXPECT_THROW(adra::run(3, CapPolicy::aira(0.1), sim), adra::InvalidArgument);
  sim.replications = 1;
  EXPECT_THROW(adra::run(0, CapPolicy::aira(0.1), sim), adra::InvalidArgument);
}

TEST(EmpiricalSuccess, NoAttemptsIsAnError) {
  SimConfig sim;
  sim.horizon = 1000;
  sim.warmup = 0;
  const auto r = adra::run(3, CapPolicy::adra(5000, 0.5), sim);
  EXPECT_EQ(r.attempts, 0);
  EXPECT_TRUE(std::isnan(r.conditional_success_rate));
  EXPECT_THROW(adra::empirical_success_probability(r), adra::DomainError);
}

TEST(ReplicationSeed, DistinctStreams) {
  EXPECT_NE(adra::replication_seed(7, 0), adra::replication_seed(7, 1));
  EXPECT_NE(adra::replication_seed(7, 0), adra::replication_seed(8, 0));
  EXPECT_EQ(adra::replication_seed(7, 3), adra::replication_seed(7, 3));
}

}  // namespace
