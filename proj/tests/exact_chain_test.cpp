#include <gtest/gtest.h>

#include <cmath>

#include "adra/exact_chain.hpp"
#include "adra/sim.hpp"

namespace {

using adra::ProtocolConfig;

TEST(ExactChain, AiraIsExactlyDecoupled) {
  // With no threshold every device succeeds w.p. p(1-p)^(N-1) each slot
  // regardless of the others, so the exact mean is 1/(p(1-p)^(N-1)).
  const auto r = adra::exact_small_n_average_aoi({2, 0.5, 1}, 200);
  EXPECT_FALSE(r.degenerate);
  EXPECT_NEAR(r.average_aoi, 4.0, 1e-8);
  EXPECT_LT(r.residual, 1e-12);

  const auto r3 = adra::exact_small_n_average_aoi({3, 0.3, 1}, adra::recommended_age_cap({3, 0.3, 1}));
  EXPECT_NEAR(r3.average_aoi, adra::average_aoi_aira(3, 0.3).average_aoi, 1e-6);
}

TEST(ExactChain, MatchesSimulationTwoDevices) {
  const ProtocolConfig c{2, 0.5, 1};
  const auto exact = adra::exact_small_n_average_aoi(c, 200);
  adra::SimConfig sim;
  sim.horizon = 2'000'000;
  sim.seed = 11;
  const auto rep = adra::run(2, adra::CapPolicy::adra(1, 0.5), sim);
  EXPECT_LE(std::abs(rep.network_avg_aoi - exact.average_aoi), 3.0 * rep.avg_aoi_stderr);
}

TEST(ExactChain, ThresholdCaseReportsDecouplingError) {
  const ProtocolConfig c{3, 0.4, 3};
  const int cap = adra::recommended_age_cap(c);
  const auto exact = adra::exact_small_n_average_aoi(c, cap);
  const double approx = adra::analytic_average_aoi(c).average_aoi;
  EXPECT_LT(exact.residual, 1e-12);
  EXPECT_GT(exact.average_aoi, 1.0);
  // Not a claim about accuracy, only that both are finite and in the same range.
  EXPECT_LT(std::abs(exact.average_aoi - approx) / exact.average_aoi, 0.5);
  EXPECT_LT(exact.saturated_mass, 1e-6);
}

TEST(ExactChain, CertainCollisionIsDegenerate) {
  const auto a = adra::exact_small_n_average_aoi({2, 1.0, 1}, 50);
  const auto b = adra::exact_small_n_average_aoi({2, 1.0, 1}, 100);
  EXPECT_TRUE(a.degenerate);
  EXPECT_TRUE(b.degenerate);
  EXPECT_GT(b.average_aoi, a.average_aoi);
  EXPECT_NEAR(a.average_aoi, 50.0, 1e-6);
}

TEST(ExactChain, RejectsLargeNetworksAndSmallCaps) {
  EXPECT_THROW(adra::exact_small_n_average_aoi({4, 0.2, 2}, 50), adra::InvalidArgument);
  EXPECT_THROW(adra::exact_small_n_average_aoi({2, 0.5, 1}, 10), adra::InvalidArgument);
  EXPECT_THROW(adra::exact_small_n_average_aoi({3, 0.4, 3}, 2), adra::InvalidArgument);
  EXPECT_THROW(adra::exact_small_n_average_aoi({3, 0.4, 3}, 400), adra::InvalidArgument);
}

TEST(ExactChain, RecommendedCapMeetsTailRule) {
  for (const ProtocolConfig c : {ProtocolConfig{2, 0.5, 1}, ProtocolConfig{3, 0.4, 3},
                                 ProtocolConfig{3, 0.2, 10}}) {
    const int cap = adra::recommended_age_cap(c);
    const auto law = adra::StationaryAgeDistribution::from(c, adra::solve_success_probability(c));
    EXPECT_LT(law.tail_mass_beyond(cap), adra::kExactChainTailBound);
    EXPECT_GE(law.tail_mass_beyond(cap - 1), adra::kExactChainTailBound);
  }
}

}  // namespace
