#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "adra/analytic.hpp"
#include "adra/opt.hpp"

namespace {

using adra::SearchSpace;

// Grid minima computed offline by brute force with an independent root
// finder (scipy brentq, xtol 1e-15) over the same default grids.
constexpr double kBest10 = 15.64986867452844;
constexpr double kDeltaStar20 = 32;
constexpr double kSweepMin20 = 34.47898317356559;
constexpr double kSweepDeltaOne20 = 58.647001787223886;

TEST(SearchSpace, Defaults) {
  const auto s = SearchSpace::defaults(10);
  ASSERT_EQ(s.p_grid.size(), 200u);
  EXPECT_DOUBLE_EQ(s.p_grid.front(), 0.2 / 200);
  EXPECT_DOUBLE_EQ(s.p_grid.back(), 0.2);
  ASSERT_EQ(s.delta_grid.size(), 50u);
  EXPECT_EQ(s.delta_grid.front(), 1);
  EXPECT_EQ(s.delta_grid.back(), 50);
  EXPECT_DOUBLE_EQ(SearchSpace::defaults(2).p_grid.back(), 1.0);
}

TEST(SearchSpace, Validation) {
  SearchSpace s;
  EXPECT_THROW(s.validate(), adra::InvalidArgument);
  s.p_grid = {0.0};
  s.delta_grid = {1};
  EXPECT_THROW(s.validate(), adra::InvalidArgument);
  s.p_grid = {0.1};
  s.delta_grid = {0};
  EXPECT_THROW(s.validate(), adra::InvalidArgument);
}

TEST(Optimize, SinglePointIsAira) {
  SearchSpace s{{0.1}, {1}};
  const auto r = adra::optimize(10, s);
  EXPECT_NEAR(r.best_avg_aoi, 25.811747917131964, 1e-9);
  EXPECT_EQ(r.best_delta, 1);
}

TEST(Optimize, DefaultGridBeatsAira) {
  const auto r = adra::optimize(10, SearchSpace::defaults(10));
  EXPECT_LT(r.best_avg_aoi, adra::average_aoi_aira(10, 0.1).average_aoi);
  EXPECT_NEAR(r.best_avg_aoi, kBest10, 1e-9);
  EXPECT_DOUBLE_EQ(r.best_p, 0.2);
  EXPECT_EQ(r.best_delta, 17);
  EXPECT_TRUE(r.failures.empty());
  EXPECT_EQ(r.evaluated, 200 * 50);
}

TEST(Optimize, SurfaceConsistencyAndArgmin) {
  const auto r = adra::optimize(8, SearchSpace::defaults(8, 25), {true, 1});
  ASSERT_EQ(r.surface.size(), 25u * 40u);
  double min_seen = INFINITY;
  for (const auto& pt : r.surface) {
    const auto again = adra::evaluate_point(8, pt.p, pt.delta);
    EXPECT_NEAR(again.avg_aoi, pt.avg_aoi, 1e-12);
    min_seen = std::min(min_seen, pt.avg_aoi);
  }
  EXPECT_EQ(r.best_avg_aoi, min_seen);
}

TEST(Optimize, ArgminInvariantUnderPositiveRescaling) {
  const auto r = adra::optimize(12, SearchSpace::defaults(12, 30), {true, 1});
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  for (int t = 0; t < 20; ++t) {
    auto surface = r.surface;
    const double s = scale(gen);
    for (auto& pt : surface) pt.avg_aoi *= s;
    const auto best = adra::argmin(surface);
    ASSERT_TRUE(best.has_value());
    EXPECT_EQ(surface[*best].p, r.best_p);
    EXPECT_EQ(surface[*best].delta, r.best_delta);
  }
}

TEST(Optimize, TiesPreferSmallerDeltaThenSmallerP) {
  std::vector<adra::SurfacePoint> s{
      {0.3, 4, 0.5, 10.0, false}, {0.2, 4, 0.5, 10.0, false}, {0.4, 2, 0.5, 10.0, false},
      {0.1, 2, 0.5, 10.0, false}, {0.5, 1, 0.5, 11.0, false}};
  const auto best = adra::argmin(s);
  ASSERT_TRUE(best);
  EXPECT_EQ(*best, 3u);
}

TEST(Optimize, ThreadedMatchesSerial) {
  const auto a = adra::optimize(15, SearchSpace::defaults(15, 40), {false, 1});
  const auto b = adra::optimize(15, SearchSpace::defaults(15, 40), {false, 3});
  EXPECT_EQ(a.best_p, b.best_p);
  EXPECT_EQ(a.best_delta, b.best_delta);
  EXPECT_EQ(a.best_avg_aoi, b.best_avg_aoi);
}

TEST(Optimize, NonFinitePointsAreRecordedAndSkipped) {
  SearchSpace s{{0.5, 1.0}, {1}};
  const auto r = adra::optimize(2, s);
  ASSERT_EQ(r.failures.size(), 1u);
  EXPECT_EQ(r.failures[0].p, 1.0);
  EXPECT_DOUBLE_EQ(r.best_avg_aoi, 4.0);
  EXPECT_TRUE(r.regime_warning);

  SearchSpace all_bad{{1.0}, {1}};
  EXPECT_THROW(adra::optimize(2, all_bad), adra::SolverError);
}

TEST(Optimize, SmallPBlowsUp) {
  double prev = 0.0;
  for (double p : {1e-2, 1e-3, 1e-4, 1e-5}) {
    const double v = adra::evaluate_point(10, p, 5).avg_aoi;
    EXPECT_GT(v, prev);
    EXPECT_GT(v, 0.9 / p);
    prev = v;
  }
}

TEST(SweepDelta, InteriorMinimum) {
  std::vector<int> grid;
  for (int d = 1; d <= 100; ++d) grid.push_back(d);
  const auto rows = adra::sweep_delta(20, 1.5 / 20, grid);
  ASSERT_EQ(rows.size(), 100u);
  auto best = rows.begin();
  for (auto it = rows.begin(); it != rows.end(); ++it) {
    EXPECT_TRUE(std::isfinite(it->analytic_avg_aoi));
    EXPECT_GT(it->analytic_avg_aoi, 0.0);
    EXPECT_FALSE(it->sim_avg_aoi.has_value());
    if (it->analytic_avg_aoi < best->analytic_avg_aoi) best = it;
  }
  EXPECT_EQ(best->delta, kDeltaStar20);
  EXPECT_NEAR(best->analytic_avg_aoi, kSweepMin20, 1e-9);
  EXPECT_NEAR(rows.front().analytic_avg_aoi, kSweepDeltaOne20, 1e-9);
  EXPECT_NEAR(rows.front().analytic_avg_aoi, adra::average_aoi_aira(20, 0.075).average_aoi, 1e-12);
  EXPECT_LT(best->analytic_avg_aoi, rows.front().analytic_avg_aoi);
}

TEST(SweepDelta, WithSimulation) {
  adra::SimConfig sim;
  sim.horizon = 200'000;
  sim.seed = 9;
  const std::vector<int> grid{1, 10, 32};
  const auto rows = adra::sweep_delta(20, 0.075, grid, sim);
  for (const auto& r : rows) {
    ASSERT_TRUE(r.sim_avg_aoi && r.sim_stderr && r.empirical_q);
    EXPECT_NEAR(*r.sim_avg_aoi, r.analytic_avg_aoi, 0.05 * r.analytic_avg_aoi) << "delta " << r.delta;
  }
}

TEST(SweepDelta, RejectsEmptyGrid) {
  EXPECT_THROW(adra::sweep_delta(10, 0.1, std::vector<int>{}), adra::InvalidArgument);
}

}  // namespace
