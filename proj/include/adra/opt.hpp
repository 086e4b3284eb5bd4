#pragma once

// Exhaustive (p, delta) grid search over the analytic average AoI, plus
// one-dimensional delta sweeps.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "adra/analytic.hpp"
#include "adra/error.hpp"
#include "adra/sim.hpp"

namespace adra {

inline constexpr int kDefaultPGridPoints = 200;
inline constexpr int kDefaultDeltaMaxFactor = 5;

struct SearchSpace {
  std::vector<double> p_grid;
  std::vector<int> delta_grid;

  // p_k = k * p_max / points for k = 1..points, p_max = 2/N unless
  // overridden; delta = 1..delta_max with delta_max = 5N by default.
  static SearchSpace defaults(int n_devices, int p_points = kDefaultPGridPoints,
                              std::optional<double> p_max = std::nullopt,
                              std::optional<int> delta_max = std::nullopt) {
    if (n_devices < 2) throw InvalidArgument("n_devices must be >= 2");
    if (p_points < 1) throw InvalidArgument("p grid needs at least one point");
    const double top = p_max.value_or(std::min(1.0, 2.0 / n_devices));
    const int dmax = delta_max.value_or(kDefaultDeltaMaxFactor * n_devices);
    SearchSpace s;
    for (int k = 1; k <= p_points; ++k) s.p_grid.push_back(top * k / p_points);
    for (int d = 1; d <= dmax; ++d) s.delta_grid.push_back(d);
    return s;
  }

  void validate() const {
    if (p_grid.empty() || delta_grid.empty()) throw InvalidArgument("search grids must be non-empty");
    for (double p : p_grid) {
      if (!(p > 0.0 && p <= 1.0)) throw InvalidArgument("p grid values must lie in (0, 1]");
    }
    for (int d : delta_grid) {
      if (d < 1) throw InvalidArgument("delta grid values must be >= 1");
    }
  }
};

struct SurfacePoint {
  double p = 0.0;
  int delta = 1;
  double q = 0.0;
  double avg_aoi = 0.0;
  bool regime_warning = false;
};

struct FailedPoint {
  double p = 0.0;
  int delta = 1;
  std::string reason;
};

struct OptimumReport {
  double best_p = 0.0;
  int best_delta = 1;
  double best_q = 0.0;
  double best_avg_aoi = 0.0;
  bool regime_warning = false;
  std::vector<SurfacePoint> surface;  // empty unless requested
  std::vector<FailedPoint> failures;
  std::int64_t evaluated = 0;
};

struct OptimizeOptions {
  bool keep_surface = false;
  int threads = 1;
};

// Strict weak "better than": lower AoI, then smaller delta, then smaller p.
inline bool better_point(const SurfacePoint& a, const SurfacePoint& b) {
  if (a.avg_aoi != b.avg_aoi) return a.avg_aoi < b.avg_aoi;
  if (a.delta != b.delta) return a.delta < b.delta;
  return a.p < b.p;
}

inline std::optional<std::size_t> argmin(std::span<const SurfacePoint> surface) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < surface.size(); ++i) {
    if (!std::isfinite(surface[i].avg_aoi)) continue;
    if (!best || better_point(surface[i], surface[*best])) best = i;
  }
  return best;
}

inline SurfacePoint evaluate_point(int n_devices, double p, int delta) {
  const ProtocolConfig cfg{n_devices, p, delta};
  const auto sol = solve_success_probability(cfg);
  return {p, delta, sol.q, average_aoi_adra(cfg, sol).average_aoi, sol.regime_warning};
}

inline OptimumReport optimize(int n_devices, const SearchSpace& space,
                              const OptimizeOptions& options = {}) {
  if (n_devices < 2) throw InvalidArgument("n_devices must be >= 2");
  space.validate();
  const std::size_t np = space.p_grid.size();
  const std::size_t total = np * space.delta_grid.size();

  std::vector<SurfacePoint> points(total);
  std::vector<std::string> errors(total);
  auto eval = [&](std::size_t k) {
    const double p = space.p_grid[k % np];
    const int d = space.delta_grid[k / np];
    try {
      points[k] = evaluate_point(n_devices, p, d);
      if (!std::isfinite(points[k].avg_aoi)) errors[k] = "non-finite average AoI";
    } catch (const std::exception& e) {
      points[k] = {p, d, 0.0, std::numeric_limits<double>::infinity(), true};
      errors[k] = e.what();
      if (errors[k].empty()) errors[k] = "solver failure";
    }
  };

  const int threads = std::max(1, options.threads);
  if (threads == 1) {
    for (std::size_t k = 0; k < total; ++k) eval(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < total; k = next++) eval(k);
      });
    }
  }

  OptimumReport out;
  out.evaluated = static_cast<std::int64_t>(total);
  for (std::size_t k = 0; k < total; ++k) {
    if (!errors[k].empty()) out.failures.push_back({points[k].p, points[k].delta, errors[k]});
  }
  const auto best = argmin(points);
  if (!best) throw SolverError("optimize: every grid point failed");
  out.best_p = points[*best].p;
  out.best_delta = points[*best].delta;
  out.best_q = points[*best].q;
  out.best_avg_aoi = points[*best].avg_aoi;
  out.regime_warning = points[*best].regime_warning;
  if (options.keep_surface) out.surface = std::move(points);
  return out;
}

// One row of a sweep: analytic fields always, simulated fields on request.
struct SweepRecord {
  int n = 0;
  double p = 0.0;
  int delta = 1;
  double analytic_q = 0.0;
  double analytic_avg_aoi = 0.0;
  bool regime_warning = false;
  std::optional<double> sim_avg_aoi;
  std::optional<double> sim_stderr;
  std::optional<double> empirical_q;
};

// Analytic average AoI at each delta for fixed (N, p). When `sim` is set,
// each row also carries a simulation of the matching threshold policy.
// Rows whose fixed point cannot be bracketed propagate the SolverError.
inline std::vector<SweepRecord> sweep_delta(int n_devices, double cap,
                                            std::span<const int> delta_grid,
                                            const std::optional<SimConfig>& sim = std::nullopt) {
  if (delta_grid.empty()) throw InvalidArgument("delta grid must be non-empty");
  std::vector<SweepRecord> rows;
  rows.reserve(delta_grid.size());
  for (int d : delta_grid) {
    const ProtocolConfig cfg{n_devices, cap, d};
    const auto sol = solve_success_probability(cfg);
    SweepRecord r;
    r.n = n_devices;
    r.p = cap;
    r.delta = d;
    r.analytic_q = sol.q;
    r.analytic_avg_aoi = average_aoi_adra(cfg, sol).average_aoi;
    r.regime_warning = sol.regime_warning;
    if (sim) {
      const auto rep = run(n_devices, CapPolicy::adra(d, cap), *sim);
      r.sim_avg_aoi = rep.network_avg_aoi;
      r.sim_stderr = rep.avg_aoi_stderr;
      if (rep.attempts > 0) r.empirical_q = empirical_success_probability(rep);
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace adra
