#pragma once

// Decoupled Markov-chain model of threshold-based age-dependent random
// access: each device sees a constant success probability q when it
// transmits, which turns its age into a one-dimensional DTMC
//
//   l -> l+1 w.p. 1            for l <  delta
//   l -> l+1 w.p. 1 - p q      for l >= delta
//   l -> 1   w.p. p q          for l >= delta
//
// and q itself is the fixed point of q = (1 - eta)^(N-1) where eta is the
// stationary per-slot transmit probability.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "adra/bisection.hpp"
#include "adra/error.hpp"

namespace adra {

struct ProtocolConfig {
  int n_devices = 2;   // N
  double cap = 0.0;    // p, access probability once age >= threshold
  int threshold = 1;   // delta, in slots

  void validate() const {
    if (n_devices < 2) {
      throw InvalidArgument("n_devices must be >= 2, got " + std::to_string(n_devices));
    }
    if (!(cap > 0.0 && cap <= 1.0)) {
      std::ostringstream os;
      os << "cap must lie in (0, 1], got " << cap;
      throw InvalidArgument(os.str());
    }
    if (threshold < 1) {
      throw InvalidArgument("threshold must be >= 1, got " + std::to_string(threshold));
    }
  }

  // Region where the fixed point is bracketed, g is monotone and the root
  // is unique: N >= 3 and p <= 2/N. A relative slack of 1e-12 absorbs grid
  // round-off at p = 2/N.
  bool in_guaranteed_regime() const {
    return n_devices >= 3 && cap <= (2.0 / n_devices) * (1.0 + 1e-12);
  }

  // ((N-2)/N)^(N-1): smallest feasible q inside the guaranteed regime.
  double feasible_lower_bound() const {
    const double n = n_devices;
    return std::pow((n - 2.0) / n, n - 1.0);
  }
};

struct FixedPointSolution {
  double q = 1.0;     // success probability given a transmission
  double eta = 0.0;   // unconditional per-slot transmit probability
  int iterations = 0;
  double residual = 0.0;  // |g(q)| at return
  bool regime_warning = false;  // N < 3 or p > 2/N
  bool multiple_roots = false;  // sign scan found more than one crossing
};

struct AoiStatistics {
  double average_aoi = 0.0;  // slots
};

namespace detail {

inline double f_of(const ProtocolConfig& c, double q) {
  return c.threshold * q + 1.0 / c.cap - q;
}

// q^(1/(N-1)) via exp/log; stable for large N. Continuous extension at 0.
inline double root_n_minus_1(double q, int n) {
  if (q <= 0.0) return 0.0;
  return std::exp(std::log(q) / (n - 1));
}

inline double g_unchecked(const ProtocolConfig& c, double q) {
  return 1.0 / f_of(c, q) + root_n_minus_1(q, c.n_devices) - 1.0;
}

inline double eta_of(const ProtocolConfig& c, double q) {
  const double pq = c.cap * q;
  return c.cap / (c.threshold * pq + 1.0 - pq);
}

}  // namespace detail

// g(q) = 1/f(q) + q^(1/(N-1)) - 1 with f(q) = delta q + 1/p - q.
// The fixed point q solves g(q) = 0.
inline double g_eval(const ProtocolConfig& config, double q) {
  config.validate();
  if (!(q > 0.0) || q > 1.0) {
    std::ostringstream os;
    os << "g(q) requires 0 < q <= 1, got " << q;
    throw DomainError(os.str());
  }
  return detail::g_unchecked(config, q);
}

inline constexpr double kDefaultSolverTolerance = 1e-12;
inline constexpr int kMaxBisectionIterations = 200;
inline constexpr int kSignScanPoints = 256;
// Outside the guaranteed regime the root can sit far below 1e-15, so the bracket
// floor is the smallest normal double rather than a fixed small constant.
inline constexpr double kBracketFloor = std::numeric_limits<double>::min();

// Solves g(q) = 0 by bisection on [max((1-p)^(N-1), DBL_MIN), 1]. Since
// eta <= p, (1-p)^(N-1) is a valid lower bound and g is non-positive there;
// g(1) = 1/f(1) > 0. Outside the guaranteed regime a 256-point sign scan picks
// the smallest root and the solution is flagged.
inline FixedPointSolution solve_success_probability(
    const ProtocolConfig& config, double tol = kDefaultSolverTolerance) {
  config.validate();
  if (!(tol > 0.0)) throw InvalidArgument("solver tolerance must be > 0");

  FixedPointSolution sol;
  sol.regime_warning = !config.in_guaranteed_regime();
  const double p = config.cap;
  const int n = config.n_devices;

  if (config.threshold == 1) {
    sol.q = std::pow(1.0 - p, n - 1);
    sol.eta = detail::eta_of(config, sol.q);
    sol.residual = std::abs(detail::g_unchecked(config, sol.q));
    return sol;
  }

  // At q = (1-p)^(N-1), g = 1/f - p <= 0 exactly since f >= 1/p; rounding
  // can push the computed value slightly positive, so its sign is pinned.
  const double analytic_lo = std::pow(1.0 - p, n - 1);
  auto g = [&](double q) {
    const double v = detail::g_unchecked(config, q);
    return q == analytic_lo ? std::min(v, 0.0) : v;
  };
  double lo = std::max(analytic_lo, kBracketFloor);
  double hi = 1.0;
  if (analytic_lo < kBracketFloor && g(lo) > 0.0) {
    std::ostringstream os;
    os << "fixed point lies below the smallest normal double for N=" << n << " p=" << p
       << " delta=" << config.threshold;
    throw SolverError(os.str());
  }

  if (sol.regime_warning) {
    // Sign scan: count strict sign flips (zeros ignored) and keep the first
    // sub-interval whose end values do not share a strict sign.
    int flips = 0;
    int last_sign = 0;
    bool found = false;
    double prev_x = lo;
    double prev_g = g(lo);
    if (prev_g != 0.0) last_sign = prev_g < 0.0 ? -1 : 1;
    double b_lo = lo, b_hi = hi;
    for (int k = 1; k < kSignScanPoints; ++k) {
      const double x = (k == kSignScanPoints - 1)
                           ? hi
                           : lo + (hi - lo) * k / (kSignScanPoints - 1);
      const double gx = g(x);
      if (!found && prev_g * gx <= 0.0) {
        b_lo = prev_x;
        b_hi = x;
        found = true;
      }
      if (gx != 0.0) {
        const int sign = gx < 0.0 ? -1 : 1;
        if (last_sign != 0 && sign != last_sign) ++flips;
        last_sign = sign;
      }
      prev_x = x;
      prev_g = gx;
    }
    if (!found) {
      std::ostringstream os;
      os << "no sign change of g on [" << lo << ", " << hi << "] for N=" << n
         << " p=" << p << " delta=" << config.threshold;
      throw SolverError(os.str());
    }
    sol.multiple_roots = flips > 1;
    lo = b_lo;
    hi = b_hi;
  } else {
    const double g_lo = g(lo), g_hi = g(hi);
    if ((g_lo > 0.0 && g_hi > 0.0) || (g_lo < 0.0 && g_hi < 0.0)) {
      std::ostringstream os;
      os << "g has the same sign at both bracket ends [" << lo << ", " << hi
         << "] for N=" << n << " p=" << p << " delta=" << config.threshold;
      throw SolverError(os.str());
    }
  }

  // Width tolerance scaled by the upper end: never looser than `tol`, and
  // keeps relative accuracy when q is tiny.
  const BisectionResult r = bisect(g, lo, hi, tol * hi, kMaxBisectionIterations);
  sol.q = r.root;
  sol.iterations = r.iterations;
  sol.eta = detail::eta_of(config, sol.q);
  sol.residual = std::abs(g(sol.q));
  return sol;
}

// Stationary age law of the decoupled chain: flat head of height
// head_mass on ages 1..threshold, geometric tail with ratio `decay` beyond.
struct StationaryAgeDistribution {
  int threshold = 1;
  double head_mass = 0.0;
  double decay = 1.0;  // 1 - p q

  static StationaryAgeDistribution from(const ProtocolConfig& config,
                                        const FixedPointSolution& solution) {
    const double pq = config.cap * solution.q;
    StationaryAgeDistribution d;
    d.threshold = config.threshold;
    d.head_mass = pq / (config.threshold * pq + 1.0 - pq);
    d.decay = 1.0 - pq;
    return d;
  }

  double pmf(std::int64_t age) const {
    if (age < 1) throw DomainError("age must be >= 1, got " + std::to_string(age));
    if (age <= threshold) return head_mass;
    return head_mass * std::pow(decay, static_cast<double>(age - threshold));
  }

  // head_mass * (delta + (1-pq)/(pq)); equals 1 up to rounding.
  double total_mass() const {
    return head_mass * threshold + head_mass * decay / (1.0 - decay);
  }

  // P(age > age_limit).
  double tail_mass_beyond(std::int64_t age_limit) const {
    const double geometric_tail = head_mass * decay / (1.0 - decay);
    if (age_limit < threshold) {
      return head_mass * static_cast<double>(threshold - std::max<std::int64_t>(age_limit, 0)) +
             geometric_tail;
    }
    return geometric_tail *
           std::pow(decay, static_cast<double>(age_limit - threshold));
  }

  // sum_{l > age_limit} l * pmf(l), closed form; requires age_limit >= threshold.
  double tail_first_moment_beyond(std::int64_t age_limit) const {
    const double r = decay;
    const double start = static_cast<double>(age_limit + 1);
    const double lead = head_mass * std::pow(r, start - threshold);
    return lead * (start / (1.0 - r) + r / ((1.0 - r) * (1.0 - r)));
  }
};

inline double stationary_pmf(const ProtocolConfig& config,
                             const FixedPointSolution& solution, std::int64_t age) {
  if (age < 1) throw DomainError("age must be >= 1, got " + std::to_string(age));
  return StationaryAgeDistribution::from(config, solution).pmf(age);
}

// delta/2 + 1/(pq) - delta / (2 (delta pq + 1 - pq)). Infinite when pq = 0.
inline AoiStatistics average_aoi_adra(const ProtocolConfig& config,
                                      const FixedPointSolution& solution) {
  config.validate();
  if (!(solution.q >= 0.0 && solution.q <= 1.0)) {
    throw InvalidArgument("solution.q outside [0, 1]");
  }
  const double pq = config.cap * solution.q;
  if (pq == 0.0) return {std::numeric_limits<double>::infinity()};
  const double d = config.threshold;
  return {d / 2.0 + 1.0 / pq - d / (2.0 * (d * pq + 1.0 - pq))};
}

// Age-independent access with probability cap: 1 / (p' (1 - p')^(N-1)).
inline AoiStatistics average_aoi_aira(int n_devices, double cap) {
  if (n_devices < 2) {
    throw InvalidArgument("n_devices must be >= 2, got " + std::to_string(n_devices));
  }
  if (!(cap > 0.0 && cap < 1.0)) {
    std::ostringstream os;
    os << "AIRA average AoI requires 0 < cap < 1, got " << cap;
    throw DomainError(os.str());
  }
  return {1.0 / (cap * std::pow(1.0 - cap, n_devices - 1))};
}

// Solves for q and evaluates the closed-form average AoI.
inline AoiStatistics analytic_average_aoi(const ProtocolConfig& config) {
  return average_aoi_adra(config, solve_success_probability(config));
}

}  // namespace adra
