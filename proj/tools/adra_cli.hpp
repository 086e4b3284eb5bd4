#pragma once

// Command-line front end: solve, simulate, sweep-delta, optimize, compare
// and replay. Every file-producing command writes CSVs plus a key=value
// manifest that `replay` can re-execute.

#include <algorithm>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "adra/adra.hpp"

namespace adra::cli {

enum ExitCode : int {
  kOk = 0,
  kInvalidArgument = 2,
  kSolverFailure = 3,
  kIoFailure = 4,
};

inline constexpr const char* kOutDirEnv = "ADRA_OUT_DIR";

inline std::filesystem::path default_out_dir() {
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return ".";
}

inline std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace detail {

using io::format_double;

inline std::ofstream open_for_write(const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  return os;
}

inline void finish(std::ofstream& os, const std::filesystem::path& path) {
  os.flush();
  if (!os) throw IoError("write failed: " + path.string());
}

// Drops --out-dir (both spellings) so a manifest replays into any directory.
inline std::vector<std::string> strip_out_dir(const std::vector<std::string>& args) {
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--out-dir") {
      ++i;
      continue;
    }
    if (args[i].starts_with("--out-dir=")) continue;
    kept.push_back(args[i]);
  }
  return kept;
}

struct SimFlags {
  std::int64_t horizon = 1'000'000;
  std::int64_t warmup = kDefaultWarmup;
  std::uint64_t seed = 1;
  int replications = 1;
  std::int64_t pmf_cap = 0;
  int threads = 1;

  void add_to(CLI::App* app, bool with_pmf_cap) {
    app->add_option("--horizon", horizon, "total slots per replication, warmup included")
        ->capture_default_str();
    app->add_option("--warmup", warmup, "slots discarded before measuring")->capture_default_str();
    app->add_option("--seed", seed, "64-bit master seed")->capture_default_str();
    app->add_option("--replications", replications, "independent replications")
        ->capture_default_str();
    if (with_pmf_cap) {
      app->add_option("--pmf-cap", pmf_cap,
                      "largest age bucket of the histogram (0: max(100*delta, 1000))")
          ->capture_default_str();
    }
  }

  SimConfig config() const {
    SimConfig c;
    c.horizon = horizon;
    c.warmup = warmup;
    c.seed = seed;
    c.replications = replications;
    c.pmf_cap = pmf_cap;
    c.threads = threads;
    c.validate();
    return c;
  }

  void record(io::Manifest& m) const {
    m.set("param.horizon", std::to_string(horizon));
    m.set("param.warmup", std::to_string(warmup));
    m.set("param.replications", std::to_string(replications));
    m.set("seed", std::to_string(seed));
  }
};

struct Common {
  std::string out_dir;
  std::string tag;
  int threads = 1;
};

}  // namespace detail

class Cli {
 public:
  Cli(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  // args excludes the program name.
  int run(const std::vector<std::string>& args) {
    try {
      return dispatch(args);
    } catch (const InvalidArgument& e) {
      err_ << "error: " << e.what() << '\n';
      return kInvalidArgument;
    } catch (const DomainError& e) {
      err_ << "error: " << e.what() << '\n';
      return kInvalidArgument;
    } catch (const SolverError& e) {
      err_ << "solver failure: " << e.what() << '\n';
      return kSolverFailure;
    } catch (const IoError& e) {
      err_ << "i/o failure: " << e.what() << '\n';
      return kIoFailure;
    } catch (const std::exception& e) {
      err_ << "error: " << e.what() << '\n';
      return kInvalidArgument;
    }
  }

 private:
  std::ostream& out_;
  std::ostream& err_;

  std::filesystem::path resolve_dir(const std::string& flag) const {
    return flag.empty() ? default_out_dir() : std::filesystem::path(flag);
  }

  io::Manifest base_manifest(const std::string& command, const std::vector<std::string>& args,
                             const std::filesystem::path& dir) const {
    io::Manifest m;
    m.set("tool", "adra");
    m.set("version", std::string(kVersion));
    m.set("command", command);
    m.set("timestamp", utc_timestamp());
    m.set("out_dir", dir.string());
    const auto kept = detail::strip_out_dir(args);
    m.set("arg.count", std::to_string(kept.size()));
    for (std::size_t i = 0; i < kept.size(); ++i) m.set("arg." + std::to_string(i), kept[i]);
    return m;
  }

  void write_manifest(const io::Manifest& m, const std::filesystem::path& path) {
    auto os = detail::open_for_write(path);
    m.write(os);
    detail::finish(os, path);
    out_ << "wrote " << path.string() << '\n';
  }

  int dispatch(const std::vector<std::string>& args) {
    CLI::App app{"Threshold-based age-dependent random access: analytics, simulation, search",
                 "adra"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    // solve
    int solve_n = 0;
    std::string solve_p;
    int solve_delta = 1;
    double solve_tol = kDefaultSolverTolerance;
    auto* solve = app.add_subcommand("solve", "solve the fixed point and print q, eta, average AoI");
    solve->add_option("--n", solve_n, "number of devices N")->required();
    solve->add_option("--p", solve_p, "access probability (number or c/N)")->required();
    solve->add_option("--delta", solve_delta, "age threshold")->capture_default_str();
    solve->add_option("--tol", solve_tol, "bisection bracket width")->capture_default_str();

    // simulate
    int sim_n = 0;
    std::string sim_policy = "adra";
    std::string sim_p;
    int sim_delta = 1;
    std::string sim_table;
    detail::SimFlags sim_flags;
    detail::Common sim_common{"", "simulate", 1};
    auto* simulate = app.add_subcommand("simulate", "run the slot simulator and write pmf/summary CSVs");
    simulate->add_option("--n", sim_n, "number of devices N")->required();
    simulate->add_option("--policy", sim_policy, "adra | aira | general")
        ->check(CLI::IsMember({"adra", "aira", "general"}))
        ->capture_default_str();
    simulate->add_option("--p", sim_p, "access probability (number or c/N)");
    simulate->add_option("--delta", sim_delta, "age threshold (adra)")->capture_default_str();
    simulate->add_option("--table", sim_table, "comma-separated CAP vector (general)");
    sim_flags.add_to(simulate, true);
    simulate->add_option("--threads", sim_common.threads, "worker threads")->capture_default_str();
    simulate->add_option("--out-dir", sim_common.out_dir, "output directory (default $ADRA_OUT_DIR or .)");
    simulate->add_option("--tag", sim_common.tag, "output file prefix")->capture_default_str();

    // sweep-delta
    int sw_n = 0;
    std::string sw_p;
    std::string sw_delta;
    bool sw_simulate = false;
    detail::SimFlags sw_flags;
    detail::Common sw_common{"", "sweep_delta", 1};
    auto* sweep = app.add_subcommand("sweep-delta", "average AoI versus threshold at fixed N, p");
    sweep->add_option("--n", sw_n, "number of devices N")->required();
    sweep->add_option("--p", sw_p, "access probability (number or c/N)")->required();
    sweep->add_option("--delta", sw_delta, "threshold range a..b[:step] or list (default 1..5N)");
    sweep->add_flag("--simulate", sw_simulate, "attach simulated average AoI to every row");
    sw_flags.add_to(sweep, false);
    sweep->add_option("--threads", sw_common.threads, "worker threads")->capture_default_str();
    sweep->add_option("--out-dir", sw_common.out_dir, "output directory (default $ADRA_OUT_DIR or .)");
    sweep->add_option("--tag", sw_common.tag, "output file prefix")->capture_default_str();

    // optimize
    int op_n = 0;
    int op_points = kDefaultPGridPoints;
    std::string op_p_max;
    int op_delta_max = 0;
    bool op_above = false;
    bool op_surface = false;
    detail::Common op_common{"", "optimize", 1};
    auto* optimize_cmd = app.add_subcommand("optimize", "two-dimensional (p, delta) grid search");
    optimize_cmd->add_option("--n", op_n, "number of devices N")->required();
    optimize_cmd->add_option("--p-points", op_points, "p grid size")->capture_default_str();
    optimize_cmd->add_option("--p-max", op_p_max, "largest p on the grid (default 2/N)");
    optimize_cmd->add_option("--delta-max", op_delta_max, "largest threshold (default 5N)");
    optimize_cmd->add_flag("--allow-above-2-over-n", op_above, "permit --p-max above 2/N");
    optimize_cmd->add_flag("--surface", op_surface, "also write the full evaluated surface");
    optimize_cmd->add_option("--threads", op_common.threads, "worker threads")->capture_default_str();
    optimize_cmd->add_option("--out-dir", op_common.out_dir, "output directory (default $ADRA_OUT_DIR or .)");
    optimize_cmd->add_option("--tag", op_common.tag, "output file prefix")->capture_default_str();

    // compare
    std::string cmp_n = "10,20,50,100";
    int cmp_points = kDefaultPGridPoints;
    int cmp_delta_factor = kDefaultDeltaMaxFactor;
    detail::Common cmp_common{"", "compare", 1};
    auto* compare = app.add_subcommand("compare", "AIRA at p=1/N versus optimized ADRA for each N");
    compare->add_option("--n", cmp_n, "network sizes: list or a..b[:step]")->capture_default_str();
    compare->add_option("--p-points", cmp_points, "p grid size")->capture_default_str();
    compare->add_option("--delta-max-factor", cmp_delta_factor, "delta grid is 1..factor*N")
        ->capture_default_str();
    compare->add_option("--threads", cmp_common.threads, "worker threads")->capture_default_str();
    compare->add_option("--out-dir", cmp_common.out_dir, "output directory (default $ADRA_OUT_DIR or .)");
    compare->add_option("--tag", cmp_common.tag, "output file prefix")->capture_default_str();

    // replay
    std::string rp_manifest;
    std::string rp_out_dir;
    auto* replay = app.add_subcommand("replay", "re-run the command recorded in a manifest");
    replay->add_option("--manifest", rp_manifest, "manifest file")->required();
    replay->add_option("--out-dir", rp_out_dir, "override the recorded output directory");

    try {
      std::vector<std::string> reversed(args.rbegin(), args.rend());
      app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
      out_ << app.help();
      return kOk;
    } catch (const CLI::CallForAllHelp&) {
      out_ << app.help("", CLI::AppFormatMode::All);
      return kOk;
    } catch (const CLI::CallForVersion&) {
      out_ << kVersion << '\n';
      return kOk;
    } catch (const CLI::ParseError& e) {
      err_ << "error: " << e.what() << '\n';
      return kInvalidArgument;
    }

    if (*solve) return cmd_solve(solve_n, solve_p, solve_delta, solve_tol);
    if (*simulate) {
      sim_flags.threads = sim_common.threads;
      return cmd_simulate(args, sim_n, sim_policy, sim_p, sim_delta, sim_table, sim_flags, sim_common);
    }
    if (*sweep) {
      sw_flags.threads = sw_common.threads;
      return cmd_sweep_delta(args, sw_n, sw_p, sw_delta, sw_simulate, sw_flags, sw_common);
    }
    if (*optimize_cmd) {
      return cmd_optimize(args, op_n, op_points, op_p_max, op_delta_max, op_above, op_surface,
                          op_common);
    }
    if (*compare) return cmd_compare(args, cmp_n, cmp_points, cmp_delta_factor, cmp_common);
    if (*replay) return cmd_replay(rp_manifest, rp_out_dir);
    return kInvalidArgument;
  }

  int cmd_solve(int n, const std::string& p_text, int delta, double tol) {
    const ProtocolConfig cfg{n, io::parse_probability(p_text, n), delta};
    const auto sol = solve_success_probability(cfg, tol);
    const auto aoi = average_aoi_adra(cfg, sol);
    out_ << "n=" << cfg.n_devices << '\n'
         << "p=" << io::format_double(cfg.cap) << '\n'
         << "delta=" << cfg.threshold << '\n'
         << "q=" << io::format_double(sol.q) << '\n'
         << "eta=" << io::format_double(sol.eta) << '\n'
         << "avg_aoi=" << io::format_double(aoi.average_aoi) << '\n'
         << "iterations=" << sol.iterations << '\n'
         << "residual=" << io::format_double(sol.residual) << '\n'
         << "regime_warning=" << (sol.regime_warning ? 1 : 0) << '\n'
         << "multiple_roots=" << (sol.multiple_roots ? 1 : 0) << '\n';
    if (cfg.cap < 1.0) {
      out_ << "aira_avg_aoi_same_p=" << io::format_double(average_aoi_aira(n, cfg.cap).average_aoi)
           << '\n';
    }
    return kOk;
  }

  int cmd_simulate(const std::vector<std::string>& args, int n, const std::string& policy_name,
                   const std::string& p_text, int delta, const std::string& table_text,
                   const detail::SimFlags& flags, const detail::Common& common) {
    if (n < 1) throw InvalidArgument("--n must be >= 1");
    std::optional<double> p;
    if (!p_text.empty()) p = io::parse_probability(p_text, n);

    std::optional<CapPolicy> policy;
    std::optional<ProtocolConfig> analytic_cfg;
    std::string table_resolved;
    if (policy_name == "general") {
      if (table_text.empty()) throw InvalidArgument("--policy general needs --table");
      const auto table = io::parse_double_list(table_text, "--table");
      for (std::size_t i = 0; i < table.size(); ++i) {
        table_resolved += (i ? ";" : "") + io::format_double(table[i]);
      }
      policy = CapPolicy::general(table);
    } else {
      if (!p) throw InvalidArgument("--policy " + policy_name + " needs --p");
      if (!(*p > 0.0 && *p <= 1.0)) throw InvalidArgument("--p must lie in (0, 1]");
      const int threshold = policy_name == "aira" ? 1 : delta;
      policy = policy_name == "aira" ? CapPolicy::aira(*p) : CapPolicy::adra(threshold, *p);
      if (n >= 2) analytic_cfg = ProtocolConfig{n, *p, threshold};
    }
    const SimConfig sim = flags.config();
    const auto report = adra::run(n, *policy, sim);

    std::optional<FixedPointSolution> sol;
    std::optional<StationaryAgeDistribution> law;
    std::optional<double> analytic_aoi;
    if (analytic_cfg) {
      sol = solve_success_probability(*analytic_cfg);
      law = StationaryAgeDistribution::from(*analytic_cfg, *sol);
      analytic_aoi = average_aoi_adra(*analytic_cfg, *sol).average_aoi;
    }

    const auto dir = resolve_dir(common.out_dir);
    const auto pmf_path = dir / (common.tag + "_pmf.csv");
    const auto summary_path = dir / (common.tag + "_summary.csv");
    const auto devices_path = dir / (common.tag + "_devices.csv");

    {
      auto os = detail::open_for_write(pmf_path);
      io::write_csv_row(os, {"age", "analytic_pmf", "empirical_pmf"});
      for (std::int64_t l = 1; l <= report.pmf_cap; ++l) {
        io::write_csv_row(os, {std::to_string(l), law ? io::format_double(law->pmf(l)) : "",
                               io::format_double(report.empirical_pmf[static_cast<std::size_t>(l - 1)])});
      }
      io::write_csv_row(os, {"overflow",
                             law ? io::format_double(law->tail_mass_beyond(report.pmf_cap)) : "",
                             io::format_double(report.overflow_mass)});
      detail::finish(os, pmf_path);
    }
    {
      auto os = detail::open_for_write(summary_path);
      io::write_csv_row(os, {"n", "policy", "p", "delta", "horizon", "warmup", "replications",
                             "seed", "pmf_cap", "network_avg_aoi", "avg_aoi_stderr",
                             "stderr_method", "analytic_avg_aoi", "analytic_q", "empirical_q",
                             "success_rate", "collision_rate", "idle_rate", "overflow_mass",
                             "pmf_tv_distance", "regime_warning"});
      const std::string empirical_q =
          report.attempts > 0 ? io::format_double(empirical_success_probability(report)) : "";
      io::write_csv_row(
          os, {std::to_string(n), policy_name, p ? io::format_double(*p) : "",
               policy_name == "adra" ? std::to_string(delta) : (policy_name == "aira" ? "1" : ""),
               std::to_string(sim.horizon), std::to_string(sim.warmup),
               std::to_string(sim.replications), std::to_string(sim.seed),
               std::to_string(report.pmf_cap), io::format_double(report.network_avg_aoi),
               io::format_double(report.avg_aoi_stderr),
               report.stderr_method == StderrMethod::Replications ? "replications" : "batch_means",
               io::format_optional(analytic_aoi), sol ? io::format_double(sol->q) : "", empirical_q,
               io::format_double(report.success_rate), io::format_double(report.collision_rate),
               io::format_double(report.idle_rate), io::format_double(report.overflow_mass),
               law ? io::format_double(pmf_total_variation(report, *law)) : "",
               sol ? (sol->regime_warning ? "1" : "0") : ""});
      detail::finish(os, summary_path);
    }
    {
      auto os = detail::open_for_write(devices_path);
      io::write_csv_row(os, {"device", "avg_aoi", "stderr"});
      for (int i = 0; i < n; ++i) {
        io::write_csv_row(os, {std::to_string(i),
                               io::format_double(report.per_device_avg_aoi[static_cast<std::size_t>(i)]),
                               io::format_double(report.per_device_stderr[static_cast<std::size_t>(i)])});
      }
      detail::finish(os, devices_path);
    }

    auto m = base_manifest("simulate", args, dir);
    m.set("param.n", std::to_string(n));
    m.set("param.policy", policy_name);
    m.set("param.p", p ? io::format_double(*p) : "");
    m.set("param.delta", std::to_string(delta));
    m.set("param.table", table_resolved);
    m.set("param.pmf_cap", std::to_string(report.pmf_cap));
    flags.record(m);
    write_manifest(m, dir / (common.tag + "_manifest.txt"));

    out_ << "wrote " << pmf_path.string() << '\n'
         << "wrote " << summary_path.string() << '\n'
         << "wrote " << devices_path.string() << '\n'
         << "network_avg_aoi=" << io::format_double(report.network_avg_aoi)
         << " stderr=" << io::format_double(report.avg_aoi_stderr);
    if (analytic_aoi) out_ << " analytic_avg_aoi=" << io::format_double(*analytic_aoi);
    out_ << '\n';
    return kOk;
  }

  int cmd_sweep_delta(const std::vector<std::string>& args, int n, const std::string& p_text,
                      const std::string& delta_text, bool simulate, const detail::SimFlags& flags,
                      const detail::Common& common) {
    if (n < 2) throw InvalidArgument("--n must be >= 2");
    const double p = io::parse_probability(p_text, n);
    const std::vector<int> grid = delta_text.empty()
                                      ? io::parse_int_list("1.." + std::to_string(5 * n), "--delta")
                                      : io::parse_int_list(delta_text, "--delta");
    std::optional<SimConfig> sim;
    if (simulate) sim = flags.config();
    const auto rows = sweep_delta(n, p, grid, sim);

    const auto dir = resolve_dir(common.out_dir);
    const auto path = dir / (common.tag + "_sweep.csv");
    {
      auto os = detail::open_for_write(path);
      write_sweep_csv(os, rows);
      detail::finish(os, path);
    }
    auto m = base_manifest("sweep-delta", args, dir);
    m.set("param.n", std::to_string(n));
    m.set("param.p", io::format_double(p));
    m.set("param.delta_first", std::to_string(grid.front()));
    m.set("param.delta_last", std::to_string(grid.back()));
    m.set("param.delta_count", std::to_string(grid.size()));
    m.set("param.simulate", simulate ? "1" : "0");
    if (simulate) flags.record(m);
    write_manifest(m, dir / (common.tag + "_manifest.txt"));

    const auto best = std::min_element(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
      return a.analytic_avg_aoi < b.analytic_avg_aoi;
    });
    out_ << "wrote " << path.string() << '\n'
         << "min_delta=" << best->delta << " min_avg_aoi=" << io::format_double(best->analytic_avg_aoi)
         << '\n';
    return kOk;
  }

  static void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& rows) {
    io::write_csv_row(os, {"n", "p", "delta", "analytic_q", "analytic_avg_aoi", "regime_warning",
                           "sim_avg_aoi", "sim_stderr", "empirical_q"});
    for (const auto& r : rows) {
      io::write_csv_row(os, {std::to_string(r.n), io::format_double(r.p), std::to_string(r.delta),
                             io::format_double(r.analytic_q), io::format_double(r.analytic_avg_aoi),
                             r.regime_warning ? "1" : "0", io::format_optional(r.sim_avg_aoi),
                             io::format_optional(r.sim_stderr), io::format_optional(r.empirical_q)});
    }
  }

  SearchSpace build_space(int n, int points, const std::string& p_max_text, int delta_max,
                          bool allow_above) const {
    std::optional<double> p_max;
    if (!p_max_text.empty()) {
      p_max = io::parse_probability(p_max_text, n);
      if (*p_max > (2.0 / n) * (1.0 + 1e-12) && !allow_above) {
        throw InvalidArgument("--p-max above 2/N requires --allow-above-2-over-n");
      }
      if (!(*p_max > 0.0 && *p_max <= 1.0)) throw InvalidArgument("--p-max must lie in (0, 1]");
    }
    std::optional<int> dmax;
    if (delta_max > 0) dmax = delta_max;
    return SearchSpace::defaults(n, points, p_max, dmax);
  }

  int cmd_optimize(const std::vector<std::string>& args, int n, int points,
                   const std::string& p_max_text, int delta_max, bool allow_above, bool surface,
                   const detail::Common& common) {
    const auto space = build_space(n, points, p_max_text, delta_max, allow_above);
    const auto rep = optimize(n, space, {surface, common.threads});
    const double aira = average_aoi_aira(n, 1.0 / n).average_aoi;

    const auto dir = resolve_dir(common.out_dir);
    const auto path = dir / (common.tag + "_best.csv");
    {
      auto os = detail::open_for_write(path);
      io::write_csv_row(os, {"n", "best_p", "best_delta", "best_q", "best_avg_aoi",
                             "aira_avg_aoi", "regime_warning", "evaluated", "failed"});
      io::write_csv_row(os, {std::to_string(n), io::format_double(rep.best_p),
                             std::to_string(rep.best_delta), io::format_double(rep.best_q),
                             io::format_double(rep.best_avg_aoi), io::format_double(aira),
                             rep.regime_warning ? "1" : "0", std::to_string(rep.evaluated),
                             std::to_string(rep.failures.size())});
      detail::finish(os, path);
    }
    if (surface) {
      const auto spath = dir / (common.tag + "_surface.csv");
      auto os = detail::open_for_write(spath);
      io::write_csv_row(os, {"p", "delta", "q", "avg_aoi", "regime_warning"});
      for (const auto& pt : rep.surface) {
        io::write_csv_row(os, {io::format_double(pt.p), std::to_string(pt.delta),
                               io::format_double(pt.q), io::format_double(pt.avg_aoi),
                               pt.regime_warning ? "1" : "0"});
      }
      detail::finish(os, spath);
      out_ << "wrote " << spath.string() << '\n';
    }
    for (const auto& f : rep.failures) {
      err_ << "skipped p=" << io::format_double(f.p) << " delta=" << f.delta << ": " << f.reason
           << '\n';
    }
    auto m = base_manifest("optimize", args, dir);
    m.set("param.n", std::to_string(n));
    m.set("param.p_points", std::to_string(space.p_grid.size()));
    m.set("param.p_max", io::format_double(space.p_grid.back()));
    m.set("param.delta_max", std::to_string(space.delta_grid.back()));
    write_manifest(m, dir / (common.tag + "_manifest.txt"));
    out_ << "wrote " << path.string() << '\n'
         << "best_p=" << io::format_double(rep.best_p) << " best_delta=" << rep.best_delta
         << " best_avg_aoi=" << io::format_double(rep.best_avg_aoi)
         << " aira_avg_aoi=" << io::format_double(aira) << '\n';
    return kOk;
  }

  int cmd_compare(const std::vector<std::string>& args, const std::string& n_text, int points,
                  int delta_factor, const detail::Common& common) {
    const auto ns = io::parse_int_list(n_text, "--n");
    if (delta_factor < 1) throw InvalidArgument("--delta-max-factor must be >= 1");
    const auto dir = resolve_dir(common.out_dir);
    const auto path = dir / (common.tag + ".csv");
    std::vector<std::vector<std::string>> rows;
    for (int n : ns) {
      if (n < 2) throw InvalidArgument("compare needs N >= 2");
      const double aira_p = 1.0 / n;
      const double aira = average_aoi_aira(n, aira_p).average_aoi;
      const auto rep = optimize(
          n, SearchSpace::defaults(n, points, std::nullopt, delta_factor * n), {false, common.threads});
      const bool warn = rep.regime_warning || n < 3;
      rows.push_back({std::to_string(n), io::format_double(aira_p), io::format_double(aira),
                      io::format_double(rep.best_p), std::to_string(rep.best_delta),
                      io::format_double(rep.best_q), io::format_double(rep.best_avg_aoi),
                      io::format_double(aira - rep.best_avg_aoi), warn ? "1" : "0"});
    }
    {
      auto os = detail::open_for_write(path);
      io::write_csv_row(os, {"n", "aira_p", "aira_avg_aoi", "adra_best_p", "adra_best_delta",
                             "adra_best_q", "adra_avg_aoi", "gap", "regime_warning"});
      for (const auto& r : rows) io::write_csv_row(os, r);
      detail::finish(os, path);
    }
    auto m = base_manifest("compare", args, dir);
    m.set("param.n", n_text);
    m.set("param.p_points", std::to_string(points));
    m.set("param.delta_max_factor", std::to_string(delta_factor));
    write_manifest(m, dir / (common.tag + "_manifest.txt"));
    out_ << "wrote " << path.string() << '\n';
    return kOk;
  }

  int cmd_replay(const std::string& manifest_path, const std::string& out_dir_override) {
    std::ifstream is(manifest_path);
    if (!is) throw IoError("cannot open manifest " + manifest_path);
    const auto m = io::Manifest::parse(is);
    const auto count_text = m.get("arg.count");
    if (!count_text) throw InvalidArgument("manifest has no arg.count");
    const auto count = io::parse_int(*count_text, "arg.count");
    std::vector<std::string> args;
    for (std::int64_t i = 0; i < count; ++i) {
      const auto a = m.get("arg." + std::to_string(i));
      if (!a) throw InvalidArgument("manifest is missing arg." + std::to_string(i));
      args.push_back(*a);
    }
    if (args.empty() || args.front() == "replay") throw InvalidArgument("manifest has no replayable command");
    const std::string dir = !out_dir_override.empty() ? out_dir_override : m.get("out_dir").value_or("");
    if (!dir.empty()) {
      args.push_back("--out-dir");
      args.push_back(dir);
    }
    return dispatch(args);
  }
};

inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  return Cli(out, err).run(args);
}

}  // namespace adra::cli
