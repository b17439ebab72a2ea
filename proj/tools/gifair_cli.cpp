// Command-line front end: run, sweep, check-identity, bench-convergence,
// diagnose-gamma. Exit codes: 0 ok, 1 a check failed, 2 config, 3 divergence,
// 4 io.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gifair/errors.hpp"
#include "gifair/harness/experiment.hpp"
#include "gifair/harness/gamma.hpp"
#include "gifair/harness/suites.hpp"
#include "gifair/harness/sweep.hpp"
#include "gifair/version.hpp"

namespace {

using nlohmann::json;

enum Exit : int { kOk = 0, kCheckFailed = 1, kConfig = 2, kDivergence = 3, kIo = 4 };

int report(const char* category, const std::string& message, int code,
           const json& extra = json::object()) {
  json j = extra;
  j["error"] = category;
  j["message"] = message;
  std::cerr << j.dump() << "\n";
  return code;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw gifair::IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw gifair::IoError("write failed for " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw gifair::IoError("cannot create " + dir.string() + ": " + ec.message());
}

struct Common {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Override the master seed");
  cmd->add_option("--out-dir", c.out_dir, "Directory for output files");
}

gifair::ExperimentConfig load_with_overrides(const std::string& path, const Common& c) {
  auto cfg = gifair::load_config(path);
  if (c.seed) cfg.seed = *c.seed;
  if (c.out_dir) cfg.output_dir = *c.out_dir;
  return cfg;
}

json spread(const gifair::SpreadSummary& s) {
  return {{"mean", s.mean}, {"variance", s.variance}, {"discrepancy", s.discrepancy}};
}

int cmd_run(const std::string& path, const Common& c) {
  const auto cfg = load_with_overrides(path, c);
  const auto r = gifair::run_experiment_to_disk(cfg);
  json out{{"output_dir", cfg.output_dir},
           {"rounds_recorded", r.trajectory.size()},
           {"lambda", r.lambda},
           {"lambda_max", r.lambda_max},
           {"test_loss", spread(r.loss.test)}};
  std::cout << out.dump(2) << "\n";
  return kOk;
}

int cmd_sweep(const std::string& path, const std::vector<double>& grid, std::size_t workers,
              const Common& c) {
  const auto cfg = load_with_overrides(path, c);
  const auto result = gifair::sweep_lambda(cfg, grid, workers);
  const std::filesystem::path dir(cfg.output_dir);
  ensure_dir(dir);
  write_file(dir / "sweep.csv", gifair::sweep_csv(result));
  const auto& best = result.rows[result.best];
  json summary{{"best_fraction", best.fraction},
               {"best_lambda", best.lambda},
               {"rule", "largest validation loss-variance reduction with validation mean loss "
                        "within 1% of the smallest-lambda row"},
               {"rows", result.rows.size()}};
  write_file(dir / "sweep.json", summary.dump(2) + "\n");
  std::cout << summary.dump(2) << "\n";
  return kOk;
}

int cmd_check_identity(std::size_t trials, const Common& c) {
  const auto r = gifair::identity_fuzz(trials, c.seed.value_or(1));
  json out{{"trials", r.trials},
           {"failures", r.failures},
           {"max_scaled_error", r.max_scaled_error},
           {"trials_with_ties", r.trials_with_ties},
           {"tolerance", 1e-10}};
  if (c.out_dir) {
    ensure_dir(*c.out_dir);
    write_file(std::filesystem::path(*c.out_dir) / "identity.json", out.dump(2) + "\n");
  }
  std::cout << out.dump(2) << "\n";
  return r.failures == 0 ? kOk : kCheckFailed;
}

int cmd_bench(const std::string& suite, std::size_t seeds, const Common& c) {
  const std::uint64_t base = c.seed.value_or(1);
  const std::filesystem::path dir(c.out_dir.value_or("out/bench"));
  ensure_dir(dir);
  json runs = json::array();
  double mean_slope = 0.0, mean_ratio = 0.0;
  for (std::size_t i = 0; i < seeds; ++i) {
    const std::uint64_t seed = base + i;
    const auto s = gifair::make_suite(suite, seed);
    const auto r = gifair::run_suite(s);
    write_file(dir / (suite + "_seed" + std::to_string(seed) + ".csv"),
               gifair::metrics_csv(r.training.trajectory));
    runs.push_back({{"seed", seed},
                    {"slope", r.slope},
                    {"min_so_far_ratio", r.min_so_far_ratio},
                    {"h_star", std::isnan(r.h_star) ? json(nullptr) : json(r.h_star)},
                    {"min_weight", r.training.audit.min_weight},
                    {"max_weight", r.training.audit.max_weight}});
    mean_slope += r.slope / static_cast<double>(seeds);
    mean_ratio += r.min_so_far_ratio / static_cast<double>(seeds);
  }
  const auto probe = gifair::make_suite(suite, base);
  json out{{"suite", suite},
           {"field", probe.field == gifair::SlopeField::objective_gap ? "objective_gap"
                                                                      : "grad_norm_sq"},
           {"first_step", probe.first_step},
           {"last_step", probe.last_step},
           {"mean_slope", mean_slope},
           {"mean_min_so_far_ratio", mean_ratio},
           {"runs", runs}};
  write_file(dir / (suite + "_summary.json"), out.dump(2) + "\n");
  std::cout << out.dump(2) << "\n";
  return kOk;
}

int cmd_gamma(const std::string& path, const Common& c) {
  const auto cfg = load_with_overrides(path, c);
  const auto s = gifair::build_scenario(cfg);
  const gifair::FairnessConfig fairness(s.lambda, s.federation);
  const auto g = gifair::gamma_diagnostics(s.train, fairness, s.theta0);
  json out{{"gamma_k", g.gamma_k},
           {"gamma_max", g.gamma_max},
           {"h_star", g.h_star},
           {"exact", g.exact},
           {"ranks_consistent", g.ranks_consistent},
           {"duality_gap", g.duality_gap},
           {"lambda", s.lambda},
           {"lambda_max", s.lambda_max}};
  if (c.out_dir) {
    ensure_dir(*c.out_dir);
    write_file(std::filesystem::path(*c.out_dir) / "gamma.json", out.dump(2) + "\n");
  }
  std::cout << out.dump(2) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fair federated learning simulator"};
  app.set_version_flag("--version", std::string(gifair::kVersion));
  app.require_subcommand(1);

  Common run_c, sweep_c, id_c, bench_c, gamma_c;
  std::string run_path, sweep_path, gamma_path, suite;
  std::vector<double> grid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::size_t sweep_workers = 1, trials = 1000, seeds = 5;

  auto* run = app.add_subcommand("run", "Run one experiment from a config or manifest");
  run->add_option("config", run_path, "JSON config or manifest")->required();
  add_common(run, run_c);

  auto* sweep = app.add_subcommand("sweep", "Train once per lambda fraction and tabulate spread");
  sweep->add_option("config", sweep_path, "JSON config")->required();
  sweep->add_option("--grid", grid, "Fractions of lambda_max in [0, 1)")->delimiter(',');
  sweep->add_option("--workers", sweep_workers, "Runs in parallel");
  add_common(sweep, sweep_c);

  auto* ident = app.add_subcommand("check-identity", "Fuzz the two forms of the fair objective");
  ident->add_option("--trials", trials, "Number of random trials");
  add_common(ident, id_c);

  auto* bench = app.add_subcommand("bench-convergence", "Measure empirical convergence rates");
  bench->add_option("suite", suite, "strongly_convex or nonconvex")->required();
  bench->add_option("--seeds", seeds, "Number of consecutive seeds");
  add_common(bench, bench_c);

  auto* gamma = app.add_subcommand("diagnose-gamma", "Report Gamma_K and Gamma_max for a config");
  gamma->add_option("config", gamma_path, "JSON config")->required();
  add_common(gamma, gamma_c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report("config", e.what(), kConfig);
  }

  try {
    if (*run) return cmd_run(run_path, run_c);
    if (*sweep) return cmd_sweep(sweep_path, grid, sweep_workers, sweep_c);
    if (*ident) return cmd_check_identity(trials, id_c);
    if (*bench) return cmd_bench(suite, seeds, bench_c);
    if (*gamma) return cmd_gamma(gamma_path, gamma_c);
  } catch (const gifair::DivergenceError& e) {
    return report("divergence", e.what(), kDivergence,
                  {{"round", e.round()}, {"step", e.step()}, {"client", e.client()}});
  } catch (const gifair::IoError& e) {
    return report("io", e.what(), kIo);
  } catch (const std::invalid_argument& e) {
    return report("config", e.what(), kConfig);
  } catch (const std::exception& e) {
    return report("internal", e.what(), kCheckFailed);
  }
  return kOk;
}
