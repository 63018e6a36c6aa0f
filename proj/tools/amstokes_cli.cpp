// Command-line front end: singular-benchmark generation, adaptive and
// uniform-refinement studies, and regression against the stored reference
// tables.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <optional>

#include "amstokes/driver.hpp"
#include "amstokes/reference_tables.hpp"

using namespace amstokes;

namespace {

nlohmann::json to_json(const KelloggData& d) {
  nlohmann::json j;
  j["alpha"] = d.alpha;
  j["nu"] = d.nu;
  j["a"] = d.a;
  j["b"] = d.b;
  j["c"] = d.c;
  j["d"] = d.d;
  j["max_residual"] = max_abs_residual(d);
  return j;
}

void apply_overrides(RunConfig& cfg, const std::optional<double>& dorfler,
                     const std::optional<double>& rel_err, const std::optional<int>& max_loops,
                     const std::optional<int>& initial_n, const std::optional<std::string>& out) {
  if (dorfler) cfg.dorfler = *dorfler;
  if (rel_err) cfg.stop.rel_err = *rel_err;
  if (max_loops) cfg.stop.max_loops = *max_loops;
  if (initial_n) cfg.initial_n = *initial_n;
  if (out) cfg.output_dir = *out;
}

void print_reports(const std::vector<ErrorReport>& reports) {
  std::printf("%4s %7s %8s %12s %12s %12s %10s %10s %10s\n", "k", "n", "dofs", "eta", "energy",
              "interp", "rel_err", "ind_err", "eff_index");
  for (const auto& r : reports)
    std::printf("%4d %7d %8d %12.6f %12.6f %12.6f %10.6f %10.6f %10.6f\n", r.loop, r.elements,
                r.dofs, r.eta, r.energy_err, r.interp_full_err, r.rel_err, r.ind_err,
                r.eff_index);
}

int cmd_kellogg_solve(double alpha, int init_data, std::uint64_t seed) {
  std::optional<KelloggData> init;
  if (init_data > 0) init = dataset_seed(init_data);
  NewtonReport rep;
  const KelloggData sol = solve_kellogg(alpha, init, &rep, seed);
  std::printf("%s\n", to_json(sol).dump(2).c_str());
  std::fprintf(stderr, "converged after %d seeds, %d newton iterations, max residual %.3e\n",
               rep.seeds_tried, rep.iterations, rep.max_residual);
  return 0;
}

int cmd_run_adaptive(const std::string& config_path, auto&&... overrides) {
  RunConfig cfg = load_config(config_path);
  apply_overrides(cfg, overrides...);
  const AdaptiveResult res = run_adaptive(cfg);
  print_reports(res.reports);
  std::printf("audits: weighted trace %.2e, normal jump %.2e\n", res.max_weighted_trace,
              res.max_normal_jump);
  return 0;
}

int cmd_run_uniform(const std::string& config_path) {
  const RunConfig cfg = load_config(config_path);
  const RateResult r = run_uniform(cfg);
  std::printf("%6s %8s %10s %14s\n", "n", "dofs", "h", "energy_err");
  for (const auto& row : r.rows)
    std::printf("%6d %8d %10.5f %14.6e\n", row.n, row.dofs, row.h, row.energy_err);
  if (r.exact)
    std::printf("errors at solver tolerance: exact\n");
  else
    std::printf("least-squares rate: %.4f\n", r.rate);
  return 0;
}

int cmd_regress_tables() {
  int failures = 0;
  std::printf("== benchmark coefficient tables (solved from 4-decimal seeds)\n");
  for (int id = 1; id <= 5; ++id) {
    const KelloggData seed = dataset_seed(id);
    const KelloggData& sol = dataset(id);
    double dist = std::abs(sol.nu[0] - seed.nu[0]);
    for (int i = 0; i < 4; ++i) {
      dist = std::max(dist, std::abs(sol.a[i] - seed.a[i]));
      dist = std::max(dist, std::abs(sol.b[i] - seed.b[i]));
      dist = std::max(dist, std::abs(sol.c[i] - seed.c[i]));
      dist = std::max(dist, std::abs(sol.d[i] - seed.d[i]));
    }
    const bool ok = dist <= 5e-4 && max_abs_residual(sol) <= 1e-10;
    if (!ok) ++failures;
    std::printf("data%d: alpha=%.2f nu1=%.4f  max seed distance %.2e  residual %.2e  %s\n", id,
                sol.alpha, sol.nu[0], dist, max_abs_residual(sol), ok ? "ok" : "DIFFERS");
    for (int i = 0; i < 4; ++i)
      std::printf("   i=%d  a=% .4f  b=% .4f  c=% .4f  d=% .4f\n", i + 1, sol.a[i], sol.b[i],
                  sol.c[i], sol.d[i]);
  }

  struct Family {
    const char* name;
    SpacePair spaces;
    ThetaMode theta;
    double rel_tol;
    const std::array<golden::AdaptiveRow, 5>* rows;
  };
  const Family families[] = {
      {"RT0xP1, theta=1, tol 0.11", rt0_p1(), ThetaMode::Constant1, 0.11, &golden::kRT1},
      {"RT0xP1, theta=h^2, tol 0.11", rt0_p1(), ThetaMode::MeshSquared, 0.11, &golden::kRTh},
      {"BDM1xP2, theta=h^2, tol 0.02", bdm1_p2(), ThetaMode::MeshSquared, 0.02, &golden::kBDMh},
  };
  for (const auto& fam : families) {
    std::printf("== adaptive runs: %s\n", fam.name);
    std::printf("%6s %10s %10s %8s %8s %10s %10s\n", "data", "ind_err", "eff_index", "k", "n",
                "eta", "energy");
    for (int id = 1; id <= 5; ++id) {
      RunConfig cfg;
      cfg.source = RunConfig::Source::KelloggDataset;
      cfg.dataset_id = id;
      cfg.spaces = fam.spaces;
      cfg.theta = fam.theta;
      cfg.stop.rel_err = fam.rel_tol;
      cfg.stop.max_elements = (*fam.rows)[id - 1].elements;
      cfg.stop.max_loops = 400;
      const AdaptiveResult res = run_adaptive(cfg);
      const auto& r = res.reports.back();
      const auto& g = (*fam.rows)[id - 1];
      const bool ok = std::abs(r.ind_err - g.ind_err) <= 0.05 &&
                      std::abs(r.eff_index - g.eff_index) <= 0.10 &&
                      r.elements >= 0.7 * g.elements && r.elements <= 1.3 * g.elements;
      if (!ok) ++failures;
      std::printf("%6d %10.4f %10.4f %8d %8d %10.4f %10.4f  [ref %.4f %.4f n=%d]  %s\n", id,
                  r.ind_err, r.eff_index, r.loop, r.elements, r.eta, r.energy_err, g.ind_err,
                  g.eff_index, g.elements, ok ? "ok" : "DIFFERS");
      std::fflush(stdout);
    }
  }
  std::printf("%d row(s) outside the reference windows\n", failures);
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive augmented mixed finite elements for Stokes interface problems"};
  app.require_subcommand(1);

  double alpha = 0.5;
  int init_data = 0;
  std::uint64_t seed = 0;
  auto* ks = app.add_subcommand("kellogg-solve", "solve the singular-benchmark coefficient system");
  ks->add_option("--alpha", alpha, "regularity exponent in (0,1)")->required();
  ks->add_option("--init-data", init_data, "seed from a bundled dataset 1..5 instead of multistart");
  ks->add_option("--seed", seed, "random seed for the multistart");

  std::string config_path;
  std::optional<double> dorfler, rel_err;
  std::optional<int> max_loops, initial_n;
  std::optional<std::string> out_dir;
  auto* ra = app.add_subcommand("run-adaptive", "adaptive solve-estimate-mark-refine loop");
  ra->add_option("--config", config_path, "JSON config file")->required();
  ra->add_option("--dorfler", dorfler, "override marking fraction");
  ra->add_option("--rel-err", rel_err, "override stopping threshold");
  ra->add_option("--max-loops", max_loops, "override loop limit");
  ra->add_option("--initial-n", initial_n, "override initial mesh parameter");
  ra->add_option("--output-dir", out_dir, "override output directory");

  std::string uconfig_path;
  auto* ru = app.add_subcommand("run-uniform", "uniform-refinement convergence study");
  ru->add_option("--config", uconfig_path, "JSON config file")->required();

  auto* rt = app.add_subcommand("regress-tables",
                                "reproduce the benchmark tables and diff against stored references");

  try {
    app.parse(argc, argv);
    if (ks->parsed()) return cmd_kellogg_solve(alpha, init_data, seed);
    if (ra->parsed())
      return cmd_run_adaptive(config_path, dorfler, rel_err, max_loops, initial_n, out_dir);
    if (ru->parsed()) return cmd_run_uniform(uconfig_path);
    if (rt->parsed()) return cmd_regress_tables();
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
