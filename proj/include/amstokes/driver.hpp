#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "amstokes/assembly.hpp"
#include "amstokes/estimator.hpp"
#include "amstokes/kellogg.hpp"
#include "amstokes/mesh.hpp"

namespace amstokes {

struct StoppingRule {
  double rel_err = 0.0;  // <= 0 disables the threshold
  int max_loops = 400;
  int max_elements = 200000;
};

struct RunConfig {
  enum class Source { KelloggDataset, KelloggAlpha, Manufactured };
  Source source = Source::KelloggDataset;
  int dataset_id = 1;
  double alpha = 0.5;                                  // KelloggAlpha
  std::array<double, 4> manufactured_nu = {10.0, 1.0, 10.0, 1.0};
  SpacePair spaces = rt0_p1();
  ThetaMode theta = ThetaMode::Constant1;
  Variant variant = Variant::NonSymmetric;
  double dorfler = 0.15;
  StoppingRule stop;
  int initial_n = 4;
  std::string output_dir;  // empty disables file output
  std::uint64_t seed = 0;
  Exec exec = Exec::Parallel;
};

/// Config file is a single JSON document; missing keys keep their defaults.
RunConfig load_config(const std::string& path);

/// Exact fields of the singular benchmark (body force is zero).
ExactFlow kellogg_flow(const KelloggData& data);

/// Smooth divergence-free vortex compatible with viscosity jumps across the
/// axes: u = curl(sin^4(pi x) sin^4(pi y)), p = cos(pi x) cos(pi y), f derived
/// per subdomain.
ExactFlow manufactured_flow(const Viscosity& nu);

/// Viscosity and fields selected by the config.
struct ProblemSetup {
  Viscosity nu;
  ExactFlow flow;
};
ProblemSetup make_problem(const RunConfig& config);

struct AdaptiveResult {
  std::vector<ErrorReport> reports;
  Mesh final_mesh;
  // audit maxima over all loops: weighted-trace integral of sigma_h and
  // relative normal-component jumps across interior edges
  double max_weighted_trace = 0.0;
  double max_normal_jump = 0.0;
};

/// SOLVE -> ESTIMATE -> MARK -> REFINE until the stopping rule fires. Emits
/// report.csv, final mesh exports and plot data when output_dir is set. On a
/// solver failure the partial report is written before the exception leaves.
AdaptiveResult run_adaptive(const RunConfig& config);

struct RateRow {
  int n = 0;
  int dofs = 0;
  double h = 0.0;
  double energy_err = 0.0;
};

struct RateResult {
  std::vector<RateRow> rows;
  double rate = 0.0;  // least-squares slope of log(err) against log(h)
  bool exact = false; // all errors at solver tolerance
};

/// Uniform-refinement study on n = 4, 8, 16, 32.
RateResult run_uniform(const RunConfig& config);

void write_reports_csv(const std::vector<ErrorReport>& reports, const std::string& path);

}  // namespace amstokes
