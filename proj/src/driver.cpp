#include "amstokes/driver.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <stdexcept>

namespace amstokes {

namespace {
constexpr double kPi = 3.14159265358979323846;

void append_csv_row(std::string& out, const ErrorReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%d,%d,%d,%.10e,%.10e,%.10e,%.10e,%.10e,%.10e\n", r.loop,
                r.elements, r.dofs, r.eta, r.energy_err, r.interp_full_err, r.rel_err, r.ind_err,
                r.eff_index);
  out += buf;
}

void write_plot_data(const std::vector<ErrorReport>& reports, const std::string& dir) {
  auto dump = [&](const std::string& name, auto&& value) {
    std::ofstream f(dir + "/" + name);
    f.precision(12);
    for (const auto& r : reports) f << r.dofs << " " << value(r) << "\n";
  };
  dump("dof_eta.dat", [](const ErrorReport& r) { return r.eta; });
  dump("dof_energy.dat", [](const ErrorReport& r) { return r.energy_err; });
  if (!reports.empty()) {
    const double c = reports.front().energy_err * std::sqrt((double)reports.front().dofs);
    dump("dof_ref.dat", [&](const ErrorReport& r) { return c / std::sqrt((double)r.dofs); });
  }
}

}  // namespace

void write_reports_csv(const std::vector<ErrorReport>& reports, const std::string& path) {
  std::string out = "k,n,dofs,eta,energy_err,interp_full_err,rel_err,ind_err,eff_index\n";
  for (const auto& r : reports) append_csv_row(out, r);
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << out;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config " + path);
  nlohmann::json j;
  f >> j;
  RunConfig cfg;
  if (j.contains("problem")) {
    const auto& p = j["problem"];
    const std::string type = p.value("type", "kellogg");
    if (type == "kellogg") {
      if (p.contains("alpha")) {
        cfg.source = RunConfig::Source::KelloggAlpha;
        cfg.alpha = p["alpha"].get<double>();
      } else {
        cfg.source = RunConfig::Source::KelloggDataset;
        cfg.dataset_id = p.value("data", 1);
      }
    } else if (type == "manufactured") {
      cfg.source = RunConfig::Source::Manufactured;
      if (p.contains("nu")) {
        const auto nu = p["nu"].get<std::vector<double>>();
        if (nu.size() != 4) throw std::runtime_error("problem.nu must have 4 entries");
        std::copy(nu.begin(), nu.end(), cfg.manufactured_nu.begin());
      }
    } else {
      throw std::runtime_error("unknown problem.type " + type);
    }
  }
  const std::string spaces = j.value("spaces", "rt0_p1");
  if (spaces == "rt0_p1")
    cfg.spaces = rt0_p1();
  else if (spaces == "bdm1_p2")
    cfg.spaces = bdm1_p2();
  else
    throw std::runtime_error("spaces must be rt0_p1 or bdm1_p2");
  const std::string theta = j.value("theta", "one");
  if (theta == "one")
    cfg.theta = ThetaMode::Constant1;
  else if (theta == "h2")
    cfg.theta = ThetaMode::MeshSquared;
  else
    throw std::runtime_error("theta must be one or h2");
  const std::string variant = j.value("variant", "nonsymmetric");
  if (variant == "nonsymmetric")
    cfg.variant = Variant::NonSymmetric;
  else if (variant == "symmetric")
    cfg.variant = Variant::Symmetric;
  else
    throw std::runtime_error("variant must be nonsymmetric or symmetric");
  cfg.dorfler = j.value("dorfler", 0.15);
  if (j.contains("stop")) {
    const auto& s = j["stop"];
    cfg.stop.rel_err = s.value("rel_err", 0.0);
    cfg.stop.max_loops = s.value("max_loops", 400);
    cfg.stop.max_elements = s.value("max_elements", 200000);
  }
  cfg.initial_n = j.value("initial_n", 4);
  cfg.output_dir = j.value("output_dir", std::string{});
  cfg.seed = j.value("seed", 0ull);
  if (cfg.initial_n < 2 || cfg.initial_n % 2 != 0)
    throw std::runtime_error("initial_n must be even and >= 2");
  if (!(cfg.dorfler > 0.0 && cfg.dorfler < 1.0))
    throw std::runtime_error("dorfler fraction must lie in (0,1)");
  return cfg;
}

ExactFlow kellogg_flow(const KelloggData& data) {
  auto sol = std::make_shared<KelloggSolution>(data);
  ExactFlow flow;
  flow.velocity = [sol](Vec2 x) { return sol->eval(x).u; };
  flow.velocity_gradient = [sol](Vec2 x) { return sol->eval(x).grad_u; };
  flow.stress = [sol](Vec2 x) { return sol->eval(x).sigma; };
  flow.body_force = [](Vec2) { return Vec2{0.0, 0.0}; };
  flow.singular_origin = true;
  flow.origin_r_power = data.alpha - 1.0;
  return flow;
}

namespace {

struct Sin4 {
  double v, d1, d2, d3;  // sin^4(pi t) and derivatives
  explicit Sin4(double t) {
    const double s = std::sin(kPi * t), c = std::cos(kPi * t);
    v = s * s * s * s;
    d1 = 4.0 * kPi * s * s * s * c;
    d2 = 4.0 * kPi * kPi * s * s * (3.0 * c * c - s * s);
    d3 = 4.0 * kPi * kPi * kPi * s * c * (6.0 * c * c - 10.0 * s * s);
  }
};

}  // namespace

ExactFlow manufactured_flow(const Viscosity& nu) {
  ExactFlow flow;
  flow.singular_origin = false;
  flow.velocity = [](Vec2 x) {
    const Sin4 F(x.x), G(x.y);
    return Vec2{F.v * G.d1, -F.d1 * G.v};
  };
  flow.velocity_gradient = [](Vec2 x) {
    const Sin4 F(x.x), G(x.y);
    return Tensor2{F.d1 * G.d1, F.v * G.d2, -F.d2 * G.v, -F.d1 * G.d1};
  };
  flow.stress = [nu](Vec2 x) {
    const Sin4 F(x.x), G(x.y);
    const double nuk = nu(quadrant_of(x));
    const double p = std::cos(kPi * x.x) * std::cos(kPi * x.y);
    const double off = 0.5 * (F.v * G.d2 - F.d2 * G.v);
    return Tensor2{nuk * F.d1 * G.d1 - p, nuk * off, nuk * off, -nuk * F.d1 * G.d1 - p};
  };
  flow.body_force = [nu](Vec2 x) {
    const Sin4 F(x.x), G(x.y);
    const double nuk = nu(quadrant_of(x));
    const double px = -kPi * std::sin(kPi * x.x) * std::cos(kPi * x.y);
    const double py = -kPi * std::cos(kPi * x.x) * std::sin(kPi * x.y);
    return Vec2{-0.5 * nuk * (F.d2 * G.d1 + F.v * G.d3) + px,
                0.5 * nuk * (F.d3 * G.v + F.d1 * G.d2) + py};
  };
  return flow;
}

ProblemSetup make_problem(const RunConfig& config) {
  ProblemSetup setup;
  switch (config.source) {
    case RunConfig::Source::KelloggDataset: {
      const KelloggData& data = dataset(config.dataset_id);
      setup.nu.nu = data.nu;
      setup.flow = kellogg_flow(data);
      break;
    }
    case RunConfig::Source::KelloggAlpha: {
      const KelloggData data = solve_kellogg(config.alpha, std::nullopt, nullptr, config.seed);
      setup.nu.nu = data.nu;
      setup.flow = kellogg_flow(data);
      break;
    }
    case RunConfig::Source::Manufactured:
      setup.nu.nu = config.manufactured_nu;
      setup.flow = manufactured_flow(setup.nu);
      break;
  }
  return setup;
}

namespace {

ErrorReport make_report(int loop, const Mesh& mesh, const RunConfig& config,
                        const ProblemSetup& setup, const DofMap& sigma_dm, const DofMap& u_dm,
                        const LinearSystem& sys, const DiscreteSolution& sol,
                        const Estimate& est) {
  ErrorReport r;
  r.loop = loop;
  r.elements = mesh.n_triangles();
  r.dofs = sys.dim();
  r.eta = est.global;
  r.energy_err =
      energy_error(mesh, sigma_dm, u_dm, setup.nu, config.theta, sol, setup.flow, config.exec);
  r.interp_full_err =
      interpolation_full_error(mesh, config.spaces, setup.nu, config.theta, setup.flow,
                               config.exec);
  const double exact_norm =
      exact_energy_norm(mesh, setup.nu, config.theta, setup.flow, config.exec);
  r.rel_err = r.energy_err / exact_norm;
  r.ind_err = r.energy_err / r.interp_full_err;
  r.eff_index = r.energy_err / r.eta;
  return r;
}

void emit_outputs(const RunConfig& config, const std::vector<ErrorReport>& reports,
                  const Mesh& mesh) {
  if (config.output_dir.empty()) return;
  std::filesystem::create_directories(config.output_dir);
  write_reports_csv(reports, config.output_dir + "/report.csv");
  write_mesh_txt(mesh, config.output_dir + "/mesh_final.txt");
  write_mesh_vtk(mesh, config.output_dir + "/mesh_final.vtk");
  write_plot_data(reports, config.output_dir);
}

}  // namespace

AdaptiveResult run_adaptive(const RunConfig& config) {
  const ProblemSetup setup = make_problem(config);
  AdaptiveResult result;
  Mesh mesh = build_structured_mesh(config.initial_n);

  ProblemData data;
  data.nu = setup.nu;
  data.body_force = setup.flow.body_force;
  data.dirichlet = setup.flow.velocity;
  data.variant = config.variant;
  data.theta = config.theta;
  data.spaces = config.spaces;

  try {
    for (int loop = 0;; ++loop) {
      const DofMap sigma_dm = build_dof_map(mesh, config.spaces.sigma);
      const DofMap u_dm = build_dof_map(mesh, config.spaces.velocity);
      const LinearSystem sys = assemble(mesh, sigma_dm, u_dm, data, config.exec);
      const DiscreteSolution sol = solve(sys);
      result.max_weighted_trace =
          std::max(result.max_weighted_trace,
                   std::abs(weighted_trace_integral(sol.sigma, sigma_dm, mesh, setup.nu)));
      result.max_normal_jump =
          std::max(result.max_normal_jump, normal_jump_audit(mesh, sigma_dm, sol.sigma));
      const Estimate est = estimate(mesh, sigma_dm, u_dm, setup.nu, config.theta, sol,
                                    setup.flow.body_force, config.exec);
      result.reports.push_back(
          make_report(loop, mesh, config, setup, sigma_dm, u_dm, sys, sol, est));

      const ErrorReport& r = result.reports.back();
      if (config.stop.rel_err > 0.0 && r.rel_err < config.stop.rel_err) break;
      if (loop >= config.stop.max_loops) break;
      if (mesh.n_triangles() >= config.stop.max_elements) break;

      const std::vector<int> marked = dorfler_mark(est, config.dorfler);
      mesh = bisect(mesh, marked);
      mesh.audit();
    }
  } catch (...) {
    emit_outputs(config, result.reports, mesh);
    throw;
  }
  result.final_mesh = mesh;
  emit_outputs(config, result.reports, mesh);
  return result;
}

RateResult run_uniform(const RunConfig& config) {
  if (config.source != RunConfig::Source::Manufactured)
    throw std::invalid_argument("uniform rate study expects the manufactured problem");
  const ProblemSetup setup = make_problem(config);

  ProblemData data;
  data.nu = setup.nu;
  data.body_force = setup.flow.body_force;
  data.dirichlet = setup.flow.velocity;
  data.variant = config.variant;
  data.theta = config.theta;
  data.spaces = config.spaces;

  RateResult result;
  for (int n : {4, 8, 16, 32}) {
    const Mesh mesh = build_structured_mesh(n);
    const DofMap sigma_dm = build_dof_map(mesh, config.spaces.sigma);
    const DofMap u_dm = build_dof_map(mesh, config.spaces.velocity);
    const LinearSystem sys = assemble(mesh, sigma_dm, u_dm, data, config.exec);
    const DiscreteSolution sol = solve(sys);
    RateRow row;
    row.n = n;
    row.dofs = sys.dim();
    row.h = 1.0 / n;
    row.energy_err =
        energy_error(mesh, sigma_dm, u_dm, setup.nu, config.theta, sol, setup.flow, config.exec);
    result.rows.push_back(row);
  }
  result.exact = true;
  for (const auto& row : result.rows)
    if (row.energy_err > 1e-8) result.exact = false;
  if (!result.exact) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int m = static_cast<int>(result.rows.size());
    for (const auto& row : result.rows) {
      const double x = std::log(row.h), y = std::log(row.energy_err);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    result.rate = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  }
  return result;
}

}  // namespace amstokes
