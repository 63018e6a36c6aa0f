// Timing comparison of the OpenMP element kernels against the serial
// reference paths (local-matrix assembly and the error/estimator
// integration). Both paths fill identical per-element slots, so the outputs
// are compared bit for bit as well.

#include <omp.h>

#include <cstdio>
#include <cstring>

#include "amstokes/driver.hpp"

using namespace amstokes;

namespace {

template <class Fn>
double best_of(int reps, Fn&& fn) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    const double t0 = omp_get_wtime();
    fn();
    best = std::min(best, omp_get_wtime() - t0);
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  int refine = argc > 1 ? std::atoi(argv[1]) : 4;
  Mesh mesh = build_structured_mesh(16);
  for (int i = 0; i < refine; ++i) {
    std::vector<int> all(mesh.n_triangles());
    for (int k = 0; k < mesh.n_triangles(); ++k) all[k] = k;
    mesh = bisect(mesh, all);
  }
  std::printf("mesh: %d elements, %d threads\n", mesh.n_triangles(), omp_get_max_threads());

  const KelloggData& d = dataset(5);
  const ExactFlow flow = kellogg_flow(d);
  ProblemData data;
  data.nu.nu = d.nu;
  data.body_force = flow.body_force;
  data.dirichlet = flow.velocity;

  for (SpacePair spaces : {rt0_p1(), bdm1_p2()}) {
    data.spaces = spaces;
    const char* name = spaces.sigma == Family::RT0Tensor ? "rt0_p1" : "bdm1_p2";
    const DofMap sdm = build_dof_map(mesh, spaces.sigma);
    const DofMap udm = build_dof_map(mesh, spaces.velocity);

    LinearSystem serial_sys, parallel_sys;
    const double t_ser =
        best_of(3, [&] { serial_sys = assemble(mesh, sdm, udm, data, Exec::Serial); });
    const double t_par =
        best_of(3, [&] { parallel_sys = assemble(mesh, sdm, udm, data, Exec::Parallel); });
    const bool same = (serial_sys.rhs - parallel_sys.rhs).norm() == 0.0 &&
                      serial_sys.A.nonZeros() == parallel_sys.A.nonZeros() &&
                      std::memcmp(serial_sys.A.valuePtr(), parallel_sys.A.valuePtr(),
                                  sizeof(double) * serial_sys.A.nonZeros()) == 0;
    std::printf("assemble  %-8s serial %8.3f ms | parallel %8.3f ms | speedup %5.2fx | %s\n",
                name, 1e3 * t_ser, 1e3 * t_par, t_ser / t_par,
                same ? "bitwise equal" : "MISMATCH");

    const DiscreteSolution sol = solve(parallel_sys);
    Estimate es, ep;
    const double e_ser = best_of(3, [&] {
      es = estimate(mesh, sdm, udm, data.nu, data.theta, sol, data.body_force, Exec::Serial);
    });
    const double e_par = best_of(3, [&] {
      ep = estimate(mesh, sdm, udm, data.nu, data.theta, sol, data.body_force, Exec::Parallel);
    });
    std::printf("estimate  %-8s serial %8.3f ms | parallel %8.3f ms | speedup %5.2fx | %s\n",
                name, 1e3 * e_ser, 1e3 * e_par, e_ser / e_par,
                es.global == ep.global ? "bitwise equal" : "MISMATCH");

    double err_s = 0, err_p = 0;
    const double n_ser = best_of(3, [&] {
      err_s = energy_error(mesh, sdm, udm, data.nu, data.theta, sol, flow, Exec::Serial);
    });
    const double n_par = best_of(3, [&] {
      err_p = energy_error(mesh, sdm, udm, data.nu, data.theta, sol, flow, Exec::Parallel);
    });
    std::printf("error     %-8s serial %8.3f ms | parallel %8.3f ms | speedup %5.2fx | %s\n",
                name, 1e3 * n_ser, 1e3 * n_par, n_ser / n_par,
                err_s == err_p ? "bitwise equal" : "MISMATCH");
  }
  return 0;
}
