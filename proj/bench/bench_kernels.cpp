// Serial vs OpenMP Laguerre cell pass on the synthetic grid.
//   bench_kernels [grid_n] [repeats]

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "sdotflow/dual_ascent.hpp"
#include "sdotflow/laguerre.hpp"
#include "sdotflow/problem.hpp"
#include "sdotflow/scenarios.hpp"

using namespace sdotflow;
using Clock = std::chrono::steady_clock;

template <class F>
double best_of(int repeats, F&& f) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = Clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(Clock::now() - t0).count());
  }
  return best;
}

int main(int argc, char** argv) {
  SyntheticParams params;
  params.grid_n = argc > 1 ? std::atoi(argv[1]) : 200;
  const int repeats = argc > 2 ? std::atoi(argv[2]) : 5;

  const Problem problem(generate_synthetic(params));
  std::vector<double> psi(problem.network().node_count(), 0.0);
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = 0.3 * static_cast<double>(i % 3);
  std::vector<double> endpoint_psi;
  for (NodeId e : problem.endpoints()) endpoint_psi.push_back(psi[static_cast<std::size_t>(e)]);

  CellMassReport serial, parallel;
  const double t_serial = best_of(repeats, [&] {
    serial = compute_cells_serial(problem.measure(), problem.costs(), endpoint_psi, problem.endpoints());
  });
  const double t_parallel = best_of(repeats, [&] {
    parallel = compute_cells(problem.measure(), problem.costs(), endpoint_psi, problem.endpoints());
  });
  double q = 0.0;
  const double t_dual = best_of(repeats, [&] { q = dual_value(problem, psi); });

  double max_diff = 0.0;
  for (std::size_t e = 0; e < serial.masses.size(); ++e) {
    max_diff = std::max(max_diff, std::abs(serial.masses[e] - parallel.masses[e]));
  }

  std::printf("points=%zu endpoints=%zu threads=%d repeats=%d\n", problem.measure().size(),
              problem.endpoints().size(), omp_get_max_threads(), repeats);
  std::printf("cells serial    %9.3f ms\n", 1e3 * t_serial);
  std::printf("cells openmp    %9.3f ms  speedup %.2fx\n", 1e3 * t_parallel, t_serial / t_parallel);
  std::printf("dual value      %9.3f ms  q=%.12g\n", 1e3 * t_dual, q);
  std::printf("max mass diff   %.3g  assignments %s\n", max_diff,
              serial.assignment == parallel.assignment ? "identical" : "DIFFER");
  return serial.assignment == parallel.assignment ? 0 : 1;
}
