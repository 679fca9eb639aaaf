// Benchmark: OpenMP-parallel energy/gradient assembly against the serial
// reference, on the 2-D annulus kernel and the 3-D box kernel. Verifies
// byte-identical results (the parallel path gathers per-cell contributions
// in a fixed order) and reports timings and speedup.
//
// Usage: bench_assembly [n_xi n_theta n_box repeats]

#include "box3.hpp"
#include "grid.hpp"
#include "num.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace pharm;

namespace {

double now_s() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

template <class F>
double time_best_of(int repeats, F&& fn) {
  double best = 1e300;
  for (int i = 0; i < repeats; ++i) {
    double t0 = now_s();
    fn();
    best = std::min(best, now_s() - t0);
  }
  return best;
}

// smooth-ish random field so the p < 2 kernels see varying gradients
std::vector<double> random_field(size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  int n_xi = 257, n_theta = 129, n_box = 49, repeats = 5;
  if (argc >= 4) {
    n_xi = std::atoi(argv[1]);
    n_theta = std::atoi(argv[2]);
    n_box = std::atoi(argv[3]);
  }
  if (argc >= 5) repeats = std::atoi(argv[4]);

#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP disabled (serial build)\n");
#endif

  auto metric = make_schwarzschild(1.0, 2.0);
  double p = 1.7, eps = 1e-2;

  {
    auto grid = make_annulus_grid(metric, n_xi, n_theta, 64.0);
    auto v = random_field(grid.n_nodes(), 12345u);
    std::vector<double> g_par(v.size()), g_ser(v.size());
    double e_par = 0.0, e_ser = 0.0;
    double t_par = time_best_of(
        repeats, [&] { e_par = energy_and_gradient(grid, v, p, eps, g_par); });
    double t_ser = time_best_of(repeats, [&] {
      e_ser = energy_and_gradient_serial(grid, v, p, eps, g_ser);
    });
    bool identical = e_par == e_ser &&
                     std::memcmp(g_par.data(), g_ser.data(),
                                 g_par.size() * sizeof(double)) == 0;
    std::printf("annulus %dx%d  (%zu nodes)\n", n_xi, n_theta, v.size());
    std::printf("  parallel %8.3f ms   serial %8.3f ms   speedup %.2fx   %s\n",
                1e3 * t_par, 1e3 * t_ser, t_ser / t_par,
                identical ? "byte-identical" : "MISMATCH");
    if (!identical) {
      std::printf("  e_par %s e_ser %s\n", fmt_g17(e_par).c_str(),
                  fmt_g17(e_ser).c_str());
      return 1;
    }
  }

  {
    auto grid = make_box3_grid(metric, n_box, 12.0, 3.0);
    auto v = random_field(grid.n_nodes(), 67890u);
    std::vector<double> g_par(v.size()), g_ser(v.size());
    double e_par = 0.0, e_ser = 0.0;
    double t_par = time_best_of(
        repeats, [&] { e_par = box3_energy_and_gradient(grid, v, p, eps, g_par); });
    double t_ser = time_best_of(repeats, [&] {
      e_ser = box3_energy_and_gradient_serial(grid, v, p, eps, g_ser);
    });
    bool identical = e_par == e_ser &&
                     std::memcmp(g_par.data(), g_ser.data(),
                                 g_par.size() * sizeof(double)) == 0;
    std::printf("box %d^3  (%zu nodes)\n", n_box, v.size());
    std::printf("  parallel %8.3f ms   serial %8.3f ms   speedup %.2fx   %s\n",
                1e3 * t_par, 1e3 * t_ser, t_ser / t_par,
                identical ? "byte-identical" : "MISMATCH");
    if (!identical) {
      std::printf("  e_par %s e_ser %s\n", fmt_g17(e_par).c_str(),
                  fmt_g17(e_ser).c_str());
      return 1;
    }
  }

  return 0;
}
