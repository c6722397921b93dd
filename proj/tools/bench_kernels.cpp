// Times the OpenMP GEMM kernels against their serial references and verifies
// that both produce bitwise-identical output.  Usage: bench_kernels [reps]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "reltr/kernels.hpp"
#include "reltr/rng.hpp"

namespace {

using Kernel = void (*)(const double*, const double*, double*, std::size_t,
                        std::size_t, std::size_t, bool);

double best_ms(Kernel f, const double* a, const double* b, double* c,
               std::size_t n, int reps) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    auto t0 = std::chrono::steady_clock::now();
    f(a, b, c, n, n, n, false);
    auto t1 = std::chrono::steady_clock::now();
    double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    if (ms < best) best = ms;
  }
  return best;
}

bool bitwise_equal(const std::vector<double>& x, const std::vector<double>& y) {
  return std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0;
}

}  // namespace

int main(int argc, char** argv) {
  int reps = 5;
  if (argc > 1) reps = std::atoi(argv[1]);
  if (reps < 1) reps = 1;

  struct Pair {
    const char* name;
    Kernel par;
    Kernel ser;
  };
  const Pair kernels[] = {
      {"gemm_nn", reltr::kernels::gemm_nn, reltr::kernels::gemm_nn_ref},
      {"gemm_nt", reltr::kernels::gemm_nt, reltr::kernels::gemm_nt_ref},
      {"gemm_tn", reltr::kernels::gemm_tn, reltr::kernels::gemm_tn_ref},
  };
  const std::size_t sizes[] = {64, 128, 256};

  std::printf("%-8s %6s %12s %12s %9s %8s\n", "kernel", "n", "serial_ms",
              "openmp_ms", "speedup", "bitwise");
  for (const Pair& kp : kernels) {
    for (std::size_t n : sizes) {
      reltr::Rng rng(42);
      std::vector<double> a(n * n), b(n * n), c_par(n * n), c_ser(n * n);
      for (double& v : a) v = rng.uniform(-1.0, 1.0);
      for (double& v : b) v = rng.uniform(-1.0, 1.0);

      double ser = best_ms(kp.ser, a.data(), b.data(), c_ser.data(), n, reps);
      double par = best_ms(kp.par, a.data(), b.data(), c_par.data(), n, reps);
      bool same = bitwise_equal(c_par, c_ser);
      std::printf("%-8s %6zu %12.3f %12.3f %8.2fx %8s\n", kp.name, n, ser, par,
                  ser / par, same ? "yes" : "NO");
      if (!same) {
        std::fprintf(stderr, "%s: parallel output diverged from serial at n=%zu\n",
                     kp.name, n);
        return 1;
      }
    }
  }
  return 0;
}
