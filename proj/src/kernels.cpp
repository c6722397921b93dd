#include "reltr/kernels.hpp"

#include <cstring>

namespace reltr::kernels {

namespace {

// Below this many multiply-adds the OpenMP fork/join overhead dominates.
constexpr std::size_t kParallelThreshold = 64 * 64 * 64;

inline void zero_rows(double* c, std::size_t count) {
  std::memset(c, 0, count * sizeof(double));
}

}  // namespace

void gemm_nn_ref(const double* a, const double* b, double* c, std::size_t m,
                 std::size_t k, std::size_t n, bool accumulate) {
  if (!accumulate) zero_rows(c, m * n);
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    double* ci = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ai[p];
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

void gemm_nt_ref(const double* a, const double* b, double* c, std::size_t m,
                 std::size_t k, std::size_t n, bool accumulate) {
  if (!accumulate) zero_rows(c, m * n);
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    double* ci = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double* bj = b + j * k;
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
      ci[j] += acc;
    }
  }
}

void gemm_tn_ref(const double* a, const double* b, double* c, std::size_t m,
                 std::size_t k, std::size_t n, bool accumulate) {
  if (!accumulate) zero_rows(c, k * n);
  for (std::size_t p = 0; p < k; ++p) {
    double* cp = c + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double av = a[i * k + p];
      const double* bi = b + i * n;
      for (std::size_t j = 0; j < n; ++j) cp[j] += av * bi[j];
    }
  }
}

#ifdef RELTR_HAVE_OPENMP

void gemm_nn(const double* a, const double* b, double* c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate) {
  const bool par = m * k * n >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (par)
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    double* ci = c + i * n;
    if (!accumulate) zero_rows(ci, n);
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ai[p];
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

void gemm_nt(const double* a, const double* b, double* c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate) {
  const bool par = m * k * n >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (par)
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    double* ci = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double* bj = b + j * k;
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
      if (accumulate) {
        ci[j] += acc;
      } else {
        ci[j] = acc;
      }
    }
  }
}

void gemm_tn(const double* a, const double* b, double* c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate) {
  // Each thread owns output row p, summing over i in ascending order.
  const bool par = m * k * n >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (par)
  for (std::size_t p = 0; p < k; ++p) {
    double* cp = c + p * n;
    if (!accumulate) zero_rows(cp, n);
    for (std::size_t i = 0; i < m; ++i) {
      const double av = a[i * k + p];
      const double* bi = b + i * n;
      for (std::size_t j = 0; j < n; ++j) cp[j] += av * bi[j];
    }
  }
}

#else

void gemm_nn(const double* a, const double* b, double* c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate) {
  gemm_nn_ref(a, b, c, m, k, n, accumulate);
}

void gemm_nt(const double* a, const double* b, double* c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate) {
  gemm_nt_ref(a, b, c, m, k, n, accumulate);
}

void gemm_tn(const double* a, const double* b, double* c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate) {
  gemm_tn_ref(a, b, c, m, k, n, accumulate);
}

#endif  // RELTR_HAVE_OPENMP

}  // namespace reltr::kernels
