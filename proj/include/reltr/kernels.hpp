#pragma once

#include <cstddef>

namespace reltr::kernels {

// Dense row-major GEMM kernels. Each output element accumulates its terms in
// ascending inner-index order, and the OpenMP versions only distribute whole
// output rows (or columns of the transposed case) across threads, so the
// parallel results are bitwise identical to the serial reference at any
// thread count.
//
// accumulate=false overwrites c, accumulate=true adds into it (backward
// passes accumulate).

// c[m x n] = a[m x k] * b[k x n]
void gemm_nn(const double* a, const double* b, double* c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate = false);

// c[m x n] = a[m x k] * b[n x k]^T
void gemm_nt(const double* a, const double* b, double* c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate = false);

// c[k x n] = a[m x k]^T * b[m x n]
void gemm_tn(const double* a, const double* b, double* c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate = false);

// Serial references, kept for testing and benchmarking against the parallel
// versions above.
void gemm_nn_ref(const double* a, const double* b, double* c, std::size_t m,
                 std::size_t k, std::size_t n, bool accumulate = false);
void gemm_nt_ref(const double* a, const double* b, double* c, std::size_t m,
                 std::size_t k, std::size_t n, bool accumulate = false);
void gemm_tn_ref(const double* a, const double* b, double* c, std::size_t m,
                 std::size_t k, std::size_t n, bool accumulate = false);

}  // namespace reltr::kernels
