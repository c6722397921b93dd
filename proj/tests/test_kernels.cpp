#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstring>
#include <vector>

#include "reltr/kernels.hpp"
#include "reltr/rng.hpp"

using namespace reltr;

namespace {

// Independent naive oracles.  Deliberately written with a different loop nest
// than the library kernels; compared within 1e-12, not bitwise.
std::vector<double> naive_nn(const std::vector<double>& a,
                             const std::vector<double>& b, std::size_t m,
                             std::size_t k, std::size_t n) {
  std::vector<double> c(m * n, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t i = 0; i < m; ++i)
        c[i * n + j] += a[i * k + p] * b[p * n + j];
  return c;
}

std::vector<double> naive_nt(const std::vector<double>& a,
                             const std::vector<double>& b, std::size_t m,
                             std::size_t k, std::size_t n) {
  std::vector<double> c(m * n, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t p = 0; p < k; ++p)
        c[i * n + j] += a[i * k + p] * b[j * k + p];
  return c;
}

std::vector<double> naive_tn(const std::vector<double>& a,
                             const std::vector<double>& b, std::size_t m,
                             std::size_t k, std::size_t n) {
  std::vector<double> c(k * n, 0.0);
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < m; ++i)
        c[p * n + j] += a[i * k + p] * b[i * n + j];
  return c;
}

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

void check_close(const std::vector<double>& got,
                 const std::vector<double>& want, double tol = 1e-12) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i)
    CHECK(got[i] == doctest::Approx(want[i]).epsilon(tol).scale(1.0));
}

}  // namespace

TEST_CASE("gemm_nn matches the frozen 2x2 product") {
  std::vector<double> a = {1, 2, 3, 4};
  std::vector<double> b = {5, 6, 7, 8};
  std::vector<double> c(4);
  kernels::gemm_nn(a.data(), b.data(), c.data(), 2, 2, 2);
  // Oracle: hand triple-loop, frozen.
  check_close(c, {19, 22, 43, 50});
}

TEST_CASE("gemm kernels match a naive oracle on rectangular inputs") {
  Rng rng(7);
  const std::size_t m = 3, k = 5, n = 4;
  auto a = random_vec(m * k, rng);
  auto bn = random_vec(k * n, rng);  // [k x n] for nn
  auto bt = random_vec(n * k, rng);  // [n x k] for nt
  auto bm = random_vec(m * n, rng);  // [m x n] for tn

  std::vector<double> c_nn(m * n), c_nt(m * n), c_tn(k * n);
  kernels::gemm_nn(a.data(), bn.data(), c_nn.data(), m, k, n);
  kernels::gemm_nt(a.data(), bt.data(), c_nt.data(), m, k, n);
  kernels::gemm_tn(a.data(), bm.data(), c_tn.data(), m, k, n);

  check_close(c_nn, naive_nn(a, bn, m, k, n));
  check_close(c_nt, naive_nt(a, bt, m, k, n));
  check_close(c_tn, naive_tn(a, bm, m, k, n));
}

TEST_CASE("accumulate=true adds into the output") {
  std::vector<double> a = {1, 0, 0, 1};
  std::vector<double> b = {2, 3, 4, 5};
  std::vector<double> c = {10, 10, 10, 10};
  kernels::gemm_nn(a.data(), b.data(), c.data(), 2, 2, 2, /*accumulate=*/true);
  check_close(c, {12, 13, 14, 15});
  kernels::gemm_nn(a.data(), b.data(), c.data(), 2, 2, 2, /*accumulate=*/false);
  check_close(c, {2, 3, 4, 5});
}

TEST_CASE("multiplying by zeros gives exact zeros") {
  std::vector<double> z(4, 0.0), b = {1.5, -2.5, 3.5, -4.5}, c(4, 99.0);
  kernels::gemm_nn(z.data(), b.data(), c.data(), 2, 2, 2);
  for (double v : c) CHECK(v == 0.0);
}

TEST_CASE("A * I == A exactly") {
  Rng rng(11);
  const std::size_t m = 4, n = 4;
  auto a = random_vec(m * n, rng);
  std::vector<double> eye(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) eye[i * n + i] = 1.0;
  std::vector<double> c(m * n);
  kernels::gemm_nn(a.data(), eye.data(), c.data(), m, n, n);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(c[i] == a[i]);
}

TEST_CASE("openmp kernels are bitwise identical to the serial references") {
  Rng rng(42);
  // 80^3 product exceeds the internal parallel threshold (64^3), so the
  // OpenMP path is genuinely exercised.
  const std::size_t n = 80;
  auto a = random_vec(n * n, rng);
  auto b = random_vec(n * n, rng);

  std::vector<double> cp(n * n), cs(n * n);

  kernels::gemm_nn(a.data(), b.data(), cp.data(), n, n, n);
  kernels::gemm_nn_ref(a.data(), b.data(), cs.data(), n, n, n);
  CHECK(std::memcmp(cp.data(), cs.data(), cp.size() * sizeof(double)) == 0);

  kernels::gemm_nt(a.data(), b.data(), cp.data(), n, n, n);
  kernels::gemm_nt_ref(a.data(), b.data(), cs.data(), n, n, n);
  CHECK(std::memcmp(cp.data(), cs.data(), cp.size() * sizeof(double)) == 0);

  kernels::gemm_tn(a.data(), b.data(), cp.data(), n, n, n);
  kernels::gemm_tn_ref(a.data(), b.data(), cs.data(), n, n, n);
  CHECK(std::memcmp(cp.data(), cs.data(), cp.size() * sizeof(double)) == 0);
}

TEST_CASE("small inputs stay on the serial path and still match") {
  Rng rng(5);
  const std::size_t m = 2, k = 3, n = 2;
  auto a = random_vec(m * k, rng);
  auto b = random_vec(k * n, rng);
  std::vector<double> cp(m * n), cs(m * n);
  kernels::gemm_nn(a.data(), b.data(), cp.data(), m, k, n);
  kernels::gemm_nn_ref(a.data(), b.data(), cs.data(), m, k, n);
  CHECK(std::memcmp(cp.data(), cs.data(), cp.size() * sizeof(double)) == 0);
}
