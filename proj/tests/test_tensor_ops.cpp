#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "reltr/error.hpp"
#include "reltr/rng.hpp"
#include "reltr/tensor.hpp"

using namespace reltr;

namespace {

Tensor t2(std::vector<double> v, std::size_t r, std::size_t c) {
  return Tensor::from_data({r, c}, std::move(v));
}

Tensor t1(std::vector<double> v) {
  std::size_t n = v.size();
  return Tensor::from_data({n}, std::move(v));
}

bool message_mentions(const std::exception& e, const std::string& needle) {
  return std::string(e.what()).find(needle) != std::string::npos;
}

}  // namespace

// ---- rng ----

TEST_CASE("rng: identical seeds give bitwise-identical sequences") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c(42), d(43);
  bool all_same = true;
  for (int i = 0; i < 16; ++i) all_same &= (c.next_u64() == d.next_u64());
  CHECK_FALSE(all_same);
}

TEST_CASE("rng: uniform stays in [0,1) and covers the range") {
  Rng rng(42);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 10000; ++i) {
    double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("rng: uniform_int bounds and shuffle is a permutation") {
  Rng rng(42);
  for (int i = 0; i < 1000; ++i) CHECK(rng.uniform_int(7) < 7);
  std::vector<int> v = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  rng.shuffle(v);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 10; ++i) CHECK(sorted[std::size_t(i)] == i);
}

TEST_CASE("rng: hash_name is stable and seed-sensitive") {
  CHECK(hash_name("person", 42) == hash_name("person", 42));
  CHECK(hash_name("person", 42) != hash_name("person", 43));
  CHECK(hash_name("person", 42) != hash_name("table", 42));
}

// ---- construction ----

TEST_CASE("tensor: shape/data length mismatch and zero extents are rejected") {
  CHECK_THROWS_AS(Tensor::from_data({2, 2}, {1.0, 2.0, 3.0}), ShapeError);
  CHECK_THROWS_AS(Tensor::zeros({0, 3}), ShapeError);
  CHECK_THROWS_AS(Tensor::zeros({}), ShapeError);
}

TEST_CASE("tensor: value() rejects non-scalars") {
  CHECK(Tensor::scalar(2.5).value() == 2.5);
  CHECK_THROWS_AS(t1({1, 2}).value(), ShapeError);
}

// ---- matmul ----

TEST_CASE("matmul: identity passthrough is exact") {
  Tensor a = t2({1, 2, 3, 4}, 2, 2);
  Tensor eye = t2({1, 0, 0, 1}, 2, 2);
  Tensor c = matmul(eye, a);
  for (std::size_t i = 0; i < 4; ++i) CHECK(c.at(i) == a.at(i));
  Tensor d = matmul(a, eye);
  for (std::size_t i = 0; i < 4; ++i) CHECK(d.at(i) == a.at(i));
}

TEST_CASE("matmul: zeros annihilate") {
  Tensor z = Tensor::zeros({2, 2});
  Tensor a = t2({5, 6, 7, 8}, 2, 2);
  Tensor c = matmul(z, a);
  for (std::size_t i = 0; i < 4; ++i) CHECK(c.at(i) == 0.0);
}

TEST_CASE("matmul: frozen 2x2 product") {
  Tensor c = matmul(t2({1, 2, 3, 4}, 2, 2), t2({5, 6, 7, 8}, 2, 2));
  CHECK(c.at(0) == doctest::Approx(19).epsilon(1e-12));
  CHECK(c.at(1) == doctest::Approx(22).epsilon(1e-12));
  CHECK(c.at(2) == doctest::Approx(43).epsilon(1e-12));
  CHECK(c.at(3) == doctest::Approx(50).epsilon(1e-12));
}

TEST_CASE("matmul: shape error names both shapes") {
  try {
    matmul(t2({1, 2, 3, 4, 5, 6}, 2, 3), t2({1, 2, 3, 4}, 2, 2));
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    CHECK(message_mentions(e, "[2 x 3]"));
    CHECK(message_mentions(e, "[2 x 2]"));
  }
}

TEST_CASE("matmul_nt multiplies by the transpose") {
  // a [2x3] * b[2x3]^T -> [2x2]
  Tensor a = t2({1, 2, 3, 4, 5, 6}, 2, 3);
  Tensor b = t2({1, 0, 1, 0, 1, 0}, 2, 3);
  Tensor c = matmul_nt(a, b);
  CHECK(c.at2(0, 0) == doctest::Approx(4));   // 1+3
  CHECK(c.at2(0, 1) == doctest::Approx(2));   // 2
  CHECK(c.at2(1, 0) == doctest::Approx(10));  // 4+6
  CHECK(c.at2(1, 1) == doctest::Approx(5));   // 5
}

// ---- softmax ----

TEST_CASE("softmax: symmetry, stability, frozen oracle") {
  Tensor s = softmax(t1({0, 0}), 0);
  CHECK(s.at(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s.at(1) == doctest::Approx(0.5).epsilon(1e-12));

  Tensor big = softmax(t1({1000, 0}), 0);
  CHECK(std::isfinite(big.at(0)));
  CHECK(big.at(0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(big.at(1) == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));

  // Frozen high-precision oracle: exp([1,2,3]) normalized.
  Tensor m = softmax(t1({1, 2, 3}), 0);
  CHECK(m.at(0) == doctest::Approx(0.09003057317038046).epsilon(1e-10));
  CHECK(m.at(1) == doctest::Approx(0.24472847105479764).epsilon(1e-10));
  CHECK(m.at(2) == doctest::Approx(0.66524095577482190).epsilon(1e-10));
}

TEST_CASE("softmax: rows sum to one within 1e-12, any axis") {
  Rng rng(3);
  std::vector<double> v(6 * 5);
  for (double& x : v) x = rng.uniform(-10.0, 10.0);
  Tensor x = Tensor::from_data({6, 5}, v);

  Tensor r = softmax(x, 1);
  for (std::size_t i = 0; i < 6; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < 5; ++j) {
      CHECK(r.at2(i, j) >= 0.0);
      s += r.at2(i, j);
    }
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }

  Tensor c = softmax(x, 0);
  for (std::size_t j = 0; j < 5; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < 6; ++i) s += c.at2(i, j);
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }

  // Negative axis counts from the back.
  Tensor r2 = softmax(x, -1);
  for (std::size_t i = 0; i < r2.size(); ++i) CHECK(r2.at(i) == r.at(i));

  CHECK_THROWS_AS(softmax(x, 2), ShapeError);
}

// ---- layer_norm ----

TEST_CASE("layer_norm: frozen examples") {
  Tensor gamma3 = Tensor::full({3}, 1.0), beta3 = Tensor::zeros({3});
  Tensor a = layer_norm(t2({5, 5, 5}, 1, 3), gamma3, beta3, 1e-5);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(a.at(i) == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));

  Tensor gamma2 = Tensor::full({2}, 1.0), beta2 = Tensor::zeros({2});
  Tensor b = layer_norm(t2({1, -1}, 1, 2), gamma2, beta2, 1e-5);
  CHECK(b.at(0) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(b.at(1) == doctest::Approx(-1.0).epsilon(1e-4));

  // Oracle: (x - mean)/sqrt(var) with population variance = sqrt(3/2).
  Tensor c = layer_norm(t2({1, 2, 3}, 1, 3), gamma3, beta3, 1e-5);
  CHECK(c.at(0) == doctest::Approx(-1.2247448713915890).epsilon(1e-4));
  CHECK(c.at(1) == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
  CHECK(c.at(2) == doctest::Approx(1.2247448713915890).epsilon(1e-4));
}

TEST_CASE("layer_norm: affine transform and validation") {
  Tensor gamma = t1({2, 2, 2});
  Tensor beta = t1({1, 1, 1});
  Tensor y = layer_norm(t2({1, 2, 3}, 1, 3), gamma, beta, 1e-5);
  CHECK(y.at(1) == doctest::Approx(1.0).epsilon(1e-9));  // 2*0 + 1

  CHECK_THROWS_AS(layer_norm(t2({1, 2, 3}, 1, 3), t1({1, 1}), t1({0, 0, 0}), 1e-5),
                  ShapeError);
  CHECK_THROWS_AS(layer_norm(t2({1, 2, 3}, 1, 3), gamma, beta, 0.0), ConfigError);
}

// ---- activations ----

TEST_CASE("leaky_relu: analytic points and slope validation") {
  Tensor y = leaky_relu(t1({2, 0, -3}), 0.01);
  CHECK(y.at(0) == 2.0);
  CHECK(y.at(1) == 0.0);
  CHECK(y.at(2) == doctest::Approx(-0.03).epsilon(1e-12));
  CHECK_THROWS_AS(leaky_relu(t1({1}), 0.0), ConfigError);
  CHECK_THROWS_AS(leaky_relu(t1({1}), 1.0), ConfigError);

  Tensor r = relu(t1({2, 0, -3}));
  CHECK(r.at(0) == 2.0);
  CHECK(r.at(2) == 0.0);
}

// ---- dropout ----

TEST_CASE("dropout: inference and p=0 are exact identities") {
  Rng rng(42);
  Tensor x = t1({1, 2, 3});
  Tensor a = dropout(x, 0.25, /*training=*/false, rng);
  Tensor b = dropout(x, 0.0, /*training=*/true, rng);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a.at(i) == x.at(i));
    CHECK(b.at(i) == x.at(i));
  }
  CHECK_THROWS_AS(dropout(x, 1.0, true, rng), ConfigError);
  CHECK_THROWS_AS(dropout(x, -0.1, true, rng), ConfigError);
}

TEST_CASE("dropout: statistical oracle at p=0.25 over 10000 elements") {
  Rng rng(42);
  Tensor ones = Tensor::full({10000}, 1.0);
  Tensor y = dropout(ones, 0.25, /*training=*/true, rng);
  double total = 0.0;
  int zeros = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    total += y.at(i);
    if (y.at(i) == 0.0) ++zeros;
    else CHECK(y.at(i) == doctest::Approx(1.0 / 0.75).epsilon(1e-12));
  }
  double mean_v = total / 10000.0;
  CHECK(mean_v > 0.97);
  CHECK(mean_v < 1.03);
  CHECK(zeros > 2200);  // ~2500 expected
  CHECK(zeros < 2800);
}

TEST_CASE("dropout: same seed gives bitwise-identical masks") {
  Tensor x = Tensor::full({64}, 1.0);
  Rng r1(7), r2(7);
  Tensor a = dropout(x, 0.25, true, r1);
  Tensor b = dropout(x, 0.25, true, r2);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(a.at(i) == b.at(i));
}

// ---- cross_entropy ----

TEST_CASE("cross_entropy: frozen examples") {
  CHECK(cross_entropy(t2({0, 0}, 1, 2), {0}).value() ==
        doctest::Approx(std::log(2.0)).epsilon(1e-10));
  CHECK(cross_entropy(t2({50, 0}, 1, 2), {0}).value() ==
        doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
  // Oracle: ln(1 + e^-1 + e^-2), frozen at high precision.
  CHECK(cross_entropy(t2({1, 2, 3}, 1, 3), {2}).value() ==
        doctest::Approx(0.40760596444438079).epsilon(1e-10));
}

TEST_CASE("cross_entropy: mean over rows and stability") {
  // Two identical rows -> same loss as one row.
  double one = cross_entropy(t2({1, 2, 3}, 1, 3), {2}).value();
  double two = cross_entropy(t2({1, 2, 3, 1, 2, 3}, 2, 3), {2, 2}).value();
  CHECK(two == doctest::Approx(one).epsilon(1e-12));

  // Huge logits stay finite thanks to log-sum-exp.
  double big = cross_entropy(t2({1000, 0}, 1, 2), {1}).value();
  CHECK(std::isfinite(big));
  CHECK(big == doctest::Approx(1000.0).epsilon(1e-9));

  CHECK_THROWS_AS(cross_entropy(t2({1, 2}, 1, 2), {2}), std::out_of_range);
  CHECK_THROWS_AS(cross_entropy(t2({1, 2}, 1, 2), {-1}), std::out_of_range);
  CHECK_THROWS_AS(cross_entropy(t2({1, 2}, 1, 2), {0, 1}), ShapeError);
}

// ---- elementwise and reshuffling ----

TEST_CASE("add/sub/mul/scale/add_row forward values") {
  Tensor a = t1({1, 2, 3}), b = t1({10, 20, 30});
  CHECK(add(a, b).at(1) == 22.0);
  CHECK(sub(b, a).at(2) == 27.0);
  CHECK(mul(a, b).at(0) == 10.0);
  CHECK(scale(a, -2.0).at(2) == -6.0);
  CHECK_THROWS_AS(add(a, t1({1, 2})), ShapeError);

  Tensor m = t2({1, 2, 3, 4}, 2, 2);
  Tensor r = add_row(m, t1({10, 20}));
  CHECK(r.at2(0, 0) == 11.0);
  CHECK(r.at2(1, 1) == 24.0);
  CHECK_THROWS_AS(add_row(m, t1({1, 2, 3})), ShapeError);
}

TEST_CASE("sum and mean") {
  Tensor x = t2({1, 2, 3, 4}, 2, 2);
  CHECK(sum(x).value() == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(mean(x).value() == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("slice_cols / concat_cols / gather_rows") {
  Tensor x = t2({1, 2, 3, 4, 5, 6}, 2, 3);
  Tensor s = slice_cols(x, 1, 2);
  CHECK(s.rows() == 2);
  CHECK(s.cols() == 2);
  CHECK(s.at2(0, 0) == 2.0);
  CHECK(s.at2(1, 1) == 6.0);
  CHECK_THROWS_AS(slice_cols(x, 2, 2), ShapeError);

  Tensor a = t2({1, 2}, 2, 1), b = t2({3, 4, 5, 6}, 2, 2);
  std::vector<Tensor> parts = {a, b};
  Tensor c = concat_cols(parts);
  CHECK(c.cols() == 3);
  CHECK(c.at2(0, 0) == 1.0);
  CHECK(c.at2(0, 2) == 4.0);
  CHECK(c.at2(1, 1) == 5.0);
  std::vector<Tensor> bad = {a, t2({1, 2, 3}, 3, 1)};
  CHECK_THROWS_AS(concat_cols(bad), ShapeError);

  Tensor g = gather_rows(x, {1, 0, 1});
  CHECK(g.rows() == 3);
  CHECK(g.at2(0, 0) == 4.0);
  CHECK(g.at2(1, 2) == 3.0);
  CHECK(g.at2(2, 1) == 5.0);
  CHECK_THROWS_AS(gather_rows(x, {2}), std::out_of_range);
}

TEST_CASE("finite outputs on finite inputs across ops") {
  Rng rng(9);
  std::vector<double> v(12);
  for (double& x : v) x = rng.uniform(-100.0, 100.0);
  Tensor t = Tensor::from_data({3, 4}, v);
  Tensor g4 = Tensor::full({4}, 1.0), b4 = Tensor::zeros({4});
  for (const Tensor& out :
       {softmax(t, 1), layer_norm(t, g4, b4, 1e-5), relu(t), leaky_relu(t, 0.01)})
    for (std::size_t i = 0; i < out.size(); ++i)
      CHECK(std::isfinite(out.at(i)));
}
