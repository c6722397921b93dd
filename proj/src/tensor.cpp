#include "reltr/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_set>
#include <utility>

#include "reltr/error.hpp"
#include "reltr/kernels.hpp"

namespace reltr {

namespace {

thread_local bool g_grad_enabled = true;

std::size_t checked_numel(const std::vector<std::size_t>& shape) {
  if (shape.empty()) throw ShapeError("tensor: shape must have at least one extent");
  std::size_t n = 1;
  for (std::size_t e : shape) {
    if (e == 0) throw ShapeError("tensor: zero extent in shape " + shape_str(shape));
    n *= e;
  }
  return n;
}

bool want_tape(std::initializer_list<const Tensor*> inputs) {
  if (!g_grad_enabled) return false;
  for (const Tensor* t : inputs)
    if (t->requires_grad()) return true;
  return false;
}

void require_rank2(const Tensor& t, const char* op) {
  if (t.rank() != 2)
    throw ShapeError(std::string(op) + ": expected a rank-2 tensor, got " +
                     shape_str(t.shape()));
}

// y += alpha * x
void axpy(std::vector<double>& y, const std::vector<double>& x, double alpha) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

std::string shape_str(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << " x ";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

Tensor Tensor::zeros(std::vector<std::size_t> shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value,
                    bool requires_grad) {
  std::size_t n = checked_numel(shape);
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->shape = std::move(shape);
  impl->data.assign(n, value);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::from_data(std::vector<std::size_t> shape,
                         std::vector<double> data, bool requires_grad) {
  std::size_t n = checked_numel(shape);
  if (n != data.size())
    throw ShapeError("tensor: shape " + shape_str(shape) + " expects " +
                     std::to_string(n) + " values, got " +
                     std::to_string(data.size()));
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->shape = std::move(shape);
  impl->data = std::move(data);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from_data({1}, {value}, requires_grad);
}

double Tensor::value() const {
  if (size() != 1)
    throw ShapeError("value: tensor " + shape_str(shape()) + " is not a scalar");
  return impl_->data[0];
}

const std::vector<double>& Tensor::grad() const {
  if (impl_->grad.empty())
    throw std::runtime_error("grad: gradient has not been populated; call backward first");
  return impl_->grad;
}

void Tensor::zero_grad() const { impl_->grad.assign(impl_->data.size(), 0.0); }

Tensor Tensor::detach() const {
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->shape = impl_->shape;
  impl->data = impl_->data;
  return Tensor(std::move(impl));
}

Tensor make_op_output(std::vector<std::size_t> shape, std::vector<Tensor> parents,
                      std::function<void(detail::TensorImpl&)> fn) {
  auto impl = std::make_shared<detail::TensorImpl>();
  std::size_t n = checked_numel(shape);
  impl->shape = std::move(shape);
  impl->data.resize(n);
  impl->requires_grad = true;
  impl->parents.reserve(parents.size());
  for (const Tensor& p : parents) impl->parents.push_back(p.impl());
  impl->backward_fn = std::move(fn);
  return Tensor(impl);
}

// ---- elementwise ----

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw ShapeError("add: shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) + b.at(i);
  if (!want_tape({&a, &b})) return Tensor::from_data(a.shape(), std::move(out));
  Tensor y = make_op_output(a.shape(), {a, b}, [](detail::TensorImpl& self) {
    for (int p = 0; p < 2; ++p) {
      auto& par = *self.parents[p];
      if (par.requires_grad) axpy(par.sweep_grad, self.sweep_grad, 1.0);
    }
  });
  y.impl()->data = std::move(out);
  return y;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw ShapeError("sub: shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) - b.at(i);
  if (!want_tape({&a, &b})) return Tensor::from_data(a.shape(), std::move(out));
  Tensor y = make_op_output(a.shape(), {a, b}, [](detail::TensorImpl& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad) axpy(pa.sweep_grad, self.sweep_grad, 1.0);
    if (pb.requires_grad) axpy(pb.sweep_grad, self.sweep_grad, -1.0);
  });
  y.impl()->data = std::move(out);
  return y;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw ShapeError("mul: shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) * b.at(i);
  if (!want_tape({&a, &b})) return Tensor::from_data(a.shape(), std::move(out));
  Tensor y = make_op_output(a.shape(), {a, b}, [](detail::TensorImpl& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad)
      for (std::size_t i = 0; i < self.sweep_grad.size(); ++i)
        pa.sweep_grad[i] += self.sweep_grad[i] * pb.data[i];
    if (pb.requires_grad)
      for (std::size_t i = 0; i < self.sweep_grad.size(); ++i)
        pb.sweep_grad[i] += self.sweep_grad[i] * pa.data[i];
  });
  y.impl()->data = std::move(out);
  return y;
}

Tensor scale(const Tensor& a, double s) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) * s;
  if (!want_tape({&a})) return Tensor::from_data(a.shape(), std::move(out));
  Tensor y = make_op_output(a.shape(), {a}, [s](detail::TensorImpl& self) {
    auto& pa = *self.parents[0];
    if (pa.requires_grad) axpy(pa.sweep_grad, self.sweep_grad, s);
  });
  y.impl()->data = std::move(out);
  return y;
}

Tensor add_row(const Tensor& a, const Tensor& bias) {
  require_rank2(a, "add_row");
  if (bias.rank() != 1 || bias.size() != a.cols())
    throw ShapeError("add_row: bias " + shape_str(bias.shape()) +
                     " does not match columns of " + shape_str(a.shape()));
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = a.at(i * n + j) + bias.at(j);
  if (!want_tape({&a, &bias})) return Tensor::from_data(a.shape(), std::move(out));
  Tensor y = make_op_output(a.shape(), {a, bias}, [m, n](detail::TensorImpl& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad) axpy(pa.sweep_grad, self.sweep_grad, 1.0);
    if (pb.requires_grad)
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
          pb.sweep_grad[j] += self.sweep_grad[i * n + j];
  });
  y.impl()->data = std::move(out);
  return y;
}

// ---- matrix products ----

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  if (a.cols() != b.rows())
    throw ShapeError("matmul: inner extents differ, " + shape_str(a.shape()) +
                     " vs " + shape_str(b.shape()));
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  std::vector<double> out(m * n);
  kernels::gemm_nn(a.data(), b.data(), out.data(), m, k, n);
  if (!want_tape({&a, &b}))
    return Tensor::from_data({m, n}, std::move(out));
  Tensor y = make_op_output({m, n}, {a, b}, [m, k, n](detail::TensorImpl& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad)
      kernels::gemm_nt(self.sweep_grad.data(), pb.data.data(),
                       pa.sweep_grad.data(), m, n, k, /*accumulate=*/true);
    if (pb.requires_grad)
      kernels::gemm_tn(pa.data.data(), self.sweep_grad.data(),
                       pb.sweep_grad.data(), m, k, n, /*accumulate=*/true);
  });
  y.impl()->data = std::move(out);
  return y;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul_nt");
  require_rank2(b, "matmul_nt");
  if (a.cols() != b.cols())
    throw ShapeError("matmul_nt: inner extents differ, " + shape_str(a.shape()) +
                     " vs " + shape_str(b.shape()));
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  std::vector<double> out(m * n);
  kernels::gemm_nt(a.data(), b.data(), out.data(), m, k, n);
  if (!want_tape({&a, &b}))
    return Tensor::from_data({m, n}, std::move(out));
  Tensor y = make_op_output({m, n}, {a, b}, [m, k, n](detail::TensorImpl& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad)
      kernels::gemm_nn(self.sweep_grad.data(), pb.data.data(),
                       pa.sweep_grad.data(), m, n, k, /*accumulate=*/true);
    if (pb.requires_grad)
      kernels::gemm_tn(self.sweep_grad.data(), pa.data.data(),
                       pb.sweep_grad.data(), m, n, k, /*accumulate=*/true);
  });
  y.impl()->data = std::move(out);
  return y;
}

// ---- normalization and activations ----

Tensor softmax(const Tensor& x, int axis) {
  const int r = static_cast<int>(x.rank());
  if (axis < 0) axis += r;
  if (axis < 0 || axis >= r)
    throw ShapeError("softmax: axis out of range for " + shape_str(x.shape()));
  std::size_t outer = 1, inner = 1;
  const std::size_t n = x.shape()[static_cast<std::size_t>(axis)];
  for (int i = 0; i < axis; ++i) outer *= x.shape()[static_cast<std::size_t>(i)];
  for (int i = axis + 1; i < r; ++i) inner *= x.shape()[static_cast<std::size_t>(i)];

  std::vector<double> out(x.size());
  const double* xd = x.data();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * n * inner + in;
      double mx = xd[base];
      for (std::size_t i = 1; i < n; ++i)
        mx = std::max(mx, xd[base + i * inner]);
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double e = std::exp(xd[base + i * inner] - mx);
        out[base + i * inner] = e;
        total += e;
      }
      for (std::size_t i = 0; i < n; ++i) out[base + i * inner] /= total;
    }
  }
  if (!want_tape({&x})) return Tensor::from_data(x.shape(), std::move(out));
  Tensor y = make_op_output(x.shape(), {x},
                            [outer, n, inner](detail::TensorImpl& self) {
    auto& px = *self.parents[0];
    if (!px.requires_grad) return;
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t in = 0; in < inner; ++in) {
        const std::size_t base = o * n * inner + in;
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          dot += self.sweep_grad[base + i * inner] * self.data[base + i * inner];
        for (std::size_t i = 0; i < n; ++i) {
          const std::size_t idx = base + i * inner;
          px.sweep_grad[idx] += self.data[idx] * (self.sweep_grad[idx] - dot);
        }
      }
    }
  });
  y.impl()->data = std::move(out);
  return y;
}

namespace {

// Sums after sorting by value, so the rounding depends only on the multiset
// of addends.  Equal doubles are bitwise interchangeable (the only
// equal-but-distinct pair is +/-0, and adding either is identical), hence
// any permutation of the inputs produces the same bits.  NaN breaks strict
// weak ordering, so a poisoned sum falls back to plain accumulation.
double canonical_sum(std::vector<double>& terms) {
  for (double t : terms)
    if (std::isnan(t)) {
      double s = 0.0;
      for (double v : terms) s += v;
      return s;
    }
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (double v : terms) s += v;
  return s;
}

}  // namespace

Tensor softmax_rows_canonical(const Tensor& x) {
  require_rank2(x, "softmax_rows_canonical");
  const std::size_t rows = x.rows(), n = x.cols();
  std::vector<double> out(x.size());
  std::vector<double> terms(n);
  const double* xd = x.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t base = r * n;
    double mx = xd[base];
    for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, xd[base + i]);
    for (std::size_t i = 0; i < n; ++i) {
      out[base + i] = std::exp(xd[base + i] - mx);
      terms[i] = out[base + i];
    }
    const double total = canonical_sum(terms);
    for (std::size_t i = 0; i < n; ++i) out[base + i] /= total;
  }
  if (!want_tape({&x})) return Tensor::from_data(x.shape(), std::move(out));
  Tensor y = make_op_output(x.shape(), {x},
                            [rows, n](detail::TensorImpl& self) {
    auto& px = *self.parents[0];
    if (!px.requires_grad) return;
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t base = r * n;
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        dot += self.sweep_grad[base + i] * self.data[base + i];
      for (std::size_t i = 0; i < n; ++i)
        px.sweep_grad[base + i] +=
            self.data[base + i] * (self.sweep_grad[base + i] - dot);
    }
  });
  y.impl()->data = std::move(out);
  return y;
}

Tensor matmul_canonical(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul_canonical");
  require_rank2(b, "matmul_canonical");
  if (a.cols() != b.rows())
    throw ShapeError("matmul_canonical: inner extents differ, " +
                     shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  std::vector<double> out(m * n);
  std::vector<double> terms(k);
  const double* ad = a.data();
  const double* bd = b.data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t kk = 0; kk < k; ++kk)
        terms[kk] = ad[i * k + kk] * bd[kk * n + j];
      out[i * n + j] = canonical_sum(terms);
    }
  if (!want_tape({&a, &b}))
    return Tensor::from_data({m, n}, std::move(out));
  Tensor y = make_op_output({m, n}, {a, b}, [m, k, n](detail::TensorImpl& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad)
      kernels::gemm_nt(self.sweep_grad.data(), pb.data.data(),
                       pa.sweep_grad.data(), m, n, k, /*accumulate=*/true);
    if (pb.requires_grad)
      kernels::gemm_tn(pa.data.data(), self.sweep_grad.data(),
                       pb.sweep_grad.data(), m, k, n, /*accumulate=*/true);
  });
  y.impl()->data = std::move(out);
  return y;
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  double eps) {
  const std::size_t w = x.cols();
  if (gamma.size() != w || beta.size() != w)
    throw ShapeError("layer_norm: gamma/beta length must equal last extent of " +
                     shape_str(x.shape()));
  if (eps <= 0.0) throw ConfigError("layer_norm: eps must be positive");
  const std::size_t rows = x.size() / w;

  auto xhat = std::make_shared<std::vector<double>>(x.size());
  auto inv_std = std::make_shared<std::vector<double>>(rows);
  std::vector<double> out(x.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = x.data() + r * w;
    double mean_v = 0.0;
    for (std::size_t j = 0; j < w; ++j) mean_v += row[j];
    mean_v /= static_cast<double>(w);
    double var = 0.0;
    for (std::size_t j = 0; j < w; ++j) {
      double d = row[j] - mean_v;
      var += d * d;
    }
    var /= static_cast<double>(w);
    const double inv = 1.0 / std::sqrt(var + eps);
    (*inv_std)[r] = inv;
    for (std::size_t j = 0; j < w; ++j) {
      double xh = (row[j] - mean_v) * inv;
      (*xhat)[r * w + j] = xh;
      out[r * w + j] = gamma.at(j) * xh + beta.at(j);
    }
  }
  if (!want_tape({&x, &gamma, &beta}))
    return Tensor::from_data(x.shape(), std::move(out));
  Tensor y = make_op_output(
      x.shape(), {x, gamma, beta},
      [rows, w, xhat, inv_std](detail::TensorImpl& self) {
        auto& px = *self.parents[0];
        auto& pg = *self.parents[1];
        auto& pb = *self.parents[2];
        const std::vector<double>& gam = pg.data;
        for (std::size_t r = 0; r < rows; ++r) {
          const double* dy = self.sweep_grad.data() + r * w;
          const double* xh = xhat->data() + r * w;
          if (pg.requires_grad)
            for (std::size_t j = 0; j < w; ++j) pg.sweep_grad[j] += dy[j] * xh[j];
          if (pb.requires_grad)
            for (std::size_t j = 0; j < w; ++j) pb.sweep_grad[j] += dy[j];
          if (px.requires_grad) {
            double m1 = 0.0, m2 = 0.0;
            for (std::size_t j = 0; j < w; ++j) {
              const double g = dy[j] * gam[j];
              m1 += g;
              m2 += g * xh[j];
            }
            m1 /= static_cast<double>(w);
            m2 /= static_cast<double>(w);
            const double inv = (*inv_std)[r];
            for (std::size_t j = 0; j < w; ++j) {
              const double g = dy[j] * gam[j];
              px.sweep_grad[r * w + j] += inv * (g - m1 - xh[j] * m2);
            }
          }
        }
      });
  y.impl()->data = std::move(out);
  return y;
}

namespace {

// Shared body for relu (slope 0) and leaky_relu.
Tensor piecewise_linear(const Tensor& x, double slope) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = x.at(i) >= 0.0 ? x.at(i) : slope * x.at(i);
  if (!want_tape({&x})) return Tensor::from_data(x.shape(), std::move(out));
  Tensor y = make_op_output(x.shape(), {x}, [slope](detail::TensorImpl& self) {
    auto& px = *self.parents[0];
    if (!px.requires_grad) return;
    for (std::size_t i = 0; i < self.sweep_grad.size(); ++i)
      px.sweep_grad[i] +=
          self.sweep_grad[i] * (px.data[i] >= 0.0 ? 1.0 : slope);
  });
  y.impl()->data = std::move(out);
  return y;
}

}  // namespace

Tensor relu(const Tensor& x) { return piecewise_linear(x, 0.0); }

Tensor leaky_relu(const Tensor& x, double slope) {
  if (slope <= 0.0 || slope >= 1.0)
    throw ConfigError("leaky_relu: slope must lie in (0, 1), got " +
                      std::to_string(slope));
  return piecewise_linear(x, slope);
}

Tensor dropout(const Tensor& x, double p, bool training, Rng& rng) {
  if (p < 0.0 || p >= 1.0)
    throw ConfigError("dropout: rate must lie in [0, 1), got " + std::to_string(p));
  if (!training || p == 0.0) return x;  // exact identity at inference
  const double keep_scale = 1.0 / (1.0 - p);
  std::vector<double> mask(x.size());
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    mask[i] = rng.uniform() >= p ? keep_scale : 0.0;
    out[i] = x.at(i) * mask[i];
  }
  if (!want_tape({&x})) return Tensor::from_data(x.shape(), std::move(out));
  Tensor y = make_op_output(x.shape(), {x},
                            [mask = std::move(mask)](detail::TensorImpl& self) {
    auto& px = *self.parents[0];
    if (!px.requires_grad) return;
    for (std::size_t i = 0; i < self.sweep_grad.size(); ++i)
      px.sweep_grad[i] += self.sweep_grad[i] * mask[i];
  });
  y.impl()->data = std::move(out);
  return y;
}

Tensor cross_entropy(const Tensor& logits, const std::vector<int>& targets) {
  require_rank2(logits, "cross_entropy");
  const std::size_t n = logits.rows(), c = logits.cols();
  if (targets.size() != n)
    throw ShapeError("cross_entropy: " + std::to_string(targets.size()) +
                     " targets for " + std::to_string(n) + " rows");
  for (std::size_t i = 0; i < n; ++i)
    if (targets[i] < 0 || static_cast<std::size_t>(targets[i]) >= c)
      throw std::out_of_range("cross_entropy: target " +
                              std::to_string(targets[i]) + " at row " +
                              std::to_string(i) + " outside [0, " +
                              std::to_string(c) + ")");

  auto probs = std::make_shared<std::vector<double>>(n * c);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = logits.data() + i * c;
    double mx = row[0];
    for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, row[j]);
    double sum_exp = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      double e = std::exp(row[j] - mx);
      (*probs)[i * c + j] = e;
      sum_exp += e;
    }
    for (std::size_t j = 0; j < c; ++j) (*probs)[i * c + j] /= sum_exp;
    const double lse = mx + std::log(sum_exp);
    total += lse - row[static_cast<std::size_t>(targets[i])];
  }
  const double loss_value = total / static_cast<double>(n);
  if (!want_tape({&logits})) return Tensor::scalar(loss_value);
  Tensor y = make_op_output(
      {1}, {logits}, [n, c, probs, targets](detail::TensorImpl& self) {
        auto& pl = *self.parents[0];
        if (!pl.requires_grad) return;
        const double g = self.sweep_grad[0] / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < c; ++j) {
            double ind = (static_cast<std::size_t>(targets[i]) == j) ? 1.0 : 0.0;
            pl.sweep_grad[i * c + j] += g * ((*probs)[i * c + j] - ind);
          }
      });
  y.impl()->data[0] = loss_value;
  return y;
}

// ---- reductions ----

Tensor sum(const Tensor& x) {
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) total += x.at(i);
  if (!want_tape({&x})) return Tensor::scalar(total);
  Tensor y = make_op_output({1}, {x}, [](detail::TensorImpl& self) {
    auto& px = *self.parents[0];
    if (!px.requires_grad) return;
    for (double& g : px.sweep_grad) g += self.sweep_grad[0];
  });
  y.impl()->data[0] = total;
  return y;
}

Tensor mean(const Tensor& x) {
  return scale(sum(x), 1.0 / static_cast<double>(x.size()));
}

// ---- reshuffling ----

Tensor slice_cols(const Tensor& x, std::size_t start, std::size_t len) {
  require_rank2(x, "slice_cols");
  const std::size_t m = x.rows(), n = x.cols();
  if (len == 0 || start + len > n)
    throw ShapeError("slice_cols: [" + std::to_string(start) + ", " +
                     std::to_string(start + len) + ") outside " +
                     shape_str(x.shape()));
  std::vector<double> out(m * len);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < len; ++j)
      out[i * len + j] = x.at(i * n + start + j);
  if (!want_tape({&x})) return Tensor::from_data({m, len}, std::move(out));
  Tensor y = make_op_output({m, len}, {x},
                            [m, n, start, len](detail::TensorImpl& self) {
    auto& px = *self.parents[0];
    if (!px.requires_grad) return;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < len; ++j)
        px.sweep_grad[i * n + start + j] += self.sweep_grad[i * len + j];
  });
  y.impl()->data = std::move(out);
  return y;
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const std::size_t m = parts[0].rows();
  std::size_t total = 0;
  std::vector<std::size_t> widths;
  widths.reserve(parts.size());
  for (const Tensor& p : parts) {
    require_rank2(p, "concat_cols");
    if (p.rows() != m)
      throw ShapeError("concat_cols: row mismatch " + shape_str(p.shape()) +
                       " vs " + shape_str(parts[0].shape()));
    widths.push_back(p.cols());
    total += p.cols();
  }
  std::vector<double> out(m * total);
  std::size_t off = 0;
  for (std::size_t pi = 0; pi < parts.size(); ++pi) {
    const std::size_t w = widths[pi];
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < w; ++j)
        out[i * total + off + j] = parts[pi].at(i * w + j);
    off += w;
  }
  bool tape = false;
  for (const Tensor& p : parts) tape |= (grad_enabled() && p.requires_grad());
  if (!tape) return Tensor::from_data({m, total}, std::move(out));
  std::vector<Tensor> parent_vec(parts.begin(), parts.end());
  Tensor y = make_op_output({m, total}, std::move(parent_vec),
                            [m, total, widths](detail::TensorImpl& self) {
    std::size_t off2 = 0;
    for (std::size_t pi = 0; pi < widths.size(); ++pi) {
      auto& par = *self.parents[pi];
      const std::size_t w = widths[pi];
      if (par.requires_grad)
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < w; ++j)
            par.sweep_grad[i * w + j] += self.sweep_grad[i * total + off2 + j];
      off2 += w;
    }
  });
  y.impl()->data = std::move(out);
  return y;
}

Tensor gather_rows(const Tensor& x, const std::vector<std::size_t>& indices) {
  require_rank2(x, "gather_rows");
  const std::size_t m = x.rows(), d = x.cols();
  if (indices.empty()) throw ShapeError("gather_rows: empty index list");
  for (std::size_t idx : indices)
    if (idx >= m)
      throw std::out_of_range("gather_rows: row " + std::to_string(idx) +
                              " outside [0, " + std::to_string(m) + ")");
  std::vector<double> out(indices.size() * d);
  for (std::size_t i = 0; i < indices.size(); ++i)
    std::copy_n(x.data() + indices[i] * d, d, out.data() + i * d);
  if (!want_tape({&x}))
    return Tensor::from_data({indices.size(), d}, std::move(out));
  Tensor y = make_op_output({indices.size(), d}, {x},
                            [indices, d](detail::TensorImpl& self) {
    auto& px = *self.parents[0];
    if (!px.requires_grad) return;
    for (std::size_t i = 0; i < indices.size(); ++i)
      for (std::size_t j = 0; j < d; ++j)
        px.sweep_grad[indices[i] * d + j] += self.sweep_grad[i * d + j];
  });
  y.impl()->data = std::move(out);
  return y;
}

// ---- backward ----

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1)
    throw ShapeError("backward: loss must be a scalar");
  auto root = loss.impl();

  // Post-order over the tape: parents appear before consumers.
  std::vector<detail::TensorImpl*> order;
  std::unordered_set<detail::TensorImpl*> visited;
  std::vector<std::pair<detail::TensorImpl*, std::size_t>> stack;
  visited.insert(root.get());
  stack.emplace_back(root.get(), 0);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      detail::TensorImpl* p = node->parents[next++].get();
      if (visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (detail::TensorImpl* n : order) n->sweep_grad.assign(n->data.size(), 0.0);
  root->sweep_grad[0] = 1.0;

  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if ((*it)->backward_fn) (*it)->backward_fn(**it);

  for (detail::TensorImpl* n : order) {
    if (n->requires_grad) {
      if (n->grad.empty()) n->grad.assign(n->data.size(), 0.0);
      for (std::size_t i = 0; i < n->grad.size(); ++i)
        n->grad[i] += n->sweep_grad[i];
    }
    std::vector<double>().swap(n->sweep_grad);
  }
}

}  // namespace reltr
