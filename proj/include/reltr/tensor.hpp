#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "reltr/rng.hpp"

namespace reltr {

namespace detail {

struct TensorImpl {
  std::vector<std::size_t> shape;
  std::vector<double> data;
  std::vector<double> grad;  // persistent, accumulated across backward calls
  bool requires_grad = false;

  // Tape: set on op outputs, empty on leaves.
  std::vector<std::shared_ptr<TensorImpl>> parents;
  std::function<void(TensorImpl&)> backward_fn;

  // Scratch gradient used during a single backward sweep. Keeping the sweep
  // gradient separate from `grad` is what makes repeated backward calls
  // accumulate instead of double-counting through intermediates.
  std::vector<double> sweep_grad;
};

}  // namespace detail

// Dense row-major tensor of 64-bit floats with reverse-mode differentiation.
// Value-semantic handle: copies share storage and tape.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<std::size_t> shape, bool requires_grad = false);
  static Tensor full(std::vector<std::size_t> shape, double value,
                     bool requires_grad = false);
  static Tensor from_data(std::vector<std::size_t> shape,
                          std::vector<double> data, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const std::vector<std::size_t>& shape() const { return impl_->shape; }
  std::size_t rank() const { return impl_->shape.size(); }
  std::size_t size() const { return impl_->data.size(); }
  std::size_t extent(std::size_t axis) const { return impl_->shape[axis]; }
  std::size_t rows() const { return impl_->shape[0]; }
  std::size_t cols() const { return impl_->shape[impl_->shape.size() - 1]; }

  double* data() { return impl_->data.data(); }
  const double* data() const { return impl_->data.data(); }
  double& at(std::size_t i) { return impl_->data[i]; }
  double at(std::size_t i) const { return impl_->data[i]; }
  double& at2(std::size_t i, std::size_t j) { return impl_->data[i * cols() + j]; }
  double at2(std::size_t i, std::size_t j) const { return impl_->data[i * cols() + j]; }
  double value() const;  // scalar read, throws on non-scalars

  bool requires_grad() const { return impl_->requires_grad; }
  void set_requires_grad(bool v) { impl_->requires_grad = v; }
  bool has_grad() const { return !impl_->grad.empty(); }
  const std::vector<double>& grad() const;  // throws if never populated
  void zero_grad() const;                    // handle semantics: storage is shared

  // Data-only copy, detached from the tape.
  Tensor detach() const;

  std::shared_ptr<detail::TensorImpl> impl() const { return impl_; }

 private:
  explicit Tensor(std::shared_ptr<detail::TensorImpl> impl)
      : impl_(std::move(impl)) {}
  std::shared_ptr<detail::TensorImpl> impl_;

  friend Tensor make_op_output(std::vector<std::size_t> shape,
                               std::vector<Tensor> parents,
                               std::function<void(detail::TensorImpl&)> fn);
};

// Thread-local switch; ops record no tape while disabled.
bool grad_enabled();

struct NoGradGuard {
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

std::string shape_str(const std::vector<std::size_t>& shape);

// ---- differentiable operations ----

Tensor add(const Tensor& a, const Tensor& b);              // same shape
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);              // elementwise
Tensor scale(const Tensor& a, double s);
Tensor add_row(const Tensor& a, const Tensor& bias);       // [m x n] + [n]
Tensor matmul(const Tensor& a, const Tensor& b);           // [m x k] * [k x n]
Tensor matmul_nt(const Tensor& a, const Tensor& b);        // [m x k] * [n x k]^T
Tensor softmax(const Tensor& x, int axis);

// Variants whose reductions sum their addends in value order, so the result
// depends only on the multiset of addends and not on row order upstream.
// Used inside attention, where permuting the key set must permute outputs
// bitwise (set semantics, no positional role for the key index).
Tensor softmax_rows_canonical(const Tensor& x);            // rank-2, axis 1
Tensor matmul_canonical(const Tensor& a, const Tensor& b); // [m x k] * [k x n]
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  double eps = 1e-5);
Tensor relu(const Tensor& x);
Tensor leaky_relu(const Tensor& x, double slope = 0.01);
Tensor dropout(const Tensor& x, double p, bool training, Rng& rng);
Tensor cross_entropy(const Tensor& logits, const std::vector<int>& targets);
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
Tensor slice_cols(const Tensor& x, std::size_t start, std::size_t len);
Tensor concat_cols(std::span<const Tensor> parts);
Tensor gather_rows(const Tensor& x, const std::vector<std::size_t>& indices);

// Populates `grad` on every requires_grad ancestor of a scalar loss.
// Repeated calls without zero_grad accumulate.
void backward(const Tensor& loss);

}  // namespace reltr
