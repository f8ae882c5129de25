#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "subcond/errors.hpp"

namespace subcond {

using Shape = std::vector<std::int64_t>;

std::int64_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

struct TensorNode {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;  // empty until first accumulation; empty == all zeros
  bool requires_grad = false;
};

}  // namespace detail

/// Dense row-major tensor of 64-bit floats. A Tensor is a cheap shared
/// handle: copies alias the same storage, `clone()` deep-copies the values.
/// Every dimension must be positive and the value buffer always has exactly
/// numel entries; the grad buffer, when present, has the same length.
class Tensor {
public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return static_cast<bool>(p_); }
  const Shape& shape() const;
  int ndim() const;
  std::int64_t dim(int axis) const;
  std::int64_t numel() const;

  std::span<const double> values() const;
  std::span<double> values_mut();
  /// Value of a single-element tensor.
  double item() const;

  bool requires_grad() const;
  Tensor& set_requires_grad(bool flag);

  /// True once any adjoint has been accumulated.
  bool has_grad() const;
  /// Empty span means "all zeros" (no adjoint ever touched this tensor).
  std::span<const double> grad() const;
  /// Allocates a zeroed buffer on first use.
  std::span<double> grad_mut();
  void zero_grad();
  void accumulate_grad(std::span<const double> delta);

  /// Deep copy of the values (grad is not copied).
  Tensor clone() const;

  /// Identity of the underlying storage.
  detail::TensorNode* node() const { return p_.get(); }

private:
  std::shared_ptr<detail::TensorNode> p_;
};

/// Tape of recorded primitive operations, replayed in reverse by backward().
///
/// Constructing a GradGraph installs it as the active graph for the current
/// thread (nesting shadows); ops record their adjoint closures while one is
/// active and at least one input requires grad. Recording order is execution
/// order, so inputs always precede their consumers. One backward pass per
/// recorded forward pass; the tape is cleared afterward and a second
/// backward without new recordings is a usage error.
class GradGraph {
public:
  GradGraph();
  ~GradGraph();
  GradGraph(const GradGraph&) = delete;
  GradGraph& operator=(const GradGraph&) = delete;

  /// Seeds d(loss)/d(loss) = 1 and replays the tape in reverse, accumulating
  /// adjoints into every tracked tensor that requires grad. The loss must be
  /// a single-element tensor. Consumes the graph.
  void backward(const Tensor& loss);

  static GradGraph* active();

  // Recording interface used by op implementations.
  void record(std::function<void()> adjoint);
  void track(const Tensor& t);
  std::size_t size() const { return entries_.size(); }

private:
  std::vector<std::function<void()>> entries_;
  std::vector<Tensor> tracked_;
  bool consumed_ = false;
  GradGraph* prev_ = nullptr;
};

/// backward() on the active graph of this thread.
void backward(const Tensor& loss);

}  // namespace subcond
