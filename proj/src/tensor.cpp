#include "subcond/tensor.hpp"

#include <cmath>
#include <sstream>
#include <unordered_set>

namespace subcond {

std::int64_t shape_numel(const Shape& shape) {
  std::int64_t n = 1;
  for (std::int64_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad) {
  for (std::int64_t d : shape) {
    if (d <= 0) {
      throw DimensionError("tensor dimensions must be positive, got " + shape_str(shape));
    }
  }
  const std::int64_t n = shape_numel(shape);
  if (static_cast<std::int64_t>(values.size()) != n) {
    throw DimensionError("tensor data length " + std::to_string(values.size()) +
                         " does not match shape " + shape_str(shape));
  }
  p_ = std::make_shared<detail::TensorNode>();
  p_->shape = std::move(shape);
  p_->values = std::move(values);
  p_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  const std::int64_t n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(static_cast<std::size_t>(n), 0.0),
                requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const std::int64_t n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(static_cast<std::size_t>(n), value),
                requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor(Shape{1}, std::vector<double>{value}, requires_grad);
}

const Shape& Tensor::shape() const { return p_->shape; }

int Tensor::ndim() const { return static_cast<int>(p_->shape.size()); }

std::int64_t Tensor::dim(int axis) const { return p_->shape.at(static_cast<std::size_t>(axis)); }

std::int64_t Tensor::numel() const { return static_cast<std::int64_t>(p_->values.size()); }

std::span<const double> Tensor::values() const { return p_->values; }

std::span<double> Tensor::values_mut() { return p_->values; }

double Tensor::item() const {
  if (numel() != 1) {
    throw UsageError("item() requires a single-element tensor, shape is " + shape_str(shape()));
  }
  return p_->values[0];
}

bool Tensor::requires_grad() const { return p_->requires_grad; }

Tensor& Tensor::set_requires_grad(bool flag) {
  p_->requires_grad = flag;
  return *this;
}

bool Tensor::has_grad() const { return !p_->grad.empty(); }

std::span<const double> Tensor::grad() const { return p_->grad; }

std::span<double> Tensor::grad_mut() {
  if (p_->grad.empty()) p_->grad.assign(p_->values.size(), 0.0);
  return p_->grad;
}

void Tensor::zero_grad() { p_->grad.clear(); }

void Tensor::accumulate_grad(std::span<const double> delta) {
  if (delta.size() != p_->values.size()) {
    throw DimensionError("gradient length " + std::to_string(delta.size()) +
                         " does not match tensor shape " + shape_str(shape()));
  }
  auto g = grad_mut();
  for (std::size_t i = 0; i < delta.size(); ++i) g[i] += delta[i];
}

Tensor Tensor::clone() const {
  return Tensor(p_->shape, p_->values, p_->requires_grad);
}

namespace {
thread_local GradGraph* g_active_graph = nullptr;
}

GradGraph::GradGraph() : prev_(g_active_graph) { g_active_graph = this; }

GradGraph::~GradGraph() { g_active_graph = prev_; }

GradGraph* GradGraph::active() { return g_active_graph; }

void GradGraph::record(std::function<void()> adjoint) {
  entries_.push_back(std::move(adjoint));
  consumed_ = false;
}

void GradGraph::track(const Tensor& t) { tracked_.push_back(t); }

void GradGraph::backward(const Tensor& loss) {
  if (!loss.defined()) throw UsageError("backward: loss tensor is undefined");
  if (loss.numel() != 1) {
    throw UsageError("backward requires a scalar loss, shape is " + shape_str(loss.shape()));
  }
  if (consumed_) {
    throw UsageError("backward called twice: the graph was already consumed");
  }
  Tensor seed = loss;
  seed.grad_mut()[0] += 1.0;

  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) (*it)();

  // NaN/Inf anywhere in the pass is an error state, not a silent result.
  std::unordered_set<detail::TensorNode*> seen;
  for (const Tensor& t : tracked_) {
    if (!seen.insert(t.node()).second) continue;
    for (double g : t.grad()) {
      if (!std::isfinite(g)) {
        throw NonFiniteError("backward produced a non-finite gradient");
      }
    }
  }

  entries_.clear();
  tracked_.clear();
  consumed_ = true;
}

void backward(const Tensor& loss) {
  GradGraph* g = GradGraph::active();
  if (!g) throw UsageError("backward: no active GradGraph on this thread");
  g->backward(loss);
}

}  // namespace subcond
