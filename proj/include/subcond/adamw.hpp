#pragma once

#include <string>
#include <utility>
#include <vector>

#include "subcond/tensor.hpp"

namespace subcond {

struct AdamWOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
  void validate() const;
};

/// AdamW with decoupled weight decay: the decay term multiplies the
/// parameter directly and never enters the moment estimates.
///
///   m <- b1 m + (1-b1) g          v <- b2 v + (1-b2) g^2
///   theta <- theta (1 - lr wd) - lr mhat / (sqrt(vhat) + eps)
///
/// with bias-corrected mhat = m / (1 - b1^t), vhat = v / (1 - b2^t).
class AdamW {
public:
  AdamW(std::vector<std::pair<std::string, Tensor>> params, AdamWOptions opts);

  /// One update over all parameters using their accumulated grads; an
  /// untouched grad buffer counts as zero. Throws NonFiniteError naming the
  /// parameter if its grad contains NaN/Inf.
  void step();
  void zero_grad();

  void set_lr(double lr) { opts_.lr = lr; }
  const AdamWOptions& options() const { return opts_; }
  std::int64_t step_count() const { return step_; }

private:
  struct Slot {
    std::string name;
    Tensor param;
    std::vector<double> m;
    std::vector<double> v;
  };
  std::vector<Slot> slots_;
  AdamWOptions opts_;
  std::int64_t step_ = 0;
};

}  // namespace subcond
