#include "subcond/adamw.hpp"

#include <cmath>

namespace subcond {

void AdamWOptions::validate() const {
  if (lr < 0.0) throw ConfigError("adamw: learning rate must be nonnegative");
  if (beta1 <= 0.0 || beta1 >= 1.0 || beta2 <= 0.0 || beta2 >= 1.0) {
    throw ConfigError("adamw: betas must lie in (0, 1)");
  }
  if (eps <= 0.0) throw ConfigError("adamw: eps must be positive");
  if (weight_decay < 0.0) throw ConfigError("adamw: weight decay must be nonnegative");
}

AdamW::AdamW(std::vector<std::pair<std::string, Tensor>> params, AdamWOptions opts)
    : opts_(opts) {
  opts_.validate();
  slots_.reserve(params.size());
  for (auto& [name, t] : params) {
    Slot s;
    s.name = std::move(name);
    s.param = t;
    s.m.assign(static_cast<std::size_t>(t.numel()), 0.0);
    s.v.assign(static_cast<std::size_t>(t.numel()), 0.0);
    slots_.push_back(std::move(s));
  }
}

void AdamW::step() {
  ++step_;
  const double bc1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(step_));
  for (Slot& s : slots_) {
    auto theta = s.param.values_mut();
    auto g = s.param.grad();  // empty == all zeros
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double gi = g.empty() ? 0.0 : g[i];
      if (!std::isfinite(gi)) {
        throw NonFiniteError("adamw: non-finite gradient for parameter '" + s.name + "'");
      }
      s.m[i] = opts_.beta1 * s.m[i] + (1.0 - opts_.beta1) * gi;
      s.v[i] = opts_.beta2 * s.v[i] + (1.0 - opts_.beta2) * gi * gi;
      const double mhat = s.m[i] / bc1;
      const double vhat = s.v[i] / bc2;
      theta[i] = theta[i] * (1.0 - opts_.lr * opts_.weight_decay) -
                 opts_.lr * mhat / (std::sqrt(vhat) + opts_.eps);
    }
  }
}

void AdamW::zero_grad() {
  for (Slot& s : slots_) s.param.zero_grad();
}

}  // namespace subcond
