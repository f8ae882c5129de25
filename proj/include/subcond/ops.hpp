#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "subcond/tensor.hpp"

namespace subcond {

enum class Activation { Identity, Relu, Elu, Gelu };

Activation activation_from_string(std::string_view name);
std::string_view to_string(Activation kind);

// Elementwise and structural ops. All are differentiable and record onto the
// active GradGraph when one exists and an input requires grad.

Tensor add(const Tensor& a, const Tensor& b);  // same shape
Tensor mul(const Tensor& a, const Tensor& b);  // Hadamard, same shape
Tensor scale(const Tensor& x, double factor);
Tensor add_bias(const Tensor& x, const Tensor& bias);  // x: B x m, bias: m
Tensor reshape(const Tensor& x, Shape new_shape);
Tensor transpose(const Tensor& x);  // 2-D
Tensor sum(const Tensor& x);        // -> scalar
/// N x C x H x W -> N x C, mean over the spatial extent.
Tensor mean_over_spatial(const Tensor& x);

// Row selection along axis 0 (rows are slices of the remaining dims).
Tensor gather_rows(const Tensor& x, std::span<const int> rows);
/// Copy of base with delta[i] added to row rows[i]; rows must be in range,
/// repeats accumulate.
Tensor add_rows(const Tensor& base, std::span<const int> rows, const Tensor& delta);

Tensor matmul(const Tensor& a, const Tensor& b);  // p x q times q x r

/// Cross-correlation (ML convention) with zero padding, dilation 1.
/// x: N x C_in x H x W, k: C_out x C_in x kh x kw.
/// H' = floor((H + 2*pad_h - kh) / stride) + 1, analogously W'.
struct Conv2dOpts {
  int stride = 1;
  int pad_h = 0;
  int pad_w = 0;
};
Tensor conv2d(const Tensor& x, const Tensor& k, const Conv2dOpts& opts);
Tensor conv2d(const Tensor& x, const Tensor& k, int stride = 1, int padding = 0);

Tensor activation(const Tensor& x, Activation kind);
Tensor relu(const Tensor& x);
Tensor elu(const Tensor& x);   // alpha = 1
Tensor gelu(const Tensor& x);  // exact Gaussian-CDF form

/// Mean over the batch of -log softmax(logits)[label]; max-subtraction
/// stabilized. logits: N x K, labels: length N with values in [0, K).
Tensor softmax_cross_entropy(const Tensor& logits, std::span<const int> labels);

/// Row-wise argmax of a 2-D tensor; ties resolve to the lowest index.
std::vector<int> argmax_rows(const Tensor& logits);

}  // namespace subcond
