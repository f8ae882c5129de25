#include "subcond/ops.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace subcond {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using MapConstMat = Eigen::Map<const RowMat>;

void check_finite(const Tensor& t, const char* op) {
  for (double v : t.values()) {
    if (!std::isfinite(v)) {
      throw NonFiniteError(std::string(op) + " produced a non-finite value");
    }
  }
}

bool tracking(std::initializer_list<const Tensor*> inputs) {
  if (!GradGraph::active()) return false;
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

// Registers the adjoint closure and marks participants for the finiteness
// scan. The output inherits requires_grad from its inputs.
void record(Tensor& out, std::initializer_list<const Tensor*> inputs,
            std::function<void()> adjoint) {
  out.set_requires_grad(true);
  GradGraph* g = GradGraph::active();
  g->record(std::move(adjoint));
  for (const Tensor* t : inputs) g->track(*t);
  g->track(out);
}

double gelu_value(double x) {
  return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2));
}

double gelu_derivative(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

}  // namespace

Activation activation_from_string(std::string_view name) {
  if (name == "identity") return Activation::Identity;
  if (name == "relu") return Activation::Relu;
  if (name == "elu") return Activation::Elu;
  if (name == "gelu") return Activation::Gelu;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

std::string_view to_string(Activation kind) {
  switch (kind) {
    case Activation::Identity: return "identity";
    case Activation::Relu: return "relu";
    case Activation::Elu: return "elu";
    case Activation::Gelu: return "gelu";
  }
  return "?";
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("add: shapes " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()) + " differ");
  }
  std::vector<double> out(a.values().begin(), a.values().end());
  auto bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  Tensor result(a.shape(), std::move(out));
  check_finite(result, "add");
  if (tracking({&a, &b})) {
    Tensor av = a, bv2 = b, ov = result;
    record(result, {&a, &b}, [av, bv2, ov]() mutable {
      if (!ov.has_grad()) return;
      if (av.requires_grad()) av.accumulate_grad(ov.grad());
      if (bv2.requires_grad()) bv2.accumulate_grad(ov.grad());
    });
  }
  return result;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("mul: shapes " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()) + " differ");
  }
  std::vector<double> out(a.numel());
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  Tensor result(a.shape(), std::move(out));
  check_finite(result, "mul");
  if (tracking({&a, &b})) {
    Tensor ac = a, bc = b, oc = result;
    record(result, {&a, &b}, [ac, bc, oc]() mutable {
      if (!oc.has_grad()) return;
      auto g = oc.grad();
      if (ac.requires_grad()) {
        auto ga = ac.grad_mut();
        auto bv2 = bc.values();
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * bv2[i];
      }
      if (bc.requires_grad()) {
        auto gb = bc.grad_mut();
        auto av2 = ac.values();
        for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g[i] * av2[i];
      }
    });
  }
  return result;
}

Tensor scale(const Tensor& x, double factor) {
  std::vector<double> out(x.values().begin(), x.values().end());
  for (double& v : out) v *= factor;
  Tensor result(x.shape(), std::move(out));
  check_finite(result, "scale");
  if (tracking({&x})) {
    Tensor xc = x, oc = result;
    record(result, {&x}, [xc, oc, factor]() mutable {
      if (!oc.has_grad()) return;
      auto g = oc.grad();
      auto gx = xc.grad_mut();
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += factor * g[i];
    });
  }
  return result;
}

Tensor add_bias(const Tensor& x, const Tensor& bias) {
  if (x.ndim() != 2 || bias.ndim() != 1 || x.dim(1) != bias.dim(0)) {
    throw DimensionError("add_bias: expected B x m and m, got " + shape_str(x.shape()) +
                         " and " + shape_str(bias.shape()));
  }
  const std::int64_t rows = x.dim(0), cols = x.dim(1);
  std::vector<double> out(x.values().begin(), x.values().end());
  auto bv = bias.values();
  for (std::int64_t r = 0; r < rows; ++r) {
    for (std::int64_t c = 0; c < cols; ++c) out[static_cast<std::size_t>(r * cols + c)] += bv[c];
  }
  Tensor result(x.shape(), std::move(out));
  check_finite(result, "add_bias");
  if (tracking({&x, &bias})) {
    Tensor xc = x, bc = bias, oc = result;
    record(result, {&x, &bias}, [xc, bc, oc, rows, cols]() mutable {
      if (!oc.has_grad()) return;
      auto g = oc.grad();
      if (xc.requires_grad()) xc.accumulate_grad(g);
      if (bc.requires_grad()) {
        auto gb = bc.grad_mut();
        for (std::int64_t r = 0; r < rows; ++r) {
          for (std::int64_t c = 0; c < cols; ++c) gb[c] += g[static_cast<std::size_t>(r * cols + c)];
        }
      }
    });
  }
  return result;
}

Tensor reshape(const Tensor& x, Shape new_shape) {
  if (shape_numel(new_shape) != x.numel()) {
    throw DimensionError("reshape: cannot view " + shape_str(x.shape()) + " as " +
                         shape_str(new_shape));
  }
  Tensor result(std::move(new_shape), std::vector<double>(x.values().begin(), x.values().end()));
  if (tracking({&x})) {
    Tensor xc = x, oc = result;
    record(result, {&x}, [xc, oc]() mutable {
      if (!oc.has_grad()) return;
      xc.accumulate_grad(oc.grad());
    });
  }
  return result;
}

Tensor transpose(const Tensor& x) {
  if (x.ndim() != 2) {
    throw DimensionError("transpose: expected a 2-D tensor, got " + shape_str(x.shape()));
  }
  const std::int64_t rows = x.dim(0), cols = x.dim(1);
  std::vector<double> out(static_cast<std::size_t>(rows * cols));
  MapConstMat in(x.values().data(), rows, cols);
  MapMat o(out.data(), cols, rows);
  o = in.transpose();
  Tensor result(Shape{cols, rows}, std::move(out));
  if (tracking({&x})) {
    Tensor xc = x, oc = result;
    record(result, {&x}, [xc, oc, rows, cols]() mutable {
      if (!oc.has_grad()) return;
      MapConstMat g(oc.grad().data(), cols, rows);
      MapMat gx(xc.grad_mut().data(), rows, cols);
      gx.noalias() += g.transpose();
    });
  }
  return result;
}

Tensor sum(const Tensor& x) {
  double total = 0.0;
  for (double v : x.values()) total += v;
  Tensor result = Tensor::scalar(total);
  check_finite(result, "sum");
  if (tracking({&x})) {
    Tensor xc = x, oc = result;
    record(result, {&x}, [xc, oc]() mutable {
      if (!oc.has_grad()) return;
      const double g = oc.grad()[0];
      auto gx = xc.grad_mut();
      for (double& v : gx) v += g;
    });
  }
  return result;
}

Tensor mean_over_spatial(const Tensor& x) {
  if (x.ndim() != 4) {
    throw DimensionError("mean_over_spatial: expected N x C x H x W, got " +
                         shape_str(x.shape()));
  }
  const std::int64_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::int64_t hw = h * w;
  std::vector<double> out(static_cast<std::size_t>(n * c), 0.0);
  auto xv = x.values();
  for (std::int64_t i = 0; i < n * c; ++i) {
    double acc = 0.0;
    const double* p = xv.data() + i * hw;
    for (std::int64_t j = 0; j < hw; ++j) acc += p[j];
    out[static_cast<std::size_t>(i)] = acc / static_cast<double>(hw);
  }
  Tensor result(Shape{n, c}, std::move(out));
  check_finite(result, "mean_over_spatial");
  if (tracking({&x})) {
    Tensor xc = x, oc = result;
    record(result, {&x}, [xc, oc, n, c, hw]() mutable {
      if (!oc.has_grad()) return;
      auto g = oc.grad();
      auto gx = xc.grad_mut();
      const double inv = 1.0 / static_cast<double>(hw);
      for (std::int64_t i = 0; i < n * c; ++i) {
        const double gi = g[static_cast<std::size_t>(i)] * inv;
        double* p = gx.data() + i * hw;
        for (std::int64_t j = 0; j < hw; ++j) p[j] += gi;
      }
    });
  }
  return result;
}

Tensor gather_rows(const Tensor& x, std::span<const int> rows) {
  if (x.ndim() < 1) throw DimensionError("gather_rows: scalar input");
  if (rows.empty()) throw InputError("gather_rows: empty row selection");
  const std::int64_t batch = x.dim(0);
  const std::int64_t stride = x.numel() / batch;
  for (int r : rows) {
    if (r < 0 || r >= batch) {
      throw InputError("gather_rows: row " + std::to_string(r) + " outside [0, " +
                       std::to_string(batch) + ")");
    }
  }
  Shape out_shape = x.shape();
  out_shape[0] = static_cast<std::int64_t>(rows.size());
  std::vector<double> out(static_cast<std::size_t>(stride) * rows.size());
  auto xv = x.values();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy_n(xv.data() + static_cast<std::int64_t>(rows[i]) * stride, stride,
                out.data() + static_cast<std::int64_t>(i) * stride);
  }
  Tensor result(std::move(out_shape), std::move(out));
  if (tracking({&x})) {
    std::vector<int> rows_copy(rows.begin(), rows.end());
    Tensor xc = x, oc = result;
    record(result, {&x}, [xc, oc, rows_copy, stride]() mutable {
      if (!oc.has_grad()) return;
      auto g = oc.grad();
      auto gx = xc.grad_mut();
      for (std::size_t i = 0; i < rows_copy.size(); ++i) {
        const double* src = g.data() + static_cast<std::int64_t>(i) * stride;
        double* dst = gx.data() + static_cast<std::int64_t>(rows_copy[i]) * stride;
        for (std::int64_t j = 0; j < stride; ++j) dst[j] += src[j];
      }
    });
  }
  return result;
}

Tensor add_rows(const Tensor& base, std::span<const int> rows, const Tensor& delta) {
  if (base.ndim() < 1 || delta.ndim() != base.ndim()) {
    throw DimensionError("add_rows: rank mismatch between " + shape_str(base.shape()) +
                         " and " + shape_str(delta.shape()));
  }
  for (int axis = 1; axis < base.ndim(); ++axis) {
    if (base.dim(axis) != delta.dim(axis)) {
      throw DimensionError("add_rows: row shapes differ, " + shape_str(base.shape()) +
                           " vs " + shape_str(delta.shape()));
    }
  }
  if (static_cast<std::int64_t>(rows.size()) != delta.dim(0)) {
    throw DimensionError("add_rows: " + std::to_string(rows.size()) + " rows but delta has " +
                         std::to_string(delta.dim(0)));
  }
  const std::int64_t batch = base.dim(0);
  const std::int64_t stride = base.numel() / batch;
  for (int r : rows) {
    if (r < 0 || r >= batch) {
      throw InputError("add_rows: row " + std::to_string(r) + " outside [0, " +
                       std::to_string(batch) + ")");
    }
  }
  std::vector<double> out(base.values().begin(), base.values().end());
  auto dv = delta.values();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double* dst = out.data() + static_cast<std::int64_t>(rows[i]) * stride;
    const double* src = dv.data() + static_cast<std::int64_t>(i) * stride;
    for (std::int64_t j = 0; j < stride; ++j) dst[j] += src[j];
  }
  Tensor result(base.shape(), std::move(out));
  check_finite(result, "add_rows");
  if (tracking({&base, &delta})) {
    std::vector<int> rows_copy(rows.begin(), rows.end());
    Tensor bc = base, dc = delta, oc = result;
    record(result, {&base, &delta}, [bc, dc, oc, rows_copy, stride]() mutable {
      if (!oc.has_grad()) return;
      auto g = oc.grad();
      if (bc.requires_grad()) bc.accumulate_grad(g);
      if (dc.requires_grad()) {
        auto gd = dc.grad_mut();
        for (std::size_t i = 0; i < rows_copy.size(); ++i) {
          const double* src = g.data() + static_cast<std::int64_t>(rows_copy[i]) * stride;
          double* dst = gd.data() + static_cast<std::int64_t>(i) * stride;
          for (std::int64_t j = 0; j < stride; ++j) dst[j] += src[j];
        }
      }
    });
  }
  return result;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.ndim() != 2 || b.ndim() != 2 || a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul: incompatible shapes " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()));
  }
  const std::int64_t p = a.dim(0), q = a.dim(1), r = b.dim(1);
  std::vector<double> out(static_cast<std::size_t>(p * r));
  {
    MapConstMat ma(a.values().data(), p, q);
    MapConstMat mb(b.values().data(), q, r);
    MapMat mo(out.data(), p, r);
    mo.noalias() = ma * mb;
  }
  Tensor result(Shape{p, r}, std::move(out));
  check_finite(result, "matmul");
  if (tracking({&a, &b})) {
    Tensor ac = a, bc = b, oc = result;
    record(result, {&a, &b}, [ac, bc, oc, p, q, r]() mutable {
      if (!oc.has_grad()) return;
      MapConstMat g(oc.grad().data(), p, r);
      if (ac.requires_grad()) {
        MapConstMat mb(bc.values().data(), q, r);
        MapMat ga(ac.grad_mut().data(), p, q);
        ga.noalias() += g * mb.transpose();
      }
      if (bc.requires_grad()) {
        MapConstMat ma(ac.values().data(), p, q);
        MapMat gb(bc.grad_mut().data(), q, r);
        gb.noalias() += ma.transpose() * g;
      }
    });
  }
  return result;
}

Tensor conv2d(const Tensor& x, const Tensor& k, const Conv2dOpts& opts) {
  if (x.ndim() != 4 || k.ndim() != 4) {
    throw DimensionError("conv2d: expected 4-D input and kernel, got " + shape_str(x.shape()) +
                         " and " + shape_str(k.shape()));
  }
  if (opts.stride < 1) throw DimensionError("conv2d: stride must be positive");
  if (opts.pad_h < 0 || opts.pad_w < 0) throw DimensionError("conv2d: padding must be nonnegative");
  const std::int64_t n = x.dim(0), cin = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::int64_t cout = k.dim(0), kh = k.dim(2), kw = k.dim(3);
  if (k.dim(1) != cin) {
    throw DimensionError("conv2d: kernel expects " + std::to_string(k.dim(1)) +
                         " input channels, input has " + std::to_string(cin));
  }
  if (kh > h + 2 * opts.pad_h || kw > w + 2 * opts.pad_w) {
    throw DimensionError("conv2d: kernel " + std::to_string(kh) + "x" + std::to_string(kw) +
                         " larger than padded input " + std::to_string(h + 2 * opts.pad_h) +
                         "x" + std::to_string(w + 2 * opts.pad_w));
  }
  const std::int64_t oh = (h + 2 * opts.pad_h - kh) / opts.stride + 1;
  const std::int64_t ow = (w + 2 * opts.pad_w - kw) / opts.stride + 1;

  std::vector<double> out(static_cast<std::size_t>(n * cout * oh * ow), 0.0);
  const auto xv = x.values();
  const auto kv = k.values();
  const std::int64_t stride = opts.stride, ph = opts.pad_h, pw = opts.pad_w;

  for (std::int64_t in = 0; in < n; ++in) {
    for (std::int64_t oc = 0; oc < cout; ++oc) {
      for (std::int64_t oy = 0; oy < oh; ++oy) {
        for (std::int64_t ox = 0; ox < ow; ++ox) {
          double acc = 0.0;
          for (std::int64_t ic = 0; ic < cin; ++ic) {
            const double* xp = xv.data() + ((in * cin + ic) * h) * w;
            const double* kp = kv.data() + ((oc * cin + ic) * kh) * kw;
            for (std::int64_t u = 0; u < kh; ++u) {
              const std::int64_t iy = oy * stride + u - ph;
              if (iy < 0 || iy >= h) continue;
              for (std::int64_t v = 0; v < kw; ++v) {
                const std::int64_t ix = ox * stride + v - pw;
                if (ix < 0 || ix >= w) continue;
                acc += xp[iy * w + ix] * kp[u * kw + v];
              }
            }
          }
          out[static_cast<std::size_t>(((in * cout + oc) * oh + oy) * ow + ox)] = acc;
        }
      }
    }
  }
  Tensor result(Shape{n, cout, oh, ow}, std::move(out));
  check_finite(result, "conv2d");
  if (tracking({&x, &k})) {
    Tensor xc = x, kc = k, ocr = result;
    record(result, {&x, &k}, [xc, kc, ocr, n, cin, h, w, cout, kh, kw, oh, ow, stride, ph,
                              pw]() mutable {
      if (!ocr.has_grad()) return;
      auto g = ocr.grad();
      const auto xv2 = xc.values();
      const auto kv2 = kc.values();
      const bool need_x = xc.requires_grad();
      const bool need_k = kc.requires_grad();
      std::span<double> gx = need_x ? xc.grad_mut() : std::span<double>{};
      std::span<double> gk = need_k ? kc.grad_mut() : std::span<double>{};
      for (std::int64_t in = 0; in < n; ++in) {
        for (std::int64_t oc = 0; oc < cout; ++oc) {
          for (std::int64_t oy = 0; oy < oh; ++oy) {
            for (std::int64_t ox = 0; ox < ow; ++ox) {
              const double go = g[static_cast<std::size_t>(((in * cout + oc) * oh + oy) * ow + ox)];
              if (go == 0.0) continue;
              for (std::int64_t ic = 0; ic < cin; ++ic) {
                const std::int64_t xbase = ((in * cin + ic) * h) * w;
                const std::int64_t kbase = ((oc * cin + ic) * kh) * kw;
                for (std::int64_t u = 0; u < kh; ++u) {
                  const std::int64_t iy = oy * stride + u - ph;
                  if (iy < 0 || iy >= h) continue;
                  for (std::int64_t v = 0; v < kw; ++v) {
                    const std::int64_t ix = ox * stride + v - pw;
                    if (ix < 0 || ix >= w) continue;
                    if (need_x) gx[static_cast<std::size_t>(xbase + iy * w + ix)] += go * kv2[static_cast<std::size_t>(kbase + u * kw + v)];
                    if (need_k) gk[static_cast<std::size_t>(kbase + u * kw + v)] += go * xv2[static_cast<std::size_t>(xbase + iy * w + ix)];
                  }
                }
              }
            }
          }
        }
      }
    });
  }
  return result;
}

Tensor conv2d(const Tensor& x, const Tensor& k, int stride, int padding) {
  return conv2d(x, k, Conv2dOpts{stride, padding, padding});
}

Tensor activation(const Tensor& x, Activation kind) {
  if (kind == Activation::Identity) {
    // Still a fresh tensor so downstream mutation cannot alias the input.
    Tensor result(x.shape(), std::vector<double>(x.values().begin(), x.values().end()));
    if (tracking({&x})) {
      Tensor xc = x, oc = result;
      record(result, {&x}, [xc, oc]() mutable {
        if (!oc.has_grad()) return;
        xc.accumulate_grad(oc.grad());
      });
    }
    return result;
  }
  std::vector<double> out(x.numel());
  auto xv = x.values();
  switch (kind) {
    case Activation::Relu:
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] > 0.0 ? xv[i] : 0.0;
      break;
    case Activation::Elu:
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] > 0.0 ? xv[i] : std::expm1(xv[i]);
      break;
    case Activation::Gelu:
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = gelu_value(xv[i]);
      break;
    default:
      break;
  }
  Tensor result(x.shape(), std::move(out));
  check_finite(result, "activation");
  if (tracking({&x})) {
    Tensor xc = x, oc = result;
    record(result, {&x}, [xc, oc, kind]() mutable {
      if (!oc.has_grad()) return;
      auto g = oc.grad();
      auto gx = xc.grad_mut();
      auto xv2 = xc.values();
      switch (kind) {
        case Activation::Relu:
          for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += xv2[i] > 0.0 ? g[i] : 0.0;
          break;
        case Activation::Elu:
          for (std::size_t i = 0; i < gx.size(); ++i)
            gx[i] += g[i] * (xv2[i] > 0.0 ? 1.0 : std::exp(xv2[i]));
          break;
        case Activation::Gelu:
          for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[i] * gelu_derivative(xv2[i]);
          break;
        default:
          break;
      }
    });
  }
  return result;
}

Tensor relu(const Tensor& x) { return activation(x, Activation::Relu); }
Tensor elu(const Tensor& x) { return activation(x, Activation::Elu); }
Tensor gelu(const Tensor& x) { return activation(x, Activation::Gelu); }

Tensor softmax_cross_entropy(const Tensor& logits, std::span<const int> labels) {
  if (logits.ndim() != 2) {
    throw DimensionError("softmax_cross_entropy: logits must be N x K, got " +
                         shape_str(logits.shape()));
  }
  const std::int64_t n = logits.dim(0), k = logits.dim(1);
  if (static_cast<std::int64_t>(labels.size()) != n) {
    throw DimensionError("softmax_cross_entropy: " + std::to_string(labels.size()) +
                         " labels for " + std::to_string(n) + " rows");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= k) {
      throw InputError("softmax_cross_entropy: label " + std::to_string(labels[i]) +
                       " out of range [0, " + std::to_string(k) + ") at row " + std::to_string(i));
    }
  }
  auto lv = logits.values();
  std::vector<double> probs(static_cast<std::size_t>(n * k));
  double loss = 0.0;
  for (std::int64_t r = 0; r < n; ++r) {
    const double* row = lv.data() + r * k;
    double m = row[0];
    for (std::int64_t c = 1; c < k; ++c) m = std::max(m, row[c]);
    double denom = 0.0;
    for (std::int64_t c = 0; c < k; ++c) {
      const double e = std::exp(row[c] - m);
      probs[static_cast<std::size_t>(r * k + c)] = e;
      denom += e;
    }
    for (std::int64_t c = 0; c < k; ++c) probs[static_cast<std::size_t>(r * k + c)] /= denom;
    // -log p[label] computed from the stabilized pieces.
    loss += std::log(denom) - (row[labels[static_cast<std::size_t>(r)]] - m);
  }
  loss /= static_cast<double>(n);
  Tensor result = Tensor::scalar(loss);
  check_finite(result, "softmax_cross_entropy");
  if (tracking({&logits})) {
    std::vector<int> labels_copy(labels.begin(), labels.end());
    Tensor lc = logits, oc = result;
    record(result, {&logits},
           [lc, oc, probs = std::move(probs), labels_copy, n, k]() mutable {
             if (!oc.has_grad()) return;
             const double g = oc.grad()[0] / static_cast<double>(n);
             auto gl = lc.grad_mut();
             for (std::int64_t r = 0; r < n; ++r) {
               for (std::int64_t c = 0; c < k; ++c) {
                 double d = probs[static_cast<std::size_t>(r * k + c)];
                 if (c == labels_copy[static_cast<std::size_t>(r)]) d -= 1.0;
                 gl[static_cast<std::size_t>(r * k + c)] += g * d;
               }
             }
           });
  }
  return result;
}

std::vector<int> argmax_rows(const Tensor& logits) {
  if (logits.ndim() != 2) {
    throw DimensionError("argmax_rows: expected a 2-D tensor, got " + shape_str(logits.shape()));
  }
  const std::int64_t n = logits.dim(0), k = logits.dim(1);
  std::vector<int> out(static_cast<std::size_t>(n));
  auto lv = logits.values();
  for (std::int64_t r = 0; r < n; ++r) {
    const double* row = lv.data() + r * k;
    int best = 0;
    for (std::int64_t c = 1; c < k; ++c) {
      if (row[c] > row[best]) best = static_cast<int>(c);
    }
    out[static_cast<std::size_t>(r)] = best;
  }
  return out;
}

}  // namespace subcond
