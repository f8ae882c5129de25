#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "subcond/ops.hpp"
#include "subcond/rng.hpp"

namespace subcond {

/// Sentinel for batch rows whose subject has no adapter; such rows flow
/// through the shared path only.
inline constexpr int kUnknownSubject = -1;

/// Per-subject row index lists derived from a batch's subject ids: the
/// gather/scatter form of the binary row-selection masks. Known rows are
/// partitioned (each row appears in exactly one subject's list); unknown
/// rows appear in none.
struct SubjectRouting {
  std::vector<std::vector<int>> rows;
  std::vector<int> unknown_rows;
  int batch_size = 0;

  int subject_count() const { return static_cast<int>(rows.size()); }
};

/// ids must be in [0, subject_count) or kUnknownSubject.
SubjectRouting route(std::span<const int> subject_ids, int subject_count);

/// One low-rank correction: the effective weight delta is a * b, zero at
/// construction because b starts at zero.
struct AdapterPair {
  Tensor a;
  Tensor b;
};

struct LayerParamCounts {
  std::int64_t shared = 0;
  std::int64_t per_subject = 0;
};

using NamedParams = std::vector<std::pair<std::string, Tensor>>;

/// Pre-activation pieces of a decomposed forward pass. fused = general +
/// adapter holds exactly; activated = sigma(fused).
struct DecomposedForward {
  Tensor general;
  Tensor adapter;
  Tensor fused;
  Tensor activated;
};

// ---------------------------------------------------------------------------
// Linear layers
// ---------------------------------------------------------------------------

/// Plain dense layer sigma(x W^T + b). Draws its weight from the same child
/// stream ("weight") as the shared path of the subject-conditioned variant,
/// so both initialize identically from one layer seed.
class PlainLinear {
public:
  PlainLinear(int out_features, int in_features, bool with_bias, Activation act, Rng rng);

  Tensor forward(const Tensor& x) const;
  Tensor pre_activation(const Tensor& x) const;

  int in_features() const { return in_features_; }
  int out_features() const { return out_features_; }
  Activation activation_kind() const { return act_; }
  const Tensor& weight() const { return weight_; }
  Tensor& weight() { return weight_; }
  const std::optional<Tensor>& bias() const { return bias_; }

  NamedParams named_params(const std::string& prefix) const;
  LayerParamCounts param_counts() const;
  PlainLinear clone() const;

private:
  int out_features_, in_features_;
  Activation act_;
  Tensor weight_;               // m x n
  std::optional<Tensor> bias_;  // m
};

/// Shared dense weight plus one additive low-rank correction per subject,
/// selected by batch routing:
///
///   out = sigma( x W^T + b + scatter_s[ (alpha/r) * x_s A_s B_s ] )
///
/// A_s is n x r drawn from N(0, 1/n), B_s is r x m and starts at zero, so a
/// freshly built layer computes exactly the plain layer's function. The
/// alpha/r factor multiplies the adapter product at forward time.
class SubjectConditionedLinear {
public:
  SubjectConditionedLinear(int out_features, int in_features, int rank, int subject_count,
                           double alpha, bool with_bias, Activation act, Rng rng);

  Tensor forward(const Tensor& x, const SubjectRouting& routing) const;
  DecomposedForward forward_decomposed(const Tensor& x, const SubjectRouting& routing) const;

  /// Appends a freshly initialized adapter for subject id == subject_count().
  /// The new pair draws from the same indexed stream it would have used at
  /// construction time.
  int add_subject();

  int in_features() const { return in_features_; }
  int out_features() const { return out_features_; }
  int rank() const { return rank_; }
  double alpha() const { return alpha_; }
  int subject_count() const { return static_cast<int>(adapters_.size()); }
  Activation activation_kind() const { return act_; }
  const Tensor& weight() const { return weight_; }
  const std::optional<Tensor>& bias() const { return bias_; }
  const AdapterPair& adapter(int subject) const { return adapters_.at(static_cast<std::size_t>(subject)); }
  AdapterPair& adapter(int subject) { return adapters_.at(static_cast<std::size_t>(subject)); }

  /// Effective correction (alpha/r) * (A_s B_s)^T as a dense m x n matrix.
  Eigen::MatrixXd effective_correction(int subject) const;

  NamedParams named_params(const std::string& prefix) const;
  LayerParamCounts param_counts() const;
  SubjectConditionedLinear clone() const;

private:
  int out_features_, in_features_, rank_;
  double alpha_;
  Activation act_;
  Tensor weight_;
  std::optional<Tensor> bias_;
  std::vector<AdapterPair> adapters_;
  Rng adapter_rng_;  // parent stream for indexed adapter draws
};

/// Entirely low-rank layer sigma( x (alpha/r) A B + b ): the per-subject
/// baseline building block with no shared full-rank weight.
class LowRankLinear {
public:
  LowRankLinear(int out_features, int in_features, int rank, double alpha, bool with_bias,
                Activation act, Rng rng);

  Tensor forward(const Tensor& x) const;
  Tensor pre_activation(const Tensor& x) const;

  int rank() const { return rank_; }
  const AdapterPair& pair() const { return pair_; }

  NamedParams named_params(const std::string& prefix) const;
  LayerParamCounts param_counts() const;
  LowRankLinear clone() const;

private:
  int out_features_, in_features_, rank_;
  double alpha_;
  Activation act_;
  AdapterPair pair_;
  std::optional<Tensor> bias_;
};

// ---------------------------------------------------------------------------
// Convolutional layers
// ---------------------------------------------------------------------------

/// Plain conv layer sigma(x * K); bias-free, matching the decomposed
/// variant.
class PlainConv {
public:
  PlainConv(int out_channels, int in_channels, int kernel_h, int kernel_w, Conv2dOpts opts,
            Activation act, Rng rng);

  Tensor forward(const Tensor& x) const;
  Tensor pre_activation(const Tensor& x) const;

  const Tensor& kernel() const { return kernel_; }
  const Conv2dOpts& conv_opts() const { return opts_; }
  Activation activation_kind() const { return act_; }

  NamedParams named_params(const std::string& prefix) const;
  LayerParamCounts param_counts() const;
  PlainConv clone() const;

private:
  int out_channels_, in_channels_, kernel_h_, kernel_w_;
  Conv2dOpts opts_;
  Activation act_;
  Tensor kernel_;  // C_out x C_in x kh x kw
};

/// Shared kernel plus per-subject factorized kernel corrections. The
/// correction is computed as two sequential convolutions: A_s reduces the
/// channel dimension from C_in to r while preserving the spatial kernel
/// size, then the 1x1 kernel B_s projects from r back to C_out:
///
///   out = sigma( x * K + scatter_s[ (alpha/r) * ((x_s * A_s) * B_s) ] )
///
/// A_s ~ N(0, 1/(C_in kh kw)), B_s = 0 at construction.
class SubjectConditionedConv {
public:
  SubjectConditionedConv(int out_channels, int in_channels, int kernel_h, int kernel_w, int rank,
                         int subject_count, double alpha, Conv2dOpts opts, Activation act,
                         Rng rng);

  Tensor forward(const Tensor& x, const SubjectRouting& routing) const;
  DecomposedForward forward_decomposed(const Tensor& x, const SubjectRouting& routing) const;

  int add_subject();

  int rank() const { return rank_; }
  double alpha() const { return alpha_; }
  int subject_count() const { return static_cast<int>(adapters_.size()); }
  const Tensor& kernel() const { return kernel_; }
  const Conv2dOpts& conv_opts() const { return opts_; }
  const AdapterPair& adapter(int subject) const { return adapters_.at(static_cast<std::size_t>(subject)); }
  AdapterPair& adapter(int subject) { return adapters_.at(static_cast<std::size_t>(subject)); }

  /// Composed dense kernel (alpha/r) * sum_rho B_s[o,rho] A_s[rho,c,u,v],
  /// flattened to C_out x (C_in kh kw).
  Eigen::MatrixXd effective_correction(int subject) const;

  NamedParams named_params(const std::string& prefix) const;
  LayerParamCounts param_counts() const;
  SubjectConditionedConv clone() const;

private:
  int out_channels_, in_channels_, kernel_h_, kernel_w_, rank_;
  double alpha_;
  Conv2dOpts opts_;
  Activation act_;
  Tensor kernel_;
  std::vector<AdapterPair> adapters_;
  Rng adapter_rng_;
};

/// Entirely low-rank conv layer: sigma( (alpha/r) * ((x * A) * B) ).
class LowRankConv {
public:
  LowRankConv(int out_channels, int in_channels, int kernel_h, int kernel_w, int rank,
              double alpha, Conv2dOpts opts, Activation act, Rng rng);

  Tensor forward(const Tensor& x) const;
  Tensor pre_activation(const Tensor& x) const;

  const AdapterPair& pair() const { return pair_; }

  NamedParams named_params(const std::string& prefix) const;
  LayerParamCounts param_counts() const;
  LowRankConv clone() const;

private:
  int out_channels_, in_channels_, kernel_h_, kernel_w_, rank_;
  double alpha_;
  Conv2dOpts opts_;
  Activation act_;
  AdapterPair pair_;
};

// ---------------------------------------------------------------------------
// Adapter geometry
// ---------------------------------------------------------------------------

/// Frobenius cosine between the effective corrections of every subject pair.
/// Entries lie in [-1, 1]; an entry involving a zero correction is 0, the
/// diagonal is 1 for nonzero corrections.
Eigen::MatrixXd adapter_similarity(const SubjectConditionedLinear& layer);
Eigen::MatrixXd adapter_similarity(const SubjectConditionedConv& layer);

/// Cosine matrix over corrections flattened and concatenated across layers;
/// rows of `corrections` are one flattened correction per subject.
Eigen::MatrixXd correction_cosine_matrix(const Eigen::MatrixXd& corrections);

}  // namespace subcond
