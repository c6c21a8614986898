#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mstd/tape.hpp"
#include "mstd/tensor.hpp"

namespace mstd {

/// Network hyperparameters. Defaults follow the reference setting:
/// T=30 windows, scales (1,2,3), 16 filters per scale, GRU hidden size 48.
struct ModelConfig {
  std::size_t window = 30;                    // T
  std::vector<std::size_t> scales{1, 2, 3};   // down-sampling rates
  std::size_t filters = 16;                   // l, filters per scale
  std::size_t kernel = 3;                     // k
  std::size_t hidden = 48;                    // q, GRU state size
  std::size_t classes = 3;                    // C
  std::vector<std::size_t> fc_hidden{24};     // widths between GRU and logits

  std::size_t feature_rows() const { return scales.size() * filters; }
  std::size_t feature_cols() const { return window - kernel + 1; }

  /// Throws ConfigError unless every scale yields at least one feature
  /// position (k <= floor(T / max scale)), scales are distinct ascending
  /// starting at 1, and all sizes are positive.
  void validate() const;
};

/// All learnable tensors. Declaration order (= tensors() order) is the
/// serialization and RNG-consumption order.
struct ModelParams {
  std::vector<Tensor> conv_w;  // per scale, {filters, kernel}
  std::vector<Tensor> conv_b;  // per scale, {filters, 1}
  Tensor w_r, u_r, w_z, u_z, w_h, u_h;
  std::vector<Tensor> fc_w;  // hidden layers then the logits layer
  std::vector<Tensor> fc_b;

  std::vector<Tensor*> tensors();
  std::vector<const Tensor*> tensors() const;
  std::vector<std::string> tensor_names() const;
};

/// Glorot-uniform weights, zero biases, deterministic in the seed.
ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed);

/// Tape leaves for every parameter tensor, mirroring ModelParams.
struct ParamNodes {
  std::vector<Tape::NodeId> conv_w, conv_b;
  Tape::NodeId w_r, u_r, w_z, u_z, w_h, u_h;
  std::vector<Tape::NodeId> fc_w, fc_b;
};

ParamNodes register_params(Tape& tape, const ModelParams& params);
/// Same order as ModelParams::tensors().
std::vector<Tape::NodeId> flatten(const ParamNodes& pn);

enum class Activation { Identity, Relu };

/// Valid 1-d convolution over a raw sequence: one output per position,
/// stride 1, no pooling. w is a {1,k} tape node, b a {1,1} bias node.
Tape::NodeId conv1d(Tape& tape, Tape::NodeId w, Tape::NodeId b,
                    const std::vector<double>& x, Activation act);

struct GruNodes {
  Tape::NodeId w_r, u_r, w_z, u_z, w_h, u_h;
};

/// One GRU update: reset/update gates, candidate state, convex blend.
Tape::NodeId gru_step(Tape& tape, const GruNodes& g, Tape::NodeId input,
                      Tape::NodeId h_prev);

/// Down-sample per scale, convolve per filter, left-pad each feature map to
/// T-k+1 and stack rows scale-major then filter-major.
Tape::NodeId feature_matrix_node(Tape& tape, const ParamNodes& pn,
                                 const ModelConfig& cfg,
                                 const std::vector<double>& x);

/// Runs the GRU over the columns of E from a zero initial state and
/// returns the final hidden state {q,1}.
Tape::NodeId encode(Tape& tape, const ParamNodes& pn, const ModelConfig& cfg,
                    Tape::NodeId feature_matrix);

/// Fully-connected stack with ReLU between layers, then softmax.
Tape::NodeId head(Tape& tape, const ParamNodes& pn, Tape::NodeId h);

/// Full forward pass, returns class probabilities {C,1}.
Tape::NodeId forward(Tape& tape, const ParamNodes& pn, const ModelConfig& cfg,
                     const std::vector<double>& x);

/// Mean cross-entropy over a mini-batch (clamped log).
Tape::NodeId batch_loss(Tape& tape, const ParamNodes& pn,
                        const ModelConfig& cfg,
                        const std::vector<std::vector<double>>& windows,
                        const std::vector<int>& labels);

// Value-level conveniences (each builds a private tape).
Tensor feature_matrix(const ModelConfig& cfg, const ModelParams& params,
                      const std::vector<double>& x);
Tensor predict_proba(const ModelConfig& cfg, const ModelParams& params,
                     const std::vector<double>& x);
int predict_class(const ModelConfig& cfg, const ModelParams& params,
                  const std::vector<double>& x);
double loss_value(const ModelConfig& cfg, const ModelParams& params,
                  const std::vector<std::vector<double>>& windows,
                  const std::vector<int>& labels);

}  // namespace mstd
