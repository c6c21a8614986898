#include "mstd/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "mstd/dataset.hpp"
#include "mstd/errors.hpp"

namespace mstd {

void ModelConfig::validate() const {
  if (window < 2) throw ConfigError("model: window must be >= 2");
  if (filters == 0 || hidden == 0 || classes == 0 || kernel == 0) {
    throw ConfigError("model: filters/hidden/classes/kernel must be >= 1");
  }
  if (scales.empty() || scales.front() != 1) {
    throw ConfigError("model: scales must start at 1");
  }
  for (std::size_t i = 1; i < scales.size(); ++i) {
    if (scales[i] <= scales[i - 1]) {
      throw ConfigError("model: scales must be distinct and ascending");
    }
  }
  const std::size_t max_scale = scales.back();
  if (kernel > window / max_scale) {
    throw ConfigError(
        "model: kernel too wide, need k <= floor(window / max scale)");
  }
  for (std::size_t w : fc_hidden) {
    if (w == 0) throw ConfigError("model: fc widths must be >= 1");
  }
}

std::vector<Tensor*> ModelParams::tensors() {
  std::vector<Tensor*> out;
  for (std::size_t s = 0; s < conv_w.size(); ++s) {
    out.push_back(&conv_w[s]);
    out.push_back(&conv_b[s]);
  }
  for (Tensor* t : {&w_r, &u_r, &w_z, &u_z, &w_h, &u_h}) out.push_back(t);
  for (std::size_t i = 0; i < fc_w.size(); ++i) {
    out.push_back(&fc_w[i]);
    out.push_back(&fc_b[i]);
  }
  return out;
}

std::vector<const Tensor*> ModelParams::tensors() const {
  auto mut = const_cast<ModelParams*>(this)->tensors();
  return {mut.begin(), mut.end()};
}

std::vector<std::string> ModelParams::tensor_names() const {
  std::vector<std::string> out;
  for (std::size_t s = 0; s < conv_w.size(); ++s) {
    out.push_back("conv_w" + std::to_string(s));
    out.push_back("conv_b" + std::to_string(s));
  }
  for (const char* n : {"w_r", "u_r", "w_z", "u_z", "w_h", "u_h"}) {
    out.emplace_back(n);
  }
  for (std::size_t i = 0; i < fc_w.size(); ++i) {
    out.push_back("fc_w" + std::to_string(i));
    out.push_back("fc_b" + std::to_string(i));
  }
  return out;
}

namespace {

Tensor glorot(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  const double limit =
      std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Tensor out({rows, cols});
  for (double& v : out.data()) v = dist(rng);
  return out;
}

}  // namespace

ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  ModelParams p;
  for (std::size_t s = 0; s < cfg.scales.size(); ++s) {
    p.conv_w.push_back(glorot(cfg.filters, cfg.kernel, rng));
    p.conv_b.push_back(Tensor::zeros({cfg.filters, 1}));
  }
  const std::size_t in = cfg.feature_rows();
  p.w_r = glorot(cfg.hidden, in, rng);
  p.u_r = glorot(cfg.hidden, cfg.hidden, rng);
  p.w_z = glorot(cfg.hidden, in, rng);
  p.u_z = glorot(cfg.hidden, cfg.hidden, rng);
  p.w_h = glorot(cfg.hidden, in, rng);
  p.u_h = glorot(cfg.hidden, cfg.hidden, rng);
  std::size_t prev = cfg.hidden;
  for (std::size_t w : cfg.fc_hidden) {
    p.fc_w.push_back(glorot(w, prev, rng));
    p.fc_b.push_back(Tensor::zeros({w, 1}));
    prev = w;
  }
  p.fc_w.push_back(glorot(cfg.classes, prev, rng));
  p.fc_b.push_back(Tensor::zeros({cfg.classes, 1}));
  return p;
}

ParamNodes register_params(Tape& tape, const ModelParams& params) {
  ParamNodes pn;
  for (std::size_t s = 0; s < params.conv_w.size(); ++s) {
    pn.conv_w.push_back(tape.leaf(params.conv_w[s]));
    pn.conv_b.push_back(tape.leaf(params.conv_b[s]));
  }
  pn.w_r = tape.leaf(params.w_r);
  pn.u_r = tape.leaf(params.u_r);
  pn.w_z = tape.leaf(params.w_z);
  pn.u_z = tape.leaf(params.u_z);
  pn.w_h = tape.leaf(params.w_h);
  pn.u_h = tape.leaf(params.u_h);
  for (std::size_t i = 0; i < params.fc_w.size(); ++i) {
    pn.fc_w.push_back(tape.leaf(params.fc_w[i]));
    pn.fc_b.push_back(tape.leaf(params.fc_b[i]));
  }
  return pn;
}

std::vector<Tape::NodeId> flatten(const ParamNodes& pn) {
  std::vector<Tape::NodeId> out;
  for (std::size_t s = 0; s < pn.conv_w.size(); ++s) {
    out.push_back(pn.conv_w[s]);
    out.push_back(pn.conv_b[s]);
  }
  for (Tape::NodeId id : {pn.w_r, pn.u_r, pn.w_z, pn.u_z, pn.w_h, pn.u_h}) {
    out.push_back(id);
  }
  for (std::size_t i = 0; i < pn.fc_w.size(); ++i) {
    out.push_back(pn.fc_w[i]);
    out.push_back(pn.fc_b[i]);
  }
  return out;
}

Tape::NodeId conv1d(Tape& tape, Tape::NodeId w, Tape::NodeId b,
                    const std::vector<double>& x, Activation act) {
  const std::size_t k = tape.value(w).cols();
  if (x.size() < k) {
    throw std::invalid_argument("conv1d: sequence shorter than kernel");
  }
  const std::size_t positions = x.size() - k + 1;
  // im2col of the input; constant with respect to the parameters
  Tensor cols({k, positions});
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < positions; ++c) cols(r, c) = x[c + r];
  }
  Tape::NodeId out = tape.add(tape.matmul(w, tape.leaf(std::move(cols))), b);
  return act == Activation::Relu ? tape.relu(out) : out;
}

Tape::NodeId gru_step(Tape& tape, const GruNodes& g, Tape::NodeId input,
                      Tape::NodeId h_prev) {
  auto r = tape.sigmoid(
      tape.add(tape.matmul(g.w_r, input), tape.matmul(g.u_r, h_prev)));
  auto z = tape.sigmoid(
      tape.add(tape.matmul(g.w_z, input), tape.matmul(g.u_z, h_prev)));
  auto cand = tape.tanh(tape.add(tape.matmul(g.w_h, input),
                                 tape.matmul(g.u_h, tape.mul(r, h_prev))));
  // h_t = (1 - z) .* h_{t-1} + z .* cand
  auto keep = tape.mul(tape.add_const(tape.scale(z, -1.0), 1.0), h_prev);
  return tape.add(keep, tape.mul(z, cand));
}

Tape::NodeId feature_matrix_node(Tape& tape, const ParamNodes& pn,
                                 const ModelConfig& cfg,
                                 const std::vector<double>& x) {
  if (x.size() != cfg.window) {
    throw std::invalid_argument("forward: window length mismatch");
  }
  std::vector<Tape::NodeId> rows;
  rows.reserve(cfg.feature_rows());
  for (std::size_t s = 0; s < cfg.scales.size(); ++s) {
    const auto xd = downsample(x, cfg.scales[s]);
    const std::size_t pad = cfg.window - xd.size();
    for (std::size_t j = 0; j < cfg.filters; ++j) {
      auto fmap = conv1d(tape, tape.row(pn.conv_w[s], j),
                         tape.element(pn.conv_b[s], j), xd, Activation::Relu);
      rows.push_back(tape.pad_cols_left(fmap, pad));
    }
  }
  return tape.vstack(rows);
}

Tape::NodeId encode(Tape& tape, const ParamNodes& pn, const ModelConfig& cfg,
                    Tape::NodeId feature_matrix) {
  const std::size_t steps = tape.value(feature_matrix).cols();
  if (steps == 0) throw std::invalid_argument("encode: empty feature matrix");
  const GruNodes g{pn.w_r, pn.u_r, pn.w_z, pn.u_z, pn.w_h, pn.u_h};
  Tape::NodeId h = tape.leaf(Tensor::zeros({cfg.hidden, 1}));
  for (std::size_t t = 0; t < steps; ++t) {
    h = gru_step(tape, g, tape.column(feature_matrix, t), h);
  }
  return h;
}

Tape::NodeId head(Tape& tape, const ParamNodes& pn, Tape::NodeId h) {
  Tape::NodeId z = h;
  const std::size_t layers = pn.fc_w.size();
  for (std::size_t i = 0; i + 1 < layers; ++i) {
    z = tape.relu(tape.add(tape.matmul(pn.fc_w[i], z), pn.fc_b[i]));
  }
  auto logits =
      tape.add(tape.matmul(pn.fc_w[layers - 1], z), pn.fc_b[layers - 1]);
  return tape.softmax(logits);
}

Tape::NodeId forward(Tape& tape, const ParamNodes& pn, const ModelConfig& cfg,
                     const std::vector<double>& x) {
  return head(tape, pn, encode(tape, pn, cfg,
                               feature_matrix_node(tape, pn, cfg, x)));
}

Tape::NodeId batch_loss(Tape& tape, const ParamNodes& pn,
                        const ModelConfig& cfg,
                        const std::vector<std::vector<double>>& windows,
                        const std::vector<int>& labels) {
  if (windows.empty() || windows.size() != labels.size()) {
    throw std::invalid_argument("loss: empty batch or size mismatch");
  }
  std::vector<Tape::NodeId> losses;
  losses.reserve(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= cfg.classes) {
      throw std::invalid_argument("loss: label out of range");
    }
    auto probs = forward(tape, pn, cfg, windows[i]);
    losses.push_back(tape.nll(probs, static_cast<std::size_t>(labels[i])));
  }
  return tape.average(losses);
}

Tensor feature_matrix(const ModelConfig& cfg, const ModelParams& params,
                      const std::vector<double>& x) {
  Tape tape;
  auto pn = register_params(tape, params);
  return tape.value(feature_matrix_node(tape, pn, cfg, x));
}

Tensor predict_proba(const ModelConfig& cfg, const ModelParams& params,
                     const std::vector<double>& x) {
  Tape tape;
  auto pn = register_params(tape, params);
  return tape.value(forward(tape, pn, cfg, x));
}

int predict_class(const ModelConfig& cfg, const ModelParams& params,
                  const std::vector<double>& x) {
  const Tensor p = predict_proba(cfg, params, x);
  std::size_t best = 0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p[i] > p[best]) best = i;
  }
  return static_cast<int>(best);
}

double loss_value(const ModelConfig& cfg, const ModelParams& params,
                  const std::vector<std::vector<double>>& windows,
                  const std::vector<int>& labels) {
  Tape tape;
  auto pn = register_params(tape, params);
  return tape.value(batch_loss(tape, pn, cfg, windows, labels))[0];
}

}  // namespace mstd
