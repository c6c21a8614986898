#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mstd/dataset.hpp"
#include "mstd/model.hpp"

namespace mstd {

struct TrainConfig {
  double learning_rate = 0.0005;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 100;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 1;

  void validate() const;
};

struct AdamState {
  std::vector<Tensor> m, v;  // first and second moments, one per tensor
  std::size_t t = 0;         // step counter
};

AdamState make_adam_state(const ModelParams& params);

/// One bias-corrected Adam update, applied in place. Throws NumericError on
/// non-finite gradients.
void adam_step(const std::vector<Tensor*>& params,
               const std::vector<Tensor>& grads, AdamState& state,
               const TrainConfig& cfg);

struct Checkpoint {
  ModelConfig model;
  ModelParams params;
  AdamState opt;
  std::size_t epoch = 0;
  double dev_acc = 0.0;
  double dev_f1 = 0.0;
  std::uint64_t seed = 0;
};

struct EpochRecord {
  std::size_t epoch;
  double train_loss;
  double dev_acc;
  double dev_f1;
};

struct TrainResult {
  Checkpoint best;  // highest dev accuracy, ties to the earliest epoch
  Checkpoint last;  // state after the final epoch, for resuming
  std::vector<EpochRecord> log;
};

/// Mini-batch training with per-epoch seeded shuffles and dev-accuracy
/// model selection. Fully deterministic in (seed, data, config). Passing
/// `resume` continues from that checkpoint's epoch with identical
/// trajectory to an unbroken run.
TrainResult train(const LabeledDataset& train_ds, const LabeledDataset& dev_ds,
                  const ModelConfig& model_cfg, const TrainConfig& train_cfg,
                  const Checkpoint* resume = nullptr);

/// Accuracy and weighted F1 of argmax predictions on a dataset.
std::pair<double, double> evaluate(const ModelConfig& cfg,
                                   const ModelParams& params,
                                   const LabeledDataset& ds);

std::vector<int> predict_dataset(const ModelConfig& cfg,
                                 const ModelParams& params,
                                 const LabeledDataset& ds);

// Versioned binary checkpoint: magic + text header + little-endian f64
// tensors in declaration order (params, then Adam m, then v).
void save_checkpoint(const Checkpoint& ckpt,
                     const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

void write_train_log(const std::vector<EpochRecord>& log,
                     const std::filesystem::path& path);

}  // namespace mstd
