#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "mstd/backtest.hpp"
#include "mstd/dataset.hpp"
#include "mstd/model.hpp"
#include "mstd/series.hpp"
#include "mstd/train.hpp"

namespace mstd {

struct DataConfig {
  std::optional<std::string> csv;  // absent -> synthetic generator
  SynthParams synth;
  SplitSpec split;
  std::size_t stride = 1;
  bool standardize = false;
};

/// Everything a CLI run needs. Populated from defaults, then the config
/// file, then command-line flags; MSTD_OUT_DIR wins over all for out_dir.
struct RunConfig {
  DataConfig data;
  ModelConfig model;
  TrainConfig train;
  std::string out_dir = "out";
  ProfitMode profit_mode = ProfitMode::Position;

  void validate() const;
};

/// Line-oriented `key = value` file with [data]/[model]/[train]/[run]
/// sections and # comments. Unknown sections or keys are rejected.
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

ProfitMode parse_profit_mode(const std::string& s);
std::vector<std::size_t> parse_size_list(const std::string& s);

/// Loads the CSV when configured, otherwise synthesizes a series.
TimeSeries load_series(const DataConfig& cfg);

DatasetBundle build_from_config(const RunConfig& cfg);

}  // namespace mstd
