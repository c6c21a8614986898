#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mstd/backtest.hpp"
#include "mstd/config.hpp"
#include "mstd/dataset.hpp"
#include "mstd/errors.hpp"
#include "mstd/metrics.hpp"
#include "mstd/model.hpp"
#include "mstd/series.hpp"
#include "mstd/train.hpp"

namespace fs = std::filesystem;
using namespace mstd;

namespace {

// Command-line overrides; only flags the user actually passed are applied,
// so precedence is defaults < config file < flags < MSTD_OUT_DIR.
struct Flags {
  std::optional<std::string> config_file;
  std::optional<std::string> csv;
  std::optional<std::uint64_t> synth_seed;
  std::optional<std::size_t> synth_length, regime_len;
  std::optional<double> drift, noise, start_price;
  std::optional<std::size_t> n_train, n_dev, n_test, window, stride;
  std::optional<bool> standardize;
  std::optional<std::string> scales, fc;
  std::optional<std::size_t> filters, kernel, hidden;
  std::optional<double> lr;
  std::optional<std::size_t> batch, epochs;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir, mode;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("-c,--config", f.config_file, "config file (key = value)");
  cmd->add_option("--csv", f.csv, "input price CSV (timestamp,price)");
  cmd->add_option("--synth-seed", f.synth_seed);
  cmd->add_option("--synth-length", f.synth_length);
  cmd->add_option("--regime-len", f.regime_len);
  cmd->add_option("--drift", f.drift);
  cmd->add_option("--noise", f.noise);
  cmd->add_option("--start-price", f.start_price);
  cmd->add_option("--n-train", f.n_train, "raw points in the train segment");
  cmd->add_option("--n-dev", f.n_dev);
  cmd->add_option("--n-test", f.n_test);
  cmd->add_option("-T,--window", f.window, "window length");
  cmd->add_option("--stride", f.stride);
  cmd->add_option("--standardize", f.standardize,
                  "per-window standardization");
  cmd->add_option("--scales", f.scales, "down-sampling rates, e.g. 1,2,3");
  cmd->add_option("--filters", f.filters);
  cmd->add_option("--kernel", f.kernel);
  cmd->add_option("--hidden", f.hidden, "GRU hidden size");
  cmd->add_option("--fc", f.fc, "fully-connected hidden widths");
  cmd->add_option("--lr", f.lr);
  cmd->add_option("--batch", f.batch);
  cmd->add_option("--epochs", f.epochs);
  cmd->add_option("--seed", f.seed);
  cmd->add_option("-o,--out-dir", f.out_dir);
  cmd->add_option("--mode", f.mode, "profit mode: position | indicator");
}

RunConfig resolve(const Flags& f) {
  RunConfig cfg;
  if (f.config_file) apply_config_file(cfg, *f.config_file);
  if (f.csv) cfg.data.csv = *f.csv;
  if (f.synth_seed) cfg.data.synth.seed = *f.synth_seed;
  if (f.synth_length) cfg.data.synth.length = *f.synth_length;
  if (f.regime_len) cfg.data.synth.regime_len = *f.regime_len;
  if (f.drift) cfg.data.synth.drift = *f.drift;
  if (f.noise) cfg.data.synth.noise = *f.noise;
  if (f.start_price) cfg.data.synth.start_price = *f.start_price;
  if (f.n_train) cfg.data.split.n_train = *f.n_train;
  if (f.n_dev) cfg.data.split.n_dev = *f.n_dev;
  if (f.n_test) cfg.data.split.n_test = *f.n_test;
  if (f.window) cfg.model.window = *f.window;
  if (f.stride) cfg.data.stride = *f.stride;
  if (f.standardize) cfg.data.standardize = *f.standardize;
  if (f.scales) cfg.model.scales = parse_size_list(*f.scales);
  if (f.filters) cfg.model.filters = *f.filters;
  if (f.kernel) cfg.model.kernel = *f.kernel;
  if (f.hidden) cfg.model.hidden = *f.hidden;
  if (f.fc) cfg.model.fc_hidden = parse_size_list(*f.fc);
  if (f.lr) cfg.train.learning_rate = *f.lr;
  if (f.batch) cfg.train.batch_size = *f.batch;
  if (f.epochs) cfg.train.max_epochs = *f.epochs;
  if (f.seed) cfg.train.seed = *f.seed;
  if (f.out_dir) cfg.out_dir = *f.out_dir;
  if (f.mode) cfg.profit_mode = parse_profit_mode(*f.mode);
  if (const char* env = std::getenv("MSTD_OUT_DIR")) cfg.out_dir = env;
  cfg.validate();
  return cfg;
}

const LabeledDataset& pick_split(const DatasetBundle& bundle,
                                 const std::string& split) {
  if (split == "train") return bundle.train;
  if (split == "dev") return bundle.dev;
  if (split == "test") return bundle.test;
  throw ConfigError("split must be train, dev or test, got '" + split + "'");
}

const std::vector<double>& pick_prices(const DatasetBundle& bundle,
                                       const std::string& split) {
  if (split == "train") return bundle.train_prices;
  if (split == "dev") return bundle.dev_prices;
  return bundle.test_prices;
}

int cmd_synth(const Flags& flags, const std::string& out_file) {
  RunConfig cfg = resolve(flags);
  if (cfg.data.csv) throw ConfigError("synth: --csv makes no sense here");
  const TimeSeries series = synth_series(cfg.data.synth);
  fs::path out = out_file.empty()
                     ? fs::path(cfg.out_dir) / "synth.csv"
                     : fs::path(out_file);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  save_csv(series, out);
  std::printf("wrote %zu points to %s\n", series.size(), out.string().c_str());
  return 0;
}

int cmd_train(const Flags& flags) {
  RunConfig cfg = resolve(flags);
  const DatasetBundle bundle = build_from_config(cfg);
  std::printf("threshold %.6g | train %zu dev %zu test %zu windows\n",
              bundle.threshold, bundle.train.size(), bundle.dev.size(),
              bundle.test.size());
  const TrainResult result = train(bundle.train, bundle.dev, cfg.model,
                                   cfg.train);
  fs::create_directories(cfg.out_dir);
  const fs::path ckpt_path = fs::path(cfg.out_dir) / "checkpoint.bin";
  const fs::path log_path = fs::path(cfg.out_dir) / "train_log.csv";
  save_checkpoint(result.best, ckpt_path);
  write_train_log(result.log, log_path);
  std::printf("best epoch %zu | dev acc %.4f | dev f1 %.4f\n",
              result.best.epoch, result.best.dev_acc, result.best.dev_f1);
  std::printf("checkpoint: %s\nlog: %s\n", ckpt_path.string().c_str(),
              log_path.string().c_str());
  return 0;
}

int cmd_eval(const Flags& flags, const std::string& ckpt_file,
             const std::string& split) {
  RunConfig cfg = resolve(flags);
  const Checkpoint ckpt = load_checkpoint(ckpt_file);
  cfg.model = ckpt.model;  // the checkpoint owns the architecture
  const DatasetBundle bundle = build_from_config(cfg);
  const LabeledDataset& ds = pick_split(bundle, split);
  const auto preds = predict_dataset(cfg.model, ckpt.params, ds);
  const auto cm = confusion(preds, ds.labels, cfg.model.classes);
  const std::string report = format_report(cm, "split: " + split);
  std::fputs(report.c_str(), stdout);
  fs::create_directories(cfg.out_dir);
  const fs::path report_path =
      fs::path(cfg.out_dir) / ("metrics_" + split + ".txt");
  std::ofstream(report_path) << report;
  return 0;
}

int cmd_backtest(const Flags& flags, const std::string& ckpt_file,
                 const std::string& split) {
  RunConfig cfg = resolve(flags);
  const Checkpoint ckpt = load_checkpoint(ckpt_file);
  cfg.model = ckpt.model;
  const DatasetBundle bundle = build_from_config(cfg);
  const LabeledDataset& ds = pick_split(bundle, split);
  const auto preds = predict_dataset(cfg.model, ckpt.params, ds);
  const BacktestLedger ledger =
      simulate(preds, ds.labels, ds.deltas, cfg.profit_mode);
  const double bh = buy_and_hold(pick_prices(bundle, split));
  fs::create_directories(cfg.out_dir);
  const fs::path ledger_path =
      fs::path(cfg.out_dir) / ("ledger_" + split + ".csv");
  write_ledger_csv(ledger, ledger_path);
  std::printf("profits of simulated trading (%s, %s mode)\n", split.c_str(),
              cfg.profit_mode == ProfitMode::Position ? "position"
                                                      : "indicator");
  std::printf("  %-12s %12.2f\n", "B&H", bh);
  std::printf("  %-12s %12.2f\n", "MSTD-RCNN", ledger.total());
  std::printf("ledger: %s\n", ledger_path.string().c_str());
  return 0;
}

int cmd_ablate(const Flags& flags, std::size_t n_seeds) {
  RunConfig cfg = resolve(flags);
  const DatasetBundle bundle = build_from_config(cfg);
  static const std::vector<std::vector<std::size_t>> kSettings = {
      {1}, {1, 2}, {1, 2, 3}};

  fs::create_directories(cfg.out_dir);
  const fs::path runs_path = fs::path(cfg.out_dir) / "ablation_runs.csv";
  const fs::path report_path = fs::path(cfg.out_dir) / "ablation_report.txt";
  std::ofstream runs(runs_path);
  if (!runs) throw DataError("ablate: cannot write " + runs_path.string());
  runs << "setting,seed,epoch0_loss,best_epoch,best_epoch_loss,min_loss,"
          "test_acc,test_f1\n";

  std::string report = "Effects of multi-scale features (synthetic data)\n";
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-20s %-17s %-17s\n", "setting",
                "ACC(mean±std)", "F1(mean±std)");
  report += buf;

  for (const auto& scales : kSettings) {
    ModelConfig mcfg = cfg.model;
    mcfg.scales = scales;
    std::string name = "(";
    for (std::size_t i = 0; i < scales.size(); ++i) {
      if (i) name += ",";
      name += std::to_string(scales[i]);
    }
    name += ") MSTD-RCNN";

    std::vector<double> accs, f1s;
    for (std::size_t s = 0; s < n_seeds; ++s) {
      TrainConfig tcfg = cfg.train;
      tcfg.seed = cfg.train.seed + s;
      const TrainResult result = train(bundle.train, bundle.dev, mcfg, tcfg);
      const double epoch0_loss = result.log.front().train_loss;
      double best_epoch_loss = 0.0;
      double min_loss = epoch0_loss;
      for (const auto& rec : result.log) {
        if (rec.epoch == result.best.epoch) best_epoch_loss = rec.train_loss;
        min_loss = std::min(min_loss, rec.train_loss);
      }
      const auto [acc, f1] = evaluate(mcfg, result.best.params, bundle.test);
      accs.push_back(acc);
      f1s.push_back(f1);
      std::snprintf(buf, sizeof(buf),
                    "\"%s\",%llu,%.17g,%zu,%.17g,%.17g,%.17g,%.17g\n",
                    name.c_str(), static_cast<unsigned long long>(tcfg.seed),
                    epoch0_loss, result.best.epoch, best_epoch_loss, min_loss,
                    acc, f1);
      runs << buf;
      std::printf("%s seed %llu: epoch0 loss %.4f -> best %.4f | test acc "
                  "%.4f f1 %.4f\n",
                  name.c_str(), static_cast<unsigned long long>(tcfg.seed),
                  epoch0_loss, best_epoch_loss, acc, f1);
    }
    const auto mean_std = [](const std::vector<double>& v) {
      double m = 0.0;
      for (double x : v) m += x;
      m /= static_cast<double>(v.size());
      double ss = 0.0;
      for (double x : v) ss += (x - m) * (x - m);
      const double sd =
          v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1))
                       : 0.0;
      return std::pair<double, double>{m, sd};
    };
    const auto [am, as] = mean_std(accs);
    const auto [fm, fs_] = mean_std(f1s);
    std::snprintf(buf, sizeof(buf), "%-20s %.4f±%.4f     %.4f±%.4f\n",
                  name.c_str(), am, as, fm, fs_);
    report += buf;
  }
  std::ofstream(report_path) << report;
  std::fputs(report.c_str(), stdout);
  std::printf("runs: %s\nreport: %s\n", runs_path.string().c_str(),
              report_path.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MSTD-RCNN financial trend classifier"};
  app.require_subcommand(1);

  Flags flags;
  std::string out_file, ckpt_file, split = "test";
  std::size_t n_seeds = 5;

  auto* synth = app.add_subcommand("synth", "write a synthetic price CSV");
  add_common(synth, flags);
  synth->add_option("--out", out_file, "output CSV path");

  auto* train_cmd = app.add_subcommand("train", "train and checkpoint");
  add_common(train_cmd, flags);

  auto* eval_cmd = app.add_subcommand("eval", "classification metrics");
  add_common(eval_cmd, flags);
  eval_cmd->add_option("--checkpoint", ckpt_file)->required();
  eval_cmd->add_option("--split", split, "train | dev | test");

  auto* backtest_cmd =
      app.add_subcommand("backtest", "simulated trading with B&H baseline");
  add_common(backtest_cmd, flags);
  backtest_cmd->add_option("--checkpoint", ckpt_file)->required();
  backtest_cmd->add_option("--split", split, "train | dev | test");

  auto* ablate_cmd = app.add_subcommand(
      "ablate", "train scale settings (1), (1,2), (1,2,3) across seeds");
  add_common(ablate_cmd, flags);
  ablate_cmd->add_option("--seeds", n_seeds, "seeds per setting");

  try {
    app.parse(argc, argv);
    if (synth->parsed()) return cmd_synth(flags, out_file);
    if (train_cmd->parsed()) return cmd_train(flags);
    if (eval_cmd->parsed()) return cmd_eval(flags, ckpt_file, split);
    if (backtest_cmd->parsed()) return cmd_backtest(flags, ckpt_file, split);
    if (ablate_cmd->parsed()) return cmd_ablate(flags, n_seeds);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
