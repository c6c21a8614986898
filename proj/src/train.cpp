#include "mstd/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "mstd/errors.hpp"
#include "mstd/metrics.hpp"

namespace mstd {

void TrainConfig::validate() const {
  if (learning_rate < 0.0) throw ConfigError("train: learning rate < 0");
  if (batch_size == 0) throw ConfigError("train: batch size must be >= 1");
  if (max_epochs == 0) throw ConfigError("train: max epochs must be >= 1");
  if (beta1 <= 0.0 || beta1 >= 1.0 || beta2 <= 0.0 || beta2 >= 1.0) {
    throw ConfigError("train: betas must lie in (0,1)");
  }
  if (epsilon <= 0.0) throw ConfigError("train: epsilon must be positive");
}

AdamState make_adam_state(const ModelParams& params) {
  AdamState st;
  for (const Tensor* t : params.tensors()) {
    st.m.push_back(Tensor::zeros(t->shape()));
    st.v.push_back(Tensor::zeros(t->shape()));
  }
  return st;
}

void adam_step(const std::vector<Tensor*>& params,
               const std::vector<Tensor>& grads, AdamState& state,
               const TrainConfig& cfg) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw std::invalid_argument("adam: tensor count mismatch");
  }
  for (const Tensor& g : grads) {
    if (!g.all_finite()) throw NumericError("adam: non-finite gradient");
  }
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double corr1 = 1.0 - std::pow(cfg.beta1, t);
  const double corr2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const Tensor& g = grads[i];
    Tensor& m = state.m[i];
    Tensor& v = state.v[i];
    if (!p.same_shape(g)) throw std::invalid_argument("adam: shape mismatch");
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
      v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
      const double m_hat = m[j] / corr1;
      const double v_hat = v[j] / corr2;
      p[j] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
}

std::vector<int> predict_dataset(const ModelConfig& cfg,
                                 const ModelParams& params,
                                 const LabeledDataset& ds) {
  std::vector<int> preds;
  preds.reserve(ds.size());
  for (const auto& w : ds.windows) {
    preds.push_back(predict_class(cfg, params, w));
  }
  return preds;
}

std::pair<double, double> evaluate(const ModelConfig& cfg,
                                   const ModelParams& params,
                                   const LabeledDataset& ds) {
  const auto preds = predict_dataset(cfg, params, ds);
  const auto cm = confusion(preds, ds.labels, cfg.classes);
  return {accuracy(cm), f1_weighted(cm)};
}

namespace {

// Per-epoch shuffle RNG: decoupled from the init stream so a resumed run
// sees the same permutations as an unbroken one.
std::vector<std::size_t> epoch_permutation(std::uint64_t seed,
                                           std::size_t epoch, std::size_t n) {
  std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * epoch);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

Checkpoint snapshot(const ModelConfig& cfg, const ModelParams& params,
                    const AdamState& opt, std::size_t epoch, double acc,
                    double f1, std::uint64_t seed) {
  return Checkpoint{cfg, params, opt, epoch, acc, f1, seed};
}

}  // namespace

TrainResult train(const LabeledDataset& train_ds, const LabeledDataset& dev_ds,
                  const ModelConfig& model_cfg, const TrainConfig& train_cfg,
                  const Checkpoint* resume) {
  model_cfg.validate();
  train_cfg.validate();
  if (train_ds.size() == 0 || dev_ds.size() == 0) {
    throw std::invalid_argument("train: empty dataset");
  }
  for (const auto* ds : {&train_ds, &dev_ds}) {
    for (const auto& w : ds->windows) {
      if (w.size() != model_cfg.window) {
        throw std::invalid_argument("train: window length mismatch");
      }
    }
  }

  ModelParams params = resume ? resume->params
                              : init_params(model_cfg, train_cfg.seed);
  AdamState opt = resume ? resume->opt : make_adam_state(params);
  const std::size_t first_epoch = resume ? resume->epoch + 1 : 1;

  TrainResult out;
  double best_acc = -1.0;
  const std::size_t n = train_ds.size();

  for (std::size_t epoch = first_epoch; epoch <= train_cfg.max_epochs;
       ++epoch) {
    const auto order = epoch_permutation(train_cfg.seed, epoch, n);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += train_cfg.batch_size) {
      const std::size_t stop = std::min(n, start + train_cfg.batch_size);
      std::vector<std::vector<double>> xs;
      std::vector<int> ys;
      xs.reserve(stop - start);
      for (std::size_t i = start; i < stop; ++i) {
        xs.push_back(train_ds.windows[order[i]]);
        ys.push_back(train_ds.labels[order[i]]);
      }
      double batch_loss_value = 0.0;
      try {
        Tape tape;
        const auto pn = register_params(tape, params);
        const auto loss = batch_loss(tape, pn, model_cfg, xs, ys);
        batch_loss_value = tape.value(loss)[0];
        tape.backward(loss);
        const auto ids = flatten(pn);
        std::vector<Tensor> grads;
        grads.reserve(ids.size());
        for (auto id : ids) grads.push_back(tape.grad(id));
        adam_step(params.tensors(), grads, opt, train_cfg);
      } catch (const NumericError& e) {
        const std::size_t last_good = epoch - 1;
        throw NumericError(std::string(e.what()) +
                           "; training diverged, last good epoch " +
                           std::to_string(last_good));
      }
      loss_sum += batch_loss_value * static_cast<double>(stop - start);
    }
    const double train_loss = loss_sum / static_cast<double>(n);
    const auto [dev_acc, dev_f1] = evaluate(model_cfg, params, dev_ds);
    out.log.push_back({epoch, train_loss, dev_acc, dev_f1});
    if (dev_acc > best_acc) {
      best_acc = dev_acc;
      out.best = snapshot(model_cfg, params, opt, epoch, dev_acc, dev_f1,
                          train_cfg.seed);
    }
    out.last = snapshot(model_cfg, params, opt, epoch, dev_acc, dev_f1,
                        train_cfg.seed);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoint serialization.
// Layout: 8-byte magic, u32 header length, text header of key=value lines,
// then for every tensor (params, Adam m, Adam v, declaration order):
// u32 rank, u64 dims..., f64 values. Little-endian host assumed.

namespace {

constexpr char kMagic[8] = {'M', 'S', 'T', 'D', 'C', 'K', 'P', '1'};

std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(static_cast<std::size_t>(std::stoull(item)));
  }
  return out;
}

void write_tensor(std::ofstream& out, const Tensor& t) {
  const std::uint32_t rank = static_cast<std::uint32_t>(t.shape().size());
  out.write(reinterpret_cast<const char*>(&rank), sizeof(rank));
  for (std::size_t d : t.shape()) {
    const std::uint64_t dim = d;
    out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
  }
  out.write(reinterpret_cast<const char*>(t.data().data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
}

Tensor read_tensor(std::ifstream& in) {
  std::uint32_t rank = 0;
  in.read(reinterpret_cast<char*>(&rank), sizeof(rank));
  if (!in || rank > 8) throw DataError("checkpoint: corrupt tensor header");
  std::vector<std::size_t> shape;
  for (std::uint32_t i = 0; i < rank; ++i) {
    std::uint64_t dim = 0;
    in.read(reinterpret_cast<char*>(&dim), sizeof(dim));
    if (!in) throw DataError("checkpoint: truncated tensor header");
    shape.push_back(static_cast<std::size_t>(dim));
  }
  Tensor t(shape);
  in.read(reinterpret_cast<char*>(t.data().data()),
          static_cast<std::streamsize>(t.size() * sizeof(double)));
  if (!in) throw DataError("checkpoint: truncated tensor data");
  return t;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("checkpoint: cannot write " + path.string());

  char buf[64];
  std::string header;
  header += "window=" + std::to_string(ckpt.model.window) + "\n";
  header += "scales=" + join_sizes(ckpt.model.scales) + "\n";
  header += "filters=" + std::to_string(ckpt.model.filters) + "\n";
  header += "kernel=" + std::to_string(ckpt.model.kernel) + "\n";
  header += "hidden=" + std::to_string(ckpt.model.hidden) + "\n";
  header += "classes=" + std::to_string(ckpt.model.classes) + "\n";
  header += "fc=" + join_sizes(ckpt.model.fc_hidden) + "\n";
  header += "epoch=" + std::to_string(ckpt.epoch) + "\n";
  header += "seed=" + std::to_string(ckpt.seed) + "\n";
  std::snprintf(buf, sizeof(buf), "%.17g", ckpt.dev_acc);
  header += std::string("dev_acc=") + buf + "\n";
  std::snprintf(buf, sizeof(buf), "%.17g", ckpt.dev_f1);
  header += std::string("dev_f1=") + buf + "\n";
  header += "adam_t=" + std::to_string(ckpt.opt.t) + "\n";

  out.write(kMagic, sizeof(kMagic));
  const std::uint32_t len = static_cast<std::uint32_t>(header.size());
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (const Tensor* t : ckpt.params.tensors()) write_tensor(out, *t);
  for (const Tensor& t : ckpt.opt.m) write_tensor(out, t);
  for (const Tensor& t : ckpt.opt.v) write_tensor(out, t);
  if (!out) throw DataError("checkpoint: write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("checkpoint: cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError("checkpoint: bad magic or version in " + path.string());
  }
  std::uint32_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in || len > 1 << 20) throw DataError("checkpoint: corrupt header");
  std::string header(len, '\0');
  in.read(header.data(), len);
  if (!in) throw DataError("checkpoint: truncated header");

  std::map<std::string, std::string> kv;
  std::stringstream ss(header);
  std::string line;
  while (std::getline(ss, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError("checkpoint: malformed header line '" + line + "'");
    }
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  const auto get = [&](const char* key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) {
      throw DataError(std::string("checkpoint: missing header key ") + key);
    }
    return it->second;
  };

  Checkpoint ckpt;
  ckpt.model.window = std::stoull(get("window"));
  ckpt.model.scales = parse_sizes(get("scales"));
  ckpt.model.filters = std::stoull(get("filters"));
  ckpt.model.kernel = std::stoull(get("kernel"));
  ckpt.model.hidden = std::stoull(get("hidden"));
  ckpt.model.classes = std::stoull(get("classes"));
  ckpt.model.fc_hidden = parse_sizes(get("fc"));
  ckpt.epoch = std::stoull(get("epoch"));
  ckpt.seed = std::stoull(get("seed"));
  ckpt.dev_acc = std::stod(get("dev_acc"));
  ckpt.dev_f1 = std::stod(get("dev_f1"));
  ckpt.model.validate();

  // shapes come from the config; read_tensor cross-checks sizes implicitly
  ModelParams reference = init_params(ckpt.model, 0);
  const std::size_t count = reference.tensors().size();
  ckpt.params = std::move(reference);
  for (Tensor* t : ckpt.params.tensors()) {
    Tensor loaded = read_tensor(in);
    if (!loaded.same_shape(*t)) {
      throw DataError("checkpoint: tensor shape mismatch");
    }
    *t = std::move(loaded);
  }
  ckpt.opt.t = std::stoull(get("adam_t"));
  for (std::size_t i = 0; i < count; ++i) ckpt.opt.m.push_back(read_tensor(in));
  for (std::size_t i = 0; i < count; ++i) ckpt.opt.v.push_back(read_tensor(in));
  return ckpt;
}

void write_train_log(const std::vector<EpochRecord>& log,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("log: cannot write " + path.string());
  out << "epoch,train_loss,dev_acc,dev_f1\n";
  char buf[160];
  for (const EpochRecord& r : log) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g\n", r.epoch,
                  r.train_loss, r.dev_acc, r.dev_f1);
    out << buf;
  }
  if (!out) throw DataError("log: write failed for " + path.string());
}

}  // namespace mstd
