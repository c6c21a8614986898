#include "mstd/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "mstd/errors.hpp"

namespace mstd {

void RunConfig::validate() const {
  model.validate();
  train.validate();
  if (data.stride == 0) throw ConfigError("data: stride must be >= 1");
  if (!data.csv && data.synth.length < 2) {
    throw ConfigError("data: synthetic length must be >= 2");
  }
  for (std::size_t n :
       {data.split.n_train, data.split.n_dev, data.split.n_test}) {
    if (n < model.window + 1) {
      throw ConfigError("data: every split needs at least window + 1 points");
    }
  }
  if (out_dir.empty()) throw ConfigError("run: out_dir must not be empty");
}

ProfitMode parse_profit_mode(const std::string& s) {
  if (s == "position") return ProfitMode::Position;
  if (s == "indicator") return ProfitMode::Indicator;
  throw ConfigError("profit mode must be 'position' or 'indicator', got '" +
                    s + "'");
}

std::vector<std::size_t> parse_size_list(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(static_cast<std::size_t>(std::stoull(item)));
    } catch (const std::exception&) {
      throw ConfigError("bad list element '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty list value");
  return out;
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::size_t to_size(const std::string& v, const std::string& key) {
  try {
    return static_cast<std::size_t>(std::stoull(v));
  } catch (const std::exception&) {
    throw ConfigError("bad integer for " + key + ": '" + v + "'");
  }
}

double to_double(const std::string& v, const std::string& key) {
  try {
    return std::stod(v);
  } catch (const std::exception&) {
    throw ConfigError("bad number for " + key + ": '" + v + "'");
  }
}

bool to_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw ConfigError("bad boolean for " + key + ": '" + v + "'");
}

}  // namespace

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());

  using Setter = std::function<void(const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"data.csv", [&](const std::string& v) { cfg.data.csv = v; }},
      {"data.synth_seed",
       [&](const std::string& v) {
         cfg.data.synth.seed = to_size(v, "data.synth_seed");
       }},
      {"data.synth_length",
       [&](const std::string& v) {
         cfg.data.synth.length = to_size(v, "data.synth_length");
       }},
      {"data.regime_len",
       [&](const std::string& v) {
         cfg.data.synth.regime_len = to_size(v, "data.regime_len");
       }},
      {"data.drift",
       [&](const std::string& v) {
         cfg.data.synth.drift = to_double(v, "data.drift");
       }},
      {"data.noise",
       [&](const std::string& v) {
         cfg.data.synth.noise = to_double(v, "data.noise");
       }},
      {"data.start_price",
       [&](const std::string& v) {
         cfg.data.synth.start_price = to_double(v, "data.start_price");
       }},
      {"data.n_train",
       [&](const std::string& v) {
         cfg.data.split.n_train = to_size(v, "data.n_train");
       }},
      {"data.n_dev",
       [&](const std::string& v) {
         cfg.data.split.n_dev = to_size(v, "data.n_dev");
       }},
      {"data.n_test",
       [&](const std::string& v) {
         cfg.data.split.n_test = to_size(v, "data.n_test");
       }},
      {"data.window",
       [&](const std::string& v) {
         cfg.model.window = to_size(v, "data.window");
       }},
      {"data.stride",
       [&](const std::string& v) {
         cfg.data.stride = to_size(v, "data.stride");
       }},
      {"data.standardize",
       [&](const std::string& v) {
         cfg.data.standardize = to_bool(v, "data.standardize");
       }},
      {"model.scales",
       [&](const std::string& v) { cfg.model.scales = parse_size_list(v); }},
      {"model.filters",
       [&](const std::string& v) {
         cfg.model.filters = to_size(v, "model.filters");
       }},
      {"model.kernel",
       [&](const std::string& v) {
         cfg.model.kernel = to_size(v, "model.kernel");
       }},
      {"model.hidden",
       [&](const std::string& v) {
         cfg.model.hidden = to_size(v, "model.hidden");
       }},
      {"model.fc",
       [&](const std::string& v) {
         cfg.model.fc_hidden = parse_size_list(v);
       }},
      {"train.lr",
       [&](const std::string& v) {
         cfg.train.learning_rate = to_double(v, "train.lr");
       }},
      {"train.batch",
       [&](const std::string& v) {
         cfg.train.batch_size = to_size(v, "train.batch");
       }},
      {"train.epochs",
       [&](const std::string& v) {
         cfg.train.max_epochs = to_size(v, "train.epochs");
       }},
      {"train.beta1",
       [&](const std::string& v) {
         cfg.train.beta1 = to_double(v, "train.beta1");
       }},
      {"train.beta2",
       [&](const std::string& v) {
         cfg.train.beta2 = to_double(v, "train.beta2");
       }},
      {"train.eps",
       [&](const std::string& v) {
         cfg.train.epsilon = to_double(v, "train.eps");
       }},
      {"train.seed",
       [&](const std::string& v) {
         cfg.train.seed = to_size(v, "train.seed");
       }},
      {"run.out_dir", [&](const std::string& v) { cfg.out_dir = v; }},
      {"run.profit_mode",
       [&](const std::string& v) { cfg.profit_mode = parse_profit_mode(v); }},
  };

  static const char* kSections[] = {"data", "model", "train", "run"};
  std::string section;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      bool known = false;
      for (const char* s : kSections) known = known || section == s;
      if (!known) {
        throw ConfigError("config: unknown section [" + section + "] at line " +
                          std::to_string(lineno));
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: expected key = value at line " +
                        std::to_string(lineno));
    }
    const std::string key = section + "." + trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw ConfigError("config: unknown key '" + key + "' at line " +
                        std::to_string(lineno));
    }
    it->second(value);
  }
}

TimeSeries load_series(const DataConfig& cfg) {
  if (cfg.csv) return load_csv(*cfg.csv);
  return synth_series(cfg.synth);
}

DatasetBundle build_from_config(const RunConfig& cfg) {
  const TimeSeries series = load_series(cfg.data);
  return build_datasets(series, cfg.model.window, cfg.data.stride,
                        cfg.data.split, cfg.data.standardize);
}

}  // namespace mstd
