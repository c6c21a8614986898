#include "mstd/series.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "mstd/errors.hpp"

namespace mstd {

void TimeSeries::validate() const {
  if (prices.size() < 2) throw DataError("series: need at least 2 points");
  if (timestamps.size() != prices.size()) {
    throw DataError("series: timestamp/price length mismatch");
  }
  for (std::size_t i = 0; i < prices.size(); ++i) {
    if (!std::isfinite(prices[i])) throw DataError("series: non-finite price");
    if (i > 0 && timestamps[i] <= timestamps[i - 1]) {
      throw DataError("series: timestamps not strictly increasing");
    }
  }
}

TimeSeries synth_series(const SynthParams& params) {
  if (params.length < 2) throw DataError("synth: length must be >= 2");
  std::mt19937_64 rng(params.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  // regime 0: drift up, 1: flat, 2: drift down
  static constexpr double kRegimeSign[3] = {1.0, 0.0, -1.0};

  TimeSeries out;
  out.timestamps.reserve(params.length);
  out.prices.reserve(params.length);
  double price = params.start_price;
  for (std::size_t i = 0; i < params.length; ++i) {
    out.timestamps.push_back(static_cast<std::int64_t>(i));
    out.prices.push_back(price);
    const std::size_t regime =
        (i / std::max<std::size_t>(params.regime_len, 1)) % 3;
    price += kRegimeSign[regime] * params.drift + params.noise * gauss(rng);
  }
  return out;
}

TimeSeries load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("csv: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("csv: empty file");
  // tolerate a trailing \r from CRLF files
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "timestamp,price") {
    throw DataError("csv: expected header 'timestamp,price', got '" + line +
                    "'");
  }
  TimeSeries out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw DataError("csv: malformed row at line " + std::to_string(lineno));
    }
    try {
      std::size_t used = 0;
      const std::int64_t ts = std::stoll(line.substr(0, comma), &used);
      const double price = std::stod(line.substr(comma + 1));
      out.timestamps.push_back(ts);
      out.prices.push_back(price);
    } catch (const std::exception&) {
      throw DataError("csv: malformed row at line " + std::to_string(lineno));
    }
  }
  out.validate();
  return out;
}

void save_csv(const TimeSeries& series, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("csv: cannot write " + path.string());
  out << "timestamp,price\n";
  char buf[64];
  for (std::size_t i = 0; i < series.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%lld,%.17g\n",
                  static_cast<long long>(series.timestamps[i]),
                  series.prices[i]);
    out << buf;
  }
  if (!out) throw DataError("csv: write failed for " + path.string());
}

}  // namespace mstd
