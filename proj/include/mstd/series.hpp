#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace mstd {

/// Raw univariate price series with strictly increasing integer timestamps
/// (epoch minutes in the CSV interface).
struct TimeSeries {
  std::vector<std::int64_t> timestamps;
  std::vector<double> prices;

  std::size_t size() const { return prices.size(); }

  /// Throws DataError unless length >= 2, timestamps strictly increase and
  /// prices are finite.
  void validate() const;
};

struct SynthParams {
  std::uint64_t seed = 42;
  std::size_t length = 60000;
  // The drift regime cycles up -> flat -> down every regime_len steps, so
  // all three trend classes occur and are learnable from the window shape.
  std::size_t regime_len = 100;
  double drift = 0.5;
  double noise = 0.1;
  double start_price = 3000.0;
};

/// Deterministic piecewise random walk with alternating drift regimes.
TimeSeries synth_series(const SynthParams& params);

/// Reads `timestamp,price` CSV (header required). Rejects non-monotone
/// timestamps and malformed rows with DataError.
TimeSeries load_csv(const std::filesystem::path& path);
void save_csv(const TimeSeries& series, const std::filesystem::path& path);

}  // namespace mstd
