#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "mstd/series.hpp"

namespace mstd {

// Trend classes. Indices follow still=0, down=1, up=2.
inline constexpr int kStill = 0;
inline constexpr int kDown = 1;
inline constexpr int kUp = 2;
inline constexpr std::size_t kNumClasses = 3;

/// Keeps every d-th point: output[i] = x[(i+1)*d - 1], length floor(|x|/d).
std::vector<double> downsample(const std::vector<double>& x, std::size_t d);

/// Next-step change x_t - x_{t-1}.
double delta(double x_t, double x_prev);

/// Threshold labeling: dx <= -t -> down, dx >= t -> up, else still.
/// Boundaries are inclusive toward the directional classes.
int label_for(double dx, double threshold);

/// Fixed-length windows with the label and next-step change of the point
/// that follows each window.
struct LabeledDataset {
  std::vector<std::vector<double>> windows;
  std::vector<int> labels;
  std::vector<double> deltas;
  std::string split_tag;

  std::size_t size() const { return windows.size(); }
};

/// Slices overlapping windows of length `window` from a price segment.
/// Window i covers prices [i*stride, i*stride + window); its delta and label
/// come from the next price versus the window's last price.
LabeledDataset slice_windows(const std::vector<double>& prices,
                             std::size_t window, std::size_t stride,
                             double threshold, std::string split_tag = {});

/// Change values at the labeling positions of slice_windows, computable
/// before a threshold is known.
std::vector<double> window_deltas(const std::vector<double>& prices,
                                  std::size_t window, std::size_t stride);

/// Scans candidate thresholds (distinct |dx| values plus midpoints) and
/// returns the one whose class ratios are closest to a 1/3 split, by the
/// max over classes of |ratio - 1/3|. Ties break toward the smallest
/// threshold. Throws DataError when every change value is zero.
double select_threshold(const std::vector<double>& dev_deltas);

/// Contiguous in-order train/dev/test segments of an already-built dataset.
std::array<LabeledDataset, 3> chronological_split(const LabeledDataset& ds,
                                                  std::size_t n_train,
                                                  std::size_t n_dev,
                                                  std::size_t n_test);

/// Sample Pearson correlation coefficient. Throws DataError on zero
/// variance or mismatched lengths.
double pearson(std::span<const double> x, std::span<const double> y);

struct DatasetStats {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation of the deltas
  std::array<double, kNumClasses> class_ratios{};
};

DatasetStats stats(const LabeledDataset& ds);

struct SplitSpec {
  std::size_t n_train = 48000;
  std::size_t n_dev = 5000;
  std::size_t n_test = 5000;
};

struct DatasetBundle {
  LabeledDataset train, dev, test;
  // raw price segments backing each split (for buy & hold)
  std::vector<double> train_prices, dev_prices, test_prices;
  double threshold = 0.0;
};

/// Full dataset construction: split the raw series into contiguous
/// train/dev/test point segments first (no look-ahead leakage), pick the
/// threshold that balances classes on the dev segment, then slice windows
/// within each segment. With standardize=true each window is shifted and
/// scaled to zero mean / unit deviation; labels and deltas stay in raw
/// price units either way.
DatasetBundle build_datasets(const TimeSeries& series, std::size_t window,
                             std::size_t stride, const SplitSpec& split,
                             bool standardize = false);

}  // namespace mstd
