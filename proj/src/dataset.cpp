#include "mstd/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mstd/errors.hpp"

namespace mstd {

std::vector<double> downsample(const std::vector<double>& x, std::size_t d) {
  if (d == 0) throw std::invalid_argument("downsample: rate must be >= 1");
  if (d > x.size()) {
    throw std::invalid_argument("downsample: rate exceeds sequence length");
  }
  std::vector<double> out;
  out.reserve(x.size() / d);
  for (std::size_t i = d - 1; i < x.size(); i += d) out.push_back(x[i]);
  return out;
}

double delta(double x_t, double x_prev) { return x_t - x_prev; }

int label_for(double dx, double threshold) {
  if (threshold <= 0.0) {
    throw std::invalid_argument("label: threshold must be positive");
  }
  if (dx <= -threshold) return kDown;
  if (dx >= threshold) return kUp;
  return kStill;
}

std::vector<double> window_deltas(const std::vector<double>& prices,
                                  std::size_t window, std::size_t stride) {
  if (stride == 0) throw std::invalid_argument("slice: stride must be >= 1");
  if (prices.size() < window + 1) {
    throw std::invalid_argument("slice: series shorter than window + 1");
  }
  std::vector<double> out;
  const std::size_t n = (prices.size() - window) / stride;
  for (std::size_t w = 0; w < n; ++w) {
    const std::size_t i = w * stride;
    out.push_back(delta(prices[i + window], prices[i + window - 1]));
  }
  return out;
}

LabeledDataset slice_windows(const std::vector<double>& prices,
                             std::size_t window, std::size_t stride,
                             double threshold, std::string split_tag) {
  if (stride == 0) throw std::invalid_argument("slice: stride must be >= 1");
  if (prices.size() < window + 1) {
    throw std::invalid_argument("slice: series shorter than window + 1");
  }
  LabeledDataset ds;
  ds.split_tag = std::move(split_tag);
  // N = floor((len - T) / stride) windows
  const std::size_t n = (prices.size() - window) / stride;
  for (std::size_t w = 0; w < n; ++w) {
    const std::size_t i = w * stride;
    ds.windows.emplace_back(prices.begin() + i, prices.begin() + i + window);
    const double dx = delta(prices[i + window], prices[i + window - 1]);
    ds.deltas.push_back(dx);
    ds.labels.push_back(label_for(dx, threshold));
  }
  return ds;
}

namespace {

// max over the three classes of |ratio - 1/3| for a given threshold,
// computed on sorted deltas via binary search.
double balance_objective(const std::vector<double>& sorted_deltas, double t) {
  const double n = static_cast<double>(sorted_deltas.size());
  const auto down_end = std::upper_bound(sorted_deltas.begin(),
                                         sorted_deltas.end(), -t);
  const auto up_begin = std::lower_bound(sorted_deltas.begin(),
                                         sorted_deltas.end(), t);
  const double down = static_cast<double>(down_end - sorted_deltas.begin()) / n;
  const double up = static_cast<double>(sorted_deltas.end() - up_begin) / n;
  const double still = 1.0 - down - up;
  return std::max({std::abs(down - 1.0 / 3.0), std::abs(still - 1.0 / 3.0),
                   std::abs(up - 1.0 / 3.0)});
}

}  // namespace

double select_threshold(const std::vector<double>& dev_deltas) {
  if (dev_deltas.size() < 3) {
    throw DataError("threshold: need at least 3 change values");
  }
  std::vector<double> mags;
  mags.reserve(dev_deltas.size());
  for (double dx : dev_deltas) mags.push_back(std::abs(dx));
  std::sort(mags.begin(), mags.end());
  mags.erase(std::unique(mags.begin(), mags.end()), mags.end());
  if (mags.size() == 1 && mags[0] == 0.0) {
    throw DataError("threshold: all change values are zero");
  }

  std::vector<double> candidates;
  candidates.reserve(2 * mags.size());
  for (std::size_t i = 0; i < mags.size(); ++i) {
    if (mags[i] > 0.0) candidates.push_back(mags[i]);
    if (i + 1 < mags.size()) {
      candidates.push_back(0.5 * (mags[i] + mags[i + 1]));
    }
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());

  std::vector<double> sorted(dev_deltas);
  std::sort(sorted.begin(), sorted.end());

  double best = candidates.front();
  double best_obj = balance_objective(sorted, best);
  for (double c : candidates) {
    const double obj = balance_objective(sorted, c);
    if (obj < best_obj) {  // ties keep the smaller (earlier) candidate
      best_obj = obj;
      best = c;
    }
  }
  return best;
}

std::array<LabeledDataset, 3> chronological_split(const LabeledDataset& ds,
                                                  std::size_t n_train,
                                                  std::size_t n_dev,
                                                  std::size_t n_test) {
  if (n_train + n_dev + n_test > ds.size()) {
    throw std::invalid_argument("split: not enough samples");
  }
  std::array<LabeledDataset, 3> out;
  const std::array<std::pair<std::size_t, const char*>, 3> parts{
      {{n_train, "train"}, {n_dev, "dev"}, {n_test, "test"}}};
  std::size_t offset = 0;
  for (std::size_t p = 0; p < 3; ++p) {
    const auto [count, tag] = parts[p];
    out[p].split_tag = tag;
    out[p].windows.assign(ds.windows.begin() + offset,
                          ds.windows.begin() + offset + count);
    out[p].labels.assign(ds.labels.begin() + offset,
                         ds.labels.begin() + offset + count);
    out[p].deltas.assign(ds.deltas.begin() + offset,
                         ds.deltas.begin() + offset + count);
    offset += count;
  }
  return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DataError("pearson: length mismatch");
  if (x.size() < 2) throw DataError("pearson: need at least 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw DataError("pearson: zero variance, correlation undefined");
  }
  return sxy / std::sqrt(sxx * syy);
}

DatasetStats stats(const LabeledDataset& ds) {
  if (ds.size() == 0) throw std::invalid_argument("stats: empty dataset");
  DatasetStats out;
  const double n = static_cast<double>(ds.size());
  for (double dx : ds.deltas) out.mean += dx;
  out.mean /= n;
  double ss = 0.0;
  for (double dx : ds.deltas) ss += (dx - out.mean) * (dx - out.mean);
  out.stddev = std::sqrt(ss / n);
  for (int y : ds.labels) {
    out.class_ratios[static_cast<std::size_t>(y)] += 1.0 / n;
  }
  return out;
}

namespace {

void standardize_window(std::vector<double>& w) {
  const double n = static_cast<double>(w.size());
  double mean = 0.0;
  for (double v : w) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : w) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / n);
  const double scale = sd > 1e-12 ? 1.0 / sd : 1.0;
  for (double& v : w) v = (v - mean) * scale;
}

}  // namespace

DatasetBundle build_datasets(const TimeSeries& series, std::size_t window,
                             std::size_t stride, const SplitSpec& split,
                             bool standardize) {
  series.validate();
  const std::size_t total = split.n_train + split.n_dev + split.n_test;
  if (total > series.size()) {
    throw DataError("split: series shorter than requested split sizes");
  }
  for (std::size_t n : {split.n_train, split.n_dev, split.n_test}) {
    if (n < window + 1) {
      throw DataError("split: a segment is shorter than window + 1 points");
    }
  }

  DatasetBundle out;
  const auto& p = series.prices;
  out.train_prices.assign(p.begin(), p.begin() + split.n_train);
  out.dev_prices.assign(p.begin() + split.n_train,
                        p.begin() + split.n_train + split.n_dev);
  out.test_prices.assign(p.begin() + split.n_train + split.n_dev,
                         p.begin() + total);

  out.threshold = select_threshold(window_deltas(out.dev_prices, window,
                                                 stride));
  out.train = slice_windows(out.train_prices, window, stride, out.threshold,
                            "train");
  out.dev = slice_windows(out.dev_prices, window, stride, out.threshold,
                          "dev");
  out.test = slice_windows(out.test_prices, window, stride, out.threshold,
                           "test");
  if (standardize) {
    for (auto* ds : {&out.train, &out.dev, &out.test}) {
      for (auto& w : ds->windows) standardize_window(w);
    }
  }
  return out;
}

}  // namespace mstd
