#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "mstd/dataset.hpp"
#include "mstd/errors.hpp"
#include "mstd/series.hpp"
#include "oracles.hpp"

using namespace mstd;

TEST_CASE("downsample") {
  CHECK(downsample({5, 7, 9}, 1) == std::vector<double>{5, 7, 9});
  CHECK(downsample({1, 2, 3, 4, 5, 6}, 2) == std::vector<double>{2, 4, 6});
  // length 7, d=3 -> floor(7/3)=2 values x_3, x_6 (1-based)
  CHECK(downsample({10, 11, 12, 13, 14, 15, 16}, 3) ==
        std::vector<double>{12, 15});
  CHECK_THROWS_AS(downsample({1, 2}, 3), std::invalid_argument);

  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng() % 40;
    const std::size_t d = 1 + rng() % n;
    std::vector<double> x(n);
    for (double& v : x) v = static_cast<double>(rng() % 100);
    const auto y = downsample(x, d);
    CHECK(y.size() == n / d);
    if (d == 1) CHECK(y == x);
  }
}

TEST_CASE("delta") {
  CHECK(delta(10, 10) == 0.0);
  CHECK(delta(3299.7, 3300.0) == doctest::Approx(-0.3));
  // telescoping: sum of deltas equals last - first
  std::mt19937_64 rng(2);
  std::vector<double> series(100);
  for (double& v : series) v = static_cast<double>(rng() % 1000) / 10.0;
  double total = 0.0;
  for (std::size_t i = 1; i < series.size(); ++i) {
    total += delta(series[i], series[i - 1]);
  }
  CHECK(total == doctest::Approx(series.back() - series.front()).epsilon(1e-9));
}

TEST_CASE("label boundaries go to the directional classes") {
  CHECK(label_for(0.0, 0.3) == kStill);
  CHECK(label_for(0.3, 0.3) == kUp);
  CHECK(label_for(-0.3, 0.3) == kDown);
  CHECK(label_for(-0.31, 0.3) == kDown);
  CHECK(label_for(0.29, 0.3) == kStill);
  CHECK_THROWS_AS(label_for(0.1, 0.0), std::invalid_argument);
}

TEST_CASE("slice_windows") {
  std::vector<double> prices(90);
  for (std::size_t i = 0; i < prices.size(); ++i) {
    prices[i] = static_cast<double>(i);
  }

  SUBCASE("len=31 gives exactly one window") {
    const auto ds = slice_windows({prices.begin(), prices.begin() + 31}, 30,
                                  1, 0.5);
    CHECK(ds.size() == 1);
    CHECK(ds.windows[0].size() == 30);
    CHECK(ds.deltas[0] == 1.0);
  }
  SUBCASE("len=35, stride 1: 5 windows overlapping in 29 points") {
    const auto ds = slice_windows({prices.begin(), prices.begin() + 35}, 30,
                                  1, 0.5);
    CHECK(ds.size() == 5);
    for (std::size_t w = 1; w < 5; ++w) {
      // consecutive windows share 29 points
      for (std::size_t i = 0; i < 29; ++i) {
        CHECK(ds.windows[w][i] == ds.windows[w - 1][i + 1]);
      }
    }
  }
  SUBCASE("len=90, stride 30: 2 disjoint windows") {
    const auto ds = slice_windows(prices, 30, 30, 0.5);
    CHECK(ds.size() == 2);
    CHECK(ds.windows[0].back() < ds.windows[1].front());
  }
  SUBCASE("too short") {
    CHECK_THROWS_AS(slice_windows({prices.begin(), prices.begin() + 30}, 30,
                                  1, 0.5),
                    std::invalid_argument);
  }
  SUBCASE("stored labels equal recomputation from raw prices") {
    std::mt19937_64 rng(3);
    std::vector<double> noisy(200);
    double p = 100.0;
    for (double& v : noisy) {
      v = p;
      p += (static_cast<double>(rng() % 100) - 49.5) / 50.0;
    }
    const double threshold = 0.4;
    const auto ds = slice_windows(noisy, 30, 1, threshold);
    for (std::size_t w = 0; w < ds.size(); ++w) {
      const double dx = delta(noisy[w + 30], noisy[w + 29]);
      CHECK(ds.deltas[w] == dx);
      CHECK(ds.labels[w] == label_for(dx, threshold));
    }
  }
}

TEST_CASE("select_threshold") {
  SUBCASE("known tertile boundary") {
    // |dx| tertiles: a third at 0.1, a third at 0.5 (up), a third at 0.5
    // (down); any threshold in (0.1, 0.5] splits exactly.
    std::vector<double> deltas;
    for (int i = 0; i < 100; ++i) {
      deltas.push_back(0.1);
      deltas.push_back(0.5);
      deltas.push_back(-0.5);
    }
    const double t = select_threshold(deltas);
    CHECK(t == doctest::Approx(0.3));  // midpoint candidate wins the tie
  }
  SUBCASE("equally frequent {-1,0,1} returns the smallest candidate") {
    std::vector<double> deltas;
    for (int i = 0; i < 10; ++i) {
      deltas.push_back(-1);
      deltas.push_back(0);
      deltas.push_back(1);
    }
    CHECK(select_threshold(deltas) == doctest::Approx(0.5));
  }
  SUBCASE("all zeros is degenerate") {
    CHECK_THROWS_AS(select_threshold({0, 0, 0, 0}), DataError);
  }
}

TEST_CASE("chronological_split") {
  std::vector<double> prices(200);
  for (std::size_t i = 0; i < prices.size(); ++i) {
    prices[i] = std::sin(0.3 * static_cast<double>(i)) * 5.0;
  }
  const auto ds = slice_windows(prices, 30, 1, 0.5);
  REQUIRE(ds.size() >= 100);
  const auto parts = chronological_split(ds, 80, 10, 10);
  CHECK(parts[0].size() == 80);
  CHECK(parts[1].size() == 10);
  CHECK(parts[2].size() == 10);
  CHECK(parts[0].split_tag == "train");
  // disjoint and in order: dev windows continue exactly where train stopped
  CHECK(parts[1].windows.front() == ds.windows[80]);
  CHECK(parts[2].windows.back() == ds.windows[99]);
  CHECK_THROWS_AS(chronological_split(ds, ds.size(), 1, 1),
                  std::invalid_argument);
}

TEST_CASE("pearson") {
  const std::vector<double> x{1, 2, 3};
  CHECK(pearson(x, x) == doctest::Approx(1.0));
  CHECK(pearson(x, std::vector<double>{3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(pearson(x, std::vector<double>{1, 2, 4}) ==
        doctest::Approx(0.9819805060619657));
  CHECK_THROWS_AS(pearson(x, std::vector<double>{2, 2, 2}), DataError);
  CHECK_THROWS_AS(pearson(x, std::vector<double>{1, 2}), DataError);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> dist(-3, 3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(20), b(20);
    for (std::size_t i = 0; i < 20; ++i) {
      a[i] = dist(rng);
      b[i] = dist(rng);
    }
    const double r = pearson(a, b);
    CHECK(std::abs(r) <= 1.0 + 1e-12);
    CHECK(r == doctest::Approx(oracle::pearson(a, b)).epsilon(1e-10));
  }
}

TEST_CASE("synth_series") {
  SUBCASE("deterministic in the seed") {
    SynthParams p;
    p.length = 500;
    const auto a = synth_series(p);
    const auto b = synth_series(p);
    CHECK(a.prices == b.prices);
    CHECK(a.timestamps == b.timestamps);
  }
  SUBCASE("zero noise, constant positive drift labels everything up") {
    SynthParams p;
    p.length = 300;
    p.noise = 0.0;
    p.drift = 1.0;
    p.regime_len = 1000;  // stay in the first (upward) regime
    const auto series = synth_series(p);
    const auto ds = slice_windows(series.prices, 30, 1, 0.5);
    for (int y : ds.labels) CHECK(y == kUp);
  }
}

TEST_CASE("stats") {
  LabeledDataset ds;
  for (int i = 0; i < 10; ++i) {
    ds.windows.push_back(std::vector<double>(5, 1.0));
    ds.deltas.push_back(2.5);
    ds.labels.push_back(i < 4 ? kStill : i < 7 ? kDown : kUp);
  }
  const auto s = stats(ds);
  CHECK(s.mean == doctest::Approx(2.5));
  CHECK(s.stddev == doctest::Approx(0.0));
  CHECK(s.class_ratios[kStill] == doctest::Approx(0.4));
  CHECK(s.class_ratios[kDown] == doctest::Approx(0.3));
  CHECK(s.class_ratios[kUp] == doctest::Approx(0.3));
  CHECK(s.class_ratios[0] + s.class_ratios[1] + s.class_ratios[2] ==
        doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("csv round trip and validation") {
  const auto dir = std::filesystem::temp_directory_path() / "mstd_csv_test";
  std::filesystem::create_directories(dir);
  SynthParams p;
  p.length = 100;
  const auto series = synth_series(p);
  save_csv(series, dir / "series.csv");
  const auto loaded = load_csv(dir / "series.csv");
  CHECK(loaded.prices == series.prices);
  CHECK(loaded.timestamps == series.timestamps);

  // non-monotone timestamps are rejected
  TimeSeries bad = series;
  bad.timestamps[5] = bad.timestamps[4];
  save_csv(bad, dir / "bad.csv");
  CHECK_THROWS_AS(load_csv(dir / "bad.csv"), DataError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("build_datasets balances the dev split") {
  SynthParams p;
  p.length = 12000;
  const auto series = synth_series(p);
  const auto bundle = build_datasets(series, 30, 1, {8000, 2000, 2000});
  CHECK(bundle.train.size() == 8000 - 30);
  const auto s = stats(bundle.dev);
  for (double r : s.class_ratios) {
    CHECK(r > 0.2);
    CHECK(r < 0.5);
  }
  // no leakage: train segment ends before the dev segment starts
  CHECK(bundle.train_prices.size() == 8000);
  CHECK(bundle.dev_prices.front() == series.prices[8000]);
}
