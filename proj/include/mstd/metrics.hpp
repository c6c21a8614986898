#pragma once

#include <span>
#include <string>
#include <vector>

namespace mstd {

/// Counts of (true class, predicted class) pairs. Rows are the true class.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes)
      : classes_(classes), counts_(classes * classes, 0) {}

  std::size_t classes() const { return classes_; }
  std::size_t total() const;
  long long operator()(std::size_t truth, std::size_t pred) const {
    return counts_[truth * classes_ + pred];
  }
  void add(int truth, int pred);

  std::size_t support(std::size_t c) const;    // row sum
  std::size_t predicted(std::size_t c) const;  // column sum

 private:
  std::size_t classes_;
  std::vector<long long> counts_;
};

ConfusionMatrix confusion(std::span<const int> preds,
                          std::span<const int> truths, std::size_t classes);

double accuracy(const ConfusionMatrix& cm);

/// Support-weighted mean of per-class F1. Classes with zero support or
/// zero precision+recall contribute 0.
double f1_weighted(const ConfusionMatrix& cm);
double f1_macro(const ConfusionMatrix& cm);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;  // two-sided, normal approximation
  double dof = 0.0;
};

/// Welch's unequal-variance t statistic with Welch-Satterthwaite degrees of
/// freedom. The p-value uses a normal approximation of the t distribution.
TTestResult welch_t(std::span<const double> a, std::span<const double> b);

/// Plain-text metrics report: accuracy, weighted and macro F1, and the
/// confusion grid.
std::string format_report(const ConfusionMatrix& cm,
                          const std::string& title);

}  // namespace mstd
