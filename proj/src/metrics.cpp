#include "mstd/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "mstd/errors.hpp"

namespace mstd {

std::size_t ConfusionMatrix::total() const {
  return static_cast<std::size_t>(
      std::accumulate(counts_.begin(), counts_.end(), 0LL));
}

void ConfusionMatrix::add(int truth, int pred) {
  if (truth < 0 || pred < 0 ||
      static_cast<std::size_t>(truth) >= classes_ ||
      static_cast<std::size_t>(pred) >= classes_) {
    throw std::invalid_argument("confusion: class index out of range");
  }
  ++counts_[static_cast<std::size_t>(truth) * classes_ +
            static_cast<std::size_t>(pred)];
}

std::size_t ConfusionMatrix::support(std::size_t c) const {
  long long s = 0;
  for (std::size_t p = 0; p < classes_; ++p) s += (*this)(c, p);
  return static_cast<std::size_t>(s);
}

std::size_t ConfusionMatrix::predicted(std::size_t c) const {
  long long s = 0;
  for (std::size_t t = 0; t < classes_; ++t) s += (*this)(t, c);
  return static_cast<std::size_t>(s);
}

ConfusionMatrix confusion(std::span<const int> preds,
                          std::span<const int> truths, std::size_t classes) {
  if (preds.size() != truths.size()) {
    throw std::invalid_argument("confusion: length mismatch");
  }
  ConfusionMatrix cm(classes);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    cm.add(truths[i], preds[i]);
  }
  return cm;
}

double accuracy(const ConfusionMatrix& cm) {
  const std::size_t n = cm.total();
  if (n == 0) throw std::invalid_argument("accuracy: empty confusion matrix");
  long long correct = 0;
  for (std::size_t c = 0; c < cm.classes(); ++c) correct += cm(c, c);
  return static_cast<double>(correct) / static_cast<double>(n);
}

namespace {

double class_f1(const ConfusionMatrix& cm, std::size_t c) {
  const double tp = static_cast<double>(cm(c, c));
  const double pred = static_cast<double>(cm.predicted(c));
  const double sup = static_cast<double>(cm.support(c));
  const double precision = pred > 0.0 ? tp / pred : 0.0;
  const double recall = sup > 0.0 ? tp / sup : 0.0;
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace

double f1_weighted(const ConfusionMatrix& cm) {
  const std::size_t n = cm.total();
  if (n == 0) throw std::invalid_argument("f1: empty confusion matrix");
  double out = 0.0;
  for (std::size_t c = 0; c < cm.classes(); ++c) {
    out += static_cast<double>(cm.support(c)) / static_cast<double>(n) *
           class_f1(cm, c);
  }
  return out;
}

double f1_macro(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw std::invalid_argument("f1: empty confusion matrix");
  double out = 0.0;
  for (std::size_t c = 0; c < cm.classes(); ++c) out += class_f1(cm, c);
  return out / static_cast<double>(cm.classes());
}

TTestResult welch_t(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw std::invalid_argument("welch_t: need at least 2 values per sample");
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double ma = 0.0, mb = 0.0;
  for (double v : a) ma += v;
  for (double v : b) mb += v;
  ma /= na;
  mb /= nb;
  double va = 0.0, vb = 0.0;
  for (double v : a) va += (v - ma) * (v - ma);
  for (double v : b) vb += (v - mb) * (v - mb);
  va /= na - 1.0;
  vb /= nb - 1.0;
  const double sa = va / na, sb = vb / nb;
  if (sa + sb == 0.0) {
    throw DataError("welch_t: both samples have zero variance");
  }
  TTestResult out;
  out.t = (ma - mb) / std::sqrt(sa + sb);
  out.dof = (sa + sb) * (sa + sb) /
            (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  out.p = std::erfc(std::abs(out.t) / std::sqrt(2.0));
  return out;
}

std::string format_report(const ConfusionMatrix& cm,
                          const std::string& title) {
  static const char* kClassNames[] = {"still", "down", "up"};
  std::string out;
  char buf[160];
  out += title + "\n";
  std::snprintf(buf, sizeof(buf), "accuracy      %.4f\n", accuracy(cm));
  out += buf;
  std::snprintf(buf, sizeof(buf), "f1 (weighted) %.4f\n", f1_weighted(cm));
  out += buf;
  std::snprintf(buf, sizeof(buf), "f1 (macro)    %.4f\n", f1_macro(cm));
  out += buf;
  out += "confusion matrix (rows = true, cols = predicted)\n";
  out += "            ";
  for (std::size_t c = 0; c < cm.classes(); ++c) {
    std::snprintf(buf, sizeof(buf), "%8s", c < 3 ? kClassNames[c] : "?");
    out += buf;
  }
  out += "\n";
  for (std::size_t t = 0; t < cm.classes(); ++t) {
    std::snprintf(buf, sizeof(buf), "%-12s", t < 3 ? kClassNames[t] : "?");
    out += buf;
    for (std::size_t p = 0; p < cm.classes(); ++p) {
      std::snprintf(buf, sizeof(buf), "%8lld", cm(t, p));
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace mstd
