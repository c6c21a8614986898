// Independent straight-line reference implementations used as oracles.
// Everything here is deliberately written without the Tape/Tensor machinery
// so it cannot share bugs with the implementation it checks.
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "mstd/model.hpp"
#include "mstd/tensor.hpp"

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<std::vector<double>>;  // row-major

inline Mat to_mat(const mstd::Tensor& t) {
  Mat m(t.rows(), Vec(t.cols()));
  for (std::size_t i = 0; i < t.rows(); ++i) {
    for (std::size_t j = 0; j < t.cols(); ++j) m[i][j] = t(i, j);
  }
  return m;
}

inline Vec matvec(const Mat& a, const Vec& x) {
  Vec y(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) y[i] += a[i][j] * x[j];
  }
  return y;
}

inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// Valid 1-d convolution with optional ReLU.
inline Vec conv1d(const Vec& x, const Vec& w, double b, bool relu) {
  Vec out;
  for (std::size_t i = 0; i + w.size() <= x.size(); ++i) {
    double acc = b;
    for (std::size_t j = 0; j < w.size(); ++j) acc += w[j] * x[i + j];
    out.push_back(relu ? std::max(acc, 0.0) : acc);
  }
  return out;
}

struct GruWeights {
  Mat w_r, u_r, w_z, u_z, w_h, u_h;
};

inline Vec gru_step(const GruWeights& g, const Vec& e, const Vec& h) {
  const std::size_t q = h.size();
  Vec r(q), z(q), cand(q), out(q);
  const Vec wr = matvec(g.w_r, e), ur = matvec(g.u_r, h);
  const Vec wz = matvec(g.w_z, e), uz = matvec(g.u_z, h);
  for (std::size_t i = 0; i < q; ++i) {
    r[i] = sigmoid(wr[i] + ur[i]);
    z[i] = sigmoid(wz[i] + uz[i]);
  }
  Vec rh(q);
  for (std::size_t i = 0; i < q; ++i) rh[i] = r[i] * h[i];
  const Vec wh = matvec(g.w_h, e), uh = matvec(g.u_h, rh);
  for (std::size_t i = 0; i < q; ++i) {
    cand[i] = std::tanh(wh[i] + uh[i]);
    out[i] = (1.0 - z[i]) * h[i] + z[i] * cand[i];
  }
  return out;
}

// Runs the GRU over the columns of a feature matrix from a zero state.
inline Vec encode(const GruWeights& g, const Mat& feature_matrix,
                  std::size_t q) {
  Vec h(q, 0.0);
  const std::size_t steps = feature_matrix.empty()
                                ? 0
                                : feature_matrix[0].size();
  for (std::size_t t = 0; t < steps; ++t) {
    Vec e(feature_matrix.size());
    for (std::size_t r = 0; r < e.size(); ++r) e[r] = feature_matrix[r][t];
    h = gru_step(g, e, h);
  }
  return h;
}

inline Vec softmax(const Vec& logits) {
  double hi = logits[0];
  for (double v : logits) hi = std::max(hi, v);
  double z = 0.0;
  Vec out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - hi);
    z += out[i];
  }
  for (double& v : out) v /= z;
  return out;
}

// Mean clamped cross-entropy over per-sample probability rows.
inline double cross_entropy(const Mat& probs, const std::vector<int>& labels) {
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    total += -std::log(std::max(probs[i][labels[i]], 1e-12));
  }
  return total / static_cast<double>(probs.size());
}

// Whole-pipeline forward for one window, straight from the layer formulas.
inline Vec model_forward(const mstd::ModelConfig& cfg,
                         const mstd::ModelParams& p, const Vec& x) {
  Mat feature;
  for (std::size_t s = 0; s < cfg.scales.size(); ++s) {
    const std::size_t d = cfg.scales[s];
    Vec xd;
    for (std::size_t i = d - 1; i < x.size(); i += d) xd.push_back(x[i]);
    const std::size_t pad = cfg.window - xd.size();
    for (std::size_t j = 0; j < cfg.filters; ++j) {
      Vec w(cfg.kernel);
      for (std::size_t c = 0; c < cfg.kernel; ++c) w[c] = p.conv_w[s](j, c);
      Vec fmap = conv1d(xd, w, p.conv_b[s][j], true);
      Vec row(pad, 0.0);
      row.insert(row.end(), fmap.begin(), fmap.end());
      feature.push_back(row);
    }
  }
  const GruWeights g{to_mat(p.w_r), to_mat(p.u_r), to_mat(p.w_z),
                     to_mat(p.u_z), to_mat(p.w_h), to_mat(p.u_h)};
  Vec h = encode(g, feature, cfg.hidden);
  for (std::size_t layer = 0; layer + 1 < p.fc_w.size(); ++layer) {
    Vec z = matvec(to_mat(p.fc_w[layer]), h);
    for (std::size_t i = 0; i < z.size(); ++i) {
      z[i] = std::max(z[i] + p.fc_b[layer][i], 0.0);
    }
    h = z;
  }
  Vec logits = matvec(to_mat(p.fc_w.back()), h);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    logits[i] += p.fc_b.back()[i];
  }
  return softmax(logits);
}

// Sum-product Pearson formula, a different algebraic route than the
// centered two-pass implementation.
inline double pearson(const Vec& x, const Vec& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) /
         std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

// Literal per-step profit formulas over the class grid. still=0 down=1 up=2.
inline double simulate_profit(const std::vector<int>& preds,
                              const std::vector<int>& truths,
                              const Vec& deltas, bool position_mode) {
  double total = 0.0;
  for (std::size_t t = 0; t < preds.size(); ++t) {
    const double dx = truths[t] == 0 ? 0.0 : deltas[t];
    if (position_mode) {
      const int pos = preds[t] == 2 ? 1 : preds[t] == 1 ? -1 : 0;
      total += pos * dx;
    } else {
      total += preds[t] == truths[t] ? dx : 0.0;
    }
  }
  return total;
}

// Central finite differences of a scalar function over every parameter
// coordinate of the model.
inline std::vector<mstd::Tensor> fd_gradients(
    mstd::ModelParams& params, const std::function<double()>& value,
    double step = 1e-5) {
  std::vector<mstd::Tensor> grads;
  for (mstd::Tensor* t : params.tensors()) {
    mstd::Tensor g = mstd::Tensor::zeros(t->shape());
    for (std::size_t i = 0; i < t->size(); ++i) {
      const double saved = (*t)[i];
      (*t)[i] = saved + step;
      const double hi = value();
      (*t)[i] = saved - step;
      const double lo = value();
      (*t)[i] = saved;
      g[i] = (hi - lo) / (2.0 * step);
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

inline double max_rel_error(const std::vector<mstd::Tensor>& analytic,
                            const std::vector<mstd::Tensor>& fd) {
  double worst = 0.0;
  for (std::size_t k = 0; k < analytic.size(); ++k) {
    for (std::size_t i = 0; i < analytic[k].size(); ++i) {
      const double err = std::abs(analytic[k][i] - fd[k][i]) /
                         (std::abs(fd[k][i]) + 1e-8);
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace oracle
