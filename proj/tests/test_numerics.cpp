#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "mstd/errors.hpp"
#include "mstd/tape.hpp"
#include "mstd/tensor.hpp"

using mstd::Tape;
using mstd::Tensor;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = dist(rng);
  return t;
}

// Central finite differences of value(leaf contents) w.r.t. one leaf.
template <typename F>
Tensor fd_grad(Tensor& x, F value, double step = 1e-5) {
  Tensor g = Tensor::zeros(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + step;
    const double hi = value();
    x[i] = saved - step;
    const double lo = value();
    x[i] = saved;
    g[i] = (hi - lo) / (2.0 * step);
  }
  return g;
}

double max_rel_err(const Tensor& a, const Tensor& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]) / (std::abs(b[i]) + 1e-8));
  }
  return worst;
}

}  // namespace

TEST_CASE("matmul values") {
  Tape tape;
  auto eye = tape.leaf(Tensor({2, 2}, {1, 0, 0, 1}));
  auto a = tape.leaf(Tensor({2, 2}, {1, 2, 3, 4}));
  auto prod = tape.matmul(eye, a);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(tape.value(prod)[i] == tape.value(a)[i]);
  }

  auto ones = tape.leaf(Tensor({2, 1}, {1, 1}));
  auto v = tape.matmul(a, ones);
  CHECK(tape.value(v)[0] == 3.0);
  CHECK(tape.value(v)[1] == 7.0);

  auto bad = tape.leaf(Tensor({3, 1}, {1, 1, 1}));
  CHECK_THROWS_AS(tape.matmul(a, bad), std::invalid_argument);
}

TEST_CASE("matmul gradient of sum equals ones * b^T") {
  std::mt19937_64 rng(7);
  Tensor av = random_tensor({3, 4}, rng);
  Tensor bv = random_tensor({4, 2}, rng);

  Tape tape;
  auto a = tape.leaf(av);
  auto b = tape.leaf(bv);
  auto loss = tape.sum(tape.matmul(a, b));
  tape.backward(loss);

  // d sum(AB) / dA_{ik} = sum_j B_{kj}
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t k = 0; k < 4; ++k) {
      double expect = 0.0;
      for (std::size_t j = 0; j < 2; ++j) expect += bv(k, j);
      CHECK(tape.grad(a)(i, k) == doctest::Approx(expect).epsilon(1e-12));
    }
  }

  const Tensor fd = fd_grad(av, [&] {
    Tape t2;
    return t2.value(t2.sum(t2.matmul(t2.leaf(av), t2.leaf(bv))))[0];
  });
  CHECK(max_rel_err(tape.grad(a), fd) < 1e-4);
}

TEST_CASE("elementwise values") {
  Tape tape;
  auto x = tape.leaf(Tensor::scalar(-4.0));
  CHECK(tape.value(tape.relu(x))[0] == 0.0);
  CHECK(tape.value(tape.sigmoid(tape.leaf(Tensor::scalar(0.0))))[0] == 0.5);

  auto a = tape.leaf(Tensor({2, 2}, {1, 2, 3, 4}));
  auto bad = tape.leaf(Tensor({1, 3}, {1, 2, 3}));
  CHECK_THROWS_AS(tape.add(a, bad), std::invalid_argument);
  CHECK_THROWS_AS(tape.mul(a, bad), std::invalid_argument);

  // scalar broadcast
  auto shifted = tape.add(a, tape.leaf(Tensor::scalar(10.0)));
  CHECK(tape.value(shifted)[3] == 14.0);
}

TEST_CASE("tanh gradient at 0.3") {
  Tape tape;
  auto x = tape.leaf(Tensor::scalar(0.3));
  auto y = tape.tanh(x);
  tape.backward(y);
  CHECK(tape.grad(x)[0] == doctest::Approx(0.915136961827).epsilon(1e-9));

  Tensor xv = Tensor::scalar(0.3);
  const Tensor fd = fd_grad(xv, [&] {
    Tape t2;
    return t2.value(t2.tanh(t2.leaf(xv)))[0];
  });
  CHECK(tape.grad(x)[0] == doctest::Approx(fd[0]).epsilon(1e-6));
}

TEST_CASE("backward basics") {
  SUBCASE("constant loss leaves parameters with zero gradient") {
    Tape tape;
    auto w = tape.leaf(Tensor({2, 1}, {1.0, 2.0}));
    auto c = tape.leaf(Tensor::scalar(5.0));
    tape.backward(c);
    CHECK(tape.grad(w)[0] == 0.0);
    CHECK(tape.grad(w)[1] == 0.0);
  }
  SUBCASE("loss = sum(w .* x) gives grad(w) = x") {
    Tape tape;
    auto w = tape.leaf(Tensor({3, 1}, {1, 2, 3}));
    auto x = tape.leaf(Tensor({3, 1}, {4, 5, 6}));
    tape.backward(tape.sum(tape.mul(w, x)));
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(tape.grad(w)[i] == tape.value(x)[i]);
    }
  }
  SUBCASE("non-scalar loss is rejected") {
    Tape tape;
    auto v = tape.leaf(Tensor({2, 1}, {1, 2}));
    CHECK_THROWS_AS(tape.backward(v), std::invalid_argument);
  }
}

TEST_CASE("finite differences over a composite expression") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor wv = random_tensor({2, 3}, rng);
    Tensor xv = random_tensor({3, 1}, rng);
    const auto build = [&](Tape& t) {
      auto w = t.leaf(wv);
      auto x = t.leaf(xv);
      auto z = t.tanh(t.matmul(w, x));
      auto s = t.sigmoid(t.scale(z, 0.7));
      auto r = t.relu(t.add_const(t.mul(s, z), -0.1));
      return std::pair{t.sum(r), w};
    };
    Tape tape;
    auto [loss, w] = build(tape);
    tape.backward(loss);
    const Tensor fd = fd_grad(wv, [&] {
      Tape t2;
      return t2.value(build(t2).first)[0];
    });
    CHECK(max_rel_err(tape.grad(w), fd) < 1e-4);
  }
}

TEST_CASE("backward is deterministic") {
  std::mt19937_64 rng(3);
  const Tensor wv = random_tensor({4, 4}, rng);
  const Tensor xv = random_tensor({4, 1}, rng);
  std::vector<double> first;
  for (int run = 0; run < 2; ++run) {
    Tape tape;
    auto w = tape.leaf(wv);
    auto x = tape.leaf(xv);
    tape.backward(tape.sum(tape.tanh(tape.matmul(w, x))));
    if (run == 0) {
      first = tape.grad(w).data();
    } else {
      CHECK(tape.grad(w).data() == first);  // bit-identical
    }
  }
}

TEST_CASE("chain rule on a 1-d probe") {
  // f(g(x)) with g(x) = 3x, f(u) = tanh(u): f'(g(x)) * g'(x)
  const double x0 = 0.4;
  Tape tape;
  auto x = tape.leaf(Tensor::scalar(x0));
  auto y = tape.tanh(tape.scale(x, 3.0));
  tape.backward(y);
  const double expect = (1.0 - std::tanh(3.0 * x0) * std::tanh(3.0 * x0)) * 3.0;
  CHECK(tape.grad(x)[0] == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("non-finite values are an error state") {
  Tape tape;
  CHECK_THROWS_AS(tape.leaf(Tensor::scalar(
                      std::numeric_limits<double>::infinity())),
                  mstd::NumericError);
  auto big = tape.leaf(Tensor::scalar(1e308));
  CHECK_THROWS_AS(tape.mul(big, big), mstd::NumericError);
}

TEST_CASE("structural ops route gradients to the right slots") {
  std::mt19937_64 rng(5);
  Tensor mv = random_tensor({3, 4}, rng);
  const auto build = [&](Tape& t) {
    auto m = t.leaf(mv);
    auto r1 = t.row(m, 1);
    auto padded = t.pad_cols_left(r1, 2);
    auto stacked = t.vstack({padded, t.pad_cols_left(t.row(m, 2), 2)});
    auto col = t.column(stacked, 3);
    return std::pair{t.sum(t.mul(col, col)), m};
  };
  Tape tape;
  auto [loss, m] = build(tape);
  tape.backward(loss);
  const Tensor fd = fd_grad(mv, [&] {
    Tape t2;
    return t2.value(build(t2).first)[0];
  });
  CHECK(max_rel_err(tape.grad(m), fd) < 1e-4);
}

TEST_CASE("softmax and nll gradients") {
  std::mt19937_64 rng(9);
  Tensor lv = random_tensor({4, 1}, rng);
  const auto build = [&](Tape& t) {
    auto l = t.leaf(lv);
    return std::pair{t.nll(t.softmax(l), 2), l};
  };
  Tape tape;
  auto [loss, l] = build(tape);
  tape.backward(loss);
  const Tensor fd = fd_grad(lv, [&] {
    Tape t2;
    return t2.value(build(t2).first)[0];
  });
  CHECK(max_rel_err(tape.grad(l), fd) < 1e-4);

  // probabilities sum to 1
  Tape t3;
  auto p = t3.softmax(t3.leaf(lv));
  double s = 0.0;
  for (double v : t3.value(p).data()) s += v;
  CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
}
