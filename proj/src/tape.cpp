#include "mstd/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mstd/errors.hpp"

namespace mstd {
namespace {

void ensure_finite(const Tensor& t, const char* op) {
  if (!t.all_finite()) {
    throw NumericError(std::string("non-finite value produced by ") + op);
  }
}

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

Tape::NodeId Tape::check(NodeId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size()) {
    throw std::invalid_argument("tape: node id out of range");
  }
  return id;
}

Tape::NodeId Tape::push(Tensor value,
                        std::function<void(Tape&, const Tensor&)> pull) {
  nodes_.push_back(Node{std::move(value), Tensor{}, std::move(pull)});
  return static_cast<NodeId>(nodes_.size() - 1);
}

Tape::NodeId Tape::leaf(Tensor value) {
  ensure_finite(value, "leaf");
  return push(std::move(value), nullptr);
}

Tape::NodeId Tape::add(NodeId a, NodeId b) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  require(va.same_shape(vb) || va.is_scalar() || vb.is_scalar(),
          "add: shapes are not broadcast-compatible");
  Tensor out = va.is_scalar() && !vb.is_scalar() ? vb : va;
  if (va.is_scalar() && !vb.is_scalar()) {
    for (double& v : out.data()) v += va[0];
  } else if (vb.is_scalar() && !va.is_scalar()) {
    for (double& v : out.data()) v += vb[0];
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = va[i] + vb[i];
  }
  ensure_finite(out, "add");
  return push(std::move(out), [a, b](Tape& t, const Tensor& g) {
    for (NodeId p : {a, b}) {
      Tensor& gp = t.grad_ref(p);
      if (gp.is_scalar() && !g.is_scalar()) {
        for (double v : g.data()) gp[0] += v;
      } else {
        for (std::size_t i = 0; i < g.size(); ++i) gp[i] += g[i];
      }
    }
  });
}

Tape::NodeId Tape::mul(NodeId a, NodeId b) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  require(va.same_shape(vb) || va.is_scalar() || vb.is_scalar(),
          "mul: shapes are not broadcast-compatible");
  Tensor out = va.is_scalar() && !vb.is_scalar() ? vb : va;
  if (va.is_scalar() && !vb.is_scalar()) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = va[0] * vb[i];
  } else if (vb.is_scalar() && !va.is_scalar()) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = va[i] * vb[0];
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = va[i] * vb[i];
  }
  ensure_finite(out, "mul");
  return push(std::move(out), [a, b](Tape& t, const Tensor& g) {
    const Tensor& va = t.value(a);
    const Tensor& vb = t.value(b);
    Tensor& ga = t.grad_ref(a);
    Tensor& gb = t.grad_ref(b);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double xa = va.is_scalar() ? va[0] : va[i];
      const double xb = vb.is_scalar() ? vb[0] : vb[i];
      if (ga.is_scalar()) {
        ga[0] += g[i] * xb;
      } else {
        ga[i] += g[i] * xb;
      }
      if (gb.is_scalar()) {
        gb[0] += g[i] * xa;
      } else {
        gb[i] += g[i] * xa;
      }
    }
  });
}

Tape::NodeId Tape::sigmoid(NodeId a) {
  Tensor out = value(a);
  for (double& v : out.data()) v = 1.0 / (1.0 + std::exp(-v));
  ensure_finite(out, "sigmoid");
  NodeId id = push(std::move(out), nullptr);
  nodes_[id].pull = [a, id](Tape& t, const Tensor& g) {
    const Tensor& y = t.value(id);
    Tensor& ga = t.grad_ref(a);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i] * y[i] * (1.0 - y[i]);
    }
  };
  return id;
}

Tape::NodeId Tape::tanh(NodeId a) {
  Tensor out = value(a);
  for (double& v : out.data()) v = std::tanh(v);
  ensure_finite(out, "tanh");
  NodeId id = push(std::move(out), nullptr);
  nodes_[id].pull = [a, id](Tape& t, const Tensor& g) {
    const Tensor& y = t.value(id);
    Tensor& ga = t.grad_ref(a);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i] * (1.0 - y[i] * y[i]);
    }
  };
  return id;
}

Tape::NodeId Tape::relu(NodeId a) {
  Tensor out = value(a);
  for (double& v : out.data()) v = std::max(v, 0.0);
  ensure_finite(out, "relu");
  return push(std::move(out), [a](Tape& t, const Tensor& g) {
    const Tensor& x = t.value(a);
    Tensor& ga = t.grad_ref(a);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (x[i] > 0.0) ga[i] += g[i];
    }
  });
}

Tape::NodeId Tape::scale(NodeId a, double c) {
  Tensor out = value(a);
  for (double& v : out.data()) v *= c;
  ensure_finite(out, "scale");
  return push(std::move(out), [a, c](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad_ref(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += c * g[i];
  });
}

Tape::NodeId Tape::add_const(NodeId a, double c) {
  Tensor out = value(a);
  for (double& v : out.data()) v += c;
  ensure_finite(out, "add_const");
  return push(std::move(out), [a](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad_ref(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
  });
}

Tape::NodeId Tape::matmul(NodeId a, NodeId b) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  require(va.shape().size() == 2 && vb.shape().size() == 2,
          "matmul: operands must be 2-d");
  require(va.cols() == vb.rows(), "matmul: inner dimensions disagree");
  const std::size_t m = va.rows(), n = va.cols(), p = vb.cols();
  Tensor out({m, p});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = va(i, k);
      for (std::size_t j = 0; j < p; ++j) {
        out(i, j) += aik * vb(k, j);
      }
    }
  }
  ensure_finite(out, "matmul");
  return push(std::move(out), [a, b, m, n, p](Tape& t, const Tensor& g) {
    const Tensor& va = t.value(a);
    const Tensor& vb = t.value(b);
    Tensor& ga = t.grad_ref(a);
    Tensor& gb = t.grad_ref(b);
    // gA += G * B^T ; gB += A^T * G
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < p; ++j) {
        const double gij = g(i, j);
        for (std::size_t k = 0; k < n; ++k) {
          ga(i, k) += gij * vb(k, j);
          gb(k, j) += va(i, k) * gij;
        }
      }
    }
  });
}

Tape::NodeId Tape::row(NodeId a, std::size_t i) {
  const Tensor& va = value(a);
  require(va.shape().size() == 2 && i < va.rows(), "row: index out of range");
  const std::size_t c = va.cols();
  Tensor out({1, c});
  for (std::size_t j = 0; j < c; ++j) out[j] = va(i, j);
  return push(std::move(out), [a, i, c](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad_ref(a);
    for (std::size_t j = 0; j < c; ++j) ga(i, j) += g[j];
  });
}

Tape::NodeId Tape::column(NodeId a, std::size_t j) {
  const Tensor& va = value(a);
  require(va.shape().size() == 2 && j < va.cols(),
          "column: index out of range");
  const std::size_t r = va.rows();
  Tensor out({r, 1});
  for (std::size_t i = 0; i < r; ++i) out[i] = va(i, j);
  return push(std::move(out), [a, j, r](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad_ref(a);
    for (std::size_t i = 0; i < r; ++i) ga(i, j) += g[i];
  });
}

Tape::NodeId Tape::element(NodeId a, std::size_t i) {
  const Tensor& va = value(a);
  require(i < va.size(), "element: index out of range");
  return push(Tensor::scalar(va[i]), [a, i](Tape& t, const Tensor& g) {
    t.grad_ref(a)[i] += g[0];
  });
}

Tape::NodeId Tape::pad_cols_left(NodeId a, std::size_t n) {
  const Tensor& va = value(a);
  require(va.shape().size() == 2, "pad_cols_left: operand must be 2-d");
  const std::size_t r = va.rows(), c = va.cols();
  Tensor out({r, n + c});
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) out(i, n + j) = va(i, j);
  }
  return push(std::move(out), [a, n, r, c](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad_ref(a);
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) ga(i, j) += g(i, n + j);
    }
  });
}

Tape::NodeId Tape::vstack(const std::vector<NodeId>& rows) {
  require(!rows.empty(), "vstack: no rows");
  const std::size_t c = value(rows[0]).cols();
  for (NodeId r : rows) {
    require(value(r).shape().size() == 2 && value(r).rows() == 1 &&
                value(r).cols() == c,
            "vstack: rows must all be {1,c}");
  }
  Tensor out({rows.size(), c});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Tensor& vr = value(rows[i]);
    for (std::size_t j = 0; j < c; ++j) out(i, j) = vr[j];
  }
  return push(std::move(out), [rows, c](Tape& t, const Tensor& g) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      Tensor& gr = t.grad_ref(rows[i]);
      for (std::size_t j = 0; j < c; ++j) gr[j] += g(i, j);
    }
  });
}

Tape::NodeId Tape::sum(NodeId a) {
  const Tensor& va = value(a);
  double s = 0.0;
  for (double v : va.data()) s += v;
  Tensor out = Tensor::scalar(s);
  ensure_finite(out, "sum");
  return push(std::move(out), [a](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad_ref(a);
    for (double& v : ga.data()) v += g[0];
  });
}

Tape::NodeId Tape::softmax(NodeId a) {
  const Tensor& va = value(a);
  require(va.shape().size() == 2 && va.cols() == 1,
          "softmax: operand must be a column vector");
  Tensor out = va;
  double hi = out[0];
  for (double v : out.data()) hi = std::max(hi, v);
  double z = 0.0;
  for (double& v : out.data()) {
    v = std::exp(v - hi);
    z += v;
  }
  for (double& v : out.data()) v /= z;
  ensure_finite(out, "softmax");
  NodeId id = push(std::move(out), nullptr);
  nodes_[id].pull = [a, id](Tape& t, const Tensor& g) {
    const Tensor& y = t.value(id);
    Tensor& ga = t.grad_ref(a);
    double dot = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * y[i];
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += y[i] * (g[i] - dot);
    }
  };
  return id;
}

Tape::NodeId Tape::nll(NodeId probs, std::size_t label) {
  const Tensor& p = value(probs);
  require(label < p.size(), "nll: label out of range");
  const double py = std::max(p[label], kLogClamp);
  Tensor out = Tensor::scalar(-std::log(py));
  return push(std::move(out), [probs, label](Tape& t, const Tensor& g) {
    const double py = std::max(t.value(probs)[label], kLogClamp);
    t.grad_ref(probs)[label] += g[0] * (-1.0 / py);
  });
}

Tape::NodeId Tape::average(const std::vector<NodeId>& scalars) {
  require(!scalars.empty(), "average: no inputs");
  double s = 0.0;
  for (NodeId id : scalars) {
    require(value(id).is_scalar(), "average: inputs must be scalars");
    s += value(id)[0];
  }
  const double inv_n = 1.0 / static_cast<double>(scalars.size());
  Tensor out = Tensor::scalar(s * inv_n);
  ensure_finite(out, "average");
  return push(std::move(out), [scalars, inv_n](Tape& t, const Tensor& g) {
    for (NodeId id : scalars) t.grad_ref(id)[0] += g[0] * inv_n;
  });
}

void Tape::backward(NodeId loss) {
  check(loss);
  if (!value(loss).is_scalar()) {
    throw std::invalid_argument("backward: loss must be scalar");
  }
  for (Node& node : nodes_) {
    node.grad = Tensor::zeros(node.value.shape());
  }
  nodes_[loss].grad[0] = 1.0;
  for (NodeId i = loss; i >= 0; --i) {
    if (nodes_[i].pull) nodes_[i].pull(*this, nodes_[i].grad);
  }
}

}  // namespace mstd
