// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "avs/matrix.hpp"

namespace avs {

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape lives.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Matrix& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
};

// Reverse-mode gradient tape. Nodes are appended in evaluation order, so the
// reverse of the node list is a valid reverse topological order.
class Tape {
 public:
  using Backprop = std::function<void(Tape&, const Matrix& out_grad)>;

  Var variable(Matrix value) { return push(std::move(value), true, {}); }
  Var constant(Matrix value) { return push(std::move(value), false, {}); }

  const Matrix& value(Var v) const { return nodes_[v.id].value; }
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  // Gradient of the last backward() loss with respect to v; zeros when v is off every path.
  Matrix grad(Var v) const {
    const Node& n = nodes_[v.id];
    if (n.grad.empty() && !n.value.empty()) return Matrix(n.value.rows(), n.value.cols());
    return n.grad;
  }

  // Mutable gradient buffer for v, allocated on first touch. Used by backprop rules.
  Matrix& grad_buffer(std::size_t id) {
    Node& n = nodes_[id];
    if (n.grad.empty()) n.grad = Matrix(n.value.rows(), n.value.cols());
    return n.grad;
  }

  // Records a derived value. The rule is kept only if some input needs a gradient.
  Var record(Matrix value, std::initializer_list<Var> inputs, Backprop rule) {
    bool needs = false;
    for (const Var& in : inputs) needs = needs || nodes_[in.id].requires_grad;
    return push(std::move(value), needs, needs ? std::move(rule) : Backprop{});
  }
  Var record_many(Matrix value, std::span<const Var> inputs, Backprop rule) {
    bool needs = false;
    for (const Var& in : inputs) needs = needs || nodes_[in.id].requires_grad;
    return push(std::move(value), needs, needs ? std::move(rule) : Backprop{});
  }

  void backward(Var loss) {
    require(loss.tape == this, "backward: loss belongs to another tape");
    const Matrix& lv = nodes_[loss.id].value;
    require(lv.rows() == 1 && lv.cols() == 1, "backward: loss must be a scalar, got " + lv.shape_string());
    for (Node& n : nodes_) n.grad = Matrix();
    grad_buffer(loss.id)(0, 0) = 1.0;
    for (std::size_t i = loss.id + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.backprop || n.grad.empty()) continue;
      n.backprop(*this, n.grad);
    }
  }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Backprop backprop;
    bool requires_grad = false;
  };

  Var push(Matrix value, bool requires_grad, Backprop rule) {
    nodes_.push_back(Node{std::move(value), Matrix(), std::move(rule), requires_grad});
    return Var{this, nodes_.size() - 1};
  }

  std::vector<Node> nodes_;
};

inline const Matrix& Var::value() const { return tape->value(*this); }

namespace detail {

inline Tape& tape_of(Var a, Var b) {
  require(a.tape == b.tape && a.tape != nullptr, "operands recorded on different tapes");
  return *a.tape;
}

inline void accumulate(Tape& t, Var v, const Matrix& g) {
  if (t.requires_grad(v)) t.grad_buffer(v.id) += g;
}

}  // namespace detail

inline Var matmul(Var a, Var b) {
  Tape& t = detail::tape_of(a, b);
  return t.record(matmul(a.value(), b.value()), {a, b}, [a, b](Tape& t, const Matrix& g) {
    if (t.requires_grad(a)) t.grad_buffer(a.id) += matmul_nt(g, t.value(b));
    if (t.requires_grad(b)) t.grad_buffer(b.id) += matmul_tn(t.value(a), g);
  });
}

inline Var matmul_nt(Var a, Var b) {
  Tape& t = detail::tape_of(a, b);
  return t.record(matmul_nt(a.value(), b.value()), {a, b}, [a, b](Tape& t, const Matrix& g) {
    if (t.requires_grad(a)) t.grad_buffer(a.id) += matmul(g, t.value(b));
    if (t.requires_grad(b)) t.grad_buffer(b.id) += matmul_tn(g, t.value(a));
  });
}

inline Var transpose(Var a) {
  return a.tape->record(transpose(a.value()), {a}, [a](Tape& t, const Matrix& g) {
    t.grad_buffer(a.id) += transpose(g);
  });
}

inline Var add(Var a, Var b) {
  Tape& t = detail::tape_of(a, b);
  return t.record(add(a.value(), b.value()), {a, b}, [a, b](Tape& t, const Matrix& g) {
    detail::accumulate(t, a, g);
    detail::accumulate(t, b, g);
  });
}

inline Var sub(Var a, Var b) {
  Tape& t = detail::tape_of(a, b);
  return t.record(sub(a.value(), b.value()), {a, b}, [a, b](Tape& t, const Matrix& g) {
    detail::accumulate(t, a, g);
    if (t.requires_grad(b)) {
      Matrix& gb = t.grad_buffer(b.id);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

inline Var mul(Var a, Var b) {
  Tape& t = detail::tape_of(a, b);
  return t.record(mul(a.value(), b.value()), {a, b}, [a, b](Tape& t, const Matrix& g) {
    if (t.requires_grad(a)) {
      Matrix& ga = t.grad_buffer(a.id);
      const Matrix& vb = t.value(b);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * vb[i];
    }
    if (t.requires_grad(b)) {
      Matrix& gb = t.grad_buffer(b.id);
      const Matrix& va = t.value(a);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * va[i];
    }
  });
}

inline Var scale(Var a, double s) {
  return a.tape->record(scale(a.value(), s), {a}, [a, s](Tape& t, const Matrix& g) {
    Matrix& ga = t.grad_buffer(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += s * g[i];
  });
}

// m (n×k) plus the 1×k row r added to every row.
inline Var add_row(Var m, Var r) {
  Tape& t = detail::tape_of(m, r);
  const Matrix& mv = m.value();
  const Matrix& rv = r.value();
  require(rv.rows() == 1 && rv.cols() == mv.cols(),
          "add_row: shape mismatch " + mv.shape_string() + " vs " + rv.shape_string());
  Matrix out = mv;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += rv(0, j);
  return t.record(std::move(out), {m, r}, [m, r](Tape& t, const Matrix& g) {
    detail::accumulate(t, m, g);
    if (t.requires_grad(r)) {
      Matrix& gr = t.grad_buffer(r.id);
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) gr(0, j) += g(i, j);
    }
  });
}

inline Var tanh(Var a) {
  Tape& t = *a.tape;
  const std::size_t out_id = t.size();
  return t.record(tanh(a.value()), {a}, [a, out_id](Tape& t, const Matrix& g) {
    Matrix& ga = t.grad_buffer(a.id);
    const Matrix& y = t.value(Var{&t, out_id});
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

inline Var sigmoid(Var a) {
  Tape& t = *a.tape;
  const std::size_t out_id = t.size();
  return t.record(sigmoid(a.value()), {a}, [a, out_id](Tape& t, const Matrix& g) {
    Matrix& ga = t.grad_buffer(a.id);
    const Matrix& y = t.value(Var{&t, out_id});
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

// Softmax over all entries of a (typically k×1 scores).
inline Var softmax(Var a) {
  Tape& t = *a.tape;
  const std::size_t out_id = t.size();
  return t.record(softmax(a.value()), {a}, [a, out_id](Tape& t, const Matrix& g) {
    Matrix& ga = t.grad_buffer(a.id);
    const Matrix& y = t.value(Var{&t, out_id});
    double dot = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * y[i];
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += y[i] * (g[i] - dot);
  });
}

inline Var slice_rows(Var a, std::size_t begin, std::size_t end) {
  return a.tape->record(slice_rows(a.value(), begin, end), {a}, [a, begin](Tape& t, const Matrix& g) {
    Matrix& ga = t.grad_buffer(a.id);
    const std::size_t offset = begin * ga.cols();
    for (std::size_t i = 0; i < g.size(); ++i) ga[offset + i] += g[i];
  });
}

inline Var row(Var a, std::size_t r) { return slice_rows(a, r, r + 1); }

inline Var slice_cols(Var a, std::size_t begin, std::size_t end) {
  return a.tape->record(slice_cols(a.value(), begin, end), {a}, [a, begin](Tape& t, const Matrix& g) {
    Matrix& ga = t.grad_buffer(a.id);
    for (std::size_t i = 0; i < g.rows(); ++i)
      for (std::size_t j = 0; j < g.cols(); ++j) ga(i, begin + j) += g(i, j);
  });
}

// Horizontal concatenation; all parts share a row count.
inline Var concat_cols(std::span<const Var> parts) {
  require(!parts.empty(), "concat_cols: no operands");
  Tape& t = *parts.front().tape;
  const std::size_t rows = parts.front().rows();
  std::size_t cols = 0;
  for (const Var& p : parts) {
    require(p.tape == &t, "concat_cols: operands recorded on different tapes");
    require(p.rows() == rows, "concat_cols: row mismatch " + parts.front().value().shape_string() + " vs " +
                                  p.value().shape_string());
    cols += p.cols();
  }
  Matrix out(rows, cols);
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const Matrix& v = p.value();
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < v.cols(); ++j) out(i, offset + j) = v(i, j);
    offset += v.cols();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return t.record_many(std::move(out), inputs, [inputs](Tape& t, const Matrix& g) {
    std::size_t offset = 0;
    for (const Var& p : inputs) {
      const std::size_t w = t.value(p).cols();
      if (t.requires_grad(p)) {
        Matrix& gp = t.grad_buffer(p.id);
        for (std::size_t i = 0; i < g.rows(); ++i)
          for (std::size_t j = 0; j < w; ++j) gp(i, j) += g(i, offset + j);
      }
      offset += w;
    }
  });
}

inline Var concat_cols(std::initializer_list<Var> parts) {
  return concat_cols(std::span<const Var>(parts.begin(), parts.size()));
}

// Vertical concatenation; all parts share a column count.
inline Var concat_rows(std::span<const Var> parts) {
  require(!parts.empty(), "concat_rows: no operands");
  Tape& t = *parts.front().tape;
  const std::size_t cols = parts.front().cols();
  std::size_t rows = 0;
  for (const Var& p : parts) {
    require(p.tape == &t, "concat_rows: operands recorded on different tapes");
    require(p.cols() == cols, "concat_rows: column mismatch " + parts.front().value().shape_string() + " vs " +
                                  p.value().shape_string());
    rows += p.rows();
  }
  Matrix out(rows, cols);
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const auto src = p.value().data();
    std::copy(src.begin(), src.end(), out.data().begin() + offset);
    offset += src.size();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return t.record_many(std::move(out), inputs, [inputs](Tape& t, const Matrix& g) {
    std::size_t offset = 0;
    for (const Var& p : inputs) {
      const std::size_t n = t.value(p).size();
      if (t.requires_grad(p)) {
        Matrix& gp = t.grad_buffer(p.id);
        for (std::size_t i = 0; i < n; ++i) gp[i] += g[offset + i];
      }
      offset += n;
    }
  });
}

inline Var sum(Var a) {
  return a.tape->record(Matrix(1, 1, sum(a.value())), {a}, [a](Tape& t, const Matrix& g) {
    Matrix& ga = t.grad_buffer(a.id);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[0];
  });
}

inline Var mean(Var a) {
  require(!a.value().empty(), "mean: empty operand");
  const double n = static_cast<double>(a.value().size());
  return a.tape->record(Matrix(1, 1, sum(a.value()) / n), {a}, [a, n](Tape& t, const Matrix& g) {
    Matrix& ga = t.grad_buffer(a.id);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[0] / n;
  });
}

// Column-wise mean of an n×k matrix, as a 1×k row.
inline Var mean_rows(Var a) {
  const Matrix& v = a.value();
  require(v.rows() > 0, "mean_rows: empty operand");
  const double n = static_cast<double>(v.rows());
  Matrix out(1, v.cols());
  for (std::size_t i = 0; i < v.rows(); ++i)
    for (std::size_t j = 0; j < v.cols(); ++j) out(0, j) += v(i, j);
  for (std::size_t j = 0; j < v.cols(); ++j) out(0, j) /= n;
  return a.tape->record(std::move(out), {a}, [a, n](Tape& t, const Matrix& g) {
    Matrix& ga = t.grad_buffer(a.id);
    for (std::size_t i = 0; i < ga.rows(); ++i)
      for (std::size_t j = 0; j < ga.cols(); ++j) ga(i, j) += g(0, j) / n;
  });
}

}  // namespace avs
