#include "qa4ie/ad/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qa4ie::ad {

// ---- ParameterSet -----------------------------------------------------

Parameter& ParameterSet::add(std::string name, Tensor value) {
  if (index_.contains(name)) throw std::invalid_argument("duplicate parameter '" + name + "'");
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->grad = Tensor(value.shape(), 0.0);
  p->value = std::move(value);
  index_.emplace(std::move(name), params_.size());
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter& ParameterSet::get(std::string_view name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter named '" + std::string(name) + "'");
  return *params_[it->second];
}

const Parameter& ParameterSet::get(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter named '" + std::string(name) + "'");
  return *params_[it->second];
}

bool ParameterSet::contains(std::string_view name) const { return index_.find(name) != index_.end(); }

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) p->grad.fill(0.0);
}

std::vector<Parameter*> ParameterSet::all() {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Parameter*> ParameterSet::all() const {
  std::vector<const Parameter*> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

// ---- Graph ------------------------------------------------------------

const Tensor& Var::value() const { return graph->value(*this); }

Var Graph::constant(Tensor value) {
  if (!value.all_finite()) throw NumericError("constant: non-finite values");
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

Var Graph::parameter(Parameter& param) {
  if (auto it = param_nodes_.find(&param); it != param_nodes_.end()) return {this, it->second};
  param_nodes_.emplace(&param, nodes_.size());
  Node n;
  n.value = param.value;
  n.param = &param;
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

Var Graph::push(Tensor value, std::vector<std::size_t> inputs, BackwardFn backward) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = std::any_of(inputs.begin(), inputs.end(),
                                [&](std::size_t i) { return nodes_[i].requires_grad; });
  if (n.requires_grad) {
    n.inputs = std::move(inputs);
    n.backward = std::move(backward);
  }
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

Tensor& Graph::grad_buffer(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Tensor(n.value.shape(), 0.0);
  return n.grad;
}

Tensor Graph::grad(Var v) const {
  const Node& n = nodes_[v.id];
  return n.grad.empty() ? Tensor(n.value.shape(), 0.0) : n.grad;
}

void Graph::backward(Var seed) {
  if (seed.graph != this) throw std::invalid_argument("backward: seed belongs to another graph");
  if (nodes_[seed.id].value.size() != 1) {
    throw ShapeError("backward: seed must be scalar, got " + to_string(nodes_[seed.id].value.shape()));
  }
  for (auto& n : nodes_) n.grad = Tensor();
  grad_buffer(seed.id)[0] = 1.0;
  for (std::size_t i = seed.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.backward) {
      n.backward(*this, i);
    } else if (n.param != nullptr) {
      auto dst = n.param->grad.data();
      auto src = n.grad.data();
      for (std::size_t k = 0; k < src.size(); ++k) dst[k] += src[k];
    }
  }
}

// ---- helpers ----------------------------------------------------------

namespace {

void require_matrix(const char* op, const Tensor& t) {
  if (t.rank() != 2) throw ShapeError(std::string(op) + ": expected rank-2 input, got " + to_string(t.shape()));
}

Var finish(const char* op, Graph& g, Tensor value, std::vector<std::size_t> inputs, Graph::BackwardFn fn) {
  if (!value.all_finite()) throw NumericError(std::string(op) + ": produced non-finite values");
  return g.push(std::move(value), std::move(inputs), std::move(fn));
}

Graph& graph_of(const char* op, Var a, Var b) {
  if (a.graph == nullptr || a.graph != b.graph) {
    throw std::invalid_argument(std::string(op) + ": operands belong to different graphs");
  }
  return *a.graph;
}

struct Broadcast {
  std::size_t rows, cols;
  std::size_t ar, ac, br, bc;
};

Broadcast broadcast_shape(const char* op, const Tensor& a, const Tensor& b) {
  require_matrix(op, a);
  require_matrix(op, b);
  Broadcast s{0, 0, a.rows(), a.cols(), b.rows(), b.cols()};
  auto merge = [&](std::size_t x, std::size_t y) -> std::size_t {
    if (x == y || y == 1) return x;
    if (x == 1) return y;
    throw ShapeError(std::string(op) + ": cannot broadcast " + to_string(a.shape()) + " with " +
                     to_string(b.shape()));
  };
  s.rows = merge(s.ar, s.br);
  s.cols = merge(s.ac, s.bc);
  return s;
}

template <typename Fwd, typename DA, typename DB>
Var binary(const char* op, Var a, Var b, Fwd fwd, DA da, DB db) {
  Graph& g = graph_of(op, a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const Broadcast s = broadcast_shape(op, av, bv);
  Tensor out = Tensor::matrix(s.rows, s.cols);
  const double* pa = av.data().data();
  const double* pb = bv.data().data();
  double* po = out.data().data();
  for (std::size_t i = 0; i < s.rows; ++i) {
    const std::size_t ra = (s.ar == 1 ? 0 : i) * s.ac;
    const std::size_t rb = (s.br == 1 ? 0 : i) * s.bc;
    for (std::size_t j = 0; j < s.cols; ++j) {
      po[i * s.cols + j] = fwd(pa[ra + (s.ac == 1 ? 0 : j)], pb[rb + (s.bc == 1 ? 0 : j)]);
    }
  }
  const std::size_t ia = a.id, ib = b.id;
  return finish(op, g, std::move(out), {ia, ib}, [s, ia, ib, da, db](Graph& gr, std::size_t self) {
    const double* up = gr.upstream(self).data().data();
    const double* pa = gr.value(ia).data().data();
    const double* pb = gr.value(ib).data().data();
    double* ga = gr.requires_grad(ia) ? gr.grad_buffer(ia).data().data() : nullptr;
    double* gb = gr.requires_grad(ib) ? gr.grad_buffer(ib).data().data() : nullptr;
    for (std::size_t i = 0; i < s.rows; ++i) {
      const std::size_t ra = (s.ar == 1 ? 0 : i) * s.ac;
      const std::size_t rb = (s.br == 1 ? 0 : i) * s.bc;
      for (std::size_t j = 0; j < s.cols; ++j) {
        const std::size_t ka = ra + (s.ac == 1 ? 0 : j);
        const std::size_t kb = rb + (s.bc == 1 ? 0 : j);
        const double u = up[i * s.cols + j];
        if (ga) ga[ka] += u * da(pa[ka], pb[kb]);
        if (gb) gb[kb] += u * db(pa[ka], pb[kb]);
      }
    }
  });
}

// Elementwise map whose derivative is expressed through input x and output y.
template <typename Fwd, typename Deriv>
Var unary(const char* op, Var a, Fwd fwd, Deriv deriv) {
  Graph& g = *a.graph;
  const Tensor& av = a.value();
  Tensor out(av.shape());
  auto src = av.data();
  auto dst = out.data();
  for (std::size_t k = 0; k < src.size(); ++k) dst[k] = fwd(src[k]);
  const std::size_t ia = a.id;
  return finish(op, g, std::move(out), {ia}, [ia, deriv](Graph& gr, std::size_t self) {
    auto up = gr.upstream(self).data();
    auto x = gr.value(ia).data();
    auto y = gr.value(self).data();
    auto ga = gr.grad_buffer(ia).data();
    for (std::size_t k = 0; k < up.size(); ++k) ga[k] += up[k] * deriv(x[k], y[k]);
  });
}

}  // namespace

// ---- linear algebra ---------------------------------------------------

Var matmul(Var a, Var b) {
  Graph& g = graph_of("matmul", a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_matrix("matmul", av);
  require_matrix("matmul", bv);
  const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
  if (bv.rows() != k) {
    throw ShapeError("matmul: " + to_string(av.shape()) + " x " + to_string(bv.shape()));
  }
  Tensor out = Tensor::matrix(m, n);
  const double* pa = av.data().data();
  const double* pb = bv.data().data();
  double* po = out.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    double* orow = po + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double x = pa[i * k + p];
      if (x == 0.0) continue;
      const double* brow = pb + p * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += x * brow[j];
    }
  }
  const std::size_t ia = a.id, ib = b.id;
  return finish("matmul", g, std::move(out), {ia, ib}, [ia, ib, m, k, n](Graph& gr, std::size_t self) {
    const double* up = gr.upstream(self).data().data();
    const double* pa = gr.value(ia).data().data();
    const double* pb = gr.value(ib).data().data();
    if (gr.requires_grad(ia)) {
      double* ga = gr.grad_buffer(ia).data().data();
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const double* brow = pb + p * n;
          const double* urow = up + i * n;
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += urow[j] * brow[j];
          ga[i * k + p] += acc;
        }
      }
    }
    if (gr.requires_grad(ib)) {
      double* gb = gr.grad_buffer(ib).data().data();
      for (std::size_t i = 0; i < m; ++i) {
        const double* urow = up + i * n;
        for (std::size_t p = 0; p < k; ++p) {
          const double x = pa[i * k + p];
          if (x == 0.0) continue;
          double* grow = gb + p * n;
          for (std::size_t j = 0; j < n; ++j) grow[j] += x * urow[j];
        }
      }
    }
  });
}

Var transpose(Var a) {
  Graph& g = *a.graph;
  const Tensor& av = a.value();
  require_matrix("transpose", av);
  const std::size_t r = av.rows(), c = av.cols();
  Tensor out = Tensor::matrix(c, r);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out(j, i) = av(i, j);
  const std::size_t ia = a.id;
  return finish("transpose", g, std::move(out), {ia}, [ia, r, c](Graph& gr, std::size_t self) {
    const Tensor& up = gr.upstream(self);
    Tensor& ga = gr.grad_buffer(ia);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) ga(i, j) += up(j, i);
  });
}

Var reshape(Var a, std::size_t rows, std::size_t cols) {
  Graph& g = *a.graph;
  const Tensor& av = a.value();
  if (rows * cols != av.size()) {
    throw ShapeError("reshape: " + to_string(av.shape()) + " to " + to_string({rows, cols}));
  }
  Tensor out({rows, cols}, av.values());
  const std::size_t ia = a.id;
  return finish("reshape", g, std::move(out), {ia}, [ia](Graph& gr, std::size_t self) {
    auto up = gr.upstream(self).data();
    auto ga = gr.grad_buffer(ia).data();
    for (std::size_t k = 0; k < up.size(); ++k) ga[k] += up[k];
  });
}

// ---- elementwise ------------------------------------------------------

Var add(Var a, Var b) {
  return binary(
      "add", a, b, [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

Var sub(Var a, Var b) {
  return binary(
      "sub", a, b, [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

Var mul(Var a, Var b) {
  return binary(
      "mul", a, b, [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

Var affine(Var a, double alpha, double beta) {
  return unary(
      "affine", a, [=](double x) { return alpha * x + beta; }, [=](double, double) { return alpha; });
}

Var sigmoid(Var a) {
  return unary(
      "sigmoid", a,
      [](double x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var a) {
  return unary(
      "tanh", a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var relu(Var a) {
  return unary(
      "relu", a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var log(Var a) {
  return unary(
      "log", a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

// ---- softmax ----------------------------------------------------------

Tensor softmax_rows(const Tensor& scores) {
  require_matrix("softmax", scores);
  const std::size_t r = scores.rows(), c = scores.cols();
  Tensor out = Tensor::matrix(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < c; ++j) mx = std::max(mx, scores(i, j));
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      out(i, j) = std::exp(scores(i, j) - mx);
      z += out(i, j);
    }
    for (std::size_t j = 0; j < c; ++j) out(i, j) /= z;
  }
  return out;
}

std::vector<double> softmax(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("softmax: empty input");
  Tensor t({1, scores.size()}, std::vector<double>(scores.begin(), scores.end()));
  return softmax_rows(t).values();
}

Var softmax(Var a) {
  Graph& g = *a.graph;
  Tensor out = softmax_rows(a.value());
  const std::size_t ia = a.id;
  return finish("softmax", g, std::move(out), {ia}, [ia](Graph& gr, std::size_t self) {
    const Tensor& up = gr.upstream(self);
    const Tensor& y = gr.value(self);
    Tensor& ga = gr.grad_buffer(ia);
    for (std::size_t i = 0; i < y.rows(); ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < y.cols(); ++j) dot += up(i, j) * y(i, j);
      for (std::size_t j = 0; j < y.cols(); ++j) ga(i, j) += y(i, j) * (up(i, j) - dot);
    }
  });
}

Var log_softmax(Var a) {
  Graph& g = *a.graph;
  const Tensor& av = a.value();
  require_matrix("log_softmax", av);
  const std::size_t r = av.rows(), c = av.cols();
  Tensor out = Tensor::matrix(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < c; ++j) mx = std::max(mx, av(i, j));
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) z += std::exp(av(i, j) - mx);
    const double lz = mx + std::log(z);
    for (std::size_t j = 0; j < c; ++j) out(i, j) = av(i, j) - lz;
  }
  const std::size_t ia = a.id;
  return finish("log_softmax", g, std::move(out), {ia}, [ia](Graph& gr, std::size_t self) {
    const Tensor& up = gr.upstream(self);
    const Tensor& y = gr.value(self);
    Tensor& ga = gr.grad_buffer(ia);
    for (std::size_t i = 0; i < y.rows(); ++i) {
      double total = 0.0;
      for (std::size_t j = 0; j < y.cols(); ++j) total += up(i, j);
      for (std::size_t j = 0; j < y.cols(); ++j) ga(i, j) += up(i, j) - std::exp(y(i, j)) * total;
    }
  });
}

// ---- structural -------------------------------------------------------

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  Graph& g = *parts[0].graph;
  const std::size_t r = parts[0].rows();
  std::size_t c = 0;
  std::vector<std::size_t> ids, widths;
  for (const Var& p : parts) {
    require_matrix("concat_cols", p.value());
    if (p.rows() != r) {
      throw ShapeError("concat_cols: row mismatch " + to_string(parts[0].shape()) + " vs " + to_string(p.shape()));
    }
    ids.push_back(p.id);
    widths.push_back(p.cols());
    c += p.cols();
  }
  Tensor out = Tensor::matrix(r, c);
  std::size_t off = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    for (std::size_t i = 0; i < r; ++i)
      std::copy_n(v.data().data() + i * v.cols(), v.cols(), out.data().data() + i * c + off);
    off += v.cols();
  }
  return finish("concat_cols", g, std::move(out), ids, [ids, widths, r, c](Graph& gr, std::size_t self) {
    const double* up = gr.upstream(self).data().data();
    std::size_t off = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (gr.requires_grad(ids[k])) {
        double* ga = gr.grad_buffer(ids[k]).data().data();
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < widths[k]; ++j) ga[i * widths[k] + j] += up[i * c + off + j];
      }
      off += widths[k];
    }
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  Graph& g = *parts[0].graph;
  const std::size_t c = parts[0].cols();
  std::size_t r = 0;
  std::vector<std::size_t> ids, sizes;
  for (const Var& p : parts) {
    require_matrix("concat_rows", p.value());
    if (p.cols() != c) {
      throw ShapeError("concat_rows: column mismatch " + to_string(parts[0].shape()) + " vs " +
                       to_string(p.shape()));
    }
    ids.push_back(p.id);
    sizes.push_back(p.value().size());
    r += p.rows();
  }
  std::vector<double> data;
  data.reserve(r * c);
  for (const Var& p : parts) data.insert(data.end(), p.value().values().begin(), p.value().values().end());
  Tensor out({r, c}, std::move(data));
  return finish("concat_rows", g, std::move(out), ids, [ids, sizes](Graph& gr, std::size_t self) {
    const double* up = gr.upstream(self).data().data();
    std::size_t off = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (gr.requires_grad(ids[k])) {
        double* ga = gr.grad_buffer(ids[k]).data().data();
        for (std::size_t j = 0; j < sizes[k]; ++j) ga[j] += up[off + j];
      }
      off += sizes[k];
    }
  });
}

Var slice_rows(Var a, std::size_t begin, std::size_t end) {
  Graph& g = *a.graph;
  const Tensor& av = a.value();
  require_matrix("slice_rows", av);
  if (begin >= end || end > av.rows()) {
    throw ShapeError("slice_rows: [" + std::to_string(begin) + "," + std::to_string(end) + ") of " +
                     to_string(av.shape()));
  }
  const std::size_t c = av.cols();
  std::vector<double> data(av.values().begin() + begin * c, av.values().begin() + end * c);
  Tensor out({end - begin, c}, std::move(data));
  const std::size_t ia = a.id;
  return finish("slice_rows", g, std::move(out), {ia}, [ia, begin, c](Graph& gr, std::size_t self) {
    auto up = gr.upstream(self).data();
    double* ga = gr.grad_buffer(ia).data().data() + begin * c;
    for (std::size_t k = 0; k < up.size(); ++k) ga[k] += up[k];
  });
}

Var slice_cols(Var a, std::size_t begin, std::size_t end) {
  Graph& g = *a.graph;
  const Tensor& av = a.value();
  require_matrix("slice_cols", av);
  if (begin >= end || end > av.cols()) {
    throw ShapeError("slice_cols: [" + std::to_string(begin) + "," + std::to_string(end) + ") of " +
                     to_string(av.shape()));
  }
  const std::size_t r = av.rows(), c = av.cols(), w = end - begin;
  Tensor out = Tensor::matrix(r, w);
  for (std::size_t i = 0; i < r; ++i)
    std::copy_n(av.data().data() + i * c + begin, w, out.data().data() + i * w);
  const std::size_t ia = a.id;
  return finish("slice_cols", g, std::move(out), {ia}, [ia, begin, r, c, w](Graph& gr, std::size_t self) {
    const double* up = gr.upstream(self).data().data();
    double* ga = gr.grad_buffer(ia).data().data();
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < w; ++j) ga[i * c + begin + j] += up[i * w + j];
  });
}

// ---- reductions -------------------------------------------------------

Var max_pool_rows(Var a, std::size_t group) {
  Graph& g = *a.graph;
  const Tensor& av = a.value();
  require_matrix("max_pool_rows", av);
  const std::size_t r = av.rows(), c = av.cols();
  if (group == 0 || r % group != 0) {
    throw ShapeError("max_pool_rows: group " + std::to_string(group) + " does not divide " + to_string(av.shape()));
  }
  const std::size_t blocks = r / group;
  Tensor out = Tensor::matrix(blocks, c);
  std::vector<std::size_t> winner(blocks * c);
  for (std::size_t b = 0; b < blocks; ++b) {
    for (std::size_t j = 0; j < c; ++j) {
      std::size_t best = b * group;
      for (std::size_t i = b * group + 1; i < (b + 1) * group; ++i)
        if (av(i, j) > av(best, j)) best = i;
      winner[b * c + j] = best;
      out(b, j) = av(best, j);
    }
  }
  const std::size_t ia = a.id;
  return finish("max_pool_rows", g, std::move(out), {ia}, [ia, winner, c](Graph& gr, std::size_t self) {
    auto up = gr.upstream(self).data();
    Tensor& ga = gr.grad_buffer(ia);
    for (std::size_t k = 0; k < up.size(); ++k) ga(winner[k], k % c) += up[k];
  });
}

Var max_cols(Var a) {
  Graph& g = *a.graph;
  const Tensor& av = a.value();
  require_matrix("max_cols", av);
  const std::size_t r = av.rows(), c = av.cols();
  Tensor out = Tensor::matrix(r, 1);
  std::vector<std::size_t> winner(r);
  for (std::size_t i = 0; i < r; ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < c; ++j)
      if (av(i, j) > av(i, best)) best = j;
    winner[i] = best;
    out(i, 0) = av(i, best);
  }
  const std::size_t ia = a.id;
  return finish("max_cols", g, std::move(out), {ia}, [ia, winner](Graph& gr, std::size_t self) {
    auto up = gr.upstream(self).data();
    Tensor& ga = gr.grad_buffer(ia);
    for (std::size_t i = 0; i < up.size(); ++i) ga(i, winner[i]) += up[i];
  });
}

Var sum(Var a) {
  Graph& g = *a.graph;
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  const std::size_t ia = a.id;
  return finish("sum", g, Tensor::scalar(s), {ia}, [ia](Graph& gr, std::size_t self) {
    const double u = gr.upstream(self)[0];
    for (double& v : gr.grad_buffer(ia).data()) v += u;
  });
}

Var pick(Var a, std::size_t row, std::size_t col) {
  Graph& g = *a.graph;
  const Tensor& av = a.value();
  require_matrix("pick", av);
  if (row >= av.rows() || col >= av.cols()) {
    throw ShapeError("pick: (" + std::to_string(row) + "," + std::to_string(col) + ") outside " +
                     to_string(av.shape()));
  }
  const std::size_t ia = a.id;
  return finish("pick", g, Tensor::scalar(av(row, col)), {ia}, [ia, row, col](Graph& gr, std::size_t self) {
    gr.grad_buffer(ia)(row, col) += gr.upstream(self)[0];
  });
}

Var gather_rows(Var table, std::span<const std::size_t> ids) {
  Graph& g = *table.graph;
  const Tensor& tv = table.value();
  require_matrix("gather_rows", tv);
  if (ids.empty()) throw ShapeError("gather_rows: empty index list");
  const std::size_t c = tv.cols();
  Tensor out = Tensor::matrix(ids.size(), c);
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (ids[k] >= tv.rows()) {
      throw ShapeError("gather_rows: index " + std::to_string(ids[k]) + " outside " + to_string(tv.shape()));
    }
    std::copy_n(tv.data().data() + ids[k] * c, c, out.data().data() + k * c);
  }
  std::vector<std::size_t> rows(ids.begin(), ids.end());
  const std::size_t it = table.id;
  return finish("gather_rows", g, std::move(out), {it}, [it, rows, c](Graph& gr, std::size_t self) {
    const double* up = gr.upstream(self).data().data();
    double* gt = gr.grad_buffer(it).data().data();
    for (std::size_t k = 0; k < rows.size(); ++k)
      for (std::size_t j = 0; j < c; ++j) gt[rows[k] * c + j] += up[k * c + j];
  });
}

Var additive_attention(Var keys, Var queries, Var w) {
  Graph& g = graph_of("additive_attention", keys, queries);
  const Tensor& kv = keys.value();
  const Tensor& qv = queries.value();
  const Tensor& wv = w.value();
  require_matrix("additive_attention", kv);
  require_matrix("additive_attention", qv);
  const std::size_t nk = kv.rows(), nq = qv.rows(), e = kv.cols();
  if (qv.cols() != e || wv.size() != e) {
    throw ShapeError("additive_attention: keys " + to_string(kv.shape()) + ", queries " + to_string(qv.shape()) +
                     ", w " + to_string(wv.shape()));
  }
  // Activations cached for the backward pass: [t][j][e].
  auto act = std::make_shared<std::vector<double>>(nq * nk * e);
  Tensor out = Tensor::matrix(nq, nk);
  const double* pk = kv.data().data();
  const double* pq = qv.data().data();
  const double* pw = wv.data().data();
  for (std::size_t t = 0; t < nq; ++t) {
    for (std::size_t j = 0; j < nk; ++j) {
      double* a = act->data() + (t * nk + j) * e;
      double s = 0.0;
      for (std::size_t x = 0; x < e; ++x) {
        a[x] = std::tanh(pk[j * e + x] + pq[t * e + x]);
        s += pw[x] * a[x];
      }
      out(t, j) = s;
    }
  }
  const std::size_t ik = keys.id, iq = queries.id, iw = w.id;
  return finish("additive_attention", g, std::move(out), {ik, iq, iw},
                [ik, iq, iw, act, nk, nq, e](Graph& gr, std::size_t self) {
                  const double* up = gr.upstream(self).data().data();
                  const double* pw = gr.value(iw).data().data();
                  double* gk = gr.requires_grad(ik) ? gr.grad_buffer(ik).data().data() : nullptr;
                  double* gq = gr.requires_grad(iq) ? gr.grad_buffer(iq).data().data() : nullptr;
                  double* gw = gr.requires_grad(iw) ? gr.grad_buffer(iw).data().data() : nullptr;
                  for (std::size_t t = 0; t < nq; ++t) {
                    for (std::size_t j = 0; j < nk; ++j) {
                      const double u = up[t * nk + j];
                      if (u == 0.0) continue;
                      const double* a = act->data() + (t * nk + j) * e;
                      for (std::size_t x = 0; x < e; ++x) {
                        const double d = u * pw[x] * (1.0 - a[x] * a[x]);
                        if (gk) gk[j * e + x] += d;
                        if (gq) gq[t * e + x] += d;
                        if (gw) gw[x] += u * a[x];
                      }
                    }
                  }
                });
}

Var dropout(Var a, double rate, bool training, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("dropout: rate must lie in [0, 1)");
  if (!training || rate == 0.0) return a;
  Graph& g = *a.graph;
  const Tensor& av = a.value();
  const double keep = 1.0 / (1.0 - rate);
  Tensor mask(av.shape());
  for (double& m : mask.data()) m = rng.uniform() < rate ? 0.0 : keep;
  Tensor out(av.shape());
  for (std::size_t k = 0; k < av.size(); ++k) out[k] = av[k] * mask[k];
  const std::size_t ia = a.id;
  return finish("dropout", g, std::move(out), {ia}, [ia, mask = std::move(mask)](Graph& gr, std::size_t self) {
    auto up = gr.upstream(self).data();
    auto ga = gr.grad_buffer(ia).data();
    for (std::size_t k = 0; k < up.size(); ++k) ga[k] += up[k] * mask[k];
  });
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmax: empty input");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

}  // namespace qa4ie::ad
