#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qa4ie/ad/tensor.hpp"
#include "qa4ie/util/rng.hpp"

namespace qa4ie::ad {

// A trainable tensor living outside any graph. Gradients accumulate into
// `grad` across backward passes until zero_grad().
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
};

// Named parameters in insertion order with stable addresses.
class ParameterSet {
 public:
  Parameter& add(std::string name, Tensor value);
  Parameter& get(std::string_view name);
  const Parameter& get(std::string_view name) const;
  bool contains(std::string_view name) const;

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;
  void zero_grad();

  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;

  Parameter& operator[](std::size_t i) { return *params_[i]; }
  const Parameter& operator[](std::size_t i) const { return *params_[i]; }

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

class Graph;

// Handle to a node of a Graph.
struct Var {
  Graph* graph = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
};

// Define-by-run tape. Nodes are appended in evaluation order, so insertion
// order is a topological order and backward() is a single reverse sweep.
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, std::size_t self)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  // One leaf per parameter per graph; repeated calls return the same node.
  Var parameter(Parameter& param);

  const Tensor& value(Var v) const { return nodes_[v.id].value; }
  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

  // Gradient of the last backward seed with respect to a node. Nodes the
  // seed does not depend on report zeros.
  Tensor grad(Var v) const;

  // Reverse sweep from a 1x1 node. Parameter leaves accumulate into
  // Parameter::grad; calling again accumulates again.
  void backward(Var seed);

  std::size_t size() const { return nodes_.size(); }

  // Used by primitive implementations.
  Var push(Tensor value, std::vector<std::size_t> inputs, BackwardFn backward);
  Tensor& grad_buffer(std::size_t id);
  const Tensor& upstream(std::size_t id) const { return nodes_[id].grad; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    Parameter* param = nullptr;
    bool requires_grad = false;
  };
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_nodes_;
};

// ---- primitives -------------------------------------------------------
// All operate on rank-2 tensors; row vectors are 1xN and scalars 1x1.

Var matmul(Var a, Var b);
Var transpose(Var a);
Var reshape(Var a, std::size_t rows, std::size_t cols);

// Elementwise with 2-D broadcasting: each dimension equal or 1.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
// alpha * a + beta
Var affine(Var a, double alpha, double beta);

Var sigmoid(Var a);
Var tanh(Var a);
Var relu(Var a);
Var log(Var a);

// Row-wise, with max subtraction.
Var softmax(Var a);
Var log_softmax(Var a);

Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var slice_rows(Var a, std::size_t begin, std::size_t end);
Var slice_cols(Var a, std::size_t begin, std::size_t end);

// Max over consecutive blocks of `group` rows; group == rows is max-over-time.
Var max_pool_rows(Var a, std::size_t group);
// Max across each row, giving a column.
Var max_cols(Var a);

Var sum(Var a);
Var pick(Var a, std::size_t row, std::size_t col);
Var gather_rows(Var table, std::span<const std::size_t> ids);

// out(t, j) = sum_e w(e) * tanh(keys(j, e) + queries(t, e)); shape queries.rows x keys.rows.
Var additive_attention(Var keys, Var queries, Var w);

// Inverted dropout. Identity when !training or rate == 0.
Var dropout(Var a, double rate, bool training, Rng& rng);

// Row softmax on a plain tensor, same numerics as the graph op.
Tensor softmax_rows(const Tensor& scores);
std::vector<double> softmax(std::span<const double> scores);

// Lowest index among maximal entries.
std::size_t argmax(std::span<const double> values);

}  // namespace qa4ie::ad
