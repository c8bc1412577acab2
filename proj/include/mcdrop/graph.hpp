#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "mcdrop/tensor.hpp"

namespace mcdrop {

// Handle to a node of a Graph. Only meaningful together with its graph.
struct Var
{
  std::size_t id = 0;
  friend bool operator==(Var, Var) = default;
};

// Define-by-run computation graph with reverse-mode differentiation.
//
// Nodes are appended in evaluation order, so node ids are a topological
// order and backward() is a single reverse sweep. Every op checks that its
// output is finite and throws NumericError otherwise.
//
// A graph is single-threaded. Parameters are referenced, not copied, so a
// graph must not outlive the tensors passed to parameter().
class Graph
{
public:
  // Backward rule: reads the node's output gradient and accumulates into its
  // inputs' gradient slots.
  using BackwardFn = std::function<void(Graph&, std::size_t self)>;

  Var constant(Tensor value);
  // Owned leaf whose gradient is kept in the graph.
  Var variable(Tensor value);
  // Borrowed leaf. When grad_sink is non-null, gradients accumulate into it
  // (it is resized to zeros if its shape differs); otherwise it is a constant.
  Var parameter(const Tensor& value, Tensor* grad_sink = nullptr);

  // Generic node; used by the built-in ops and by layers for fused rules.
  Var apply(std::string op, std::vector<Var> inputs, Tensor value, BackwardFn backward);

  // Built-in ops.
  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double factor);
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var relu(Var a);
  Var sum(Var a);
  // Columns [begin, begin+count) of a rank-2 tensor.
  Var slice_cols(Var a, std::size_t begin, std::size_t count);
  // Row `index` of a matrix as a 1×cols tensor.
  Var gather_row(Var table, std::size_t index);

  const Tensor& value(Var v) const;
  const std::string& op(Var v) const { return nodes_.at(v.id).op; }
  const std::vector<Var>& inputs(Var v) const { return nodes_.at(v.id).inputs; }
  bool tracks_grad(Var v) const { return nodes_.at(v.id).tracks_grad; }
  std::size_t size() const { return nodes_.size(); }

  // Seeds d(loss)/d(loss) = 1 and propagates to every reachable node.
  void backward(Var loss);
  // Gradient of the last backward() loss w.r.t. v; zeros when v was unreached.
  Tensor grad(Var v) const;
  // Number of nodes whose backward rule ran in the last backward().
  std::size_t last_backward_visits() const { return visits_; }

  // For backward rules: gradient flowing into the node, and the slot to
  // accumulate into for an input (nullptr if that input needs no gradient).
  const Tensor& output_grad(std::size_t node) const { return nodes_[node].grad; }
  Tensor* grad_slot(Var input);

private:
  struct Node
  {
    std::string op;
    std::vector<Var> inputs;
    Tensor owned;
    const Tensor* borrowed = nullptr;
    Tensor grad;
    Tensor* sink = nullptr;
    BackwardFn backward;
    bool tracks_grad = false;
    bool is_leaf = false;

    const Tensor& value() const { return borrowed ? *borrowed : owned; }
  };

  Var push(Node node);
  Var unary(std::string op, Var a, double (*f)(double), double (*df)(double out, double in));
  Var binary(std::string op, Var a, Var b, int kind);

  std::vector<Node> nodes_;
  std::size_t visits_ = 0;
};

}  // namespace mcdrop
