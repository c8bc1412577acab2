#include "mcdrop/graph.hpp"

#include <cmath>

#include "mcdrop/error.hpp"

namespace mcdrop {

namespace {

enum BinaryKind { kAdd, kSub, kMul };

double sigmoid_fn(double x)
{
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Var Graph::push(Node node)
{
  if (!node.value().all_finite())
    throw NumericError("non-finite value produced by op '" + node.op + "' (node " +
                       std::to_string(nodes_.size()) + ")");
  nodes_.push_back(std::move(node));
  return Var{nodes_.size() - 1};
}

Var Graph::constant(Tensor value)
{
  Node n;
  n.op = "constant";
  n.owned = std::move(value);
  n.is_leaf = true;
  return push(std::move(n));
}

Var Graph::variable(Tensor value)
{
  Node n;
  n.op = "variable";
  n.owned = std::move(value);
  n.is_leaf = true;
  n.tracks_grad = true;
  return push(std::move(n));
}

Var Graph::parameter(const Tensor& value, Tensor* grad_sink)
{
  Node n;
  n.op = "parameter";
  n.borrowed = &value;
  n.sink = grad_sink;
  n.is_leaf = true;
  n.tracks_grad = grad_sink != nullptr;
  return push(std::move(n));
}

Var Graph::apply(std::string op, std::vector<Var> inputs, Tensor value, BackwardFn backward)
{
  Node n;
  n.op = std::move(op);
  n.owned = std::move(value);
  for (Var in : inputs) {
    if (in.id >= nodes_.size()) throw std::out_of_range("apply: input refers to a future node");
    n.tracks_grad = n.tracks_grad || nodes_[in.id].tracks_grad;
  }
  n.inputs = std::move(inputs);
  if (n.tracks_grad) n.backward = std::move(backward);
  return push(std::move(n));
}

const Tensor& Graph::value(Var v) const { return nodes_.at(v.id).value(); }

Tensor* Graph::grad_slot(Var input)
{
  Node& n = nodes_.at(input.id);
  if (!n.tracks_grad) return nullptr;
  if (n.sink) {
    if (!n.sink->same_shape(n.value())) *n.sink = Tensor::zeros_like(n.value());
    return n.sink;
  }
  if (n.grad.empty()) n.grad = Tensor::zeros_like(n.value());
  return &n.grad;
}

void Graph::backward(Var loss)
{
  Node& root = nodes_.at(loss.id);
  if (root.value().size() != 1)
    throw DimensionError("backward: loss must be scalar, got " + root.value().shape_str());
  for (Node& n : nodes_) n.grad = Tensor();
  visits_ = 0;
  if (!root.tracks_grad) return;

  if (Tensor* slot = grad_slot(loss)) (*slot)[0] += 1.0;
  for (std::size_t id = loss.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (n.is_leaf || n.grad.empty() || !n.backward) continue;
    ++visits_;
    n.backward(*this, id);
  }
}

Tensor Graph::grad(Var v) const
{
  const Node& n = nodes_.at(v.id);
  if (n.sink && n.sink->same_shape(n.value())) return *n.sink;
  if (!n.grad.empty()) return n.grad;
  return Tensor::zeros_like(n.value());
}

Var Graph::matmul(Var a, Var b)
{
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (A.rank() != 2 || B.rank() != 2 || A.cols() != B.rows())
    throw DimensionError("matmul: cannot multiply " + A.shape_str() + " by " + B.shape_str());
  const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
  Tensor C({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = &C[i * n];
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A[i * k + p];
      if (aip == 0.0) continue;
      const double* brow = &B[p * n];
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
  return apply("matmul", {a, b}, std::move(C), [a, b, m, k, n](Graph& g, std::size_t self) {
    const Tensor& G = g.output_grad(self);
    const Tensor& A = g.value(a);
    const Tensor& B = g.value(b);
    if (Tensor* dA = g.grad_slot(a)) {
      // dA = G * B^T
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double* brow = &B[p * n];
          const double* grow = &G[i * n];
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
          (*dA)[i * k + p] += acc;
        }
    }
    if (Tensor* dB = g.grad_slot(b)) {
      // dB = A^T * G
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = A[i * k + p];
          if (aip == 0.0) continue;
          double* drow = &(*dB)[p * n];
          const double* grow = &G[i * n];
          for (std::size_t j = 0; j < n; ++j) drow[j] += aip * grow[j];
        }
    }
  });
}

Var Graph::binary(std::string op, Var a, Var b, int kind)
{
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  const bool a_scalar = A.size() == 1 && !A.same_shape(B);
  const bool b_scalar = B.size() == 1 && !A.same_shape(B);
  if (!A.same_shape(B) && !a_scalar && !b_scalar)
    throw DimensionError(op + ": incompatible shapes " + A.shape_str() + " and " + B.shape_str());

  Tensor out = a_scalar ? Tensor::zeros_like(B) : Tensor::zeros_like(A);
  for (std::size_t i = 0; i < out.size(); ++i) {
    double x = A[a_scalar ? 0 : i];
    double y = B[b_scalar ? 0 : i];
    out[i] = kind == kAdd ? x + y : kind == kSub ? x - y : x * y;
  }
  return apply(std::move(op), {a, b}, std::move(out),
               [a, b, a_scalar, b_scalar, kind](Graph& g, std::size_t self) {
                 const Tensor& G = g.output_grad(self);
                 if (Tensor* dA = g.grad_slot(a)) {
                   const Tensor& B = g.value(b);
                   for (std::size_t i = 0; i < G.size(); ++i) {
                     double d = kind == kMul ? G[i] * B[b_scalar ? 0 : i] : G[i];
                     (*dA)[a_scalar ? 0 : i] += d;
                   }
                 }
                 if (Tensor* dB = g.grad_slot(b)) {
                   const Tensor& A = g.value(a);
                   for (std::size_t i = 0; i < G.size(); ++i) {
                     double d = kind == kMul ? G[i] * A[a_scalar ? 0 : i]
                                : kind == kSub ? -G[i]
                                               : G[i];
                     (*dB)[b_scalar ? 0 : i] += d;
                   }
                 }
               });
}

Var Graph::add(Var a, Var b) { return binary("add", a, b, kAdd); }
Var Graph::sub(Var a, Var b) { return binary("sub", a, b, kSub); }
Var Graph::mul(Var a, Var b) { return binary("mul", a, b, kMul); }

Var Graph::scale(Var a, double factor)
{
  Tensor out = value(a);
  for (double& v : out.data()) v *= factor;
  return apply("scale", {a}, std::move(out), [a, factor](Graph& g, std::size_t self) {
    if (Tensor* dA = g.grad_slot(a)) dA->add_scaled(g.output_grad(self), factor);
  });
}

Var Graph::unary(std::string op, Var a, double (*f)(double), double (*df)(double, double))
{
  Tensor out = value(a);
  for (double& v : out.data()) v = f(v);
  return apply(std::move(op), {a}, std::move(out), [a, df](Graph& g, std::size_t self) {
    Tensor* dA = g.grad_slot(a);
    if (!dA) return;
    const Tensor& G = g.output_grad(self);
    const Tensor& in = g.value(a);
    const Tensor& out = g.value(Var{self});
    for (std::size_t i = 0; i < G.size(); ++i) (*dA)[i] += G[i] * df(out[i], in[i]);
  });
}

Var Graph::sigmoid(Var a)
{
  return unary("sigmoid", a, sigmoid_fn, [](double y, double) { return y * (1.0 - y); });
}

Var Graph::tanh(Var a)
{
  return unary(
      "tanh", a, [](double x) { return std::tanh(x); }, [](double y, double) { return 1.0 - y * y; });
}

Var Graph::relu(Var a)
{
  return unary(
      "relu", a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double, double x) { return x > 0.0 ? 1.0 : 0.0; });
}

Var Graph::sum(Var a)
{
  double total = 0.0;
  for (double v : value(a).data()) total += v;
  return apply("sum", {a}, Tensor::scalar(total), [a](Graph& g, std::size_t self) {
    Tensor* dA = g.grad_slot(a);
    if (!dA) return;
    const double G = g.output_grad(self)[0];
    for (double& v : dA->data()) v += G;
  });
}

Var Graph::slice_cols(Var a, std::size_t begin, std::size_t count)
{
  const Tensor& A = value(a);
  if (A.rank() != 2 || count == 0 || begin + count > A.cols())
    throw DimensionError("slice_cols: columns [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") out of range for " + A.shape_str());
  const std::size_t rows = A.rows(), cols = A.cols();
  Tensor out({rows, count});
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < count; ++c) out[r * count + c] = A[r * cols + begin + c];
  return apply("slice_cols", {a}, std::move(out),
               [a, begin, count, rows, cols](Graph& g, std::size_t self) {
                 Tensor* dA = g.grad_slot(a);
                 if (!dA) return;
                 const Tensor& G = g.output_grad(self);
                 for (std::size_t r = 0; r < rows; ++r)
                   for (std::size_t c = 0; c < count; ++c)
                     (*dA)[r * cols + begin + c] += G[r * count + c];
               });
}

Var Graph::gather_row(Var table, std::size_t index)
{
  const Tensor& T = value(table);
  if (T.rank() != 2 || index >= T.rows())
    throw DimensionError("gather_row: row " + std::to_string(index) + " out of range for " +
                         T.shape_str());
  const std::size_t cols = T.cols();
  std::vector<double> row(T.data().begin() + index * cols, T.data().begin() + (index + 1) * cols);
  return apply("gather_row", {table}, Tensor::row(std::move(row)),
               [table, index, cols](Graph& g, std::size_t self) {
                 Tensor* dT = g.grad_slot(table);
                 if (!dT) return;
                 const Tensor& G = g.output_grad(self);
                 for (std::size_t c = 0; c < cols; ++c) (*dT)[index * cols + c] += G[c];
               });
}

}  // namespace mcdrop
