#ifndef SMOOTH_TENSOR_GRAPH_H_
#define SMOOTH_TENSOR_GRAPH_H_

#include <array>
#include <cstddef>
#include <vector>

#include "smooth/tensor/tensor.h"

namespace smooth {

class Graph;

// Handle to a node of a Graph. Cheap to copy, only valid while the graph
// lives.
class Var {
 public:
  Var() = default;

  Graph* graph() const { return graph_; }
  std::size_t id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }
  const Tensor& value() const;

 private:
  friend class Graph;
  Var(Graph* graph, std::size_t id) : graph_(graph), id_(id) {}

  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

enum class OpKind {
  kLeaf,
  kConstant,
  kMatMul,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kScale,
  kAddScalar,
  kTanh,
  kRelu,
  kSquare,
  kExp,
  kSum,
  kMean,
  kRowSum,
  kConcat,
  kSlice,
  kMinimum,
  kClamp,
  kStopGradient,
  kFloorMagnitude,
};

const char* op_name(OpKind op);

#ifdef NDEBUG
inline constexpr bool kCheckFiniteDefault = false;
#else
inline constexpr bool kCheckFiniteDefault = true;
#endif

// Define-by-run computation graph with reverse-mode differentiation.
//
// Every op evaluates its forward value immediately and appends a node, so
// creation order is a topological order. backward() walks that order in
// reverse exactly once. Elementwise binary ops accept a right operand that is
// either the same shape, a row vector matching the left operand's columns, or
// a single element. stop_gradient() forwards its input and never passes a
// gradient back.
class Graph {
 public:
  explicit Graph(bool check_finite = kCheckFiniteDefault)
      : check_finite_(check_finite) {}

  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var leaf(Tensor value);
  Var constant(Tensor value);

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var div(Var a, Var b);
  Var scale(Var a, double factor);
  Var add_scalar(Var a, double offset);
  Var tanh(Var a);
  Var relu(Var a);
  Var square(Var a);
  Var exp(Var a);
  Var sum(Var a);
  Var mean(Var a);
  // [rows, cols] -> [rows, 1].
  Var row_sum(Var a);
  // Column-wise concatenation of two matrices with equal row counts.
  Var concat(Var a, Var b);
  // Columns [begin, end) of a matrix.
  Var slice(Var a, std::size_t begin, std::size_t end);
  Var minimum(Var a, Var b);
  Var clamp(Var a, double low, double high);
  Var stop_gradient(Var a);
  // Replaces x with sign(x) * floor wherever |x| < floor (x == 0 maps to
  // +floor). Gradient is 1 where the input passes through, 0 where floored.
  Var floor_magnitude(Var a, double floor);

  // Accumulates d(root)/d(node) into every node that depends on a leaf.
  // The root must hold exactly one element. May be called once per graph.
  void backward(Var root);

  const Tensor& value(Var v) const;
  // Gradient of the last backward() root; zeros for nodes it never reached.
  Tensor grad(Var v) const;
  bool requires_grad(Var v) const;
  OpKind op(Var v) const;

  std::size_t size() const { return nodes_.size(); }
  bool check_finite() const { return check_finite_; }

 private:
  struct Node {
    OpKind op;
    std::array<std::size_t, 2> parents{};
    int parent_count = 0;
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool has_grad = false;
    double alpha = 0.0;
    double beta = 0.0;
    std::size_t begin = 0;
    std::size_t end = 0;
  };

  enum class Broadcast { kSame, kRow, kScalar };

  Var push(Node node);
  Node& node(Var v);
  const Node& node(Var v) const;
  Broadcast broadcast_kind(const Tensor& a, const Tensor& b,
                           const char* what) const;
  Var binary(OpKind op, Var a, Var b);
  Var unary(OpKind op, Var a);
  Tensor& grad_buffer(std::size_t id);
  void propagate(std::size_t id);

  std::vector<Node> nodes_;
  bool check_finite_;
  bool backward_done_ = false;
};

Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator/(Var a, Var b);
Var operator-(Var a);
Var operator*(Var a, double c);
Var operator*(double c, Var a);
Var operator+(Var a, double c);

}  // namespace smooth

#endif  // SMOOTH_TENSOR_GRAPH_H_
