#include "smooth/tensor/graph.h"

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "smooth/core/errors.h"

namespace smooth {
namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

ConstMatrixMap as_matrix(const Tensor& t) {
  return ConstMatrixMap(t.data().data(), t.rows(), t.cols());
}

MatrixMap as_matrix(Tensor& t) {
  return MatrixMap(t.data().data(), t.rows(), t.cols());
}

}  // namespace

const char* op_name(OpKind op) {
  switch (op) {
    case OpKind::kLeaf: return "leaf";
    case OpKind::kConstant: return "constant";
    case OpKind::kMatMul: return "matmul";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kMul: return "mul";
    case OpKind::kDiv: return "div";
    case OpKind::kScale: return "scale";
    case OpKind::kAddScalar: return "add_scalar";
    case OpKind::kTanh: return "tanh";
    case OpKind::kRelu: return "relu";
    case OpKind::kSquare: return "square";
    case OpKind::kExp: return "exp";
    case OpKind::kSum: return "sum";
    case OpKind::kMean: return "mean";
    case OpKind::kRowSum: return "row_sum";
    case OpKind::kConcat: return "concat";
    case OpKind::kSlice: return "slice";
    case OpKind::kMinimum: return "minimum";
    case OpKind::kClamp: return "clamp";
    case OpKind::kStopGradient: return "stop_gradient";
    case OpKind::kFloorMagnitude: return "floor_magnitude";
  }
  return "unknown";
}

const Tensor& Var::value() const {
  if (!graph_) throw ContractError("value() on an unbound Var");
  return graph_->value(*this);
}

Graph::Node& Graph::node(Var v) {
  if (v.graph_ != this || v.id_ >= nodes_.size()) {
    throw ContractError("Var does not belong to this graph");
  }
  return nodes_[v.id_];
}

const Graph::Node& Graph::node(Var v) const {
  if (v.graph_ != this || v.id_ >= nodes_.size()) {
    throw ContractError("Var does not belong to this graph");
  }
  return nodes_[v.id_];
}

Var Graph::push(Node n) {
  if (check_finite_ && !n.value.all_finite()) {
    throw NumericError(std::string("non-finite result from op '") +
                       op_name(n.op) + "' with shape " +
                       shape_string(n.value.shape()));
  }
  if (n.op != OpKind::kLeaf && n.op != OpKind::kConstant &&
      n.op != OpKind::kStopGradient) {
    for (int i = 0; i < n.parent_count; ++i) {
      if (nodes_[n.parents[i]].requires_grad) n.requires_grad = true;
    }
  }
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Graph::leaf(Tensor value) {
  Node n{.op = OpKind::kLeaf, .value = std::move(value)};
  n.requires_grad = true;
  return push(std::move(n));
}

Var Graph::constant(Tensor value) {
  return push(Node{.op = OpKind::kConstant, .value = std::move(value)});
}

Graph::Broadcast Graph::broadcast_kind(const Tensor& a, const Tensor& b,
                                       const char* what) const {
  if (a.shape() == b.shape()) return Broadcast::kSame;
  if (b.size() == 1) return Broadcast::kScalar;
  bool b_is_row = b.rank() == 1 || (b.rank() == 2 && b.rows() == 1);
  if (a.rank() == 2 && b_is_row && b.size() == a.cols()) {
    return Broadcast::kRow;
  }
  throw ShapeError(std::string(what) + ": cannot combine " +
                   shape_string(a.shape()) + " with " +
                   shape_string(b.shape()));
}

Var Graph::matmul(Var a, Var b) {
  const Tensor& x = node(a).value;
  const Tensor& y = node(b).value;
  if (x.rank() != 2 || y.rank() != 2 || x.cols() != y.rows()) {
    throw ShapeError("matmul: " + shape_string(x.shape()) + " x " +
                     shape_string(y.shape()));
  }
  Tensor out(Shape{x.rows(), y.cols()});
  as_matrix(out).noalias() = as_matrix(x) * as_matrix(y);
  Node n{.op = OpKind::kMatMul, .parents = {a.id_, b.id_}, .parent_count = 2,
         .value = std::move(out)};
  return push(std::move(n));
}

Var Graph::binary(OpKind op, Var a, Var b) {
  const Tensor& x = node(a).value;
  const Tensor& y = node(b).value;
  Broadcast kind = broadcast_kind(x, y, op_name(op));
  Tensor out(x.shape());
  const std::size_t cols = kind == Broadcast::kRow ? x.cols() : 1;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double rhs = kind == Broadcast::kSame     ? y[i]
                 : kind == Broadcast::kScalar ? y[0]
                                              : y[i % cols];
    switch (op) {
      case OpKind::kAdd: out[i] = x[i] + rhs; break;
      case OpKind::kSub: out[i] = x[i] - rhs; break;
      case OpKind::kMul: out[i] = x[i] * rhs; break;
      case OpKind::kDiv: out[i] = x[i] / rhs; break;
      case OpKind::kMinimum: out[i] = std::min(x[i], rhs); break;
      default: throw ContractError("binary: unsupported op");
    }
  }
  Node n{.op = op, .parents = {a.id_, b.id_}, .parent_count = 2,
         .value = std::move(out)};
  return push(std::move(n));
}

Var Graph::add(Var a, Var b) { return binary(OpKind::kAdd, a, b); }
Var Graph::sub(Var a, Var b) { return binary(OpKind::kSub, a, b); }
Var Graph::mul(Var a, Var b) { return binary(OpKind::kMul, a, b); }
Var Graph::div(Var a, Var b) { return binary(OpKind::kDiv, a, b); }

Var Graph::minimum(Var a, Var b) {
  if (node(a).value.shape() != node(b).value.shape()) {
    throw ShapeError("minimum: shapes " + shape_string(node(a).value.shape()) +
                     " and " + shape_string(node(b).value.shape()));
  }
  return binary(OpKind::kMinimum, a, b);
}

Var Graph::unary(OpKind op, Var a) {
  const Tensor& x = node(a).value;
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    switch (op) {
      case OpKind::kTanh: out[i] = std::tanh(x[i]); break;
      case OpKind::kRelu: out[i] = x[i] > 0.0 ? x[i] : 0.0; break;
      case OpKind::kSquare: out[i] = x[i] * x[i]; break;
      case OpKind::kExp: out[i] = std::exp(x[i]); break;
      case OpKind::kStopGradient: out[i] = x[i]; break;
      default: throw ContractError("unary: unsupported op");
    }
  }
  Node n{.op = op, .parents = {a.id_, 0}, .parent_count = 1,
         .value = std::move(out)};
  return push(std::move(n));
}

Var Graph::tanh(Var a) { return unary(OpKind::kTanh, a); }
Var Graph::relu(Var a) { return unary(OpKind::kRelu, a); }
Var Graph::square(Var a) { return unary(OpKind::kSquare, a); }
Var Graph::exp(Var a) { return unary(OpKind::kExp, a); }
Var Graph::stop_gradient(Var a) {
  return unary(OpKind::kStopGradient, a);
}

Var Graph::scale(Var a, double factor) {
  const Tensor& x = node(a).value;
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * factor;
  Node n{.op = OpKind::kScale, .parents = {a.id_, 0}, .parent_count = 1,
         .value = std::move(out), .alpha = factor};
  return push(std::move(n));
}

Var Graph::add_scalar(Var a, double offset) {
  const Tensor& x = node(a).value;
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + offset;
  Node n{.op = OpKind::kAddScalar, .parents = {a.id_, 0}, .parent_count = 1,
         .value = std::move(out), .alpha = offset};
  return push(std::move(n));
}

Var Graph::clamp(Var a, double low, double high) {
  if (!(low <= high)) throw ContractError("clamp: low must not exceed high");
  const Tensor& x = node(a).value;
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::clamp(x[i], low, high);
  }
  Node n{.op = OpKind::kClamp, .parents = {a.id_, 0}, .parent_count = 1,
         .value = std::move(out), .alpha = low, .beta = high};
  return push(std::move(n));
}

Var Graph::floor_magnitude(Var a, double floor) {
  if (!(floor > 0.0)) throw ContractError("floor_magnitude: floor must be > 0");
  const Tensor& x = node(a).value;
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::abs(x[i]) >= floor) {
      out[i] = x[i];
    } else {
      out[i] = x[i] < 0.0 ? -floor : floor;
    }
  }
  Node n{.op = OpKind::kFloorMagnitude, .parents = {a.id_, 0},
         .parent_count = 1, .value = std::move(out), .alpha = floor};
  return push(std::move(n));
}

Var Graph::sum(Var a) {
  const Tensor& x = node(a).value;
  double total = 0.0;
  for (double v : x.data()) total += v;
  Node n{.op = OpKind::kSum, .parents = {a.id_, 0}, .parent_count = 1,
         .value = Tensor::scalar(total)};
  return push(std::move(n));
}

Var Graph::mean(Var a) {
  const Tensor& x = node(a).value;
  if (x.size() == 0) throw ShapeError("mean of an empty tensor");
  double total = 0.0;
  for (double v : x.data()) total += v;
  Node n{.op = OpKind::kMean, .parents = {a.id_, 0}, .parent_count = 1,
         .value = Tensor::scalar(total / static_cast<double>(x.size()))};
  return push(std::move(n));
}

Var Graph::row_sum(Var a) {
  const Tensor& x = node(a).value;
  if (x.rank() != 2) {
    throw ShapeError("row_sum needs a matrix, got " + shape_string(x.shape()));
  }
  Tensor out(Shape{x.rows(), 1});
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double total = 0.0;
    for (std::size_t c = 0; c < x.cols(); ++c) total += x.at(r, c);
    out[r] = total;
  }
  Node n{.op = OpKind::kRowSum, .parents = {a.id_, 0}, .parent_count = 1,
         .value = std::move(out)};
  return push(std::move(n));
}

Var Graph::concat(Var a, Var b) {
  const Tensor& x = node(a).value;
  const Tensor& y = node(b).value;
  if (x.rank() != 2 || y.rank() != 2 || x.rows() != y.rows()) {
    throw ShapeError("concat: " + shape_string(x.shape()) + " and " +
                     shape_string(y.shape()));
  }
  std::size_t cols = x.cols() + y.cols();
  Tensor out(Shape{x.rows(), cols});
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) out.at(r, c) = x.at(r, c);
    for (std::size_t c = 0; c < y.cols(); ++c) {
      out.at(r, x.cols() + c) = y.at(r, c);
    }
  }
  Node n{.op = OpKind::kConcat, .parents = {a.id_, b.id_}, .parent_count = 2,
         .value = std::move(out)};
  return push(std::move(n));
}

Var Graph::slice(Var a, std::size_t begin, std::size_t end) {
  const Tensor& x = node(a).value;
  if (x.rank() != 2 || begin >= end || end > x.cols()) {
    throw ShapeError("slice [" + std::to_string(begin) + "," +
                     std::to_string(end) + ") of " + shape_string(x.shape()));
  }
  Tensor out(Shape{x.rows(), end - begin});
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = begin; c < end; ++c) {
      out.at(r, c - begin) = x.at(r, c);
    }
  }
  Node n{.op = OpKind::kSlice, .parents = {a.id_, 0}, .parent_count = 1,
         .value = std::move(out), .begin = begin, .end = end};
  return push(std::move(n));
}

const Tensor& Graph::value(Var v) const { return node(v).value; }

Tensor Graph::grad(Var v) const {
  const Node& n = node(v);
  if (!n.has_grad) return Tensor::zeros_like(n.value);
  return n.grad;
}

bool Graph::requires_grad(Var v) const { return node(v).requires_grad; }
OpKind Graph::op(Var v) const { return node(v).op; }

Tensor& Graph::grad_buffer(std::size_t id) {
  Node& n = nodes_[id];
  if (!n.has_grad) {
    n.grad = Tensor::zeros_like(n.value);
    n.has_grad = true;
  }
  return n.grad;
}

void Graph::backward(Var root) {
  const Node& r = node(root);
  if (r.value.size() != 1) {
    throw ContractError("backward needs a scalar root, got shape " +
                        shape_string(r.value.shape()));
  }
  if (backward_done_) throw ContractError("backward already ran on graph");
  backward_done_ = true;
  grad_buffer(root.id_)[0] = 1.0;
  for (std::size_t id = root.id_ + 1; id-- > 0;) {
    if (nodes_[id].has_grad && nodes_[id].requires_grad) propagate(id);
  }
}

void Graph::propagate(std::size_t id) {
  // Parents are accessed by index; grad_buffer never reallocates nodes_.
  const Node& n = nodes_[id];
  const Tensor& g = n.grad;
  auto wants = [&](int k) {
    return k < n.parent_count && nodes_[n.parents[k]].requires_grad;
  };

  switch (n.op) {
    case OpKind::kLeaf:
    case OpKind::kConstant:
    case OpKind::kStopGradient:
      return;

    case OpKind::kMatMul: {
      const Tensor& x = nodes_[n.parents[0]].value;
      const Tensor& y = nodes_[n.parents[1]].value;
      if (wants(0)) {
        as_matrix(grad_buffer(n.parents[0])).noalias() +=
            as_matrix(g) * as_matrix(y).transpose();
      }
      if (wants(1)) {
        as_matrix(grad_buffer(n.parents[1])).noalias() +=
            as_matrix(x).transpose() * as_matrix(g);
      }
      return;
    }

    case OpKind::kAdd:
    case OpKind::kSub:
    case OpKind::kMul:
    case OpKind::kDiv:
    case OpKind::kMinimum: {
      const Tensor& x = nodes_[n.parents[0]].value;
      const Tensor& y = nodes_[n.parents[1]].value;
      Broadcast kind = broadcast_kind(x, y, op_name(n.op));
      const std::size_t cols = kind == Broadcast::kRow ? x.cols() : 1;
      auto rhs_index = [&](std::size_t i) {
        return kind == Broadcast::kSame     ? i
               : kind == Broadcast::kScalar ? std::size_t{0}
                                            : i % cols;
      };
      if (wants(0)) {
        Tensor& gx = grad_buffer(n.parents[0]);
        for (std::size_t i = 0; i < x.size(); ++i) {
          double rhs = y[rhs_index(i)];
          switch (n.op) {
            case OpKind::kAdd:
            case OpKind::kSub: gx[i] += g[i]; break;
            case OpKind::kMul: gx[i] += g[i] * rhs; break;
            case OpKind::kDiv: gx[i] += g[i] / rhs; break;
            default: if (x[i] <= rhs) gx[i] += g[i]; break;
          }
        }
      }
      if (wants(1)) {
        Tensor& gy = grad_buffer(n.parents[1]);
        for (std::size_t i = 0; i < x.size(); ++i) {
          std::size_t j = rhs_index(i);
          double rhs = y[j];
          switch (n.op) {
            case OpKind::kAdd: gy[j] += g[i]; break;
            case OpKind::kSub: gy[j] -= g[i]; break;
            case OpKind::kMul: gy[j] += g[i] * x[i]; break;
            case OpKind::kDiv: gy[j] -= g[i] * x[i] / (rhs * rhs); break;
            default: if (!(x[i] <= rhs)) gy[j] += g[i]; break;
          }
        }
      }
      return;
    }

    case OpKind::kConcat: {
      const Tensor& x = nodes_[n.parents[0]].value;
      const Tensor& y = nodes_[n.parents[1]].value;
      if (wants(0)) {
        Tensor& gx = grad_buffer(n.parents[0]);
        for (std::size_t r = 0; r < x.rows(); ++r) {
          for (std::size_t c = 0; c < x.cols(); ++c) gx.at(r, c) += g.at(r, c);
        }
      }
      if (wants(1)) {
        Tensor& gy = grad_buffer(n.parents[1]);
        for (std::size_t r = 0; r < y.rows(); ++r) {
          for (std::size_t c = 0; c < y.cols(); ++c) {
            gy.at(r, c) += g.at(r, x.cols() + c);
          }
        }
      }
      return;
    }

    default:
      break;
  }

  // Single-parent ops.
  if (!wants(0)) return;
  const Tensor& x = nodes_[n.parents[0]].value;
  const Tensor& y = n.value;
  Tensor& gx = grad_buffer(n.parents[0]);
  switch (n.op) {
    case OpKind::kScale:
      for (std::size_t i = 0; i < x.size(); ++i) gx[i] += g[i] * n.alpha;
      break;
    case OpKind::kAddScalar:
      for (std::size_t i = 0; i < x.size(); ++i) gx[i] += g[i];
      break;
    case OpKind::kTanh:
      for (std::size_t i = 0; i < x.size(); ++i) {
        gx[i] += g[i] * (1.0 - y[i] * y[i]);
      }
      break;
    case OpKind::kRelu:
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] > 0.0) gx[i] += g[i];
      }
      break;
    case OpKind::kSquare:
      for (std::size_t i = 0; i < x.size(); ++i) gx[i] += 2.0 * x[i] * g[i];
      break;
    case OpKind::kExp:
      for (std::size_t i = 0; i < x.size(); ++i) gx[i] += g[i] * y[i];
      break;
    case OpKind::kSum:
      for (std::size_t i = 0; i < x.size(); ++i) gx[i] += g[0];
      break;
    case OpKind::kMean: {
      double share = g[0] / static_cast<double>(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) gx[i] += share;
      break;
    }
    case OpKind::kRowSum:
      for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < x.cols(); ++c) gx.at(r, c) += g[r];
      }
      break;
    case OpKind::kSlice:
      for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = n.begin; c < n.end; ++c) {
          gx.at(r, c) += g.at(r, c - n.begin);
        }
      }
      break;
    case OpKind::kClamp:
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] >= n.alpha && x[i] <= n.beta) gx[i] += g[i];
      }
      break;
    case OpKind::kFloorMagnitude:
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::abs(x[i]) >= n.alpha) gx[i] += g[i];
      }
      break;
    default:
      throw ContractError(std::string("backward: unhandled op ") +
                          op_name(n.op));
  }
}

Var operator+(Var a, Var b) { return a.graph()->add(a, b); }
Var operator-(Var a, Var b) { return a.graph()->sub(a, b); }
Var operator*(Var a, Var b) { return a.graph()->mul(a, b); }
Var operator/(Var a, Var b) { return a.graph()->div(a, b); }
Var operator-(Var a) { return a.graph()->scale(a, -1.0); }
Var operator*(Var a, double c) { return a.graph()->scale(a, c); }
Var operator*(double c, Var a) { return a.graph()->scale(a, c); }
Var operator+(Var a, double c) { return a.graph()->add_scalar(a, c); }

}  // namespace smooth
