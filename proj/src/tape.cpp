#include "alpaca/tape.hpp"

#include <cmath>
#include <sstream>

namespace alpaca::autodiff {
namespace {

std::string dims(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double softplus_inverse(double y) {
  if (!(y > 0.0)) throw std::domain_error("softplus_inverse needs a positive argument");
  return y + std::log(-std::expm1(-y));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kLeaf: return "leaf";
    case OpKind::kConstant: return "constant";
    case OpKind::kMatMul: return "matmul";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kScale: return "scale";
    case OpKind::kAddScalar: return "add_scalar";
    case OpKind::kTranspose: return "transpose";
    case OpKind::kTanh: return "tanh";
    case OpKind::kHadamard: return "hadamard";
    case OpKind::kDivide: return "divide";
    case OpKind::kLog: return "log";
    case OpKind::kSolvePsd: return "solve_psd";
    case OpKind::kTrace: return "trace";
    case OpKind::kOuter: return "outer";
    case OpKind::kSum: return "sum";
    case OpKind::kRowSum: return "row_sum";
    case OpKind::kAddRowBroadcast: return "add_row_broadcast";
    case OpKind::kSliceRows: return "slice_rows";
    case OpKind::kSoftplusLower: return "softplus_lower";
  }
  return "unknown";
}

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{nodes_.size() - 1};
}

const Tape::Node& Tape::node(Var v) const {
  if (v.index >= nodes_.size()) {
    throw std::out_of_range("tape: node handle " + std::to_string(v.index) +
                            " out of range");
  }
  return nodes_[v.index];
}

const Matrix& Tape::value(Var v) const { return node(v).value; }

const Matrix& Tape::grad(Var v) const { return node(v).adjoint; }

OpKind Tape::kind(Var v) const { return node(v).kind; }

bool Tape::requires_grad(Var v) const { return node(v).requires_grad; }

Var Tape::leaf(Matrix value) {
  Node n;
  n.kind = OpKind::kLeaf;
  n.requires_grad = true;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::constant(Matrix value) {
  Node n;
  n.kind = OpKind::kConstant;
  n.value = std::move(value);
  return push(std::move(n));
}

namespace {

template <typename NodeT>
NodeT unary(OpKind kind, Var a, const NodeT& in) {
  NodeT n;
  n.kind = kind;
  n.in0 = a.index;
  n.arity = 1;
  n.requires_grad = in.requires_grad;
  return n;
}

template <typename NodeT>
NodeT binary(OpKind kind, Var a, Var b, const NodeT& ia, const NodeT& ib) {
  NodeT n;
  n.kind = kind;
  n.in0 = a.index;
  n.in1 = b.index;
  n.arity = 2;
  n.requires_grad = ia.requires_grad || ib.requires_grad;
  return n;
}

}  // namespace

Var Tape::matmul(Var a, Var b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  if (na.value.cols() != nb.value.rows()) {
    throw ShapeError("matmul " + dims(na.value) + " * " + dims(nb.value));
  }
  Node n = binary(OpKind::kMatMul, a, b, na, nb);
  n.value = na.value * nb.value;
  return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  if (na.value.rows() != nb.value.rows() || na.value.cols() != nb.value.cols()) {
    throw ShapeError("add " + dims(na.value) + " + " + dims(nb.value));
  }
  Node n = binary(OpKind::kAdd, a, b, na, nb);
  n.value = na.value + nb.value;
  return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  if (na.value.rows() != nb.value.rows() || na.value.cols() != nb.value.cols()) {
    throw ShapeError("sub " + dims(na.value) + " - " + dims(nb.value));
  }
  Node n = binary(OpKind::kSub, a, b, na, nb);
  n.value = na.value - nb.value;
  return push(std::move(n));
}

Var Tape::scale(Var a, double factor) {
  const Node& na = node(a);
  Node n = unary(OpKind::kScale, a, na);
  n.scalar = factor;
  n.value = factor * na.value;
  return push(std::move(n));
}

Var Tape::add_scalar(Var a, double offset) {
  const Node& na = node(a);
  Node n = unary(OpKind::kAddScalar, a, na);
  n.scalar = offset;
  n.value = na.value.array() + offset;
  return push(std::move(n));
}

Var Tape::transpose(Var a) {
  const Node& na = node(a);
  Node n = unary(OpKind::kTranspose, a, na);
  n.value = na.value.transpose();
  return push(std::move(n));
}

Var Tape::tanh(Var a) {
  const Node& na = node(a);
  Node n = unary(OpKind::kTanh, a, na);
  n.value = na.value.array().tanh();
  return push(std::move(n));
}

Var Tape::hadamard(Var a, Var b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  if (na.value.rows() != nb.value.rows() || na.value.cols() != nb.value.cols()) {
    throw ShapeError("hadamard " + dims(na.value) + " .* " + dims(nb.value));
  }
  Node n = binary(OpKind::kHadamard, a, b, na, nb);
  n.value = na.value.cwiseProduct(nb.value);
  return push(std::move(n));
}

Var Tape::divide(Var a, Var b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  if (na.value.rows() != nb.value.rows() || na.value.cols() != nb.value.cols()) {
    throw ShapeError("divide " + dims(na.value) + " ./ " + dims(nb.value));
  }
  Node n = binary(OpKind::kDivide, a, b, na, nb);
  n.value = na.value.cwiseQuotient(nb.value);
  return push(std::move(n));
}

Var Tape::log(Var a) {
  const Node& na = node(a);
  Node n = unary(OpKind::kLog, a, na);
  n.value = na.value.array().log();
  return push(std::move(n));
}

Var Tape::solve_psd(Var a, Var b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  if (na.value.rows() != na.value.cols() || na.value.cols() != nb.value.rows()) {
    throw ShapeError("solve_psd " + dims(na.value) + " \\ " + dims(nb.value));
  }
  Node n = binary(OpKind::kSolvePsd, a, b, na, nb);
  n.aux = linalg::cholesky(na.value);
  n.value = linalg::cholesky_solve(n.aux, nb.value);
  return push(std::move(n));
}

Var Tape::trace(Var a) {
  const Node& na = node(a);
  if (na.value.rows() != na.value.cols()) {
    throw ShapeError("trace of non-square " + dims(na.value));
  }
  Node n = unary(OpKind::kTrace, a, na);
  n.value = Matrix::Constant(1, 1, na.value.trace());
  return push(std::move(n));
}

Var Tape::outer(Var u, Var v) {
  const Node& nu = node(u);
  const Node& nv = node(v);
  if (nu.value.cols() != 1 || nv.value.cols() != 1) {
    throw ShapeError("outer expects column vectors, got " + dims(nu.value) +
                     " and " + dims(nv.value));
  }
  Node n = binary(OpKind::kOuter, u, v, nu, nv);
  n.value = nu.value * nv.value.transpose();
  return push(std::move(n));
}

Var Tape::sum(Var a) {
  const Node& na = node(a);
  Node n = unary(OpKind::kSum, a, na);
  n.value = Matrix::Constant(1, 1, na.value.sum());
  return push(std::move(n));
}

Var Tape::row_sum(Var a) {
  const Node& na = node(a);
  Node n = unary(OpKind::kRowSum, a, na);
  n.value = na.value.rowwise().sum();
  return push(std::move(n));
}

Var Tape::add_row_broadcast(Var a, Var b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  if (nb.value.rows() != 1 || nb.value.cols() != na.value.cols()) {
    throw ShapeError("add_row_broadcast " + dims(na.value) + " + row " +
                     dims(nb.value));
  }
  Node n = binary(OpKind::kAddRowBroadcast, a, b, na, nb);
  n.value = na.value.rowwise() + nb.value.row(0);
  return push(std::move(n));
}

Var Tape::slice_rows(Var a, Eigen::Index start, Eigen::Index count) {
  const Node& na = node(a);
  if (start < 0 || count < 0 || start + count > na.value.rows()) {
    throw ShapeError("slice_rows [" + std::to_string(start) + ", " +
                     std::to_string(start + count) + ") of " + dims(na.value));
  }
  Node n = unary(OpKind::kSliceRows, a, na);
  n.start = start;
  n.value = na.value.middleRows(start, count);
  return push(std::move(n));
}

Var Tape::softplus_lower(Var raw) {
  const Node& nr = node(raw);
  if (nr.value.rows() != nr.value.cols()) {
    throw ShapeError("softplus_lower of non-square " + dims(nr.value));
  }
  Node n = unary(OpKind::kSoftplusLower, raw, nr);
  Matrix l = nr.value.triangularView<Eigen::StrictlyLower>();
  for (Eigen::Index i = 0; i < l.rows(); ++i) l(i, i) = softplus(nr.value(i, i));
  n.value = std::move(l);
  return push(std::move(n));
}

void Tape::check_scalar(Var v, std::string_view what) const {
  const Matrix& m = node(v).value;
  if (m.rows() != 1 || m.cols() != 1) {
    throw ShapeError(std::string(what) + " requires a 1x1 node, got " + dims(m));
  }
}

void Tape::accumulate(std::size_t index, const Matrix& delta) {
  Node& n = nodes_[index];
  if (!n.requires_grad) return;
  n.adjoint += delta;
}

void Tape::backward(Var output) {
  check_scalar(output, "backward");
  for (Node& n : nodes_) {
    n.adjoint = Matrix::Zero(n.value.rows(), n.value.cols());
  }
  nodes_[output.index].adjoint(0, 0) = 1.0;

  for (std::size_t k = output.index + 1; k-- > 0;) {
    Node& n = nodes_[k];
    if (!n.requires_grad || n.arity == 0) continue;
    const Matrix& g = n.adjoint;
    const Matrix& a = nodes_[n.in0].value;
    switch (n.kind) {
      case OpKind::kLeaf:
      case OpKind::kConstant:
        break;
      case OpKind::kMatMul: {
        const Matrix& b = nodes_[n.in1].value;
        if (nodes_[n.in0].requires_grad) accumulate(n.in0, g * b.transpose());
        if (nodes_[n.in1].requires_grad) accumulate(n.in1, a.transpose() * g);
        break;
      }
      case OpKind::kAdd:
        accumulate(n.in0, g);
        accumulate(n.in1, g);
        break;
      case OpKind::kSub:
        accumulate(n.in0, g);
        accumulate(n.in1, -g);
        break;
      case OpKind::kScale:
        accumulate(n.in0, n.scalar * g);
        break;
      case OpKind::kAddScalar:
        accumulate(n.in0, g);
        break;
      case OpKind::kTranspose:
        accumulate(n.in0, g.transpose());
        break;
      case OpKind::kTanh:
        accumulate(n.in0, g.cwiseProduct(
                              (1.0 - n.value.array().square()).matrix()));
        break;
      case OpKind::kHadamard: {
        const Matrix& b = nodes_[n.in1].value;
        accumulate(n.in0, g.cwiseProduct(b));
        accumulate(n.in1, g.cwiseProduct(a));
        break;
      }
      case OpKind::kDivide: {
        const Matrix& b = nodes_[n.in1].value;
        accumulate(n.in0, g.cwiseQuotient(b));
        if (nodes_[n.in1].requires_grad) {
          accumulate(n.in1, -(g.array() * n.value.array() / b.array()).matrix());
        }
        break;
      }
      case OpKind::kLog:
        accumulate(n.in0, g.cwiseQuotient(a));
        break;
      case OpKind::kSolvePsd: {
        const Matrix gb = linalg::cholesky_solve(n.aux, g);
        accumulate(n.in1, gb);
        if (nodes_[n.in0].requires_grad) accumulate(n.in0, -gb * n.value.transpose());
        break;
      }
      case OpKind::kTrace:
        accumulate(n.in0, g(0, 0) * Matrix::Identity(a.rows(), a.cols()));
        break;
      case OpKind::kOuter: {
        const Matrix& v = nodes_[n.in1].value;
        if (nodes_[n.in0].requires_grad) accumulate(n.in0, g * v);
        if (nodes_[n.in1].requires_grad) accumulate(n.in1, g.transpose() * a);
        break;
      }
      case OpKind::kSum:
        accumulate(n.in0, Matrix::Constant(a.rows(), a.cols(), g(0, 0)));
        break;
      case OpKind::kRowSum:
        accumulate(n.in0, g * Matrix::Ones(1, a.cols()));
        break;
      case OpKind::kAddRowBroadcast:
        accumulate(n.in0, g);
        accumulate(n.in1, g.colwise().sum());
        break;
      case OpKind::kSliceRows: {
        Node& src = nodes_[n.in0];
        if (src.requires_grad) src.adjoint.middleRows(n.start, g.rows()) += g;
        break;
      }
      case OpKind::kSoftplusLower: {
        Matrix d = g.triangularView<Eigen::StrictlyLower>();
        for (Eigen::Index i = 0; i < d.rows(); ++i) d(i, i) = g(i, i) * sigmoid(a(i, i));
        accumulate(n.in0, d);
        break;
      }
    }
  }
}

}  // namespace alpaca::autodiff
