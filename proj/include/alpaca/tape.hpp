#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "alpaca/linalg.hpp"

namespace alpaca::autodiff {

enum class OpKind {
  kLeaf,
  kConstant,
  kMatMul,
  kAdd,
  kSub,
  kScale,
  kAddScalar,
  kTranspose,
  kTanh,
  kHadamard,
  kDivide,
  kLog,
  kSolvePsd,
  kTrace,
  kOuter,
  kSum,
  kRowSum,
  kAddRowBroadcast,
  kSliceRows,
  kSoftplusLower,
};

std::string_view op_name(OpKind kind);

/// ln(1 + e^x), evaluated without overflow.
double softplus(double x);
double softplus_inverse(double y);
double sigmoid(double x);

/// Handle to a node recorded on a Tape. Only meaningful for the tape that
/// issued it.
struct Var {
  std::size_t index = 0;
};

/// Reverse-mode computation graph over dense matrices.
///
/// Nodes are appended in evaluation order, so the node list is always a
/// topological order. Values are computed eagerly when an op is recorded;
/// `backward` then sweeps the list once in reverse. Constants (and anything
/// computed only from constants) never receive adjoints.
///
/// A Tape is not thread-safe. Independent tapes may be used concurrently.
class Tape {
 public:
  Var leaf(Matrix value);
  Var constant(Matrix value);

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var scale(Var a, double factor);
  Var add_scalar(Var a, double offset);
  Var transpose(Var a);
  Var tanh(Var a);
  Var hadamard(Var a, Var b);
  Var divide(Var a, Var b);
  /// Elementwise natural log; entries must be positive.
  Var log(Var a);
  /// X = A^{-1} B for symmetric positive definite A. Gradients use the
  /// implicit rule dB = A^{-1} dX, dA = -dB X^T.
  Var solve_psd(Var a, Var b);
  Var trace(Var a);
  /// u v^T for column vectors u and v.
  Var outer(Var u, Var v);
  Var sum(Var a);
  /// Column vector of row sums.
  Var row_sum(Var a);
  /// a + 1 b^T where b is a 1 x cols row vector.
  Var add_row_broadcast(Var a, Var b);
  Var slice_rows(Var a, Eigen::Index start, Eigen::Index count);
  /// Lower triangle of `raw` with softplus applied to the diagonal, giving a
  /// Cholesky factor with strictly positive diagonal.
  Var softplus_lower(Var raw);

  /// Reverse sweep from a 1x1 output node. Resets all adjoints first, so it
  /// may be called repeatedly on the same tape.
  void backward(Var output);

  const Matrix& value(Var v) const;
  /// Adjoint after `backward`. Zero matrix for nodes that carry no gradient.
  const Matrix& grad(Var v) const;
  OpKind kind(Var v) const;
  bool requires_grad(Var v) const;
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    OpKind kind = OpKind::kLeaf;
    std::size_t in0 = 0;
    std::size_t in1 = 0;
    int arity = 0;
    bool requires_grad = false;
    double scalar = 0.0;
    Eigen::Index start = 0;
    Matrix value;
    Matrix adjoint;
    Matrix aux;  // op-specific cache (Cholesky factor for kSolvePsd)
  };

  Var push(Node node);
  const Node& node(Var v) const;
  void check_scalar(Var v, std::string_view what) const;
  void accumulate(std::size_t index, const Matrix& delta);

  std::vector<Node> nodes_;
};

}  // namespace alpaca::autodiff
