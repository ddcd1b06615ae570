// Reverse-mode differentiation over dense Eigen matrices.
//
// A Tape records every operation applied to its Vars. backward() walks the
// records in reverse and accumulates gradients into every node that depends
// on a trainable leaf. Ops are deliberately coarse (a graph convolution or a
// whole infoNCE term is one record) to keep the tape small for n ~ 10^3.
//
// Vars are handles; the Tape owns all values. Matrices passed by pointer to
// ops (propagation matrices, BCE targets) must outlive the Tape.

#ifndef TENENCE_AUTODIFF_HPP
#define TENENCE_AUTODIFF_HPP

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace tenence::ad {

using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

class Tape;

class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  const Matrix& value() const;
  /// Zero-size when no gradient reached this node.
  const Matrix& grad() const;
  bool requires_grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  /// Value of a 1x1 node.
  double scalar() const;

  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, std::size_t self)>;

  /// A non-recording tape keeps values only (inference).
  explicit Tape(bool recording = true) : recording_(recording) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var variable(Matrix value);
  Var constant(Matrix value);

  /// Seeds d(out)/d(out) = 1 for a 1x1 node and propagates.
  void backward(Var out);

  const Matrix& value(std::size_t id) const { return nodes_[id].value; }
  const Matrix& grad(std::size_t id) const { return nodes_[id].grad; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  bool recording() const { return recording_; }
  std::size_t size() const { return nodes_.size(); }

  /// Appends an op result. `backward` is dropped unless some parent needs a
  /// gradient.
  Var record(Matrix value, std::initializer_list<Var> parents, Backward backward);
  Var record(Matrix value, std::span<const Var> parents, Backward backward);

  template <class Expr>
  void accumulate(std::size_t id, const Expr& g) {
    auto& node = nodes_[id];
    if (!node.requires_grad) return;
    if (node.grad.size() == 0) {
      node.grad = g;
    } else {
      node.grad += g;
    }
  }
  /// Adds `g` into a single row of a node's gradient.
  void accumulate_row(std::size_t id, Eigen::Index row, const Eigen::RowVectorXd& g);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    Backward backward;
  };
  std::vector<Node> nodes_;
  bool recording_;
};

// Elementwise and linear-algebra ops. Shapes are checked; mismatches throw
// std::invalid_argument.
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var hadamard(Var a, Var b);
Var scale(Var a, double factor);
Var one_minus(Var a);
Var relu(Var a);
Var sigmoid(Var a);
Var tanh(Var a);
/// a + 1 * row (row broadcast over rows of a).
Var add_row(Var a, Var row);
Var concat_cols(Var a, Var b);
/// [a, 1 * row]: appends `row` to every row of a.
Var concat_broadcast_row(Var a, Var row);
/// 1 x d column means.
Var mean_rows(Var a);
/// Rows [start, start + count) of a.
Var row_block(Var a, Eigen::Index start, Eigen::Index count);
/// x W (+ b).
Var affine(Var x, Var weight, std::optional<Var> bias);
/// P (x W) (+ b) for a fixed propagation matrix P.
Var graph_conv(const SparseMatrix* propagation, Var x, Var weight, std::optional<Var> bias);
/// P W (+ b): graph_conv with identity input features.
Var graph_conv_identity(const SparseMatrix* propagation, Var weight, std::optional<Var> bias);
/// sigmoid(Y Y^T).
Var inner_product_sigmoid(Var y);
/// Sum_i weights[i] * terms[i] over 1x1 terms.
Var weighted_sum(std::span<const Var> terms, std::span<const double> weights);
Var sum(std::span<const Var> terms);

/// Mean over the strict upper triangle of
///   -[w * A log P + (1 - A) log(1 - P)],
/// with P clamped to [eps, 1 - eps]. Clamped entries pass no gradient.
Var bce_upper(Var probs, const Matrix* target, double pos_weight, double eps);

struct RowRef {
  std::size_t target = 0;  // index into the targets span
  Eigen::Index row = 0;
};

/// Row-wise infoNCE, averaged over rows of `pred`:
///   (1/n) sum_i [ logsumexp(s_i0, s_i1..s_iK) - s_i0 ]
/// where s_i0 = pred[i] . targets[positive][i] and s_ij = pred[i] . targets[ref.target][ref.row]
/// for each negative ref of row i.
Var info_nce_rows(Var pred, std::span<const Var> targets, std::size_t positive,
                  const std::vector<std::vector<RowRef>>& negatives);

}  // namespace tenence::ad

#endif  // TENENCE_AUTODIFF_HPP
