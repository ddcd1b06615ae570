#include "tenence/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tenence::ad {

namespace {

void require(bool ok, const char* op, const std::string& detail) {
  if (!ok) throw std::invalid_argument(std::string(op) + ": " + detail);
}

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(Var a, Var b, const char* op) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), op,
          "shape mismatch " + shape(a.value()) + " vs " + shape(b.value()));
}

Tape& tape_of(Var a) {
  if (!a.valid()) throw std::invalid_argument("operation on an unbound Var");
  return *a.tape();
}

}  // namespace

const Matrix& Var::value() const { return tape_->value(id_); }
const Matrix& Var::grad() const { return tape_->grad(id_); }
bool Var::requires_grad() const { return tape_->requires_grad(id_); }

double Var::scalar() const {
  const auto& v = value();
  if (v.rows() != 1 || v.cols() != 1) throw std::invalid_argument("scalar() on " + shape(v));
  return v(0, 0);
}

Var Tape::variable(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix(), recording_, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix(), false, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Matrix value, std::initializer_list<Var> parents, Backward backward) {
  return record(std::move(value), std::span<const Var>(parents.begin(), parents.size()),
                std::move(backward));
}

Var Tape::record(Matrix value, std::span<const Var> parents, Backward backward) {
  bool needs = false;
  if (recording_) {
    for (const auto& p : parents) {
      if (p.tape() != this) throw std::invalid_argument("Vars from different tapes");
      needs = needs || requires_grad(p.id());
    }
  }
  nodes_.push_back(Node{std::move(value), Matrix(), needs, needs ? std::move(backward) : nullptr});
  return Var(this, nodes_.size() - 1);
}

void Tape::accumulate_row(std::size_t id, Eigen::Index row, const Eigen::RowVectorXd& g) {
  auto& node = nodes_[id];
  if (!node.requires_grad) return;
  if (node.grad.size() == 0) node.grad = Matrix::Zero(node.value.rows(), node.value.cols());
  node.grad.row(row) += g;
}

void Tape::backward(Var out) {
  if (out.tape() != this) throw std::invalid_argument("backward: Var from another tape");
  const auto& v = value(out.id());
  if (v.rows() != 1 || v.cols() != 1) {
    throw std::invalid_argument("backward: output must be 1x1, got " + shape(v));
  }
  if (!requires_grad(out.id())) return;
  accumulate(out.id(), Matrix::Ones(1, 1));
  for (std::size_t id = out.id() + 1; id-- > 0;) {
    auto& node = nodes_[id];
    if (node.backward && node.grad.size() != 0) node.backward(*this, id);
  }
}

Var matmul(Var a, Var b) {
  require(a.cols() == b.rows(), "matmul", shape(a.value()) + " * " + shape(b.value()));
  return tape_of(a).record(a.value() * b.value(), {a, b},
                           [ia = a.id(), ib = b.id()](Tape& t, std::size_t self) {
                             const auto& g = t.grad(self);
                             if (t.requires_grad(ia)) t.accumulate(ia, g * t.value(ib).transpose());
                             if (t.requires_grad(ib)) t.accumulate(ib, t.value(ia).transpose() * g);
                           });
}

Var add(Var a, Var b) {
  require_same_shape(a, b, "add");
  return tape_of(a).record(a.value() + b.value(), {a, b},
                           [ia = a.id(), ib = b.id()](Tape& t, std::size_t self) {
                             t.accumulate(ia, t.grad(self));
                             t.accumulate(ib, t.grad(self));
                           });
}

Var sub(Var a, Var b) {
  require_same_shape(a, b, "sub");
  return tape_of(a).record(a.value() - b.value(), {a, b},
                           [ia = a.id(), ib = b.id()](Tape& t, std::size_t self) {
                             t.accumulate(ia, t.grad(self));
                             t.accumulate(ib, -t.grad(self));
                           });
}

Var hadamard(Var a, Var b) {
  require_same_shape(a, b, "hadamard");
  return tape_of(a).record(a.value().cwiseProduct(b.value()), {a, b},
                           [ia = a.id(), ib = b.id()](Tape& t, std::size_t self) {
                             const auto& g = t.grad(self);
                             t.accumulate(ia, g.cwiseProduct(t.value(ib)));
                             t.accumulate(ib, g.cwiseProduct(t.value(ia)));
                           });
}

Var scale(Var a, double factor) {
  return tape_of(a).record(a.value() * factor, {a},
                           [ia = a.id(), factor](Tape& t, std::size_t self) {
                             t.accumulate(ia, t.grad(self) * factor);
                           });
}

Var one_minus(Var a) {
  return tape_of(a).record((1.0 - a.value().array()).matrix(), {a},
                           [ia = a.id()](Tape& t, std::size_t self) {
                             t.accumulate(ia, -t.grad(self));
                           });
}

Var relu(Var a) {
  return tape_of(a).record(a.value().cwiseMax(0.0), {a}, [ia = a.id()](Tape& t, std::size_t self) {
    const auto& y = t.value(self);
    t.accumulate(ia, (y.array() > 0.0).select(t.grad(self).array(), 0.0).matrix());
  });
}

Var sigmoid(Var a) {
  Matrix y = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  return tape_of(a).record(std::move(y), {a}, [ia = a.id()](Tape& t, std::size_t self) {
    const auto& y = t.value(self).array();
    t.accumulate(ia, (t.grad(self).array() * y * (1.0 - y)).matrix());
  });
}

Var tanh(Var a) {
  Matrix y = a.value().array().tanh().matrix();
  return tape_of(a).record(std::move(y), {a}, [ia = a.id()](Tape& t, std::size_t self) {
    const auto& y = t.value(self).array();
    t.accumulate(ia, (t.grad(self).array() * (1.0 - y.square())).matrix());
  });
}

Var add_row(Var a, Var row) {
  require(row.rows() == 1 && row.cols() == a.cols(), "add_row",
          shape(a.value()) + " + row " + shape(row.value()));
  Matrix y = a.value().rowwise() + row.value().row(0);
  return tape_of(a).record(std::move(y), {a, row},
                           [ia = a.id(), ir = row.id()](Tape& t, std::size_t self) {
                             const auto& g = t.grad(self);
                             t.accumulate(ia, g);
                             if (t.requires_grad(ir)) t.accumulate(ir, g.colwise().sum());
                           });
}

Var concat_cols(Var a, Var b) {
  require(a.rows() == b.rows(), "concat_cols", shape(a.value()) + " | " + shape(b.value()));
  Matrix y(a.rows(), a.cols() + b.cols());
  y << a.value(), b.value();
  return tape_of(a).record(std::move(y), {a, b},
                           [ia = a.id(), ib = b.id(), ca = a.cols(), cb = b.cols()](
                               Tape& t, std::size_t self) {
                             const auto& g = t.grad(self);
                             if (t.requires_grad(ia)) t.accumulate(ia, g.leftCols(ca));
                             if (t.requires_grad(ib)) t.accumulate(ib, g.rightCols(cb));
                           });
}

Var concat_broadcast_row(Var a, Var row) {
  require(row.rows() == 1, "concat_broadcast_row", "row operand is " + shape(row.value()));
  Matrix y(a.rows(), a.cols() + row.cols());
  y.leftCols(a.cols()) = a.value();
  y.rightCols(row.cols()) = row.value().replicate(a.rows(), 1);
  return tape_of(a).record(std::move(y), {a, row},
                           [ia = a.id(), ir = row.id(), ca = a.cols(), cr = row.cols()](
                               Tape& t, std::size_t self) {
                             const auto& g = t.grad(self);
                             if (t.requires_grad(ia)) t.accumulate(ia, g.leftCols(ca));
                             if (t.requires_grad(ir))
                               t.accumulate(ir, g.rightCols(cr).colwise().sum());
                           });
}

Var mean_rows(Var a) {
  require(a.rows() > 0, "mean_rows", "no rows");
  return tape_of(a).record(a.value().colwise().mean(), {a},
                           [ia = a.id(), n = a.rows()](Tape& t, std::size_t self) {
                             t.accumulate(ia, t.grad(self).replicate(n, 1) / static_cast<double>(n));
                           });
}

Var row_block(Var a, Eigen::Index start, Eigen::Index count) {
  require(start >= 0 && count >= 0 && start + count <= a.rows(), "row_block",
          "rows [" + std::to_string(start) + ", " + std::to_string(start + count) + ") of " +
              shape(a.value()));
  return tape_of(a).record(a.value().middleRows(start, count), {a},
                           [ia = a.id(), start, count](Tape& t, std::size_t self) {
                             const auto& v = t.value(ia);
                             Matrix g = Matrix::Zero(v.rows(), v.cols());
                             g.middleRows(start, count) = t.grad(self);
                             t.accumulate(ia, g);
                           });
}

Var affine(Var x, Var weight, std::optional<Var> bias) {
  require(x.cols() == weight.rows(), "affine", shape(x.value()) + " * " + shape(weight.value()));
  Matrix y = x.value() * weight.value();
  if (bias) {
    require(bias->rows() == 1 && bias->cols() == weight.cols(), "affine", "bias shape");
    y.rowwise() += bias->value().row(0);
  }
  std::vector<Var> parents{x, weight};
  if (bias) parents.push_back(*bias);
  const std::size_t ib = bias ? bias->id() : 0;
  return tape_of(x).record(std::move(y), parents,
                           [ix = x.id(), iw = weight.id(), ib, has_bias = bias.has_value()](
                               Tape& t, std::size_t self) {
                             const auto& g = t.grad(self);
                             if (t.requires_grad(ix)) t.accumulate(ix, g * t.value(iw).transpose());
                             if (t.requires_grad(iw)) t.accumulate(iw, t.value(ix).transpose() * g);
                             if (has_bias && t.requires_grad(ib)) t.accumulate(ib, g.colwise().sum());
                           });
}

Var graph_conv(const SparseMatrix* propagation, Var x, Var weight, std::optional<Var> bias) {
  require(propagation != nullptr, "graph_conv", "null propagation matrix");
  require(propagation->cols() == x.rows() && propagation->rows() == propagation->cols(),
          "graph_conv", "propagation " + std::to_string(propagation->rows()) + "x" +
                            std::to_string(propagation->cols()) + " vs input " + shape(x.value()));
  require(x.cols() == weight.rows(), "graph_conv", shape(x.value()) + " * " + shape(weight.value()));
  Matrix y = (*propagation) * (x.value() * weight.value());
  if (bias) {
    require(bias->rows() == 1 && bias->cols() == weight.cols(), "graph_conv", "bias shape");
    y.rowwise() += bias->value().row(0);
  }
  std::vector<Var> parents{x, weight};
  if (bias) parents.push_back(*bias);
  const std::size_t ib = bias ? bias->id() : 0;
  return tape_of(x).record(
      std::move(y), parents,
      [propagation, ix = x.id(), iw = weight.id(), ib, has_bias = bias.has_value()](
          Tape& t, std::size_t self) {
        const auto& g = t.grad(self);
        Matrix g_xw = propagation->transpose() * g;
        if (t.requires_grad(ix)) t.accumulate(ix, g_xw * t.value(iw).transpose());
        if (t.requires_grad(iw)) t.accumulate(iw, t.value(ix).transpose() * g_xw);
        if (has_bias && t.requires_grad(ib)) t.accumulate(ib, g.colwise().sum());
      });
}

Var graph_conv_identity(const SparseMatrix* propagation, Var weight, std::optional<Var> bias) {
  require(propagation != nullptr, "graph_conv_identity", "null propagation matrix");
  require(propagation->cols() == weight.rows(), "graph_conv_identity",
          "identity features need weight rows == n");
  Matrix y = (*propagation) * weight.value();
  if (bias) {
    require(bias->rows() == 1 && bias->cols() == weight.cols(), "graph_conv_identity",
            "bias shape");
    y.rowwise() += bias->value().row(0);
  }
  std::vector<Var> parents{weight};
  if (bias) parents.push_back(*bias);
  const std::size_t ib = bias ? bias->id() : 0;
  return tape_of(weight).record(
      std::move(y), parents,
      [propagation, iw = weight.id(), ib, has_bias = bias.has_value()](Tape& t, std::size_t self) {
        const auto& g = t.grad(self);
        if (t.requires_grad(iw)) t.accumulate(iw, propagation->transpose() * g);
        if (has_bias && t.requires_grad(ib)) t.accumulate(ib, g.colwise().sum());
      });
}

Var inner_product_sigmoid(Var y) {
  Matrix logits = y.value() * y.value().transpose();
  Matrix p = (1.0 / (1.0 + (-logits.array()).exp())).matrix();
  return tape_of(y).record(std::move(p), {y}, [iy = y.id()](Tape& t, std::size_t self) {
    const auto& p = t.value(self).array();
    Matrix g_logits = (t.grad(self).array() * p * (1.0 - p)).matrix();
    Matrix sym = g_logits + g_logits.transpose();
    t.accumulate(iy, sym * t.value(iy));
  });
}

Var weighted_sum(std::span<const Var> terms, std::span<const double> weights) {
  require(!terms.empty(), "weighted_sum", "no terms");
  require(terms.size() == weights.size(), "weighted_sum", "terms/weights length mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) total += weights[i] * terms[i].scalar();
  std::vector<std::size_t> ids;
  for (const auto& v : terms) ids.push_back(v.id());
  std::vector<double> w(weights.begin(), weights.end());
  return tape_of(terms.front())
      .record(Matrix::Constant(1, 1, total), terms,
              [ids = std::move(ids), w = std::move(w)](Tape& t, std::size_t self) {
                const double g = t.grad(self)(0, 0);
                for (std::size_t i = 0; i < ids.size(); ++i)
                  t.accumulate(ids[i], Matrix::Constant(1, 1, w[i] * g));
              });
}

Var sum(std::span<const Var> terms) {
  std::vector<double> ones(terms.size(), 1.0);
  return weighted_sum(terms, ones);
}

Var bce_upper(Var probs, const Matrix* target, double pos_weight, double eps) {
  require(target != nullptr, "bce_upper", "null target");
  const auto& P = probs.value();
  require(P.rows() == P.cols() && target->rows() == P.rows() && target->cols() == P.cols(),
          "bce_upper", shape(P) + " vs target " + shape(*target));
  const auto n = P.rows();
  require(n >= 2, "bce_upper", "need at least 2 nodes");
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double p = std::clamp(P(i, j), eps, 1.0 - eps);
      const double a = (*target)(i, j);
      total -= pos_weight * a * std::log(p) + (1.0 - a) * std::log(1.0 - p);
    }
  }
  return tape_of(probs).record(
      Matrix::Constant(1, 1, total / pairs), {probs},
      [ip = probs.id(), target, pos_weight, eps, pairs](Tape& t, std::size_t self) {
        const double g = t.grad(self)(0, 0) / pairs;
        const auto& P = t.value(ip);
        const auto n = P.rows();
        Matrix dp = Matrix::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
          for (Eigen::Index j = i + 1; j < n; ++j) {
            const double p = P(i, j);
            if (p <= eps || p >= 1.0 - eps) continue;
            const double a = (*target)(i, j);
            dp(i, j) = -g * (pos_weight * a / p - (1.0 - a) / (1.0 - p));
          }
        }
        t.accumulate(ip, dp);
      });
}

namespace {

// Scores of row i against its positive and negatives; returns logsumexp and fills `scores`.
double row_scores(const Tape& t, const Matrix& pred, std::span<const std::size_t> target_ids,
                  std::size_t positive, const std::vector<RowRef>& negs, Eigen::Index i,
                  std::vector<double>& scores) {
  scores.resize(negs.size() + 1);
  scores[0] = pred.row(i).dot(t.value(target_ids[positive]).row(i));
  for (std::size_t j = 0; j < negs.size(); ++j) {
    scores[j + 1] = pred.row(i).dot(t.value(target_ids[negs[j].target]).row(negs[j].row));
  }
  const double m = *std::max_element(scores.begin(), scores.end());
  double s = 0.0;
  for (double v : scores) s += std::exp(v - m);
  return m + std::log(s);
}

}  // namespace

Var info_nce_rows(Var pred, std::span<const Var> targets, std::size_t positive,
                  const std::vector<std::vector<RowRef>>& negatives) {
  const auto& P = pred.value();
  const auto n = P.rows();
  require(positive < targets.size(), "info_nce_rows", "positive index out of range");
  require(static_cast<Eigen::Index>(negatives.size()) == n, "info_nce_rows",
          "need one negative list per row");
  std::vector<std::size_t> ids;
  for (const auto& v : targets) {
    require(v.cols() == P.cols(), "info_nce_rows",
            "target " + shape(v.value()) + " vs pred " + shape(P));
    ids.push_back(v.id());
  }
  require(targets[positive].rows() == n, "info_nce_rows", "positive rows mismatch");
  for (const auto& negs : negatives) {
    require(!negs.empty(), "info_nce_rows", "empty negative set");
    for (const auto& r : negs) {
      require(r.target < targets.size() && r.row >= 0 && r.row < targets[r.target].rows(),
              "info_nce_rows", "negative reference out of range");
    }
  }

  Tape& tape = tape_of(pred);
  double total = 0.0;
  std::vector<double> scores;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lse = row_scores(tape, P, ids, positive, negatives[i], i, scores);
    total += lse - scores[0];
  }

  std::vector<Var> parents{pred};
  parents.insert(parents.end(), targets.begin(), targets.end());
  return tape.record(
      Matrix::Constant(1, 1, total / static_cast<double>(n)), parents,
      [ip = pred.id(), ids, positive, negatives](Tape& t, std::size_t self) {
        const auto& P = t.value(ip);
        const auto n = P.rows();
        const double g = t.grad(self)(0, 0) / static_cast<double>(n);
        Matrix dpred = Matrix::Zero(n, P.cols());
        std::vector<double> scores;
        for (Eigen::Index i = 0; i < n; ++i) {
          const auto& negs = negatives[i];
          const double lse = row_scores(t, P, ids, positive, negs, i, scores);
          const double c0 = g * (std::exp(scores[0] - lse) - 1.0);
          dpred.row(i) += c0 * t.value(ids[positive]).row(i);
          t.accumulate_row(ids[positive], i, c0 * P.row(i));
          for (std::size_t j = 0; j < negs.size(); ++j) {
            const double c = g * std::exp(scores[j + 1] - lse);
            dpred.row(i) += c * t.value(ids[negs[j].target]).row(negs[j].row);
            t.accumulate_row(ids[negs[j].target], negs[j].row, c * P.row(i));
          }
        }
        t.accumulate(ip, dpred);
      });
}

}  // namespace tenence::ad
