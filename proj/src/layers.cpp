#include "tenence/layers.hpp"

#include <cmath>
#include <stdexcept>

#include "tenence/random.hpp"

namespace tenence {

SparseMatrix normalized_adjacency(const Matrix& adjacency) {
  if (adjacency.rows() != adjacency.cols()) {
    throw ArgumentError("normalized_adjacency: adjacency must be square");
  }
  const auto n = adjacency.rows();
  Eigen::VectorXd inv_sqrt_deg(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double deg = 1.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) deg += adjacency(i, j);
    inv_sqrt_deg(i) = 1.0 / std::sqrt(deg);
  }
  std::vector<Eigen::Triplet<double>> entries;
  for (Eigen::Index i = 0; i < n; ++i) {
    entries.emplace_back(i, i, inv_sqrt_deg(i) * inv_sqrt_deg(i));
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i && adjacency(i, j) != 0.0) {
        entries.emplace_back(i, j, adjacency(i, j) * inv_sqrt_deg(i) * inv_sqrt_deg(j));
      }
    }
  }
  SparseMatrix out(n, n);
  out.setFromTriplets(entries.begin(), entries.end());
  return out;
}

TimeEncoder::TimeEncoder(std::size_t dim)
    : TimeEncoder(dim, std::sqrt(static_cast<double>(dim)), std::sqrt(static_cast<double>(dim))) {}

TimeEncoder::TimeEncoder(std::size_t dim, double alpha, double beta) {
  if (dim == 0) throw ArgumentError("TimeEncoder: dim must be positive");
  omega_.resize(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    omega_(static_cast<Eigen::Index>(i)) = std::pow(alpha, -static_cast<double>(i) / beta);
  }
}

RowVector TimeEncoder::encode(double k) const { return (k * omega_.array()).cos().matrix(); }

RowVector time_encode(double k, std::size_t dim) { return TimeEncoder(dim).encode(k); }

namespace {

Var activate(Var h, Activation act) { return act == Activation::kRelu ? ad::relu(h) : h; }

}  // namespace

Var gcn_layer(const SparseMatrix& propagation, Var x, const Affine<Var>& p, Activation act) {
  return activate(ad::graph_conv(&propagation, x, p.weight, p.bias), act);
}

Var gcn_layer_identity(const SparseMatrix& propagation, const Affine<Var>& p, Activation act) {
  return activate(ad::graph_conv_identity(&propagation, p.weight, p.bias), act);
}

Var encoder_forward(const SparseMatrix& propagation, Var x, const std::array<Affine<Var>, 3>& layers,
                    bool identity_features) {
  Var h = identity_features ? gcn_layer_identity(propagation, layers[0], Activation::kRelu)
                            : gcn_layer(propagation, x, layers[0], Activation::kRelu);
  h = gcn_layer(propagation, h, layers[1], Activation::kRelu);
  return gcn_layer(propagation, h, layers[2], Activation::kNone);
}

Var ggru_step(Var input, const SparseMatrix& propagation, Var state, const GgruBlock<Var>& p) {
  auto conv = [&](Var x, const Affine<Var>& a) {
    return ad::graph_conv(&propagation, x, a.weight, a.bias);
  };
  Var reset = ad::sigmoid(ad::add(conv(input, p.reset_input), conv(state, p.reset_state)));
  Var update = ad::sigmoid(ad::add(conv(input, p.update_input), conv(state, p.update_state)));
  Var candidate = ad::tanh(
      ad::add(conv(input, p.candidate_input), ad::hadamard(reset, conv(state, p.candidate_state))));
  return ad::add(ad::hadamard(ad::one_minus(update), candidate), ad::hadamard(update, state));
}

Var readout(Var states) {
  if (states.rows() == 0) throw ArgumentError("readout: no nodes");
  return ad::mean_rows(states);
}

Affine<Var> bind(ad::Tape& tape, const Affine<Matrix>& p, bool trainable) {
  auto leaf = [&](const Matrix& m) { return trainable ? tape.variable(m) : tape.constant(m); };
  Affine<Var> out{leaf(p.weight), std::nullopt};
  if (p.bias) out.bias = leaf(*p.bias);
  return out;
}

GgruBlock<Var> bind(ad::Tape& tape, const GgruBlock<Matrix>& p, bool trainable) {
  return {bind(tape, p.reset_input, trainable),     bind(tape, p.reset_state, trainable),
          bind(tape, p.update_input, trainable),    bind(tape, p.update_state, trainable),
          bind(tape, p.candidate_input, trainable), bind(tape, p.candidate_state, trainable)};
}

Matrix gcn_layer(const Matrix& x, const Matrix& adjacency, const GcnLayerParams& p,
                 Activation act) {
  if (adjacency.rows() != x.rows()) throw ArgumentError("gcn_layer: adjacency/feature row mismatch");
  if (x.cols() != p.weight.rows()) throw ArgumentError("gcn_layer: feature/weight shape mismatch");
  const auto prop = normalized_adjacency(adjacency);
  ad::Tape tape(false);
  return gcn_layer(prop, tape.constant(x), bind(tape, p, false), act).value();
}

Matrix encoder_forward(const Matrix& x, const Matrix& adjacency,
                       const std::array<GcnLayerParams, 3>& layers) {
  if (adjacency.rows() != x.rows()) {
    throw ArgumentError("encoder_forward: adjacency/feature row mismatch");
  }
  const auto prop = normalized_adjacency(adjacency);
  ad::Tape tape(false);
  std::array<Affine<Var>, 3> bound{bind(tape, layers[0], false), bind(tape, layers[1], false),
                                   bind(tape, layers[2], false)};
  return encoder_forward(prop, tape.constant(x), bound).value();
}

Matrix ggru_step(const Matrix& input, const Matrix& adjacency, const Matrix& state,
                 const GgruParams& p) {
  if (adjacency.rows() != input.rows() || state.rows() != input.rows()) {
    throw ArgumentError("ggru_step: row mismatch between input, state and adjacency");
  }
  const auto prop = normalized_adjacency(adjacency);
  ad::Tape tape(false);
  return ggru_step(tape.constant(input), prop, tape.constant(state), bind(tape, p, false)).value();
}

RowVector readout(const Matrix& states) {
  if (states.rows() == 0) throw ArgumentError("readout: no nodes");
  return states.colwise().mean();
}

GcnLayerParams glorot_affine(std::size_t d_in, std::size_t d_out, bool with_bias, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(d_in + d_out));
  GcnLayerParams p;
  p.weight.resize(static_cast<Eigen::Index>(d_in), static_cast<Eigen::Index>(d_out));
  for (Eigen::Index i = 0; i < p.weight.rows(); ++i)
    for (Eigen::Index j = 0; j < p.weight.cols(); ++j)
      p.weight(i, j) = (2.0 * uniform01(rng) - 1.0) * limit;
  if (with_bias) p.bias = Matrix::Zero(1, static_cast<Eigen::Index>(d_out));
  return p;
}

}  // namespace tenence
