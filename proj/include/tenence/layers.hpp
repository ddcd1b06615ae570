// Differentiable building blocks: graph convolution, the 3-layer snapshot
// encoder, the fixed cosine time encoder, the graph-convolutional GRU cell
// and mean readout.
//
// Parameter containers are templated on the tensor type so the same layout
// holds plain matrices (ModelParameters) or tape handles (bound for one
// forward pass).

#ifndef TENENCE_LAYERS_HPP
#define TENENCE_LAYERS_HPP

#include <array>
#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tenence/autodiff.hpp"
#include "tenence/graph.hpp"

namespace tenence {

using ad::SparseMatrix;
using ad::Var;

/// Weight (d_in x d_out) plus optional bias (1 x d_out).
template <class T>
struct Affine {
  T weight;
  std::optional<T> bias;
};

/// Six graph convolutions of the GRU cell; `*_input` act on CONCAT(Z_k, time),
/// `*_state` on the previous state.
template <class T>
struct GgruBlock {
  Affine<T> reset_input, reset_state;
  Affine<T> update_input, update_state;
  Affine<T> candidate_input, candidate_state;
};

using GcnLayerParams = Affine<Matrix>;
using GgruParams = GgruBlock<Matrix>;

/// D^-1/2 (A + I) D^-1/2 with D the degree matrix of A + I.
SparseMatrix normalized_adjacency(const Matrix& adjacency);

/// Fixed cosine encoding cos(k * omega), omega_i = alpha^{-(i-1)/beta}.
class TimeEncoder {
 public:
  /// alpha = beta = sqrt(dim).
  explicit TimeEncoder(std::size_t dim = 100);
  TimeEncoder(std::size_t dim, double alpha, double beta);

  RowVector encode(double k) const;
  const RowVector& frequencies() const { return omega_; }
  std::size_t dim() const { return static_cast<std::size_t>(omega_.size()); }

 private:
  RowVector omega_;
};

RowVector time_encode(double k, std::size_t dim = 100);

enum class Activation { kNone, kRelu };

// Tape-level ops. `propagation` must outlive the tape.
Var gcn_layer(const SparseMatrix& propagation, Var x, const Affine<Var>& p, Activation act);
/// First-layer variant for identity node features (X W == W).
Var gcn_layer_identity(const SparseMatrix& propagation, const Affine<Var>& p, Activation act);

/// ReLU after layers 1 and 2, linear layer 3.
Var encoder_forward(const SparseMatrix& propagation, Var x, const std::array<Affine<Var>, 3>& layers,
                    bool identity_features = false);

Var ggru_step(Var input, const SparseMatrix& propagation, Var state, const GgruBlock<Var>& p);

Var readout(Var states);

// Matrix-level convenience wrappers (no gradient).
Matrix gcn_layer(const Matrix& x, const Matrix& adjacency, const GcnLayerParams& p, Activation act);
Matrix encoder_forward(const Matrix& x, const Matrix& adjacency,
                       const std::array<GcnLayerParams, 3>& layers);
Matrix ggru_step(const Matrix& input, const Matrix& adjacency, const Matrix& state,
                 const GgruParams& p);
RowVector readout(const Matrix& states);

/// Glorot-uniform weight, zero bias.
GcnLayerParams glorot_affine(std::size_t d_in, std::size_t d_out, bool with_bias,
                             std::mt19937_64& rng);

/// Binds a matrix-valued Affine onto a tape as trainable (or constant) leaves.
Affine<Var> bind(ad::Tape& tape, const Affine<Matrix>& p, bool trainable);
GgruBlock<Var> bind(ad::Tape& tape, const GgruBlock<Matrix>& p, bool trainable);

}  // namespace tenence

#endif  // TENENCE_LAYERS_HPP
