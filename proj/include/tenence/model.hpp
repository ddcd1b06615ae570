// The recurrent snapshot model: per-step encoder, GGRU state update, and the
// four heads (reconstruction decoder, next-step link predictor, local and
// global predictive encoders).

#ifndef TENENCE_MODEL_HPP
#define TENENCE_MODEL_HPP

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tenence/autodiff.hpp"
#include "tenence/graph.hpp"
#include "tenence/layers.hpp"

namespace tenence {

struct ModelConfig {
  std::size_t feature_dim = 0;  // d_V; n for identity features
  std::size_t enc_dim = 256;
  std::size_t state_dim = 256;
  std::size_t time_dim = 100;
  std::size_t dec_dim = 0;       // 0 -> state_dim
  std::size_t local_hidden = 0;  // 0 -> state_dim
  bool head_bias = true;

  std::size_t decoder_width() const { return dec_dim ? dec_dim : state_dim; }
  std::size_t hidden_width() const { return local_hidden ? local_hidden : state_dim; }
};

template <class T>
struct ModelTensors {
  std::array<Affine<T>, 3> encoder;
  GgruBlock<T> ggru;
  Affine<T> decoder;
  Affine<T> predictor;
  Affine<T> local_hidden;
  Affine<T> local_out;
  Affine<T> global;
};

/// Calls f(name, tensor) for every tensor, in a fixed order. Works for const
/// and non-const containers of any tensor type.
template <class Tensors, class F>
void for_each_tensor(Tensors& m, F&& f) {
  auto affine = [&](const std::string& name, auto& a) {
    f(name + ".weight", a.weight);
    if (a.bias) f(name + ".bias", *a.bias);
  };
  for (std::size_t i = 0; i < 3; ++i) affine("encoder." + std::to_string(i), m.encoder[i]);
  affine("ggru.reset_input", m.ggru.reset_input);
  affine("ggru.reset_state", m.ggru.reset_state);
  affine("ggru.update_input", m.ggru.update_input);
  affine("ggru.update_state", m.ggru.update_state);
  affine("ggru.candidate_input", m.ggru.candidate_input);
  affine("ggru.candidate_state", m.ggru.candidate_state);
  affine("decoder", m.decoder);
  affine("predictor", m.predictor);
  affine("local.hidden", m.local_hidden);
  affine("local.out", m.local_out);
  affine("global", m.global);
}

struct ModelParameters {
  ModelConfig config;
  ModelTensors<Matrix> tensors;

  std::size_t parameter_count() const;
  bool all_finite() const;
};

/// Glorot-uniform weights, zero biases, drawn from the "init" stream of `seed`.
ModelParameters init_parameters(const ModelConfig& config, std::uint64_t seed);
/// Same shapes, every entry zero.
ModelParameters zero_parameters(const ModelConfig& config);

/// Snapshot sequence plus its cached propagation matrices. Must outlive any
/// tape that used it.
class PreparedSequence {
 public:
  explicit PreparedSequence(const SnapshotSequence& seq);

  const SnapshotSequence& sequence() const { return *seq_; }
  const SparseMatrix& propagation(std::size_t k) const { return propagation_.at(k - 1); }
  std::size_t length() const { return seq_->length(); }
  bool identity_features() const { return identity_; }

 private:
  const SnapshotSequence* seq_;
  std::vector<SparseMatrix> propagation_;
  bool identity_;
};

/// Model tensors bound onto one tape.
struct BoundModel {
  ModelConfig config;
  ModelTensors<Var> tensors;
  TimeEncoder time;
};

BoundModel bind(ad::Tape& tape, const ModelParameters& params, bool trainable);

using StepPair = std::pair<std::size_t, std::size_t>;  // (k, l), 1-based, k < l

struct ForwardOutputs {
  std::vector<Var> structural;       // Z_1..Z_N
  std::vector<Var> states;           // S_1..S_N
  std::vector<Var> reconstructions;  // A^_1..A^_N
  std::vector<Var> predictions;      // A~_2..A~_N (entry k-1 is predicted from S_k)
  std::map<StepPair, Var> local_predictions;   // Z^(k)_l
  std::map<StepPair, Var> global_predictions;  // z^(k)_l
  std::vector<Var> graph_states;     // s_k = readout(S_k)
  std::vector<Var> graph_structural;  // z_l = readout(Z_l)
};

/// Heads computed by forward_training; disabling a head only skips work.
struct ForwardHeads {
  bool reconstruction = true;
  bool local = true;
  bool global = true;
};

/// Encoder then GGRU for every step; returns S_1..S_N.
std::vector<Var> run_states(const PreparedSequence& seq, const BoundModel& model,
                            std::vector<Var>* structural = nullptr);

ForwardOutputs forward_training(const PreparedSequence& seq, const BoundModel& model,
                                ForwardHeads heads = {});

Var decode_adjacency(Var state, const BoundModel& model);
Var predict_next_adjacency(Var state, const BoundModel& model);
Var local_predictive_encode(Var state, std::size_t k, std::size_t l, const BoundModel& model);
Var global_predictive_encode(Var graph_state, std::size_t k, std::size_t l,
                             const BoundModel& model);

// Value-level entry points.
Matrix infer(const SnapshotSequence& seq, const ModelParameters& params);
Matrix decode_adjacency(const Matrix& state, const ModelParameters& params);
Matrix predict_next_adjacency(const Matrix& state, const ModelParameters& params);
Matrix local_predictive_encode(const Matrix& state, std::size_t k, std::size_t l,
                               const ModelParameters& params);
RowVector global_predictive_encode(const RowVector& graph_state, std::size_t k, std::size_t l,
                                   const ModelParameters& params);

/// Link-predictor embeddings Y~ = Linear_pred(S).
Matrix predictor_embeddings(const Matrix& state, const ModelParameters& params);
/// sigmoid(Y~_i . Y~_j) for each pair, without materializing n x n.
std::vector<double> score_pairs(const Matrix& embeddings, std::span<const Edge> pairs);

}  // namespace tenence

#endif  // TENENCE_MODEL_HPP
