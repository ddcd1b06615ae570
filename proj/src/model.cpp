#include "tenence/model.hpp"

#include <cmath>

#include "tenence/random.hpp"

namespace tenence {

namespace {

Affine<Matrix> zero_affine(std::size_t d_in, std::size_t d_out, bool with_bias) {
  Affine<Matrix> a;
  a.weight = Matrix::Zero(static_cast<Eigen::Index>(d_in), static_cast<Eigen::Index>(d_out));
  if (with_bias) a.bias = Matrix::Zero(1, static_cast<Eigen::Index>(d_out));
  return a;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

Var time_row(ad::Tape& tape, const TimeEncoder& te, std::size_t step) {
  return tape.constant(te.encode(static_cast<double>(step)));
}

void check_steps(std::size_t k, std::size_t l, const char* op) {
  if (l <= k) {
    throw ArgumentError(std::string(op) + ": target step l=" + std::to_string(l) +
                        " must exceed k=" + std::to_string(k));
  }
}

}  // namespace

std::size_t ModelParameters::parameter_count() const {
  std::size_t count = 0;
  for_each_tensor(tensors, [&](const std::string&, const Matrix& m) {
    count += static_cast<std::size_t>(m.size());
  });
  return count;
}

bool ModelParameters::all_finite() const {
  bool ok = true;
  for_each_tensor(tensors, [&](const std::string&, const Matrix& m) { ok = ok && m.allFinite(); });
  return ok;
}

ModelParameters zero_parameters(const ModelConfig& c) {
  if (c.feature_dim == 0 || c.enc_dim == 0 || c.state_dim == 0 || c.time_dim == 0) {
    throw ArgumentError("ModelConfig: all dimensions must be positive");
  }
  ModelParameters p;
  p.config = c;
  auto& t = p.tensors;
  t.encoder[0] = zero_affine(c.feature_dim, c.enc_dim, true);
  t.encoder[1] = zero_affine(c.enc_dim, c.enc_dim, true);
  t.encoder[2] = zero_affine(c.enc_dim, c.enc_dim, true);
  const auto in = c.enc_dim + c.time_dim;
  t.ggru.reset_input = zero_affine(in, c.state_dim, true);
  t.ggru.update_input = zero_affine(in, c.state_dim, true);
  t.ggru.candidate_input = zero_affine(in, c.state_dim, true);
  t.ggru.reset_state = zero_affine(c.state_dim, c.state_dim, true);
  t.ggru.update_state = zero_affine(c.state_dim, c.state_dim, true);
  t.ggru.candidate_state = zero_affine(c.state_dim, c.state_dim, true);
  t.decoder = zero_affine(c.state_dim, c.decoder_width(), c.head_bias);
  t.predictor = zero_affine(c.state_dim, c.decoder_width(), c.head_bias);
  t.local_hidden = zero_affine(c.state_dim + c.time_dim, c.hidden_width(), true);
  t.local_out = zero_affine(c.hidden_width(), c.enc_dim, true);
  // Output lives in the structural-embedding space so it can be scored against readout(Z_l).
  t.global = zero_affine(c.state_dim + c.time_dim, c.enc_dim, true);
  return p;
}

ModelParameters init_parameters(const ModelConfig& config, std::uint64_t seed) {
  auto p = zero_parameters(config);
  Rng rng = make_stream(seed, "init");
  for_each_tensor(p.tensors, [&](const std::string& name, Matrix& m) {
    if (!ends_with(name, ".weight")) return;
    const double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = (2.0 * uniform01(rng) - 1.0) * limit;
  });
  return p;
}

PreparedSequence::PreparedSequence(const SnapshotSequence& seq) : seq_(&seq) {
  if (seq.length() == 0) throw ArgumentError("empty snapshot sequence");
  for (const auto& s : seq.snapshots) propagation_.push_back(normalized_adjacency(s.adjacency));
  identity_ = seq.scheme == FeatureScheme::kIdentity && seq.feature_dim() == seq.num_nodes();
}

BoundModel bind(ad::Tape& tape, const ModelParameters& params, bool trainable) {
  BoundModel b{params.config, {}, TimeEncoder(params.config.time_dim)};
  const auto& t = params.tensors;
  for (std::size_t i = 0; i < 3; ++i) b.tensors.encoder[i] = bind(tape, t.encoder[i], trainable);
  b.tensors.ggru = bind(tape, t.ggru, trainable);
  b.tensors.decoder = bind(tape, t.decoder, trainable);
  b.tensors.predictor = bind(tape, t.predictor, trainable);
  b.tensors.local_hidden = bind(tape, t.local_hidden, trainable);
  b.tensors.local_out = bind(tape, t.local_out, trainable);
  b.tensors.global = bind(tape, t.global, trainable);
  return b;
}

std::vector<Var> run_states(const PreparedSequence& seq, const BoundModel& model,
                            std::vector<Var>* structural) {
  const auto& s = seq.sequence();
  const auto n = static_cast<Eigen::Index>(s.num_nodes());
  if (s.feature_dim() != model.config.feature_dim) {
    throw ArgumentError("feature dim " + std::to_string(s.feature_dim()) +
                        " does not match model input dim " +
                        std::to_string(model.config.feature_dim));
  }
  auto& tape = *model.tensors.decoder.weight.tape();
  Var state = tape.constant(Matrix::Zero(n, static_cast<Eigen::Index>(model.config.state_dim)));
  std::vector<Var> states;
  for (std::size_t k = 1; k <= seq.length(); ++k) {
    const auto& prop = seq.propagation(k);
    Var x = seq.identity_features() ? Var() : tape.constant(s.at(k).features);
    Var z = seq.identity_features()
                ? encoder_forward(prop, model.tensors.encoder[0].weight, model.tensors.encoder, true)
                : encoder_forward(prop, x, model.tensors.encoder, false);
    Var input = ad::concat_broadcast_row(z, time_row(tape, model.time, k));
    state = ggru_step(input, prop, state, model.tensors.ggru);
    states.push_back(state);
    if (structural) structural->push_back(z);
  }
  return states;
}

Var decode_adjacency(Var state, const BoundModel& model) {
  const auto& a = model.tensors.decoder;
  return ad::inner_product_sigmoid(ad::affine(state, a.weight, a.bias));
}

Var predict_next_adjacency(Var state, const BoundModel& model) {
  const auto& a = model.tensors.predictor;
  return ad::inner_product_sigmoid(ad::affine(state, a.weight, a.bias));
}

namespace {

// The hidden layer acts on [S_k, time(l)]; splitting its weight by rows lets
// S_k W_state be computed once per k and shared by every target step l.
struct LocalSplit {
  Var state_rows;
  Var time_rows;
};

LocalSplit split_local(const BoundModel& model) {
  const auto& w = model.tensors.local_hidden.weight;
  const auto ds = static_cast<Eigen::Index>(model.config.state_dim);
  return {ad::row_block(w, 0, ds), ad::row_block(w, ds, w.rows() - ds)};
}

Var local_from_projection(Var projected, const LocalSplit& split, std::size_t l,
                          const BoundModel& model) {
  auto& tape = *projected.tape();
  const auto& h = model.tensors.local_hidden;
  const auto& o = model.tensors.local_out;
  Var time_part = ad::affine(time_row(tape, model.time, l), split.time_rows, h.bias);
  return ad::affine(ad::relu(ad::add_row(projected, time_part)), o.weight, o.bias);
}

}  // namespace

Var local_predictive_encode(Var state, std::size_t k, std::size_t l, const BoundModel& model) {
  check_steps(k, l, "local_predictive_encode");
  const auto split = split_local(model);
  return local_from_projection(ad::matmul(state, split.state_rows), split, l, model);
}

Var global_predictive_encode(Var graph_state, std::size_t k, std::size_t l,
                             const BoundModel& model) {
  check_steps(k, l, "global_predictive_encode");
  auto& tape = *graph_state.tape();
  const auto& g = model.tensors.global;
  Var input = ad::concat_cols(graph_state, time_row(tape, model.time, l));
  return ad::affine(input, g.weight, g.bias);
}

ForwardOutputs forward_training(const PreparedSequence& seq, const BoundModel& model,
                                ForwardHeads heads) {
  const auto N = seq.length();
  if (N < 2) throw ArgumentError("forward_training: need at least 2 snapshots");
  ForwardOutputs out;
  out.states = run_states(seq, model, &out.structural);
  const auto split = heads.local ? split_local(model) : LocalSplit{};
  for (std::size_t k = 1; k <= N; ++k) {
    const Var state = out.states[k - 1];
    if (heads.reconstruction) out.reconstructions.push_back(decode_adjacency(state, model));
    if (k < N) out.predictions.push_back(predict_next_adjacency(state, model));
    out.graph_states.push_back(readout(state));
    out.graph_structural.push_back(readout(out.structural[k - 1]));
    const Var projected = heads.local && k < N ? ad::matmul(state, split.state_rows) : Var();
    for (std::size_t l = k + 1; l <= N; ++l) {
      if (heads.local) {
        out.local_predictions[{k, l}] = local_from_projection(projected, split, l, model);
      }
      if (heads.global) {
        out.global_predictions[{k, l}] =
            global_predictive_encode(out.graph_states.back(), k, l, model);
      }
    }
  }
  return out;
}

Matrix infer(const SnapshotSequence& seq, const ModelParameters& params) {
  if (seq.length() == 0) throw ArgumentError("infer: empty sequence");
  PreparedSequence prepared(seq);
  ad::Tape tape(false);
  const auto model = bind(tape, params, false);
  return run_states(prepared, model).back().value();
}

Matrix decode_adjacency(const Matrix& state, const ModelParameters& params) {
  ad::Tape tape(false);
  return decode_adjacency(tape.constant(state), bind(tape, params, false)).value();
}

Matrix predict_next_adjacency(const Matrix& state, const ModelParameters& params) {
  ad::Tape tape(false);
  return predict_next_adjacency(tape.constant(state), bind(tape, params, false)).value();
}

Matrix local_predictive_encode(const Matrix& state, std::size_t k, std::size_t l,
                               const ModelParameters& params) {
  ad::Tape tape(false);
  return local_predictive_encode(tape.constant(state), k, l, bind(tape, params, false)).value();
}

RowVector global_predictive_encode(const RowVector& graph_state, std::size_t k, std::size_t l,
                                   const ModelParameters& params) {
  ad::Tape tape(false);
  Matrix row = graph_state;
  return global_predictive_encode(tape.constant(row), k, l, bind(tape, params, false)).value();
}

Matrix predictor_embeddings(const Matrix& state, const ModelParameters& params) {
  const auto& a = params.tensors.predictor;
  Matrix y = state * a.weight;
  if (a.bias) y.rowwise() += a.bias->row(0);
  return y;
}

std::vector<double> score_pairs(const Matrix& embeddings, std::span<const Edge> pairs) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& [i, j] : pairs) {
    const double logit = embeddings.row(static_cast<Eigen::Index>(i))
                             .dot(embeddings.row(static_cast<Eigen::Index>(j)));
    out.push_back(1.0 / (1.0 + std::exp(-logit)));
  }
  return out;
}

}  // namespace tenence
