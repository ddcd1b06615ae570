#include "tenence/objectives.hpp"

#include <algorithm>
#include <cmath>

namespace tenence {

void LossWeights::validate() const {
  if (!std::isfinite(alpha) || !std::isfinite(beta) || alpha < 0.0 || beta < 0.0) {
    throw ArgumentError("loss weights must be finite and nonnegative (alpha=" +
                        std::to_string(alpha) + ", beta=" + std::to_string(beta) + ")");
  }
}

const char* category_name(NegativeCategory c) {
  switch (c) {
    case NegativeCategory::kSameNodeDifferentTime: return "same-node-different-time";
    case NegativeCategory::kDifferentNodeSameTime: return "different-node-same-time";
    case NegativeCategory::kDifferentNodeDifferentTime: return "different-node-different-time";
  }
  return "?";
}

NegativeCategory categorize(std::size_t i, std::size_t l, std::size_t neg_i, std::size_t neg_l) {
  if (neg_i == i && neg_l == l) throw ArgumentError("categorize: sample equals the anchor");
  if (neg_i == i) return NegativeCategory::kSameNodeDifferentTime;
  if (neg_l == l) return NegativeCategory::kDifferentNodeSameTime;
  return NegativeCategory::kDifferentNodeDifferentTime;
}

std::size_t local_support_size(std::size_t n, std::size_t steps) { return n * steps - 1; }

namespace {

void check_anchor(std::size_t i, std::size_t l, std::size_t steps, std::size_t n) {
  if (n == 0 || steps == 0) throw ArgumentError("local negatives: empty node or step set");
  if (i >= n || l < 1 || l > steps) {
    throw ArgumentError("local negatives: anchor (" + std::to_string(i) + ", " +
                        std::to_string(l) + ") out of range");
  }
  if (local_support_size(n, steps) == 0) {
    throw ArgumentError("local negatives: empty support (n=1, N=1)");
  }
}

// Position s in neg_(i,l), enumerated by (step, node) with the anchor skipped.
LocalNegative local_at(std::size_t s, std::size_t i, std::size_t l, std::size_t n) {
  const std::size_t anchor = (l - 1) * n + i;
  const std::size_t flat = s < anchor ? s : s + 1;
  LocalNegative neg;
  neg.node = flat % n;
  neg.step = flat / n + 1;
  neg.category = categorize(i, l, neg.node, neg.step);
  return neg;
}

void check_global(std::size_t l, std::size_t steps) {
  if (steps < 2) throw ArgumentError("global negatives: empty support (N < 2)");
  if (l < 1 || l > steps) throw ArgumentError("global negatives: anchor step out of range");
}

}  // namespace

LocalNegativeSet sample_local_negatives(std::size_t i, std::size_t l, std::size_t steps,
                                        std::size_t n, std::size_t budget, Rng& rng) {
  check_anchor(i, l, steps, n);
  const auto support = local_support_size(n, steps);
  if (budget == 0 || budget > support) {
    throw ArgumentError("local negatives: budget " + std::to_string(budget) +
                        " outside [1, " + std::to_string(support) + "]");
  }
  LocalNegativeSet set{i, l, {}};
  for (auto s : sample_without_replacement(rng, support, budget)) {
    set.samples.push_back(local_at(s, i, l, n));
  }
  return set;
}

LocalNegativeSet enumerate_local_negatives(std::size_t i, std::size_t l, std::size_t steps,
                                           std::size_t n) {
  check_anchor(i, l, steps, n);
  LocalNegativeSet set{i, l, {}};
  const auto support = local_support_size(n, steps);
  set.samples.reserve(support);
  for (std::size_t s = 0; s < support; ++s) set.samples.push_back(local_at(s, i, l, n));
  return set;
}

GlobalNegativeSet sample_global_negatives(std::size_t l, std::size_t steps, std::size_t budget,
                                          Rng& rng) {
  check_global(l, steps);
  if (budget == 0 || budget > steps - 1) {
    throw ArgumentError("global negatives: budget " + std::to_string(budget) +
                        " outside [1, " + std::to_string(steps - 1) + "]");
  }
  GlobalNegativeSet set{l, {}};
  for (auto s : sample_without_replacement(rng, steps - 1, budget)) {
    const std::size_t step = s + 1;
    set.samples.push_back(step < l ? step : step + 1);
  }
  return set;
}

GlobalNegativeSet enumerate_global_negatives(std::size_t l, std::size_t steps) {
  check_global(l, steps);
  GlobalNegativeSet set{l, {}};
  for (std::size_t s = 1; s <= steps; ++s)
    if (s != l) set.samples.push_back(s);
  return set;
}

NegativePlan draw_negatives(std::size_t n, std::size_t steps, const NegativeConfig& config,
                            Rng& rng) {
  if (!config.exhaustive && config.budget == 0) {
    throw ArgumentError("negative budget must be positive");
  }
  NegativePlan plan;
  plan.local.resize(steps);
  const auto local_budget = std::min(config.budget, local_support_size(n, steps));
  const auto global_budget = std::min(config.budget, steps - 1);
  for (std::size_t l = 1; l <= steps; ++l) {
    auto& row = plan.local[l - 1];
    row.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      row.push_back(config.exhaustive
                        ? enumerate_local_negatives(i, l, steps, n)
                        : sample_local_negatives(i, l, steps, n, local_budget, rng));
    }
    plan.global.push_back(config.exhaustive
                              ? enumerate_global_negatives(l, steps)
                              : sample_global_negatives(l, steps, global_budget, rng));
  }
  return plan;
}

double balanced_pos_weight(const Matrix& adjacency) {
  const auto n = adjacency.rows();
  double edges = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) edges += adjacency(i, j) != 0.0 ? 1.0 : 0.0;
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return edges > 0.0 ? (pairs - edges) / edges : 1.0;
}

double bce_adjacency(const Matrix& probs, const Matrix& adjacency, double pos_weight,
                     double eps) {
  ad::Tape tape(false);
  return bce_adjacency(tape.constant(probs), adjacency, pos_weight, eps).scalar();
}

Var bce_adjacency(Var probs, const Matrix& adjacency, double pos_weight, double eps) {
  return ad::bce_upper(probs, &adjacency, pos_weight, eps);
}

Var prediction_loss(const ForwardOutputs& out, const SnapshotSequence& seq,
                    const BceOptions& bce) {
  const auto N = seq.length();
  if (N < 2 || out.predictions.size() != N - 1) {
    throw ArgumentError("prediction_loss: need N >= 2 and N-1 predictions");
  }
  std::vector<Var> terms;
  for (std::size_t k = 1; k < N; ++k) {
    const auto& target = seq.at(k + 1).adjacency;
    const double w = bce.balance ? balanced_pos_weight(target) : 1.0;
    terms.push_back(bce_adjacency(out.predictions[k - 1], target, w, bce.eps));
  }
  std::vector<double> weights(terms.size(), 1.0 / static_cast<double>(terms.size()));
  return ad::weighted_sum(terms, weights);
}

Var reconstruction_loss(const ForwardOutputs& out, const SnapshotSequence& seq,
                        const BceOptions& bce) {
  const auto N = seq.length();
  if (N < 1 || out.reconstructions.size() != N) {
    throw ArgumentError("reconstruction_loss: need one reconstruction per snapshot");
  }
  std::vector<Var> terms;
  for (std::size_t k = 1; k <= N; ++k) {
    const auto& target = seq.at(k).adjacency;
    const double w = bce.balance ? balanced_pos_weight(target) : 1.0;
    terms.push_back(bce_adjacency(out.reconstructions[k - 1], target, w, bce.eps));
  }
  std::vector<double> weights(terms.size(), 1.0 / static_cast<double>(terms.size()));
  return ad::weighted_sum(terms, weights);
}

Var local_nce(Var prediction, std::span<const Var> structural, std::size_t l,
              std::span<const LocalNegativeSet> negatives) {
  if (l < 1 || l > structural.size()) throw ArgumentError("local_nce: step out of range");
  if (negatives.size() != static_cast<std::size_t>(prediction.rows())) {
    throw ArgumentError("local_nce: need one negative set per node");
  }
  std::vector<std::vector<ad::RowRef>> refs(negatives.size());
  for (std::size_t i = 0; i < negatives.size(); ++i) {
    if (negatives[i].samples.empty()) throw ArgumentError("local_nce: empty negative set");
    for (const auto& s : negatives[i].samples) {
      if (s.step < 1 || s.step > structural.size()) {
        throw ArgumentError("local_nce: negative step out of range");
      }
      refs[i].push_back({s.step - 1, static_cast<Eigen::Index>(s.node)});
    }
  }
  return ad::info_nce_rows(prediction, structural, l - 1, refs);
}

Var global_nce(Var prediction, std::span<const Var> graph_structural, std::size_t l,
               const GlobalNegativeSet& negatives) {
  if (l < 1 || l > graph_structural.size()) throw ArgumentError("global_nce: step out of range");
  if (negatives.samples.empty()) throw ArgumentError("global_nce: empty negative set");
  std::vector<std::vector<ad::RowRef>> refs(1);
  for (auto s : negatives.samples) {
    if (s < 1 || s > graph_structural.size()) {
      throw ArgumentError("global_nce: negative step out of range");
    }
    refs[0].push_back({s - 1, 0});
  }
  return ad::info_nce_rows(prediction, graph_structural, l - 1, refs);
}

double local_nce(const Matrix& prediction, std::span<const Matrix> structural, std::size_t l,
                 std::span<const LocalNegativeSet> negatives) {
  ad::Tape tape(false);
  std::vector<Var> z;
  for (const auto& m : structural) z.push_back(tape.constant(m));
  return local_nce(tape.constant(prediction), z, l, negatives).scalar();
}

double global_nce(const RowVector& prediction, std::span<const RowVector> graph_structural,
                  std::size_t l, const GlobalNegativeSet& negatives) {
  ad::Tape tape(false);
  std::vector<Var> z;
  for (const auto& r : graph_structural) z.push_back(tape.constant(Matrix(r)));
  return global_nce(tape.constant(Matrix(prediction)), z, l, negatives).scalar();
}

CpcTerms cpc_loss(const ForwardOutputs& out, const NegativePlan& plan) {
  const auto N = out.states.size();
  if (N < 2) throw ArgumentError("cpc_loss: need N >= 2");
  if (plan.local.size() != N || plan.global.size() != N) {
    throw ArgumentError("cpc_loss: negative plan does not match sequence length");
  }
  std::vector<Var> local_terms, global_terms;
  for (std::size_t k = 1; k < N; ++k) {
    for (std::size_t l = k + 1; l <= N; ++l) {
      if (auto it = out.local_predictions.find({k, l}); it != out.local_predictions.end()) {
        local_terms.push_back(local_nce(it->second, out.structural, l, plan.local[l - 1]));
      }
      if (auto it = out.global_predictions.find({k, l}); it != out.global_predictions.end()) {
        global_terms.push_back(
            global_nce(it->second, out.graph_structural, l, plan.global[l - 1]));
      }
    }
  }
  const double scale = 1.0 / static_cast<double>(N - 1);
  CpcTerms terms;
  if (!local_terms.empty()) {
    terms.local = ad::weighted_sum(local_terms, std::vector<double>(local_terms.size(), scale));
  }
  if (!global_terms.empty()) {
    terms.global =
        ad::weighted_sum(global_terms, std::vector<double>(global_terms.size(), scale));
  }
  return terms;
}

LossBreakdown total_loss(const ForwardOutputs& out, const SnapshotSequence& seq,
                         const LossWeights& weights, const NegativePlan& plan,
                         const LossToggles& toggles, const BceOptions& bce) {
  weights.validate();
  LossBreakdown b;
  std::vector<Var> terms;
  std::vector<double> w;
  Var pred = prediction_loss(out, seq, bce);
  b.prediction = pred.scalar();
  terms.push_back(pred);
  w.push_back(1.0);
  if (toggles.reconstruction) {
    Var recon = reconstruction_loss(out, seq, bce);
    b.reconstruction = recon.scalar();
    terms.push_back(recon);
    w.push_back(weights.alpha);
  }
  if (toggles.local_nce || toggles.global_nce) {
    const auto cpc = cpc_loss(out, plan);
    if (toggles.local_nce) {
      if (!cpc.local.valid()) throw ArgumentError("total_loss: local predictions missing");
      b.cpc_local = cpc.local.scalar();
      terms.push_back(cpc.local);
      w.push_back(weights.beta);
    }
    if (toggles.global_nce) {
      if (!cpc.global.valid()) throw ArgumentError("total_loss: global predictions missing");
      b.cpc_global = cpc.global.scalar();
      terms.push_back(cpc.global);
      w.push_back(weights.beta);
    }
  }
  b.total = ad::weighted_sum(terms, w);
  b.value = b.total.scalar();
  return b;
}

double total_loss(double prediction, double reconstruction, double cpc,
                  const LossWeights& weights) {
  weights.validate();
  return prediction + weights.alpha * reconstruction + weights.beta * cpc;
}

}  // namespace tenence
