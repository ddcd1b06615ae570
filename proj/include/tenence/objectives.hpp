// Loss terms: weighted BCE for prediction and reconstruction, local and
// global infoNCE for the CPC term, plus negative sampling.

#ifndef TENENCE_OBJECTIVES_HPP
#define TENENCE_OBJECTIVES_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tenence/autodiff.hpp"
#include "tenence/graph.hpp"
#include "tenence/model.hpp"
#include "tenence/random.hpp"

namespace tenence {

struct LossWeights {
  double alpha = 1.0;  // reconstruction
  double beta = 1.0;   // CPC

  /// Throws ArgumentError unless both weights are finite and >= 0.
  void validate() const;
};

/// Three-way split of neg_(i,l).
enum class NegativeCategory {
  kSameNodeDifferentTime,
  kDifferentNodeSameTime,
  kDifferentNodeDifferentTime,
};

const char* category_name(NegativeCategory c);
NegativeCategory categorize(std::size_t i, std::size_t l, std::size_t neg_i, std::size_t neg_l);

struct LocalNegative {
  std::size_t node = 0;
  std::size_t step = 0;  // 1-based
  NegativeCategory category = NegativeCategory::kSameNodeDifferentTime;
};

struct LocalNegativeSet {
  std::size_t node = 0;  // anchor i
  std::size_t step = 0;  // anchor l, 1-based
  std::vector<LocalNegative> samples;
};

struct GlobalNegativeSet {
  std::size_t step = 0;  // anchor l, 1-based
  std::vector<std::size_t> samples;
};

/// |neg_(i,l)| = n N - 1.
std::size_t local_support_size(std::size_t n, std::size_t steps);

/// `budget` distinct draws from neg_(i,l), uniform without replacement.
/// Throws ArgumentError when budget is 0 or exceeds the support.
LocalNegativeSet sample_local_negatives(std::size_t i, std::size_t l, std::size_t steps,
                                        std::size_t n, std::size_t budget, Rng& rng);
/// The whole of neg_(i,l), ordered by (step, node).
LocalNegativeSet enumerate_local_negatives(std::size_t i, std::size_t l, std::size_t steps,
                                           std::size_t n);

GlobalNegativeSet sample_global_negatives(std::size_t l, std::size_t steps, std::size_t budget,
                                          Rng& rng);
GlobalNegativeSet enumerate_global_negatives(std::size_t l, std::size_t steps);

struct NegativeConfig {
  std::size_t budget = 10;  // per anchor; clamped to the support size
  bool exhaustive = false;
};

/// Negatives for every anchor, drawn once and shared by all context steps k < l.
struct NegativePlan {
  std::vector<std::vector<LocalNegativeSet>> local;  // [l-1][i]
  std::vector<GlobalNegativeSet> global;             // [l-1]
};

NegativePlan draw_negatives(std::size_t n, std::size_t steps, const NegativeConfig& config,
                            Rng& rng);

struct BceOptions {
  bool balance = true;  // pos_weight = #non-edges / #edges; 1 otherwise
  double eps = 1e-7;
};

/// #non-edges / #edges over the strict upper triangle; 1 for an edgeless graph.
double balanced_pos_weight(const Matrix& adjacency);

double bce_adjacency(const Matrix& probs, const Matrix& adjacency, double pos_weight,
                     double eps = 1e-7);
Var bce_adjacency(Var probs, const Matrix& adjacency, double pos_weight, double eps = 1e-7);

/// Mean over k = 1..N-1 of BCE(A~_{k+1}, A_{k+1}).
Var prediction_loss(const ForwardOutputs& out, const SnapshotSequence& seq,
                    const BceOptions& bce = {});
/// Mean over k = 1..N of BCE(A^_k, A_k).
Var reconstruction_loss(const ForwardOutputs& out, const SnapshotSequence& seq,
                        const BceOptions& bce = {});

/// localNCE for one (k, l). `structural` holds Z_1..Z_N; `negatives[i]` is the
/// set for anchor (i, l).
Var local_nce(Var prediction, std::span<const Var> structural, std::size_t l,
              std::span<const LocalNegativeSet> negatives);
/// globalNCE for one (k, l). `graph_structural` holds z_1..z_N as 1 x d rows.
Var global_nce(Var prediction, std::span<const Var> graph_structural, std::size_t l,
               const GlobalNegativeSet& negatives);

double local_nce(const Matrix& prediction, std::span<const Matrix> structural, std::size_t l,
                 std::span<const LocalNegativeSet> negatives);
double global_nce(const RowVector& prediction, std::span<const RowVector> graph_structural,
                  std::size_t l, const GlobalNegativeSet& negatives);

struct CpcTerms {
  Var local;   // (1/(N-1)) sum_k sum_{l>k} localNCE
  Var global;  // same for globalNCE
};

/// Either term is left invalid when its predictions are absent from `out`.
CpcTerms cpc_loss(const ForwardOutputs& out, const NegativePlan& plan);

struct LossToggles {
  bool reconstruction = true;
  bool local_nce = true;
  bool global_nce = true;
};

struct LossBreakdown {
  Var total;
  double prediction = 0.0;
  double reconstruction = 0.0;
  double cpc_local = 0.0;
  double cpc_global = 0.0;
  double value = 0.0;

  double cpc() const { return cpc_local + cpc_global; }
};

/// L = L_pred + alpha L_recon + beta L_cpc. Disabled terms contribute 0 and
/// report 0.
LossBreakdown total_loss(const ForwardOutputs& out, const SnapshotSequence& seq,
                         const LossWeights& weights, const NegativePlan& plan,
                         const LossToggles& toggles = {}, const BceOptions& bce = {});

double total_loss(double prediction, double reconstruction, double cpc,
                  const LossWeights& weights);

}  // namespace tenence

#endif  // TENENCE_OBJECTIVES_HPP
