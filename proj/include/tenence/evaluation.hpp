// Dynamic link prediction evaluation: the four positive/negative regimes,
// per-step scoring from history-only states, and multi-run aggregation.

#ifndef TENENCE_EVALUATION_HPP
#define TENENCE_EVALUATION_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tenence/graph.hpp"
#include "tenence/model.hpp"
#include "tenence/random.hpp"

namespace tenence {

enum class Regime { kRandPosRandNeg, kRandPosHistNeg, kHistPosRandNeg, kHistPosHistNeg };

inline constexpr std::array<Regime, 4> kAllRegimes = {
    Regime::kRandPosRandNeg, Regime::kRandPosHistNeg, Regime::kHistPosRandNeg,
    Regime::kHistPosHistNeg};

/// "RandPos-RandNeg", "RandPos-HistNeg", "HistPos-RandNeg", "HistPos-HistNeg".
std::string regime_name(Regime r);
/// Accepts the names above, case-insensitive. Throws ArgumentError otherwise.
Regime parse_regime(const std::string& name);

/// A regime's positive or negative pool is empty at this step.
class RegimeUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Edge sets around a prediction step k+1 with history 1..k.
struct EdgeSets {
  std::vector<Edge> next;      // E_{k+1}
  std::vector<Edge> history;   // union of E_1..E_k
  std::vector<Edge> hist_pos;  // E_{k+1} & history
  std::vector<Edge> hist_neg;  // history \ E_{k+1}
};

/// All lists sorted. Requires 1 <= k < N.
EdgeSets edge_sets(const SnapshotSequence& seq, std::size_t k);

struct SubsetOptions {
  double ratio = 1.0;         // negatives per positive
  std::size_t mrr_pool = 100;  // candidate negatives per positive for MRR
};

struct EvalSubset {
  Regime regime = Regime::kRandPosRandNeg;
  std::size_t step = 0;  // the predicted step k+1
  std::vector<Edge> positives;
  std::vector<Edge> negatives;
  std::vector<Edge> negative_pool;  // the regime's full negative set
  std::vector<std::vector<std::size_t>> mrr_candidates;  // per positive, into negative_pool
};

/// Rand-Pos takes all of E_{k+1}; Hist-Pos takes E_{k+1} & history.
/// Rand-Neg draws from the non-edges of step k+1; Hist-Neg from history \ E_{k+1}.
/// When the negative pool cannot supply ratio * |positives| edges, positives
/// are subsampled so the ratio holds. Throws RegimeUnavailable on an empty pool.
EvalSubset build_eval_subsets(const SnapshotSequence& seq, std::size_t k, Regime regime,
                              const SubsetOptions& options, Rng& rng);

struct StepMetrics {
  Regime regime = Regime::kRandPosRandNeg;
  std::size_t step = 0;
  bool available = false;
  std::string reason;  // why the regime was unavailable
  double auc = 0.0, ap = 0.0, mrr = 0.0;
  std::size_t positives = 0, negatives = 0;
};

struct EvalConfig {
  std::vector<Regime> regimes{kAllRegimes.begin(), kAllRegimes.end()};
  SubsetOptions subsets;
  std::uint64_t seed = 0;  // "eval" stream
};

/// Predictor embeddings from S_{t-1}, computed on snapshots 1..t-1 only.
Matrix history_embeddings(const ModelParameters& params, const SnapshotSequence& seq,
                          std::size_t t);

/// Metrics for every (test step, regime). Test steps are 1-based and >= 2.
std::vector<StepMetrics> evaluate_run(const ModelParameters& params, const SnapshotSequence& seq,
                                      std::span<const std::size_t> test_indices,
                                      const EvalConfig& config);

struct RunMetrics {
  std::uint64_t seed = 0;
  std::vector<StepMetrics> steps;
};

enum class Metric { kAuc, kAp, kMrr };
const char* metric_name(Metric m);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population
};

struct RegimeAggregate {
  Regime regime = Regime::kRandPosRandNeg;
  std::size_t runs = 0;  // runs with at least one available step
  MeanStd auc, ap, mrr;
};

struct MetricsReport {
  std::string label;
  std::vector<RunMetrics> runs;

  /// Per-run value: mean over that run's available test steps. Runs where
  /// the regime was never available are skipped.
  std::vector<double> per_run(Regime regime, Metric metric) const;
  std::optional<RegimeAggregate> aggregate(Regime regime) const;

  /// Tab-separated records `label seed regime step metric value`, one per
  /// regime x step x run x metric; unavailable entries carry `null`.
  std::string to_records() const;
  /// One row per regime: mean +- std of AUC, AP, MRR in percent.
  std::string summary_table() const;
};

MeanStd mean_std(std::span<const double> values);

}  // namespace tenence

#endif  // TENENCE_EVALUATION_HPP
