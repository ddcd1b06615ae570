// End-to-end orchestration shared by the CLI and the acceptance harness:
// dataset resolution, per-seed training, evaluation and the loss ablation.

#ifndef TENENCE_PIPELINE_HPP
#define TENENCE_PIPELINE_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tenence/evaluation.hpp"
#include "tenence/graph.hpp"
#include "tenence/run_config.hpp"
#include "tenence/trainer.hpp"

namespace tenence {

/// A dataset that cannot be located or read.
class DatasetUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ResolvedDataset {
  std::string id;
  std::filesystem::path source;
  SnapshotSequence seq;
};

/// Manifest search order: $TENENCE_MANIFEST, $TENENCE_DATA_DIR/datasets.json,
/// ./data/datasets.json. Returns nullopt when none exists.
std::optional<std::filesystem::path> locate_manifest();

/// `spec` is a manifest id, a canonical snapshot container, or an event list
/// (which then needs `steps`). `steps` > 0 also overrides a manifest's N.
ResolvedDataset resolve_dataset(const std::string& spec, std::size_t steps = 0,
                                const std::optional<std::filesystem::path>& manifest = {});

/// Trains on snapshots 1..N-test_steps with the given seed.
TrainResult train_seed(const SnapshotSequence& seq, const RunConfig& config, std::uint64_t seed);

/// Evaluates parameters on the last `test_steps` snapshots.
std::vector<StepMetrics> evaluate_seed(const ModelParameters& params, const SnapshotSequence& seq,
                                       const RunConfig& config, std::uint64_t seed);

struct SeedOutcome {
  std::uint64_t seed = 0;
  TrainResult train;
  std::vector<StepMetrics> metrics;
};

/// Train then evaluate for every configured seed.
std::vector<SeedOutcome> train_and_evaluate(const SnapshotSequence& seq, const RunConfig& config);

MetricsReport make_report(const std::string& label, const std::vector<SeedOutcome>& outcomes);

struct AblationVariant {
  std::string name;
  LossToggles toggles;
};

/// pred; pred + recon; pred + recon + localNCE; full loss.
std::vector<AblationVariant> ablation_variants();

struct AblationRow {
  AblationVariant variant;
  MetricsReport report;
};

std::vector<AblationRow> run_ablation(const SnapshotSequence& seq, const RunConfig& config);

/// Rows in variant order, mean +- std of AUC / AP / MRR (percent) for one regime.
std::string ablation_table(const std::vector<AblationRow>& rows, Regime regime);

}  // namespace tenence

#endif  // TENENCE_PIPELINE_HPP
