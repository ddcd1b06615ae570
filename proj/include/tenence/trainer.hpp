// Full-sequence training: one forward/backward pass and one AdamW step per
// epoch, a reduce-on-plateau learning-rate schedule, and best-loss model
// selection.

#ifndef TENENCE_TRAINER_HPP
#define TENENCE_TRAINER_HPP

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tenence/model.hpp"
#include "tenence/objectives.hpp"

namespace tenence {

struct TrainConfig {
  double lr = 1e-3;
  double weight_decay = 5e-4;  // decoupled
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double scheduler_factor = 0.8;
  std::size_t scheduler_patience = 20;
  double scheduler_threshold = 1e-4;  // relative
  double min_lr = 0.0;
  std::size_t epochs = 1000;
  std::uint64_t seed = 0;
  bool select_best = true;

  LossWeights weights;
  ModelConfig model;  // feature_dim is taken from the data when 0
  NegativeConfig negatives;
  LossToggles toggles;
  BceOptions bce;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double total = 0.0;
  double prediction = 0.0;
  double reconstruction = 0.0;
  double cpc_local = 0.0;
  double cpc_global = 0.0;
  double lr = 0.0;  // rate used for this epoch's step
};

struct TrainHistory {
  std::vector<EpochRecord> records;
  std::size_t best_epoch = 0;  // 0: initial parameters kept
  double best_loss = 0.0;

  /// One line per epoch: `epoch total pred recon cpc_local cpc_global lr`,
  /// values printed with 17 significant digits.
  std::string to_text() const;
};

struct TrainResult {
  ModelParameters params;
  TrainHistory history;
};

/// Non-finite loss or gradient. Carries the breakdown of the failing epoch.
class NumericFailure : public std::runtime_error {
 public:
  NumericFailure(const std::string& what, EpochRecord record)
      : std::runtime_error(what), record_(record) {}
  const EpochRecord& record() const { return record_; }

 private:
  EpochRecord record_;
};

/// ReduceLROnPlateau in "min" mode with a relative threshold.
class PlateauScheduler {
 public:
  PlateauScheduler(double lr, double factor, std::size_t patience, double threshold,
                   double min_lr = 0.0);
  /// Feeds one epoch's loss; returns the learning rate for the next epoch.
  double step(double loss);
  double lr() const { return lr_; }

 private:
  double lr_, factor_, threshold_, min_lr_;
  std::size_t patience_;
  double best_;
  std::size_t bad_epochs_ = 0;
};

/// Decoupled-weight-decay Adam over every tensor of a ModelParameters.
class AdamW {
 public:
  AdamW(const ModelParameters& shape, double beta1, double beta2, double eps,
        double weight_decay);
  /// Tensors whose gradient is empty are left untouched.
  void step(ModelParameters& params, const std::vector<Matrix>& grads, double lr);

 private:
  std::vector<Matrix> m_, v_;
  double beta1_, beta2_, eps_, weight_decay_;
  std::size_t t_ = 0;
};

/// Per-epoch hook; returning false stops training early.
using EpochCallback = std::function<bool(const EpochRecord&)>;

TrainResult train_model(const SnapshotSequence& train, const TrainConfig& config,
                        const EpochCallback& on_epoch = nullptr);

/// Starts from given parameters instead of a fresh initialization.
TrainResult train_model(const SnapshotSequence& train, const TrainConfig& config,
                        ModelParameters init, const EpochCallback& on_epoch = nullptr);

/// Loss evaluation plus gradients for every tensor (for_each_tensor order).
struct LossAndGradient {
  LossBreakdown breakdown;
  std::vector<Matrix> grads;  // empty matrix where no gradient reached
};

LossAndGradient loss_and_gradient(const ModelParameters& params, const PreparedSequence& seq,
                                  const LossWeights& weights, const NegativePlan& plan,
                                  const LossToggles& toggles, const BceOptions& bce);

enum class LossTerm { kPrediction, kReconstruction, kLocalNce, kGlobalNce, kTotal };

const char* loss_term_name(LossTerm term);

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::string worst_tensor;
  std::size_t checked = 0;
};

/// Central differences with step `h` against the analytic gradient of one
/// term, over every entry of every tensor. Relative error per entry is
/// |g - f| / max(|g|, |f|, floor).
GradientCheckResult gradient_check(const ModelParameters& params, const SnapshotSequence& seq,
                                   LossTerm term, std::uint64_t seed = 0, double h = 1e-5,
                                   double floor = 1e-6);

}  // namespace tenence

#endif  // TENENCE_TRAINER_HPP
