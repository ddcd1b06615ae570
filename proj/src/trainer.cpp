#include "tenence/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace tenence {

namespace {

bool negatives_needed(const LossToggles& t) { return t.local_nce || t.global_nce; }

ForwardHeads heads_for(const LossToggles& t) {
  return {t.reconstruction, t.local_nce, t.global_nce};
}

std::vector<Var> leaves(const BoundModel& model) {
  std::vector<Var> out;
  for_each_tensor(model.tensors, [&](const std::string&, const Var& v) { out.push_back(v); });
  return out;
}

std::vector<Matrix*> tensors(ModelParameters& p) {
  std::vector<Matrix*> out;
  for_each_tensor(p.tensors, [&](const std::string&, Matrix& m) { out.push_back(&m); });
  return out;
}

std::vector<std::string> tensor_names(const ModelParameters& p) {
  std::vector<std::string> out;
  for_each_tensor(p.tensors, [&](const std::string& name, const Matrix&) { out.push_back(name); });
  return out;
}

std::vector<Matrix> collect_grads(const std::vector<Var>& vars) {
  std::vector<Matrix> grads;
  grads.reserve(vars.size());
  for (const auto& v : vars) grads.push_back(v.grad());
  return grads;
}

}  // namespace

void TrainConfig::validate() const {
  auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
  if (!positive(lr)) throw ArgumentError("lr must be positive");
  if (!(std::isfinite(weight_decay) && weight_decay >= 0.0)) {
    throw ArgumentError("weight_decay must be nonnegative");
  }
  if (!(scheduler_factor > 0.0 && scheduler_factor < 1.0)) {
    throw ArgumentError("scheduler_factor must lie in (0, 1)");
  }
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw ArgumentError("Adam betas must lie in [0, 1)");
  }
  if (!positive(adam_eps)) throw ArgumentError("adam_eps must be positive");
  if (!(std::isfinite(scheduler_threshold) && scheduler_threshold >= 0.0)) {
    throw ArgumentError("scheduler_threshold must be nonnegative");
  }
  if (!negatives.exhaustive && negatives.budget == 0) {
    throw ArgumentError("nce negative budget must be positive");
  }
  weights.validate();
}

std::string TrainHistory::to_text() const {
  std::string out = "# epoch total prediction reconstruction cpc_local cpc_global lr\n";
  char buf[512];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%zu %.17g %.17g %.17g %.17g %.17g %.17g\n", r.epoch, r.total,
                  r.prediction, r.reconstruction, r.cpc_local, r.cpc_global, r.lr);
    out += buf;
  }
  return out;
}

PlateauScheduler::PlateauScheduler(double lr, double factor, std::size_t patience,
                                   double threshold, double min_lr)
    : lr_(lr),
      factor_(factor),
      threshold_(threshold),
      min_lr_(min_lr),
      patience_(patience),
      best_(std::numeric_limits<double>::infinity()) {}

double PlateauScheduler::step(double loss) {
  if (loss < best_ * (1.0 - threshold_)) {
    best_ = loss;
    bad_epochs_ = 0;
  } else {
    ++bad_epochs_;
  }
  if (bad_epochs_ > patience_) {
    lr_ = std::max(lr_ * factor_, min_lr_);
    bad_epochs_ = 0;
  }
  return lr_;
}

AdamW::AdamW(const ModelParameters& shape, double beta1, double beta2, double eps,
             double weight_decay)
    : beta1_(beta1), beta2_(beta2), eps_(eps), weight_decay_(weight_decay) {
  for_each_tensor(shape.tensors, [&](const std::string&, const Matrix& m) {
    m_.push_back(Matrix::Zero(m.rows(), m.cols()));
    v_.push_back(Matrix::Zero(m.rows(), m.cols()));
  });
}

void AdamW::step(ModelParameters& params, const std::vector<Matrix>& grads, double lr) {
  auto ptrs = tensors(params);
  if (grads.size() != ptrs.size()) throw ArgumentError("AdamW: gradient count mismatch");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < ptrs.size(); ++i) {
    if (grads[i].size() == 0) continue;
    Matrix& p = *ptrs[i];
    p *= 1.0 - lr * weight_decay_;
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i].cwiseAbs2();
    p.array() -= lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_);
  }
}

LossAndGradient loss_and_gradient(const ModelParameters& params, const PreparedSequence& seq,
                                  const LossWeights& weights, const NegativePlan& plan,
                                  const LossToggles& toggles, const BceOptions& bce) {
  ad::Tape tape;
  const auto model = bind(tape, params, true);
  const auto out = forward_training(seq, model, heads_for(toggles));
  LossAndGradient result;
  result.breakdown = total_loss(out, seq.sequence(), weights, plan, toggles, bce);
  tape.backward(result.breakdown.total);
  result.grads = collect_grads(leaves(model));
  return result;
}

TrainResult train_model(const SnapshotSequence& train, const TrainConfig& config,
                        const EpochCallback& on_epoch) {
  ModelConfig mc = config.model;
  if (mc.feature_dim == 0) mc.feature_dim = train.feature_dim();
  return train_model(train, config, init_parameters(mc, config.seed), on_epoch);
}

TrainResult train_model(const SnapshotSequence& train, const TrainConfig& config,
                        ModelParameters init, const EpochCallback& on_epoch) {
  config.validate();
  if (train.length() < 2) throw ArgumentError("train_model: need at least 2 snapshots");
  if (init.config.feature_dim != train.feature_dim()) {
    throw ArgumentError("train_model: model feature dim does not match data");
  }
  PreparedSequence prepared(train);
  Rng negative_rng = make_stream(config.seed, "negatives");
  AdamW optimizer(init, config.adam_beta1, config.adam_beta2, config.adam_eps,
                  config.weight_decay);
  PlateauScheduler scheduler(config.lr, config.scheduler_factor, config.scheduler_patience,
                             config.scheduler_threshold, config.min_lr);

  TrainResult result{init, {}};
  ModelParameters current = std::move(init);
  result.history.best_loss = std::numeric_limits<double>::infinity();
  const NegativePlan no_negatives;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    NegativePlan plan;
    if (negatives_needed(config.toggles)) {
      plan = draw_negatives(train.num_nodes(), train.length(), config.negatives, negative_rng);
    }
    auto lg = loss_and_gradient(current, prepared, config.weights,
                                negatives_needed(config.toggles) ? plan : no_negatives,
                                config.toggles, config.bce);
    const auto& b = lg.breakdown;
    EpochRecord rec{epoch, b.value, b.prediction, b.reconstruction, b.cpc_local, b.cpc_global,
                    scheduler.lr()};
    if (!std::isfinite(b.value)) {
      throw NumericFailure("non-finite loss at epoch " + std::to_string(epoch), rec);
    }
    const auto names = tensor_names(current);
    for (std::size_t i = 0; i < lg.grads.size(); ++i) {
      if (lg.grads[i].size() != 0 && !lg.grads[i].allFinite()) {
        throw NumericFailure("non-finite gradient for " + names[i] + " at epoch " +
                                 std::to_string(epoch),
                             rec);
      }
    }
    result.history.records.push_back(rec);
    if (b.value < result.history.best_loss) {
      result.history.best_loss = b.value;
      result.history.best_epoch = epoch;
      if (config.select_best) result.params = current;
    }
    optimizer.step(current, lg.grads, scheduler.lr());
    scheduler.step(b.value);
    if (on_epoch && !on_epoch(rec)) break;
  }
  if (!config.select_best && !result.history.records.empty()) result.params = std::move(current);
  if (result.history.records.empty()) result.history.best_loss = 0.0;
  return result;
}

const char* loss_term_name(LossTerm term) {
  switch (term) {
    case LossTerm::kPrediction: return "prediction";
    case LossTerm::kReconstruction: return "reconstruction";
    case LossTerm::kLocalNce: return "local_nce";
    case LossTerm::kGlobalNce: return "global_nce";
    case LossTerm::kTotal: return "total";
  }
  return "?";
}

namespace {

Var selected_term(const ForwardOutputs& out, const SnapshotSequence& seq, LossTerm term,
                  const NegativePlan& plan) {
  switch (term) {
    case LossTerm::kPrediction: return prediction_loss(out, seq);
    case LossTerm::kReconstruction: return reconstruction_loss(out, seq);
    case LossTerm::kLocalNce: return cpc_loss(out, plan).local;
    case LossTerm::kGlobalNce: return cpc_loss(out, plan).global;
    case LossTerm::kTotal: return total_loss(out, seq, LossWeights{}, plan).total;
  }
  throw ArgumentError("unknown loss term");
}

double evaluate_term(const ModelParameters& params, const PreparedSequence& seq, LossTerm term,
                     const NegativePlan& plan) {
  ad::Tape tape(false);
  const auto model = bind(tape, params, false);
  return selected_term(forward_training(seq, model), seq.sequence(), term, plan).scalar();
}

}  // namespace

GradientCheckResult gradient_check(const ModelParameters& params, const SnapshotSequence& seq,
                                   LossTerm term, std::uint64_t seed, double h, double floor) {
  PreparedSequence prepared(seq);
  Rng rng = make_stream(seed, "negatives");
  const auto plan = draw_negatives(seq.num_nodes(), seq.length(), NegativeConfig{}, rng);

  std::vector<Matrix> analytic;
  {
    ad::Tape tape;
    const auto model = bind(tape, params, true);
    const auto out = forward_training(prepared, model);
    tape.backward(selected_term(out, seq, term, plan));
    analytic = collect_grads(leaves(model));
  }

  GradientCheckResult result;
  ModelParameters probe = params;
  auto ptrs = tensors(probe);
  const auto names = tensor_names(probe);
  for (std::size_t t = 0; t < ptrs.size(); ++t) {
    Matrix& m = *ptrs[t];
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double saved = m.data()[i];
      m.data()[i] = saved + h;
      const double up = evaluate_term(probe, prepared, term, plan);
      m.data()[i] = saved - h;
      const double down = evaluate_term(probe, prepared, term, plan);
      m.data()[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[t].size() == 0 ? 0.0 : analytic[t].data()[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), floor});
      const double rel = std::abs(a - numeric) / denom;
      ++result.checked;
      if (rel > result.max_relative_error) {
        result.max_relative_error = rel;
        result.worst_tensor = names[t];
      }
    }
  }
  return result;
}

}  // namespace tenence
