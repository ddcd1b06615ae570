#include "tenence/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <set>

#include "tenence/metrics.hpp"

namespace tenence {

std::string regime_name(Regime r) {
  switch (r) {
    case Regime::kRandPosRandNeg: return "RandPos-RandNeg";
    case Regime::kRandPosHistNeg: return "RandPos-HistNeg";
    case Regime::kHistPosRandNeg: return "HistPos-RandNeg";
    case Regime::kHistPosHistNeg: return "HistPos-HistNeg";
  }
  return "?";
}

Regime parse_regime(const std::string& name) {
  auto lower = [](std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
  };
  for (auto r : kAllRegimes)
    if (lower(regime_name(r)) == lower(name)) return r;
  throw ArgumentError("unknown regime '" + name + "'");
}

const char* metric_name(Metric m) {
  switch (m) {
    case Metric::kAuc: return "auc";
    case Metric::kAp: return "ap";
    case Metric::kMrr: return "mrr";
  }
  return "?";
}

EdgeSets edge_sets(const SnapshotSequence& seq, std::size_t k) {
  if (k < 1 || k >= seq.length()) {
    throw ArgumentError("edge_sets: history end k=" + std::to_string(k) + " must be in [1, N)");
  }
  EdgeSets s;
  s.next = seq.at(k + 1).edges();
  std::set<Edge> hist;
  for (std::size_t l = 1; l <= k; ++l) {
    for (const auto& e : seq.at(l).edges()) hist.insert(e);
  }
  s.history.assign(hist.begin(), hist.end());
  std::sort(s.next.begin(), s.next.end());
  std::set_intersection(s.next.begin(), s.next.end(), s.history.begin(), s.history.end(),
                        std::back_inserter(s.hist_pos));
  std::set_difference(s.history.begin(), s.history.end(), s.next.begin(), s.next.end(),
                      std::back_inserter(s.hist_neg));
  return s;
}

namespace {

std::vector<Edge> non_edges(const Snapshot& snap) {
  std::vector<Edge> out;
  const auto n = snap.num_nodes();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (snap.adjacency(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) == 0.0)
        out.emplace_back(i, j);
  return out;
}

// `count` items of `pool`, kept in pool order.
std::vector<Edge> subsample(const std::vector<Edge>& pool, std::size_t count, Rng& rng) {
  if (count >= pool.size()) return pool;
  auto idx = sample_without_replacement(rng, pool.size(), count);
  std::sort(idx.begin(), idx.end());
  std::vector<Edge> out;
  out.reserve(count);
  for (auto i : idx) out.push_back(pool[i]);
  return out;
}

}  // namespace

EvalSubset build_eval_subsets(const SnapshotSequence& seq, std::size_t k, Regime regime,
                              const SubsetOptions& options, Rng& rng) {
  if (!(options.ratio > 0.0) || !std::isfinite(options.ratio)) {
    throw ArgumentError("negative ratio must be positive");
  }
  if (options.mrr_pool == 0) throw ArgumentError("MRR pool must be positive");
  const auto sets = edge_sets(seq, k);
  const bool hist_pos = regime == Regime::kHistPosRandNeg || regime == Regime::kHistPosHistNeg;
  const bool hist_neg = regime == Regime::kRandPosHistNeg || regime == Regime::kHistPosHistNeg;

  EvalSubset sub;
  sub.regime = regime;
  sub.step = k + 1;
  std::vector<Edge> positives = hist_pos ? sets.hist_pos : sets.next;
  sub.negative_pool = hist_neg ? sets.hist_neg : non_edges(seq.at(k + 1));
  const std::string where = regime_name(regime) + " at step " + std::to_string(k + 1);
  if (positives.empty()) throw RegimeUnavailable(where + ": no positive edges");
  if (sub.negative_pool.empty()) throw RegimeUnavailable(where + ": no negative edges");

  auto wanted = [&](std::size_t p) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(
                                        std::llround(options.ratio * static_cast<double>(p))));
  };
  std::size_t pos_count = positives.size();
  if (wanted(pos_count) > sub.negative_pool.size()) {
    pos_count = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(static_cast<double>(sub.negative_pool.size()) /
                                               options.ratio)));
    while (pos_count > 1 && wanted(pos_count) > sub.negative_pool.size()) --pos_count;
  }
  sub.positives = subsample(positives, pos_count, rng);
  sub.negatives =
      subsample(sub.negative_pool, std::min(wanted(pos_count), sub.negative_pool.size()), rng);

  const auto pool = std::min<std::size_t>(options.mrr_pool, sub.negative_pool.size());
  sub.mrr_candidates.reserve(sub.positives.size());
  for (std::size_t i = 0; i < sub.positives.size(); ++i) {
    std::vector<std::size_t> c;
    for (auto idx : sample_without_replacement(rng, sub.negative_pool.size(), pool)) {
      c.push_back(static_cast<std::size_t>(idx));
    }
    sub.mrr_candidates.push_back(std::move(c));
  }
  return sub;
}

Matrix history_embeddings(const ModelParameters& params, const SnapshotSequence& seq,
                          std::size_t t) {
  if (t < 2 || t > seq.length()) {
    throw ArgumentError("test step " + std::to_string(t) + " needs history and must be <= N");
  }
  const auto history = seq.slice(1, t - 1);
  return predictor_embeddings(infer(history, params), params);
}

std::vector<StepMetrics> evaluate_run(const ModelParameters& params, const SnapshotSequence& seq,
                                      std::span<const std::size_t> test_indices,
                                      const EvalConfig& config) {
  std::vector<StepMetrics> out;
  for (auto t : test_indices) {
    const Matrix y = history_embeddings(params, seq, t);
    for (auto regime : config.regimes) {
      StepMetrics m;
      m.regime = regime;
      m.step = t;
      Rng rng = make_stream(config.seed,
                            "eval:" + regime_name(regime) + ":" + std::to_string(t));
      try {
        const auto sub = build_eval_subsets(seq, t - 1, regime, config.subsets, rng);
        const auto pos = score_pairs(y, sub.positives);
        const auto neg = score_pairs(y, sub.negatives);
        const auto pool = score_pairs(y, sub.negative_pool);
        std::vector<double> scores(pos);
        scores.insert(scores.end(), neg.begin(), neg.end());
        std::vector<int> labels(pos.size(), 1);
        labels.resize(scores.size(), 0);
        std::vector<std::vector<double>> candidates;
        for (const auto& c : sub.mrr_candidates) {
          std::vector<double> s;
          for (auto idx : c) s.push_back(pool[idx]);
          candidates.push_back(std::move(s));
        }
        m.auc = auc(scores, labels);
        m.ap = average_precision(scores, labels);
        m.mrr = mrr(pos, candidates);
        m.positives = pos.size();
        m.negatives = neg.size();
        m.available = true;
      } catch (const RegimeUnavailable& e) {
        m.reason = e.what();
      }
      out.push_back(m);
    }
  }
  return out;
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd r;
  if (values.empty()) return r;
  const auto n = static_cast<double>(values.size());
  for (double v : values) r.mean += v;
  r.mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - r.mean) * (v - r.mean);
  r.std = std::sqrt(ss / n);
  return r;
}

namespace {

double pick(const StepMetrics& s, Metric m) {
  switch (m) {
    case Metric::kAuc: return s.auc;
    case Metric::kAp: return s.ap;
    case Metric::kMrr: return s.mrr;
  }
  return 0.0;
}

}  // namespace

std::vector<double> MetricsReport::per_run(Regime regime, Metric metric) const {
  std::vector<double> out;
  for (const auto& run : runs) {
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& s : run.steps) {
      if (s.regime != regime || !s.available) continue;
      total += pick(s, metric);
      ++count;
    }
    if (count > 0) out.push_back(total / static_cast<double>(count));
  }
  return out;
}

std::optional<RegimeAggregate> MetricsReport::aggregate(Regime regime) const {
  const auto auc_runs = per_run(regime, Metric::kAuc);
  if (auc_runs.empty()) return std::nullopt;
  RegimeAggregate a;
  a.regime = regime;
  a.runs = auc_runs.size();
  a.auc = mean_std(auc_runs);
  a.ap = mean_std(per_run(regime, Metric::kAp));
  a.mrr = mean_std(per_run(regime, Metric::kMrr));
  return a;
}

std::string MetricsReport::to_records() const {
  std::string out = "# label\tseed\tregime\tstep\tmetric\tvalue\n";
  char buf[64];
  for (const auto& run : runs) {
    for (const auto& s : run.steps) {
      for (auto m : {Metric::kAuc, Metric::kAp, Metric::kMrr}) {
        if (s.available) {
          std::snprintf(buf, sizeof buf, "%.17g", pick(s, m));
        } else {
          std::snprintf(buf, sizeof buf, "null");
        }
        out += label + "\t" + std::to_string(run.seed) + "\t" + regime_name(s.regime) + "\t" +
               std::to_string(s.step) + "\t" + metric_name(m) + "\t" + buf + "\n";
      }
    }
  }
  return out;
}

std::string MetricsReport::summary_table() const {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-18s %5s %16s %16s %16s\n", "regime", "runs", "AUC", "AP",
                "MRR");
  out += buf;
  for (auto r : kAllRegimes) {
    const auto a = aggregate(r);
    if (!a) {
      std::snprintf(buf, sizeof buf, "%-18s %5d %16s %16s %16s\n", regime_name(r).c_str(), 0,
                    "n/a", "n/a", "n/a");
    } else {
      std::snprintf(buf, sizeof buf, "%-18s %5zu %9.2f +- %4.2f %9.2f +- %4.2f %9.2f +- %4.2f\n",
                    regime_name(r).c_str(), a->runs, 100 * a->auc.mean, 100 * a->auc.std,
                    100 * a->ap.mean, 100 * a->ap.std, 100 * a->mrr.mean, 100 * a->mrr.std);
    }
    out += buf;
  }
  return out;
}

}  // namespace tenence
