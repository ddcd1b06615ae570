#include "tenence/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

namespace tenence {

namespace {

void check_labels(std::span<const double> scores, std::span<const int> labels,
                  std::size_t& positives) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("scores and labels differ in length");
  }
  positives = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw std::invalid_argument("labels must be 0 or 1");
    positives += static_cast<std::size_t>(y);
  }
  for (double s : scores)
    if (std::isnan(s)) throw std::invalid_argument("NaN score");
}

}  // namespace

double auc(std::span<const double> scores, std::span<const int> labels) {
  std::size_t pos = 0;
  check_labels(scores, labels, pos);
  const std::size_t neg = scores.size() - pos;
  if (pos == 0 || neg == 0) throw UndefinedMetric("AUC needs both classes");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;  // sum of average ranks (1-based) of positives
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t)
      if (labels[order[t]] == 1) rank_sum += avg;
    i = j;
  }
  const double p = static_cast<double>(pos);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

double average_precision(std::span<const double> scores, std::span<const int> labels) {
  std::size_t pos = 0;
  check_labels(scores, labels, pos);
  if (pos == 0) throw UndefinedMetric("AP needs at least one positive");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
  double ap = 0.0, prev_recall = 0.0;
  std::size_t tp = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      tp += static_cast<std::size_t>(labels[order[j]]);
      ++j;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(j);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return ap;
}

double reciprocal_rank(double positive, std::span<const double> negatives) {
  if (negatives.empty()) throw std::invalid_argument("MRR: empty candidate list");
  double above = 0.0;
  for (double s : negatives) {
    if (s > positive) above += 1.0;
    else if (s == positive) above += 0.5;
  }
  return 1.0 / (1.0 + above);
}

double mrr(std::span<const double> positives, const std::vector<std::vector<double>>& negatives) {
  if (positives.size() != negatives.size()) {
    throw std::invalid_argument("MRR: one candidate list per positive required");
  }
  if (positives.empty()) throw UndefinedMetric("MRR needs at least one positive");
  double total = 0.0;
  for (std::size_t i = 0; i < positives.size(); ++i) {
    total += reciprocal_rank(positives[i], negatives[i]);
  }
  return total / static_cast<double>(positives.size());
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired t-test: length mismatch");
  if (a.size() < 2) throw std::invalid_argument("paired t-test: need at least 2 pairs");
  const auto n = static_cast<double>(a.size());
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (!(sd > 0.0)) throw UndefinedMetric("paired t-test: differences have zero variance");
  TTestResult r;
  r.dof = a.size() - 1;
  r.t = mean / (sd / std::sqrt(n));
  boost::math::students_t dist(static_cast<double>(r.dof));
  r.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
  return r;
}

}  // namespace tenence
