// Ranking metrics for link prediction (AUC, AP, MRR) and the paired t-test.
// Ties are resolved by rank averaging throughout.

#ifndef TENENCE_METRICS_HPP
#define TENENCE_METRICS_HPP

#include <span>
#include <stdexcept>
#include <vector>

namespace tenence {

/// A metric is undefined for the given input (e.g. a single class).
class UndefinedMetric : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Mann-Whitney statistic: P(pos > neg) + 0.5 P(tie). labels are 0/1.
double auc(std::span<const double> scores, std::span<const int> labels);

/// sum_b (R_b - R_{b-1}) P_b over descending unique thresholds.
double average_precision(std::span<const double> scores, std::span<const int> labels);

/// 1 / (1 + #{neg > pos} + 0.5 #{neg == pos}).
double reciprocal_rank(double positive, std::span<const double> negatives);
/// Mean reciprocal rank; negatives[i] is the candidate pool of positives[i].
double mrr(std::span<const double> positives, const std::vector<std::vector<double>>& negatives);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;  // two-sided
  std::size_t dof = 0;
};

/// Paired t-test on a - b. Throws std::invalid_argument on length mismatch or
/// fewer than 2 pairs, UndefinedMetric when the differences have zero variance.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

}  // namespace tenence

#endif  // TENENCE_METRICS_HPP
