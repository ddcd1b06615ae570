// Dataset diagnostics: temporal correlation coefficient, the RE and RP null
// models, and snapshot density.

#ifndef TENENCE_ANALYSIS_HPP
#define TENENCE_ANALYSIS_HPP

#include <string>
#include <vector>

#include "tenence/graph.hpp"
#include "tenence/random.hpp"

namespace tenence {

struct TemporalCorrelation {
  double C = 0.0;
  std::vector<double> per_node;  // C_i
};

/// C_i = 1/(N-1) sum_k overlap(A_k[i], A_{k+1}[i]) / sqrt(deg_k(i) deg_{k+1}(i)),
/// with 0/0 taken as 0; C is the mean of C_i. Requires N >= 2.
TemporalCorrelation temporal_correlation(const SnapshotSequence& seq);

/// RE: every snapshot's edges replaced by as many distinct node pairs drawn
/// uniformly at random.
SnapshotSequence randomize_edges(const SnapshotSequence& seq, Rng& rng);

/// RP: each distinct edge keeps its occurrence count c_e but occupies c_e
/// distinct steps drawn uniformly at random. Requires N >= 2.
SnapshotSequence permute_times(const SnapshotSequence& seq, Rng& rng);

/// |E_k| / C(n, 2) per step. Requires n >= 2.
std::vector<double> density_series(const SnapshotSequence& seq);

struct Quantiles {
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

/// Linear-interpolation quantiles of a nonempty sample.
Quantiles quantiles(std::vector<double> values);

struct NullModelReport {
  double original = 0.0;
  std::size_t samples = 0;
  std::vector<double> re;  // C of each RE sample
  std::vector<double> rp;  // C of each RP sample

  Quantiles re_quantiles() const { return quantiles(re); }
  Quantiles rp_quantiles() const { return quantiles(rp); }
  /// `model original min q1 median q3 max` lines for RE and RP.
  std::string to_text() const;
};

/// Draws `samples` RE and RP sequences from the "null" stream of `seed`.
NullModelReport null_model_report(const SnapshotSequence& seq, std::size_t samples,
                                  std::uint64_t seed);

}  // namespace tenence

#endif  // TENENCE_ANALYSIS_HPP
