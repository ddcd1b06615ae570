#include "tenence/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace tenence {

TemporalCorrelation temporal_correlation(const SnapshotSequence& seq) {
  const auto N = seq.length();
  if (N < 2) throw ArgumentError("temporal_correlation: need N >= 2");
  const auto n = static_cast<Eigen::Index>(seq.num_nodes());
  TemporalCorrelation tc;
  tc.per_node.assign(static_cast<std::size_t>(n), 0.0);
  for (std::size_t k = 1; k < N; ++k) {
    const auto& a = seq.at(k).adjacency;
    const auto& b = seq.at(k + 1).adjacency;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double overlap = a.row(i).dot(b.row(i));
      const double denom = std::sqrt(a.row(i).sum() * b.row(i).sum());
      if (denom > 0.0) tc.per_node[static_cast<std::size_t>(i)] += overlap / denom;
    }
  }
  for (auto& c : tc.per_node) {
    c /= static_cast<double>(N - 1);
    tc.C += c;
  }
  if (n > 0) tc.C /= static_cast<double>(n);
  return tc;
}

namespace {

std::size_t pair_count(std::size_t n) { return n * (n - 1) / 2; }

// Inverse of the row-major upper-triangle enumeration.
Edge pair_at(std::size_t idx, std::size_t n) {
  std::size_t i = 0;
  std::size_t row = n - 1;
  while (idx >= row) {
    idx -= row;
    ++i;
    --row;
  }
  return {i, i + 1 + idx};
}

SnapshotSequence with_edges(const SnapshotSequence& like,
                            const std::vector<std::vector<Edge>>& edges) {
  SnapshotSequence out = like;
  for (std::size_t k = 0; k < out.snapshots.size(); ++k) {
    auto& a = out.snapshots[k].adjacency;
    a.setZero();
    for (const auto& [i, j] : edges[k]) {
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
      a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = 1.0;
    }
  }
  if (like.scheme == FeatureScheme::kDegree) out = make_node_features(out, FeatureScheme::kDegree);
  return out;
}

}  // namespace

SnapshotSequence randomize_edges(const SnapshotSequence& seq, Rng& rng) {
  const auto n = seq.num_nodes();
  std::vector<std::vector<Edge>> edges(seq.length());
  for (std::size_t k = 0; k < seq.length(); ++k) {
    const auto m = seq.snapshots[k].num_edges();
    if (m == 0) continue;
    if (n < 2 || m > pair_count(n)) {
      throw ArgumentError("randomize_edges: snapshot " + std::to_string(k + 1) + " has " +
                          std::to_string(m) + " edges, more than C(n,2)");
    }
    for (auto idx : sample_without_replacement(rng, pair_count(n), m)) {
      edges[k].push_back(pair_at(static_cast<std::size_t>(idx), n));
    }
  }
  return with_edges(seq, edges);
}

SnapshotSequence permute_times(const SnapshotSequence& seq, Rng& rng) {
  const auto N = seq.length();
  if (N < 2) throw ArgumentError("permute_times: need N >= 2");
  std::map<Edge, std::size_t> counts;
  for (const auto& s : seq.snapshots)
    for (const auto& e : s.edges()) ++counts[e];
  std::vector<std::vector<Edge>> edges(N);
  for (const auto& [e, c] : counts) {
    for (auto step : sample_without_replacement(rng, N, c)) {
      edges[static_cast<std::size_t>(step)].push_back(e);
    }
  }
  return with_edges(seq, edges);
}

std::vector<double> density_series(const SnapshotSequence& seq) {
  const auto n = seq.num_nodes();
  if (n < 2) throw ArgumentError("density_series: need n >= 2");
  std::vector<double> out;
  for (const auto& s : seq.snapshots) {
    out.push_back(static_cast<double>(s.num_edges()) / static_cast<double>(pair_count(n)));
  }
  return out;
}

Quantiles quantiles(std::vector<double> values) {
  if (values.empty()) throw ArgumentError("quantiles: empty sample");
  std::sort(values.begin(), values.end());
  auto at = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  return {values.front(), at(0.25), at(0.5), at(0.75), values.back()};
}

std::string NullModelReport::to_text() const {
  std::string out = "# model original min q1 median q3 max samples\n";
  char buf[256];
  for (const auto& [name, sample] : {std::pair{"RE", &re}, std::pair{"RP", &rp}}) {
    const auto q = quantiles(*sample);
    std::snprintf(buf, sizeof buf, "%s %.17g %.17g %.17g %.17g %.17g %.17g %zu\n", name, original,
                  q.min, q.q1, q.median, q.q3, q.max, samples);
    out += buf;
  }
  return out;
}

NullModelReport null_model_report(const SnapshotSequence& seq, std::size_t samples,
                                  std::uint64_t seed) {
  if (samples == 0) throw ArgumentError("null_model_report: samples must be >= 1");
  NullModelReport r;
  r.original = temporal_correlation(seq).C;
  r.samples = samples;
  Rng rng = make_stream(seed, "null");
  for (std::size_t s = 0; s < samples; ++s) {
    r.re.push_back(temporal_correlation(randomize_edges(seq, rng)).C);
    r.rp.push_back(temporal_correlation(permute_times(seq, rng)).C);
  }
  return r;
}

}  // namespace tenence
