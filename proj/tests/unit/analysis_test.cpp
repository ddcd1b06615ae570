#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numeric>

#include "synthetic.hpp"
#include "tenence/analysis.hpp"

using namespace tenence;

namespace {

// Scalar C_i with explicit neighbor sets.
double oracle_C(const SnapshotSequence& seq, std::vector<double>* per_node = nullptr) {
  const std::size_t n = seq.num_nodes(), N = seq.length();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double ci = 0.0;
    for (std::size_t k = 1; k < N; ++k) {
      double overlap = 0, da = 0, db = 0;
      for (std::size_t j = 0; j < n; ++j) {
        const double a = seq.at(k).adjacency(i, j), b = seq.at(k + 1).adjacency(i, j);
        overlap += a * b;
        da += a;
        db += b;
      }
      if (da > 0 && db > 0) ci += overlap / std::sqrt(da * db);
    }
    ci /= static_cast<double>(N - 1);
    if (per_node) per_node->push_back(ci);
    total += ci;
  }
  return total / static_cast<double>(n);
}

std::map<Edge, std::size_t> occurrence_counts(const SnapshotSequence& seq) {
  std::map<Edge, std::size_t> c;
  for (const auto& s : seq.snapshots)
    for (const auto& e : s.edges()) ++c[e];
  return c;
}

std::vector<Edge> complete(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return e;
}

}  // namespace

TEST(TemporalCorrelation, IdenticalSnapshots) {
  const std::vector<Edge> e{{0, 1}, {1, 2}};
  const auto tc = temporal_correlation(from_edge_lists(4, {e, e, e}));
  EXPECT_DOUBLE_EQ(tc.per_node[0], 1.0);
  EXPECT_DOUBLE_EQ(tc.per_node[1], 1.0);
  EXPECT_DOUBLE_EQ(tc.per_node[3], 0.0);  // isolated throughout
  EXPECT_DOUBLE_EQ(tc.C, 0.75);
}

TEST(TemporalCorrelation, DisjointSnapshots) {
  const auto tc = temporal_correlation(from_edge_lists(4, {{{0, 1}, {2, 3}}, {{0, 2}, {1, 3}}}));
  EXPECT_EQ(tc.C, 0.0);
}

TEST(TemporalCorrelation, HandcraftedFourNodeThreeStep) {
  const auto seq =
      from_edge_lists(4, {{{0, 1}, {0, 2}, {1, 2}}, {{0, 1}, {0, 3}}, {{0, 1}, {0, 3}, {2, 3}}});
  std::vector<double> expected;
  const double C = oracle_C(seq, &expected);
  const auto tc = temporal_correlation(seq);
  EXPECT_NEAR(tc.C, C, 1e-15);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(tc.per_node[i], expected[i], 1e-15);
  // node 0: k=1 {1,2} vs {1,3}: 1/2; k=2 {1,3} vs {1,3}: 1 -> 0.75
  EXPECT_NEAR(tc.per_node[0], 0.75, 1e-15);
  EXPECT_THROW(temporal_correlation(seq.slice(1, 1)), ArgumentError);
}

// Properties: matches the oracle, lies in [0,1], invariant to relabeling.
TEST(TemporalCorrelation, RandomSequencesProperties) {
  Rng rng(1);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + uniform_index(rng, 9), N = 2 + uniform_index(rng, 5);
    const auto seq = synth::random_sequence(n, N, uniform01(rng), rng);
    const double C = temporal_correlation(seq).C;
    EXPECT_NEAR(C, oracle_C(seq), 1e-12);
    EXPECT_GE(C, 0.0);
    EXPECT_LE(C, 1.0 + 1e-12);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    shuffle(perm, rng);
    EXPECT_NEAR(temporal_correlation(synth::permute_nodes(seq, perm)).C, C, 1e-12);
  }
}

TEST(RandomizeEdges, PreservesPerStepCounts) {
  Rng rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const auto seq = synth::random_sequence(2 + uniform_index(rng, 10), 4, uniform01(rng), rng);
    const auto re = randomize_edges(seq, rng);
    ASSERT_EQ(re.length(), seq.length());
    for (std::size_t k = 1; k <= seq.length(); ++k) {
      EXPECT_EQ(re.at(k).num_edges(), seq.at(k).num_edges());
      const auto& a = re.at(k).adjacency;
      EXPECT_EQ(a, a.transpose());
      EXPECT_EQ(a.diagonal().sum(), 0.0);
    }
  }
}

TEST(RandomizeEdges, EmptyAndCompleteAreFixed) {
  const auto seq = from_edge_lists(5, {{}, complete(5)});
  Rng rng(3);
  const auto re = randomize_edges(seq, rng);
  EXPECT_EQ(re.at(1).num_edges(), 0u);
  EXPECT_EQ(re.at(2).adjacency, seq.at(2).adjacency);
}

TEST(PermuteTimes, PreservesOccurrenceCounts) {
  Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const auto seq = synth::persistent_sequence(8, 2 + uniform_index(rng, 5), trial);
    const auto rp = permute_times(seq, rng);
    EXPECT_EQ(rp.total_edges(), seq.total_edges());
    EXPECT_EQ(occurrence_counts(rp), occurrence_counts(seq));
  }
  EXPECT_THROW(permute_times(from_edge_lists(3, {{{0, 1}}}), rng), ArgumentError);
}

TEST(PermuteTimes, SingleOccurrenceLandsUniformly) {
  Rng rng(5);
  const auto seq = from_edge_lists(3, {{{0, 1}}, {}});
  int first = 0;
  const int draws = 20000;
  for (int d = 0; d < draws; ++d) first += permute_times(seq, rng).at(1).num_edges() == 1;
  // binomial(20000, 1/2): sd ~ 71
  EXPECT_NEAR(first, draws / 2, 400);
}

TEST(PermuteTimes, StaticSequenceIsInvariant) {
  const auto e = complete(4);
  const auto seq = from_edge_lists(4, {e, e, e});
  const auto report = null_model_report(seq, 10, 6);
  for (double c : report.rp) EXPECT_DOUBLE_EQ(c, report.original);
  for (double c : report.rp) EXPECT_LE(c, 1.0);
}

TEST(Density, Series) {
  const auto seq = from_edge_lists(4, {{}, complete(4), {{0, 1}, {1, 2}, {0, 2}}});
  EXPECT_EQ(density_series(seq), (std::vector<double>{0.0, 1.0, 0.5}));
  EXPECT_THROW(density_series(from_edge_lists(1, {{}})), ArgumentError);
}

TEST(Quantiles, LinearInterpolation) {
  const auto q = quantiles({4.0, 1.0, 3.0, 2.0, 5.0});
  EXPECT_EQ(q.min, 1.0);
  EXPECT_EQ(q.q1, 2.0);
  EXPECT_EQ(q.median, 3.0);
  EXPECT_EQ(q.max, 5.0);
  const auto h = quantiles({0.0, 1.0});
  EXPECT_DOUBLE_EQ(h.q1, 0.25);
  EXPECT_THROW(quantiles({}), ArgumentError);
}

TEST(NullModels, ReportCountsAndPersistentSignal) {
  const auto seq = synth::persistent_sequence(20, 6, 7, 0.9, 1);
  const auto report = null_model_report(seq, 25, 8);
  EXPECT_EQ(report.re.size(), 25u);
  EXPECT_EQ(report.rp.size(), 25u);
  EXPECT_NEAR(report.original, temporal_correlation(seq).C, 0.0);
  EXPECT_GT(report.original, report.re_quantiles().max);
  const auto again = null_model_report(seq, 25, 8);
  EXPECT_EQ(report.to_text(), again.to_text());
  EXPECT_THROW(null_model_report(seq, 0, 8), ArgumentError);
}
