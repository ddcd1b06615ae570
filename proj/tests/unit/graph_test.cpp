#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <tuple>

#include "synthetic.hpp"
#include "tenence/graph.hpp"
#include "tenence/random.hpp"

using namespace tenence;

namespace {

std::set<Edge> edge_set(const Snapshot& s) {
  auto e = s.edges();
  return {e.begin(), e.end()};
}

void expect_valid_adjacency(const SnapshotSequence& seq) {
  for (const auto& s : seq.snapshots) {
    EXPECT_TRUE(s.adjacency.isApprox(s.adjacency.transpose(), 0.0));
    EXPECT_EQ(s.adjacency.diagonal().cwiseAbs().sum(), 0.0);
    for (Eigen::Index i = 0; i < s.adjacency.size(); ++i) {
      const double v = s.adjacency.data()[i];
      EXPECT_TRUE(v == 0.0 || v == 1.0);
    }
    EXPECT_EQ(static_cast<std::size_t>(s.features.rows()), s.num_nodes());
  }
}

}  // namespace

TEST(EdgeList, DuplicateEventAtSameTimeIsKeptOnce) {
  const auto net = parse_edge_list("0 1 0.5\n1 2 0.7\n0 1 0.5\n");
  EXPECT_EQ(net.n, 3u);
  ASSERT_EQ(net.events.size(), 2u);
  EXPECT_EQ(net.events[0].t, 0.5);
  EXPECT_EQ(net.events[1].t, 0.7);
}

TEST(EdgeList, ReversedPairAtSameTimeIsADuplicate) {
  const auto net = parse_edge_list("0 1 2\n1 0 2\n1 0 3\n");
  EXPECT_EQ(net.events.size(), 2u);
}

TEST(EdgeList, MalformedLineReportsLineNumber) {
  try {
    parse_edge_list("a b c\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
  }
  try {
    parse_edge_list("# header\n0 1 1.0\n0 1\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(EdgeList, EmptyInputIsAnError) {
  EXPECT_THROW(parse_edge_list(""), ParseError);
  EXPECT_THROW(parse_edge_list("# only a comment\n\n"), ParseError);
}

TEST(EdgeList, NegativeTimestampRejected) {
  EXPECT_THROW(parse_edge_list("0 1 -1\n"), ParseError);
}

TEST(EdgeList, CommaSeparatedAndCommentsAccepted) {
  const auto net = parse_edge_list("# src,dst,t\n10,20,1.5\n20,30,2\n");
  EXPECT_EQ(net.n, 3u);
  EXPECT_EQ(net.events.size(), 2u);
}

TEST(EdgeList, LabelsDensifiedInNumericOrder) {
  const auto net = parse_edge_list("100 9 1\n9 55 2\n");
  ASSERT_EQ(net.n, 3u);
  // 9 -> 0, 55 -> 1, 100 -> 2
  EXPECT_EQ(std::min(net.events[0].src, net.events[0].dst), 0u);
  EXPECT_EQ(std::max(net.events[0].src, net.events[0].dst), 2u);
  EXPECT_EQ(std::max(net.events[1].src, net.events[1].dst), 1u);
}

TEST(EdgeList, EventsSortedByTime) {
  const auto net = parse_edge_list("0 1 5\n1 2 1\n2 3 3\n");
  ASSERT_EQ(net.events.size(), 3u);
  EXPECT_TRUE(std::is_sorted(net.events.begin(), net.events.end(),
                             [](const Event& a, const Event& b) { return a.t < b.t; }));
}

TEST(EdgeList, FixedNodeCountKeepsLabels) {
  const auto net = parse_edge_list("3 4 0\n", 6);
  EXPECT_EQ(net.n, 6u);
  EXPECT_EQ(net.events[0].src, 3u);
  EXPECT_THROW(parse_edge_list("3 7 0\n", 6), ParseError);
}

TEST(Discretize, HandAssignedIntervals) {
  TemporalNetwork net{3, {{0, 1, 0.0}, {1, 2, 0.5}, {0, 2, 1.0}}, 0, 0};
  const auto seq = discretize(net, 2);
  ASSERT_EQ(seq.length(), 2u);
  // bins are [0, 0.5) and [0.5, 1.0]; the boundary event opens bin 2
  EXPECT_EQ(edge_set(seq.at(1)), (std::set<Edge>{{0, 1}}));
  EXPECT_EQ(edge_set(seq.at(2)), (std::set<Edge>{{1, 2}, {0, 2}}));
  EXPECT_DOUBLE_EQ(seq.interval, 0.5);
}

TEST(Discretize, SingleTimestampPutsEverythingInFirstBin) {
  TemporalNetwork net{3, {{0, 1, 4.0}, {1, 2, 4.0}}, 0, 0};
  const auto seq = discretize(net, 3);
  ASSERT_EQ(seq.length(), 3u);
  EXPECT_EQ(seq.at(1).num_edges(), 2u);
  EXPECT_EQ(seq.at(2).num_edges(), 0u);
  EXPECT_EQ(seq.at(3).num_edges(), 0u);
}

TEST(Discretize, RejectsNonPositiveSteps) {
  TemporalNetwork net{2, {{0, 1, 0.0}}, 0, 0};
  EXPECT_THROW(discretize(net, 0), ArgumentError);
  EXPECT_THROW(discretize(net, -3), ArgumentError);
  EXPECT_THROW(discretize(TemporalNetwork{2, {}, 0, 0}, 2), ArgumentError);
}

// Property: every event lands in exactly the bin given by brute-force interval
// search, and the union of (edge, bin) triples equals the deduplicated events.
TEST(Discretize, PartitionPropertyOnRandomNetworks) {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + uniform_index(rng, 8);
    const std::size_t steps = 1 + uniform_index(rng, 6);
    TemporalNetwork net;
    net.n = n;
    const std::size_t m = 1 + uniform_index(rng, 30);
    for (std::size_t e = 0; e < m; ++e) {
      const auto i = uniform_index(rng, n);
      auto j = uniform_index(rng, n);
      if (j == i) j = (i + 1) % n;
      net.events.push_back({i, j, std::floor(uniform01(rng) * 100.0) / 4.0});
    }
    std::sort(net.events.begin(), net.events.end(),
              [](const Event& a, const Event& b) { return a.t < b.t; });
    const auto seq = discretize(net, static_cast<long long>(steps));
    expect_valid_adjacency(seq);

    double t1 = net.events.front().t, tm = net.events.back().t;
    const double dt = (tm - t1) / static_cast<double>(steps);
    std::set<std::tuple<std::size_t, std::size_t, std::size_t>> expected;
    for (const auto& e : net.events) {
      std::size_t bin = 1;
      if (dt > 0) {
        const double tau = e.t - t1;
        bin = 0;
        for (std::size_t k = 1; k <= steps; ++k) {
          if ((k - 1) * dt <= tau && tau < k * dt) bin = k;
        }
        if (bin == 0) bin = steps;  // tau == N dt
      }
      expected.insert({bin, std::min(e.src, e.dst), std::max(e.src, e.dst)});
    }
    std::set<std::tuple<std::size_t, std::size_t, std::size_t>> actual;
    for (std::size_t k = 1; k <= steps; ++k)
      for (const auto& [i, j] : seq.at(k).edges()) actual.insert({k, i, j});
    EXPECT_EQ(actual, expected) << "trial " << trial;
  }
}

TEST(Discretize, InvariantToInputOrder) {
  Rng rng(11);
  TemporalNetwork net;
  net.n = 6;
  for (int e = 0; e < 25; ++e) {
    const auto i = uniform_index(rng, 6);
    net.events.push_back({i, (i + 1 + uniform_index(rng, 5)) % 6, uniform01(rng) * 10.0});
  }
  auto shuffled = net;
  shuffle(shuffled.events, rng);
  const auto a = discretize(net, 4);
  const auto b = discretize(shuffled, 4);
  for (std::size_t k = 1; k <= 4; ++k) EXPECT_EQ(a.at(k).adjacency, b.at(k).adjacency);
}

TEST(Features, IdentityScheme) {
  auto seq = from_edge_lists(3, {{{0, 1}}, {}});
  seq = make_node_features(seq, FeatureScheme::kIdentity);
  for (const auto& s : seq.snapshots) EXPECT_EQ(s.features, Matrix::Identity(3, 3));
}

TEST(Features, DegreeSchemeOnTriangle) {
  auto seq = from_edge_lists(3, {{{0, 1}, {1, 2}, {0, 2}}});
  seq = make_node_features(seq, FeatureScheme::kDegree);
  ASSERT_EQ(seq.feature_dim(), 1u);
  for (Eigen::Index i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(seq.at(1).features(i, 0), 1.0);
}

TEST(Split, ElevenStepsLeavesEightForTraining) {
  auto seq = from_edge_lists(3, std::vector<std::vector<Edge>>(11));
  const auto split = split_train_test(seq, 3);
  EXPECT_EQ(split.train.length(), 8u);
  EXPECT_EQ(split.test_indices, (std::vector<std::size_t>{9, 10, 11}));
}

TEST(Split, Boundaries) {
  auto four = from_edge_lists(3, std::vector<std::vector<Edge>>(4));
  EXPECT_EQ(split_train_test(four, 3).train.length(), 1u);
  auto three = from_edge_lists(3, std::vector<std::vector<Edge>>(3));
  EXPECT_THROW(split_train_test(three, 3), ArgumentError);
}

TEST(SnapshotList, ParsesZeroBasedSteps) {
  const auto seq = parse_snapshot_list("0 1 0\n1 2 1\n2 0 1\n", 3);
  ASSERT_EQ(seq.length(), 3u);
  EXPECT_EQ(seq.at(1).num_edges(), 1u);
  EXPECT_EQ(seq.at(2).num_edges(), 2u);
  EXPECT_EQ(seq.at(3).num_edges(), 0u);
  EXPECT_THROW(parse_snapshot_list("0 1 3\n", 3), ParseError);
}

TEST(Canonical, RoundTrip) {
  const auto seq = synth::persistent_sequence(9, 4, 3);
  const auto text = write_canonical(seq);
  const auto back = read_canonical(text);
  ASSERT_EQ(back.length(), seq.length());
  for (std::size_t k = 1; k <= seq.length(); ++k) EXPECT_EQ(back.at(k).adjacency, seq.at(k).adjacency);
  EXPECT_EQ(write_canonical(back), text);
  EXPECT_THROW(read_canonical("garbage\n"), ParseError);
}

TEST(Manifest, ResolvesRelativePaths) {
  const auto dir = std::filesystem::temp_directory_path() / "tenence_manifest_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "events.txt") << "0 1 0\n1 2 1\n2 3 2\n";
    std::ofstream(dir / "datasets.json")
        << R"({"toy": {"path": "events.txt", "format": "events", "steps": 2}})";
  }
  const auto entries = load_manifest(dir / "datasets.json");
  ASSERT_EQ(entries.size(), 1u);
  EXPECT_EQ(entries[0].id, "toy");
  EXPECT_EQ(entries[0].path, dir / "events.txt");
  const auto seq = load_dataset(entries[0]);
  EXPECT_EQ(seq.length(), 2u);
  EXPECT_EQ(seq.num_nodes(), 4u);
  std::filesystem::remove_all(dir);
}

TEST(Slice, ReindexesFromOne) {
  const auto seq = synth::persistent_sequence(5, 5, 1);
  const auto part = seq.slice(2, 4);
  ASSERT_EQ(part.length(), 3u);
  EXPECT_EQ(part.at(1).index, 1u);
  EXPECT_EQ(part.at(1).adjacency, seq.at(2).adjacency);
  EXPECT_THROW(seq.slice(0, 2), ArgumentError);
  EXPECT_THROW(seq.slice(3, 6), ArgumentError);
}
