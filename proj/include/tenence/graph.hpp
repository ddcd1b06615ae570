// Temporal network and snapshot-sequence data model.
//
// A TemporalNetwork is a node count plus a time-sorted list of pairwise
// events. discretize() projects it onto N equal-width intervals; each
// interval becomes a binary, symmetric, zero-diagonal adjacency matrix.

#ifndef TENENCE_GRAPH_HPP
#define TENENCE_GRAPH_HPP

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace tenence {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

/// Raised for malformed or empty input files. `line()` is 1-based, 0 when
/// the error is not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Raised when an operation's preconditions on sizes or arguments fail.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Event {
  std::size_t src = 0;
  std::size_t dst = 0;
  double t = 0.0;
};

struct TemporalNetwork {
  std::size_t n = 0;
  std::vector<Event> events;  // nondecreasing t
  std::size_t node_feature_dim = 0;
  std::size_t edge_feature_dim = 0;
};

/// Undirected edge with i < j.
using Edge = std::pair<std::size_t, std::size_t>;

enum class FeatureScheme { kIdentity, kDegree, kCustom };

struct Snapshot {
  Matrix adjacency;  // n x n, binary, symmetric, zero diagonal
  Matrix features;   // n x d_features
  std::size_t index = 1;  // 1-based position in the sequence

  std::size_t num_nodes() const { return static_cast<std::size_t>(adjacency.rows()); }
  /// Edges as (i, j) with i < j, in row-major order.
  std::vector<Edge> edges() const;
  std::size_t num_edges() const;
};

struct SnapshotSequence {
  std::vector<Snapshot> snapshots;
  double interval = 0.0;  // width of one bin in the source time unit; 0 if native
  FeatureScheme scheme = FeatureScheme::kIdentity;

  std::size_t length() const { return snapshots.size(); }
  std::size_t num_nodes() const {
    return snapshots.empty() ? 0 : snapshots.front().num_nodes();
  }
  std::size_t feature_dim() const {
    return snapshots.empty() ? 0 : static_cast<std::size_t>(snapshots.front().features.cols());
  }
  const Snapshot& at(std::size_t k) const { return snapshots.at(k - 1); }  // 1-based

  /// Snapshots first..last (1-based, inclusive), reindexed from 1.
  SnapshotSequence slice(std::size_t first, std::size_t last) const;
  std::size_t total_edges() const;
};

enum class DatasetFormat { kEvents, kSnapshots };

/// One entry of a dataset manifest.
struct DatasetDescriptor {
  std::string id;
  std::filesystem::path path;
  DatasetFormat format = DatasetFormat::kEvents;
  std::size_t steps = 0;  // N; required
  std::size_t nodes = 0;  // when nonzero, labels are taken as 0..nodes-1 verbatim
  bool undirected = true;
};

/// Reads a JSON manifest `{ "<id>": {"path":..., "format":..., "steps":..., "undirected":...}, ... }`.
/// Relative paths resolve against the manifest's directory.
std::vector<DatasetDescriptor> load_manifest(const std::filesystem::path& manifest);

/// Parses an event list (`src dst t` per line, whitespace or comma separated,
/// `#` comments). Node labels are densified to 0..n-1 by sorted label order
/// (numeric when every label is an integer, lexicographic otherwise);
/// identical undirected events at the same timestamp are kept once.
/// Self-loops are dropped. With `fixed_nodes` > 0 labels must be integers in
/// [0, fixed_nodes) and are kept as-is.
TemporalNetwork load_edge_list(const std::filesystem::path& path, std::size_t fixed_nodes = 0);
TemporalNetwork parse_edge_list(const std::string& text, std::size_t fixed_nodes = 0);

/// Parses a pre-discretized list (`src dst k`, k in [0, steps)). Node labels
/// are densified the same way as load_edge_list.
SnapshotSequence load_snapshot_list(const std::filesystem::path& path, std::size_t steps,
                                    std::size_t fixed_nodes = 0);
SnapshotSequence parse_snapshot_list(const std::string& text, std::size_t steps,
                                     std::size_t fixed_nodes = 0);

/// Loads whichever format the descriptor names and returns the snapshot
/// sequence with identity features.
SnapshotSequence load_dataset(const DatasetDescriptor& descriptor);

/// Bins events into `steps` equal intervals. The last event closes the final bin.
SnapshotSequence discretize(const TemporalNetwork& net, long long steps);

SnapshotSequence make_node_features(const SnapshotSequence& seq, FeatureScheme scheme);

struct TrainTestSplit {
  SnapshotSequence train;
  std::vector<std::size_t> test_indices;  // 1-based steps of the full sequence
};

TrainTestSplit split_train_test(const SnapshotSequence& seq, std::size_t n_test = 3);

/// Builds a sequence with identity features from per-step edge lists.
SnapshotSequence from_edge_lists(std::size_t n, const std::vector<std::vector<Edge>>& steps);

/// Textual canonical container: header, then one `k i j` line per edge.
std::string write_canonical(const SnapshotSequence& seq);
SnapshotSequence read_canonical(const std::string& text);

}  // namespace tenence

#endif  // TENENCE_GRAPH_HPP
