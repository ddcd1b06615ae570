#include "tenence/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

namespace tenence {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',' || c == ' ' || c == '\t' || c == '\r') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool parse_double(const std::string& s, double& out) {
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

bool parse_integer(const std::string& s, long long& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

struct RawRecord {
  std::string src;
  std::string dst;
  double value;
  std::size_t line;
};

std::vector<RawRecord> parse_records(const std::string& text, bool integer_third) {
  std::vector<RawRecord> records;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    auto tokens = tokenize(line);
    if (tokens.size() < 3) {
      throw ParseError("line " + std::to_string(line_no) + ": expected `src dst t`", line_no);
    }
    double value = 0.0;
    if (integer_third) {
      long long k = 0;
      if (!parse_integer(tokens[2], k) || k < 0) {
        throw ParseError("line " + std::to_string(line_no) + ": bad snapshot index '" +
                             tokens[2] + "'",
                         line_no);
      }
      value = static_cast<double>(k);
    } else if (!parse_double(tokens[2], value) || value < 0.0) {
      throw ParseError("line " + std::to_string(line_no) + ": bad timestamp '" + tokens[2] + "'",
                       line_no);
    }
    records.push_back({tokens[0], tokens[1], value, line_no});
  }
  if (records.empty()) throw ParseError("empty input", 0);
  return records;
}

// Maps raw labels to dense indices.
struct LabelMap {
  std::map<std::string, std::size_t> index;
  std::size_t size = 0;
};

LabelMap densify(const std::vector<RawRecord>& records, std::size_t fixed_nodes) {
  LabelMap map;
  if (fixed_nodes > 0) {
    for (const auto& r : records) {
      for (const auto* label : {&r.src, &r.dst}) {
        long long v = 0;
        if (!parse_integer(*label, v) || v < 0 || static_cast<std::size_t>(v) >= fixed_nodes) {
          throw ParseError("line " + std::to_string(r.line) + ": node label '" + *label +
                               "' outside [0, " + std::to_string(fixed_nodes) + ")",
                           r.line);
        }
        map.index[*label] = static_cast<std::size_t>(v);
      }
    }
    map.size = fixed_nodes;
    return map;
  }
  std::set<std::string> labels;
  bool numeric = true;
  for (const auto& r : records) {
    labels.insert(r.src);
    labels.insert(r.dst);
  }
  std::vector<std::pair<long long, std::string>> keyed;
  for (const auto& l : labels) {
    long long v = 0;
    if (!parse_integer(l, v)) numeric = false;
    keyed.emplace_back(v, l);
  }
  if (numeric) {
    std::sort(keyed.begin(), keyed.end());
  }  // else: std::set order is already lexicographic
  std::size_t next = 0;
  for (const auto& [_, l] : keyed) map.index[l] = next++;
  map.size = next;
  return map;
}

Snapshot empty_snapshot(std::size_t n, std::size_t index) {
  Snapshot s;
  s.adjacency = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  s.features = Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  s.index = index;
  return s;
}

void set_edge(Snapshot& s, std::size_t i, std::size_t j) {
  const auto a = static_cast<Eigen::Index>(i);
  const auto b = static_cast<Eigen::Index>(j);
  s.adjacency(a, b) = 1.0;
  s.adjacency(b, a) = 1.0;
}

}  // namespace

std::vector<Edge> Snapshot::edges() const {
  std::vector<Edge> out;
  const auto n = adjacency.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (adjacency(i, j) != 0.0) out.emplace_back(i, j);
  return out;
}

std::size_t Snapshot::num_edges() const {
  const auto n = adjacency.rows();
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) count += adjacency(i, j) != 0.0;
  return count;
}

SnapshotSequence SnapshotSequence::slice(std::size_t first, std::size_t last) const {
  if (first < 1 || last < first || last > length()) {
    throw ArgumentError("slice [" + std::to_string(first) + ", " + std::to_string(last) +
                        "] outside sequence of length " + std::to_string(length()));
  }
  SnapshotSequence out;
  out.interval = interval;
  out.scheme = scheme;
  for (std::size_t k = first; k <= last; ++k) {
    out.snapshots.push_back(at(k));
    out.snapshots.back().index = k - first + 1;
  }
  return out;
}

std::size_t SnapshotSequence::total_edges() const {
  std::size_t total = 0;
  for (const auto& s : snapshots) total += s.num_edges();
  return total;
}

std::vector<DatasetDescriptor> load_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw ParseError("cannot open manifest " + manifest.string(), 0);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("manifest " + manifest.string() + ": " + e.what(), 0);
  }
  std::vector<DatasetDescriptor> out;
  if (!doc.is_object()) throw ParseError("manifest " + manifest.string() + ": expected an object", 0);
  for (const auto& [id, entry] : doc.items()) {
    if (!entry.is_object() || !entry.contains("path") || !entry.contains("steps")) {
      throw ParseError("manifest entry '" + id + "' needs \"path\" and \"steps\"", 0);
    }
    DatasetDescriptor d;
    d.id = id;
    std::filesystem::path p = entry.at("path").get<std::string>();
    d.path = p.is_absolute() ? p : manifest.parent_path() / p;
    const auto format = entry.value("format", std::string("events"));
    if (format == "events") {
      d.format = DatasetFormat::kEvents;
    } else if (format == "snapshots") {
      d.format = DatasetFormat::kSnapshots;
    } else {
      throw ParseError("manifest entry '" + id + "': unknown format '" + format + "'", 0);
    }
    d.steps = entry.at("steps").get<std::size_t>();
    d.nodes = entry.value("nodes", std::size_t{0});
    d.undirected = entry.value("undirected", true);
    out.push_back(std::move(d));
  }
  return out;
}

TemporalNetwork parse_edge_list(const std::string& text, std::size_t fixed_nodes) {
  const auto records = parse_records(text, false);
  const auto labels = densify(records, fixed_nodes);

  TemporalNetwork net;
  net.n = labels.size;
  std::set<std::tuple<double, std::size_t, std::size_t>> seen;
  for (const auto& r : records) {
    const auto a = labels.index.at(r.src);
    const auto b = labels.index.at(r.dst);
    if (a == b) continue;
    if (!seen.emplace(r.value, std::min(a, b), std::max(a, b)).second) continue;
    net.events.push_back({a, b, r.value});
  }
  std::stable_sort(net.events.begin(), net.events.end(),
                   [](const Event& x, const Event& y) { return x.t < y.t; });
  return net;
}

TemporalNetwork load_edge_list(const std::filesystem::path& path, std::size_t fixed_nodes) {
  return parse_edge_list(read_file(path), fixed_nodes);
}

SnapshotSequence parse_snapshot_list(const std::string& text, std::size_t steps,
                                     std::size_t fixed_nodes) {
  if (steps == 0) throw ArgumentError("snapshot list needs steps >= 1");
  const auto records = parse_records(text, true);
  const auto labels = densify(records, fixed_nodes);

  SnapshotSequence seq;
  for (std::size_t k = 1; k <= steps; ++k) seq.snapshots.push_back(empty_snapshot(labels.size, k));
  for (const auto& r : records) {
    const auto k = static_cast<std::size_t>(r.value);
    if (k >= steps) {
      throw ParseError("line " + std::to_string(r.line) + ": snapshot index " +
                           std::to_string(k) + " >= steps " + std::to_string(steps),
                       r.line);
    }
    const auto a = labels.index.at(r.src);
    const auto b = labels.index.at(r.dst);
    if (a == b) continue;
    set_edge(seq.snapshots[k], a, b);
  }
  return seq;
}

SnapshotSequence load_snapshot_list(const std::filesystem::path& path, std::size_t steps,
                                    std::size_t fixed_nodes) {
  return parse_snapshot_list(read_file(path), steps, fixed_nodes);
}

SnapshotSequence load_dataset(const DatasetDescriptor& descriptor) {
  if (descriptor.format == DatasetFormat::kSnapshots) {
    return load_snapshot_list(descriptor.path, descriptor.steps, descriptor.nodes);
  }
  return discretize(load_edge_list(descriptor.path, descriptor.nodes),
                    static_cast<long long>(descriptor.steps));
}

SnapshotSequence discretize(const TemporalNetwork& net, long long steps) {
  if (steps <= 0) throw ArgumentError("discretize: N must be positive");
  if (net.events.empty()) throw ArgumentError("discretize: network has no events");
  if (net.n == 0) throw ArgumentError("discretize: network has no nodes");

  const auto [min_it, max_it] =
      std::minmax_element(net.events.begin(), net.events.end(),
                          [](const Event& a, const Event& b) { return a.t < b.t; });
  const double t_first = min_it->t;
  const double span = max_it->t - t_first;
  const auto n_steps = static_cast<std::size_t>(steps);

  SnapshotSequence seq;
  seq.interval = span / static_cast<double>(steps);
  for (std::size_t k = 1; k <= n_steps; ++k) seq.snapshots.push_back(empty_snapshot(net.n, k));

  for (const auto& e : net.events) {
    if (e.src >= net.n || e.dst >= net.n) throw ArgumentError("discretize: node index >= n");
    if (e.src == e.dst) continue;
    std::size_t bin = 0;  // 0-based
    if (seq.interval > 0.0) {
      const double tau = e.t - t_first;
      bin = static_cast<std::size_t>(std::floor(tau / seq.interval));
      bin = std::min(bin, n_steps - 1);
    }
    set_edge(seq.snapshots[bin], e.src, e.dst);
  }
  return seq;
}

SnapshotSequence make_node_features(const SnapshotSequence& seq, FeatureScheme scheme) {
  SnapshotSequence out = seq;
  out.scheme = scheme;
  const auto n = static_cast<Eigen::Index>(seq.num_nodes());
  for (auto& s : out.snapshots) {
    switch (scheme) {
      case FeatureScheme::kIdentity:
        s.features = Matrix::Identity(n, n);
        break;
      case FeatureScheme::kDegree: {
        const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
        s.features = s.adjacency.rowwise().sum() / denom;
        break;
      }
      case FeatureScheme::kCustom:
        break;
    }
  }
  return out;
}

TrainTestSplit split_train_test(const SnapshotSequence& seq, std::size_t n_test) {
  const auto N = seq.length();
  if (n_test == 0 || N <= n_test) {
    throw ArgumentError("split_train_test: need N > n_test (N=" + std::to_string(N) +
                        ", n_test=" + std::to_string(n_test) + ")");
  }
  TrainTestSplit split;
  split.train = seq.slice(1, N - n_test);
  for (std::size_t k = N - n_test + 1; k <= N; ++k) split.test_indices.push_back(k);
  return split;
}

SnapshotSequence from_edge_lists(std::size_t n, const std::vector<std::vector<Edge>>& steps) {
  SnapshotSequence seq;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    auto snap = empty_snapshot(n, k + 1);
    for (const auto& [i, j] : steps[k]) {
      if (i >= n || j >= n) throw ArgumentError("from_edge_lists: node index >= n");
      if (i != j) set_edge(snap, i, j);
    }
    seq.snapshots.push_back(std::move(snap));
  }
  return seq;
}

std::string write_canonical(const SnapshotSequence& seq) {
  std::ostringstream out;
  out << "# tenence snapshot container v1\n";
  out << "nodes " << seq.num_nodes() << "\n";
  out << "steps " << seq.length() << "\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", seq.interval);
  out << "interval " << buf << "\n";
  for (const auto& s : seq.snapshots)
    for (const auto& [i, j] : s.edges()) out << s.index << ' ' << i << ' ' << j << '\n';
  return out.str();
}

SnapshotSequence read_canonical(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::size_t n = 0;
  std::size_t steps = 0;
  double interval = 0.0;
  bool header_done = false;
  std::vector<std::vector<Edge>> edges;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != "# tenence snapshot container v1") {
        throw ParseError("not a tenence snapshot container (v1)", 1);
      }
      continue;
    }
    auto tokens = tokenize(line);
    if (!header_done) {
      if (tokens.size() != 2) throw ParseError("bad header line", line_no);
      if (tokens[0] == "nodes") {
        n = std::stoul(tokens[1]);
      } else if (tokens[0] == "steps") {
        steps = std::stoul(tokens[1]);
        edges.assign(steps, {});
      } else if (tokens[0] == "interval") {
        parse_double(tokens[1], interval);
        header_done = true;
      } else {
        throw ParseError("unknown header key '" + tokens[0] + "'", line_no);
      }
      continue;
    }
    long long k = 0, i = 0, j = 0;
    if (tokens.size() != 3 || !parse_integer(tokens[0], k) || !parse_integer(tokens[1], i) ||
        !parse_integer(tokens[2], j) || k < 1 || static_cast<std::size_t>(k) > steps) {
      throw ParseError("line " + std::to_string(line_no) + ": bad edge record", line_no);
    }
    edges[static_cast<std::size_t>(k - 1)].emplace_back(i, j);
  }
  if (!header_done || steps == 0) throw ParseError("incomplete container header", line_no);
  auto seq = from_edge_lists(n, edges);
  seq.interval = interval;
  return seq;
}

}  // namespace tenence
