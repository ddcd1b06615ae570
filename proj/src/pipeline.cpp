#include "tenence/pipeline.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace tenence {

namespace {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetUnavailable("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool is_canonical(const std::string& text) {
  return text.rfind("# tenence snapshot container", 0) == 0;
}

}  // namespace

std::optional<std::filesystem::path> locate_manifest() {
  namespace fs = std::filesystem;
  if (const char* m = std::getenv("TENENCE_MANIFEST"); m && *m && fs::exists(m)) return fs::path(m);
  if (const char* d = std::getenv("TENENCE_DATA_DIR"); d && *d) {
    const auto p = fs::path(d) / "datasets.json";
    if (fs::exists(p)) return p;
  }
  const auto local = fs::path("data") / "datasets.json";
  if (fs::exists(local)) return local;
  return std::nullopt;
}

ResolvedDataset resolve_dataset(const std::string& spec, std::size_t steps,
                                const std::optional<std::filesystem::path>& manifest) {
  namespace fs = std::filesystem;
  if (spec.empty()) throw DatasetUnavailable("no dataset given");
  if (fs::is_regular_file(spec)) {
    const auto text = read_text(spec);
    ResolvedDataset r{fs::path(spec).stem().string(), spec, {}};
    if (is_canonical(text)) {
      r.seq = read_canonical(text);
      if (steps != 0 && steps != r.seq.length()) {
        throw DatasetUnavailable("container has " + std::to_string(r.seq.length()) +
                                 " steps, asked for " + std::to_string(steps));
      }
    } else {
      if (steps == 0) throw DatasetUnavailable("event list " + spec + " needs a step count");
      r.seq = discretize(parse_edge_list(text), static_cast<long long>(steps));
    }
    return r;
  }
  const auto where = manifest ? manifest : locate_manifest();
  if (!where) {
    throw DatasetUnavailable("dataset '" + spec +
                             "' is not a file and no manifest was found (set TENENCE_DATA_DIR)");
  }
  for (auto d : load_manifest(*where)) {
    if (d.id != spec) continue;
    if (!fs::exists(d.path)) {
      throw DatasetUnavailable("dataset '" + spec + "' points to missing file " + d.path.string());
    }
    if (steps != 0) d.steps = steps;
    return {d.id, d.path, load_dataset(d)};
  }
  throw DatasetUnavailable("dataset '" + spec + "' not listed in " + where->string());
}

TrainResult train_seed(const SnapshotSequence& seq, const RunConfig& config, std::uint64_t seed) {
  const auto split = split_train_test(seq, config.test_steps);
  TrainConfig tc = config.train;
  tc.seed = seed;
  return train_model(split.train, tc);
}

std::vector<StepMetrics> evaluate_seed(const ModelParameters& params, const SnapshotSequence& seq,
                                       const RunConfig& config, std::uint64_t seed) {
  const auto split = split_train_test(seq, config.test_steps);
  EvalConfig ec = config.eval;
  ec.seed = seed;
  return evaluate_run(params, seq, split.test_indices, ec);
}

std::vector<SeedOutcome> train_and_evaluate(const SnapshotSequence& seq, const RunConfig& config) {
  std::vector<SeedOutcome> out;
  for (auto seed : config.seeds) {
    SeedOutcome o;
    o.seed = seed;
    o.train = train_seed(seq, config, seed);
    o.metrics = evaluate_seed(o.train.params, seq, config, seed);
    out.push_back(std::move(o));
  }
  return out;
}

MetricsReport make_report(const std::string& label, const std::vector<SeedOutcome>& outcomes) {
  MetricsReport r;
  r.label = label;
  for (const auto& o : outcomes) r.runs.push_back({o.seed, o.metrics});
  return r;
}

std::vector<AblationVariant> ablation_variants() {
  return {
      {"pred", {false, false, false}},
      {"pred+recon", {true, false, false}},
      {"pred+recon+localNCE", {true, true, false}},
      {"full", {true, true, true}},
  };
}

std::vector<AblationRow> run_ablation(const SnapshotSequence& seq, const RunConfig& config) {
  std::vector<AblationRow> rows;
  for (const auto& v : ablation_variants()) {
    RunConfig c = config;
    c.train.toggles = v.toggles;
    rows.push_back({v, make_report(v.name, train_and_evaluate(seq, c))});
  }
  return rows;
}

std::string ablation_table(const std::vector<AblationRow>& rows, Regime regime) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "# %s\n%-22s %16s %16s %16s\n", regime_name(regime).c_str(),
                "variant", "AUC", "AP", "MRR");
  out += buf;
  for (const auto& row : rows) {
    const auto a = row.report.aggregate(regime);
    if (!a) {
      std::snprintf(buf, sizeof buf, "%-22s %16s %16s %16s\n", row.variant.name.c_str(), "n/a",
                    "n/a", "n/a");
    } else {
      std::snprintf(buf, sizeof buf, "%-22s %9.2f +- %4.2f %9.2f +- %4.2f %9.2f +- %4.2f\n",
                    row.variant.name.c_str(), 100 * a->auc.mean, 100 * a->auc.std,
                    100 * a->ap.mean, 100 * a->ap.std, 100 * a->mrr.mean, 100 * a->mrr.std);
    }
    out += buf;
  }
  return out;
}

}  // namespace tenence
