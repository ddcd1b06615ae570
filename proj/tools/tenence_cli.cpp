// tenence: ingest, train, evaluate, ablate and analyze from the command line.
//
// Exit codes: 0 success, 2 input error, 3 numeric failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tenence/analysis.hpp"
#include "tenence/checkpoint.hpp"
#include "tenence/hashing.hpp"
#include "tenence/metrics.hpp"
#include "tenence/pipeline.hpp"

namespace fs = std::filesystem;
using namespace tenence;

namespace {

constexpr int kInputError = 2;
constexpr int kNumericError = 3;

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Flags {
  std::string dataset;
  std::string config;
  std::uint64_t seed = 0;
  std::string seeds;
  std::size_t epochs = 0;
  double alpha = 0.0, beta = 0.0;
  std::size_t nce_negatives = 0;
  bool exhaustive_nce = false;
  std::vector<std::string> regimes;
  std::size_t samples = 0;
  std::string out;
  std::size_t steps = 0;
  std::map<std::string, CLI::Option*> given;

  bool has(const std::string& name) const {
    auto it = given.find(name);
    return it != given.end() && it->second->count() > 0;
  }
};

void add_common(CLI::App* cmd, Flags& f) {
  f.given["dataset"] = cmd->add_option("--dataset", f.dataset, "Manifest id or file path")->required();
  f.given["config"] = cmd->add_option("--config", f.config, "JSON run config");
  f.given["seed"] = cmd->add_option("--seed", f.seed, "Single run seed");
  f.given["seeds"] = cmd->add_option("--seeds", f.seeds, "Seed list, e.g. 0-4 or 0,3,7");
  f.given["epochs"] = cmd->add_option("--epochs", f.epochs, "Training epochs");
  f.given["alpha"] = cmd->add_option("--alpha", f.alpha, "Reconstruction loss weight");
  f.given["beta"] = cmd->add_option("--beta", f.beta, "CPC loss weight");
  f.given["nce-negatives"] =
      cmd->add_option("--nce-negatives", f.nce_negatives, "Negatives per infoNCE anchor");
  f.given["exhaustive-nce"] =
      cmd->add_flag("--exhaustive-nce", f.exhaustive_nce, "Use every negative in infoNCE");
  f.given["regime"] = cmd->add_option("--regime", f.regimes, "Evaluation regime (repeatable)");
  f.given["samples"] = cmd->add_option("--samples", f.samples, "Null-model samples");
  f.given["out"] = cmd->add_option("--out", f.out, "Output directory");
  f.given["steps"] = cmd->add_option("--steps", f.steps, "Snapshot count N for event lists");
}

RunConfig build_config(const Flags& f, const std::string& dataset_id) {
  RunConfig c = default_config(dataset_id);
  c.dataset = f.dataset;
  if (f.has("config")) apply_config_file(c, f.config);
  if (auto env = seed_from_env()) c.seeds = {*env};
  if (f.has("seeds")) c.seeds = parse_seed_list(f.seeds);
  if (f.has("seed")) c.seeds = {f.seed};
  if (f.has("epochs")) c.train.epochs = f.epochs;
  if (f.has("alpha")) c.train.weights.alpha = f.alpha;
  if (f.has("beta")) c.train.weights.beta = f.beta;
  if (f.has("nce-negatives")) c.train.negatives.budget = f.nce_negatives;
  if (f.has("exhaustive-nce")) c.train.negatives.exhaustive = f.exhaustive_nce;
  if (f.has("regime")) {
    c.eval.regimes.clear();
    for (const auto& r : f.regimes) c.eval.regimes.push_back(parse_regime(r));
  }
  if (f.has("samples")) c.null_samples = f.samples;
  if (f.has("out")) c.out = f.out;
  if (f.has("steps")) c.steps = f.steps;
  c.train.weights.validate();
  c.train.validate();
  return c;
}

// The manifest id when the dataset flag names one, else the file stem.
std::string dataset_id(const std::string& spec) {
  return fs::is_regular_file(spec) ? fs::path(spec).stem().string() : spec;
}

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

fs::path run_dir(const RunConfig& c, const std::string& id) {
  return c.out / (id + "-" + c.hash());
}

fs::path seed_dir(const fs::path& run, std::uint64_t seed) {
  return run / ("seed-" + std::to_string(seed));
}

struct Loaded {
  RunConfig config;
  ResolvedDataset data;
};

Loaded load(const Flags& f) {
  const auto id = dataset_id(f.dataset);
  RunConfig c = build_config(f, id);
  auto data = resolve_dataset(f.dataset, c.steps);
  return {std::move(c), std::move(data)};
}

std::string file_hash_or_empty(const fs::path& p) {
  return fs::is_regular_file(p) ? sha256_file(p) : std::string();
}

nlohmann::json run_manifest(const std::string& command, const Flags& f, const Loaded& l,
                            const fs::path& out_dir) {
  nlohmann::json m;
  m["command"] = command;
  m["dataset"] = l.data.id;
  m["source"] = l.data.source.string();
  m["config_path"] = f.config;
  m["config_hash"] = l.config.hash();
  m["config"] = nlohmann::json::parse(l.config.to_json());
  m["seeds"] = l.config.seeds;
  m["out"] = out_dir.string();
  m["inputs"] = {{"source_sha256", file_hash_or_empty(l.data.source)},
                 {"config_sha256", f.config.empty() ? "" : file_hash_or_empty(f.config)}};
  return m;
}

void record_outputs(nlohmann::json& manifest, const std::vector<fs::path>& outputs,
                    const fs::path& base) {
  nlohmann::json hashes = nlohmann::json::object();
  for (const auto& p : outputs) hashes[fs::relative(p, base).string()] = sha256_file(p);
  manifest["outputs"] = hashes;
}

int cmd_ingest(const Flags& f) {
  const auto id = dataset_id(f.dataset);
  RunConfig c = build_config(f, id);
  const auto data = resolve_dataset(f.dataset, c.steps);
  const fs::path out_dir = f.has("out") ? fs::path(f.out) : fs::path("data") / "ingested";
  const auto container = out_dir / (data.id + ".tsnap");
  write_file(container, write_canonical(data.seq));
  nlohmann::json m;
  m["dataset"] = data.id;
  m["source"] = data.source.string();
  m["source_sha256"] = file_hash_or_empty(data.source);
  m["artifact"] = container.filename().string();
  m["artifact_sha256"] = sha256_file(container);
  m["nodes"] = data.seq.num_nodes();
  m["edges"] = data.seq.total_edges();
  m["steps"] = data.seq.length();
  write_file(out_dir / (data.id + ".ingest.json"), m.dump(2) + "\n");
  std::printf("nodes=%zu edges=%zu steps=%zu\n", data.seq.num_nodes(), data.seq.total_edges(),
              data.seq.length());
  std::printf("artifact=%s sha256=%s\n", container.string().c_str(),
              m["artifact_sha256"].get<std::string>().c_str());
  return 0;
}

int cmd_train(const Flags& f) {
  const auto l = load(f);
  const auto dir = run_dir(l.config, l.data.id);
  auto manifest = run_manifest("train", f, l, dir);
  std::vector<fs::path> outputs;
  write_file(dir / "config.json", nlohmann::json::parse(l.config.to_json()).dump(2) + "\n");
  outputs.push_back(dir / "config.json");
  for (auto seed : l.config.seeds) {
    const auto sd = seed_dir(dir, seed);
    TrainResult result;
    try {
      result = train_seed(l.data.seq, l.config, seed);
    } catch (const NumericFailure& e) {
      const auto& r = e.record();
      nlohmann::json diag{{"seed", seed},           {"epoch", r.epoch},
                          {"error", e.what()},      {"total", std::to_string(r.total)},
                          {"prediction", r.prediction}, {"reconstruction", r.reconstruction},
                          {"cpc_local", r.cpc_local},   {"cpc_global", r.cpc_global},
                          {"lr", r.lr}};
      write_file(sd / "diagnostics.json", diag.dump(2) + "\n");
      throw;
    }
    save_checkpoint(sd / "checkpoint.tnck", result.params,
                    {l.config.hash(), seed, result.history.best_epoch});
    write_file(sd / "history.tsv", result.history.to_text());
    outputs.push_back(sd / "checkpoint.tnck");
    outputs.push_back(sd / "history.tsv");
    const double last = result.history.records.empty() ? 0.0 : result.history.records.back().total;
    std::printf("seed=%llu epochs=%zu best_epoch=%zu best_loss=%.6g final_loss=%.6g\n",
                static_cast<unsigned long long>(seed), result.history.records.size(),
                result.history.best_epoch, result.history.best_loss, last);
  }
  record_outputs(manifest, outputs, dir);
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  std::printf("run_dir=%s\n", dir.string().c_str());
  return 0;
}

int cmd_evaluate(const Flags& f) {
  const auto l = load(f);
  const auto dir = run_dir(l.config, l.data.id);
  MetricsReport report;
  report.label = l.data.id;
  for (auto seed : l.config.seeds) {
    const auto path = seed_dir(dir, seed) / "checkpoint.tnck";
    if (!fs::exists(path)) {
      throw InputError("missing checkpoint " + path.string() + " (run `train` first)");
    }
    const auto ck = load_checkpoint(path);
    if (ck.meta.config_hash != l.config.hash()) {
      throw InputError("checkpoint " + path.string() + " was trained with another config");
    }
    report.runs.push_back({seed, evaluate_seed(ck.params, l.data.seq, l.config, seed)});
  }
  auto manifest = run_manifest("evaluate", f, l, dir);
  write_file(dir / "metrics.tsv", report.to_records());
  write_file(dir / "summary.txt", report.summary_table());
  record_outputs(manifest, {dir / "metrics.tsv", dir / "summary.txt"}, dir);
  write_file(dir / "evaluate.manifest.json", manifest.dump(2) + "\n");
  std::fputs(report.summary_table().c_str(), stdout);
  return 0;
}

int cmd_ablate(const Flags& f) {
  const auto l = load(f);
  RunConfig base = l.config;
  const auto dir = base.out / (l.data.id + "-ablation-" + base.hash());
  const auto rows = run_ablation(l.data.seq, base);
  std::string text;
  for (auto r : base.eval.regimes) text += ablation_table(rows, r) + "\n";
  const auto auc_pred = rows.front().report.per_run(Regime::kRandPosRandNeg, Metric::kAuc);
  const auto auc_full = rows.back().report.per_run(Regime::kRandPosRandNeg, Metric::kAuc);
  if (auc_pred.size() == auc_full.size() && auc_full.size() >= 2) {
    try {
      const auto t = paired_t_test(auc_full, auc_pred);
      char buf[160];
      std::snprintf(buf, sizeof buf, "# paired t-test full vs pred (RandPos-RandNeg AUC): t=%.6g p=%.6g dof=%zu\n",
                    t.t, t.p, t.dof);
      text += buf;
    } catch (const UndefinedMetric& e) {
      text += std::string("# paired t-test unavailable: ") + e.what() + "\n";
    }
  }
  std::string records;
  for (const auto& r : rows) records += r.report.to_records();
  write_file(dir / "ablation.txt", text);
  write_file(dir / "metrics.tsv", records);
  auto manifest = run_manifest("ablate", f, l, dir);
  record_outputs(manifest, {dir / "ablation.txt", dir / "metrics.tsv"}, dir);
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  std::fputs(text.c_str(), stdout);
  return 0;
}

int cmd_analyze(const Flags& f) {
  const auto l = load(f);
  const auto seed = l.config.seeds.front();
  const auto dir = l.config.out / (l.data.id + "-analysis-seed" + std::to_string(seed));
  const auto tc = temporal_correlation(l.data.seq);
  const auto report = null_model_report(l.data.seq, l.config.null_samples, seed);
  std::string density = "# step density\n";
  const auto series = density_series(l.data.seq);
  char buf[96];
  for (std::size_t k = 0; k < series.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%zu %.17g\n", k + 1, series[k]);
    density += buf;
  }
  std::string corr = "# node C_i\n";
  for (std::size_t i = 0; i < tc.per_node.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu %.17g\n", i, tc.per_node[i]);
    corr += buf;
  }
  write_file(dir / "null_models.txt", report.to_text());
  write_file(dir / "density.tsv", density);
  write_file(dir / "correlation.tsv", corr);
  auto manifest = run_manifest("analyze", f, l, dir);
  record_outputs(manifest, {dir / "null_models.txt", dir / "density.tsv", dir / "correlation.tsv"},
                 dir);
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  const auto re = report.re_quantiles();
  const auto rp = report.rp_quantiles();
  std::printf("C=%.6f RE_max=%.6f RP_max=%.6f samples=%zu\n", report.original, re.max, rp.max,
              report.samples);
  std::printf("above_null=%s\n", report.original > re.max && report.original > rp.max ? "yes" : "no");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-supervised dynamic link prediction on snapshot sequences"};
  app.require_subcommand(1);
  std::map<std::string, int (*)(const Flags&)> commands = {
      {"ingest", cmd_ingest}, {"train", cmd_train}, {"evaluate", cmd_evaluate},
      {"ablate", cmd_ablate}, {"analyze", cmd_analyze}};
  const std::map<std::string, std::string> help = {
      {"ingest", "Convert a dataset into the canonical snapshot container"},
      {"train", "Train one model per seed and write checkpoints and histories"},
      {"evaluate", "Score trained checkpoints on the test snapshots"},
      {"ablate", "Train and evaluate the four loss configurations"},
      {"analyze", "Temporal correlation, null models and density series"}};
  std::vector<Flags> per_command(commands.size());
  std::vector<std::pair<CLI::App*, std::string>> subs;
  std::size_t idx = 0;
  for (const auto& [name, _] : commands) {
    auto* sub = app.add_subcommand(name, help.at(name));
    add_common(sub, per_command[idx++]);
    subs.emplace_back(sub, name);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kInputError;
  }
  try {
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (subs[i].first->parsed()) return commands.at(subs[i].second)(per_command[i]);
    }
  } catch (const NumericFailure& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return kNumericError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInputError;
  }
  return kInputError;
}
