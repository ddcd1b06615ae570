#include "tenence/run_config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tenence/hashing.hpp"

namespace tenence {

using nlohmann::json;

namespace {

json to_object(const RunConfig& c) {
  const auto& t = c.train;
  json regimes = json::array();
  for (auto r : c.eval.regimes) regimes.push_back(regime_name(r));
  return {
      {"dataset", c.dataset},
      {"test_steps", c.test_steps},
      {"steps", c.steps},
      {"null_samples", c.null_samples},
      {"train",
       {{"lr", t.lr},
        {"weight_decay", t.weight_decay},
        {"adam_beta1", t.adam_beta1},
        {"adam_beta2", t.adam_beta2},
        {"adam_eps", t.adam_eps},
        {"scheduler_factor", t.scheduler_factor},
        {"scheduler_patience", t.scheduler_patience},
        {"scheduler_threshold", t.scheduler_threshold},
        {"min_lr", t.min_lr},
        {"epochs", t.epochs},
        {"select_best", t.select_best},
        {"alpha", t.weights.alpha},
        {"beta", t.weights.beta},
        {"nce_negatives", t.negatives.budget},
        {"exhaustive_nce", t.negatives.exhaustive},
        {"reconstruction", t.toggles.reconstruction},
        {"local_nce", t.toggles.local_nce},
        {"global_nce", t.toggles.global_nce},
        {"balance_bce", t.bce.balance},
        {"bce_eps", t.bce.eps}}},
      {"model",
       {{"enc_dim", t.model.enc_dim},
        {"state_dim", t.model.state_dim},
        {"time_dim", t.model.time_dim},
        {"dec_dim", t.model.dec_dim},
        {"local_hidden", t.model.local_hidden},
        {"head_bias", t.model.head_bias}}},
      {"eval",
       {{"regimes", regimes},
        {"ratio", c.eval.subsets.ratio},
        {"mrr_pool", c.eval.subsets.mrr_pool}}},
  };
}

template <class T>
void read(const json& obj, const char* key, T& target, const std::string& path) {
  if (!obj.contains(key)) return;
  try {
    target = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + path + key + "' has the wrong type");
  }
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known,
                    const std::string& path) {
  if (!obj.is_object()) throw ConfigError("config section '" + path + "' must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find_if(known.begin(), known.end(), [&](const char* k) { return key == k; }) ==
        known.end()) {
      throw ConfigError("unknown config key '" + path + key + "'");
    }
  }
}

}  // namespace

std::string RunConfig::to_json() const { return to_object(*this).dump(); }

std::string RunConfig::hash() const {
  auto obj = to_object(*this);
  obj.erase("eval");
  obj.erase("null_samples");
  return sha256_hex(obj.dump()).substr(0, 12);
}

RunConfig default_config(const std::string& dataset) {
  RunConfig c;
  c.dataset = dataset;
  std::string id = dataset;
  std::transform(id.begin(), id.end(), id.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (id == "enron") {
    c.train.weights = {1.0, 1.0};
  } else if (id == "colab") {
    c.train.weights = {2.0, 4.0};
  } else if (id == "facebook") {
    c.train.weights = {4.0, 2.0};
  }
  return c;
}

void apply_config_json(RunConfig& c, const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(root,
                 {"dataset", "seeds", "test_steps", "steps", "null_samples", "out", "train",
                  "model", "eval"},
                 "");
  read(root, "dataset", c.dataset, "");
  read(root, "seeds", c.seeds, "");
  read(root, "test_steps", c.test_steps, "");
  read(root, "steps", c.steps, "");
  read(root, "null_samples", c.null_samples, "");
  if (root.contains("out")) {
    std::string out;
    read(root, "out", out, "");
    c.out = out;
  }
  auto& t = c.train;
  if (root.contains("train")) {
    const auto& tr = root["train"];
    reject_unknown(tr,
                   {"lr", "weight_decay", "adam_beta1", "adam_beta2", "adam_eps",
                    "scheduler_factor", "scheduler_patience", "scheduler_threshold", "min_lr",
                    "epochs", "select_best", "alpha", "beta", "nce_negatives", "exhaustive_nce",
                    "reconstruction", "local_nce", "global_nce", "balance_bce", "bce_eps"},
                   "train.");
    const std::string p = "train.";
    read(tr, "lr", t.lr, p);
    read(tr, "weight_decay", t.weight_decay, p);
    read(tr, "adam_beta1", t.adam_beta1, p);
    read(tr, "adam_beta2", t.adam_beta2, p);
    read(tr, "adam_eps", t.adam_eps, p);
    read(tr, "scheduler_factor", t.scheduler_factor, p);
    read(tr, "scheduler_patience", t.scheduler_patience, p);
    read(tr, "scheduler_threshold", t.scheduler_threshold, p);
    read(tr, "min_lr", t.min_lr, p);
    read(tr, "epochs", t.epochs, p);
    read(tr, "select_best", t.select_best, p);
    read(tr, "alpha", t.weights.alpha, p);
    read(tr, "beta", t.weights.beta, p);
    read(tr, "nce_negatives", t.negatives.budget, p);
    read(tr, "exhaustive_nce", t.negatives.exhaustive, p);
    read(tr, "reconstruction", t.toggles.reconstruction, p);
    read(tr, "local_nce", t.toggles.local_nce, p);
    read(tr, "global_nce", t.toggles.global_nce, p);
    read(tr, "balance_bce", t.bce.balance, p);
    read(tr, "bce_eps", t.bce.eps, p);
  }
  if (root.contains("model")) {
    const auto& m = root["model"];
    reject_unknown(m, {"enc_dim", "state_dim", "time_dim", "dec_dim", "local_hidden", "head_bias"},
                   "model.");
    read(m, "enc_dim", t.model.enc_dim, "model.");
    read(m, "state_dim", t.model.state_dim, "model.");
    read(m, "time_dim", t.model.time_dim, "model.");
    read(m, "dec_dim", t.model.dec_dim, "model.");
    read(m, "local_hidden", t.model.local_hidden, "model.");
    read(m, "head_bias", t.model.head_bias, "model.");
  }
  if (root.contains("eval")) {
    const auto& e = root["eval"];
    reject_unknown(e, {"regimes", "ratio", "mrr_pool"}, "eval.");
    if (e.contains("regimes")) {
      std::vector<std::string> names;
      read(e, "regimes", names, "eval.");
      c.eval.regimes.clear();
      try {
        for (const auto& n : names) c.eval.regimes.push_back(parse_regime(n));
      } catch (const ArgumentError& err) {
        throw ConfigError(err.what());
      }
    }
    read(e, "ratio", c.eval.subsets.ratio, "eval.");
    read(e, "mrr_pool", c.eval.subsets.mrr_pool, "eval.");
  }
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  apply_config_json(config, buf.str());
}

std::optional<std::uint64_t> seed_from_env() {
  const char* value = std::getenv("TENENCE_SEED");
  if (!value || !*value) return std::nullopt;
  char* end = nullptr;
  errno = 0;
  const auto seed = std::strtoull(value, &end, 10);
  if (errno != 0 || *end != '\0' || value[0] == '-') {
    throw ConfigError(std::string("TENENCE_SEED is not an unsigned integer: ") + value);
  }
  return seed;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty() || s[0] == '-') {
      throw ConfigError("bad seed '" + s + "' in list '" + text + "'");
    }
    return static_cast<std::uint64_t>(v);
  };
  while (std::getline(ss, item, ',')) {
    const auto dash = item.find('-', 1);
    if (dash != std::string::npos) {
      const auto lo = number(item.substr(0, dash));
      const auto hi = number(item.substr(dash + 1));
      if (hi < lo) throw ConfigError("empty seed range '" + item + "'");
      for (auto s = lo; s <= hi; ++s) out.push_back(s);
    } else {
      out.push_back(number(item));
    }
  }
  if (out.empty()) throw ConfigError("empty seed list");
  return out;
}

}  // namespace tenence
