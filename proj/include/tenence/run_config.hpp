// Run configuration: defaults, JSON config file, environment override and
// the config hash used to name run directories.
//
// Precedence, lowest first: built-in default (with per-dataset loss weights),
// config file, TENENCE_SEED, command-line flags.

#ifndef TENENCE_RUN_CONFIG_HPP
#define TENENCE_RUN_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tenence/evaluation.hpp"
#include "tenence/trainer.hpp"

namespace tenence {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string dataset;  // manifest id or path
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::size_t test_steps = 3;
  std::size_t steps = 0;  // overrides the manifest's N when nonzero
  TrainConfig train;
  EvalConfig eval;
  std::size_t null_samples = 100;
  std::filesystem::path out = "runs";

  /// Canonical JSON of every setting except `seeds` and `out`.
  std::string to_json() const;
  /// First 12 hex digits of SHA-256 over the settings that determine trained
  /// parameters (dataset, steps, split, train, model). Evaluation and analysis
  /// settings are excluded so one set of checkpoints serves any regime choice.
  std::string hash() const;
};

/// Defaults plus the tuned loss weights for the named benchmark, if known
/// (enron: 1/1, colab: 2/4, facebook: 4/2).
RunConfig default_config(const std::string& dataset = "");

/// Overlays keys from a JSON object. Unknown keys or wrong types throw ConfigError.
void apply_config_json(RunConfig& config, const std::string& json_text);
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

/// Parses TENENCE_SEED if set. Throws ConfigError when it is not an integer.
std::optional<std::uint64_t> seed_from_env();

/// "0,1,2" or "0-4".
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

}  // namespace tenence

#endif  // TENENCE_RUN_CONFIG_HPP
