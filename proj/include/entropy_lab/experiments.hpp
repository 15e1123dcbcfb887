#pragma once

// Named experiments with flat key = value configuration, CSV / SVG artifacts
// and a manifest per output directory.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace entropy_lab {

/// Flat key = value text. Blank lines and lines starting with '#' are
/// ignored; a repeated key is an error. Throws Error(ConfigError).
class Config {
 public:
  static Config parse(const std::string& text);
  static Config load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

struct ExperimentInfo {
  std::string name;
  std::string anchor;
};

/// The eleven experiments in listing order, `all` last.
const std::vector<ExperimentInfo>& experiment_list();

/// One line per experiment: "<name> — <anchor>".
std::string list_experiments();

struct RunOptions {
  std::optional<std::filesystem::path> out;  // overrides output.dir
  std::optional<std::uint64_t> seed;         // overrides seed
  bool parallel = false;                     // independent experiments of `all` in parallel
};

struct RunOutcome {
  int exit_code = 0;  // 0 pass, 1 assertion failure, 2 config error
  std::string message;
  /// "<experiment>: <assertion> : <detail>" for every failed assertion.
  std::vector<std::string> failures;
  std::filesystem::path out;
};

/// Validates the configuration completely before writing anything, then runs
/// the experiment. Errors raised by a pipeline count as assertion failures.
RunOutcome run_experiment(const std::string& name, const Config& config,
                          const RunOptions& opts = {});

}  // namespace entropy_lab
