#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace predlab {

enum class ExperimentId {
  E1_parabolic,
  E2_natural_measure,
  E3_model_nonpredict,
  E4_counterexample,
  E5_ergodic_predict,
  E6_idim,
};

/// Long form, e.g. "E1_parabolic".
std::string_view to_string(ExperimentId id);
/// Accepts the long form or the bare prefix ("E1").
ExperimentId parse_experiment_id(std::string_view name);
std::string_view describe(ExperimentId id);
const std::vector<ExperimentId>& all_experiments();

struct ExperimentConfig {
  ExperimentId id = ExperimentId::E1_parabolic;
  std::uint64_t seed = 1;
  std::map<std::string, double> overrides;
  std::optional<std::string> observable;  // base function name

  double get(const std::string& key, double fallback) const;
  std::size_t get_count(const std::string& key, std::size_t fallback) const;
};

class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::size_t line, const std::string& what)
      : std::invalid_argument(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Names accepted as override keys.
const std::vector<std::string>& known_override_keys();

/// Throws ConfigError (line 0) if the key is unknown or the value is out of
/// its documented range.
void validate_override(const std::string& key, double value);

/// Flat `key = value` lines with `#` comments. Requires `experiment`.
ExperimentConfig parse_config(std::string_view text);

using CsvValue = std::variant<double, std::int64_t, std::string>;
using CsvRow = std::vector<CsvValue>;

/// Reals with 17 significant digits ("%.17g"), so values round-trip exactly.
std::string format_real(double v);

/// Header line then one line per row. Throws std::invalid_argument on a row
/// whose width differs from the header and std::runtime_error on I/O failure.
void emit_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
              const std::vector<CsvRow>& rows);

struct RunSummary {
  ExperimentId id = ExperimentId::E1_parabolic;
  std::map<std::string, std::string> config;
  std::map<std::string, double> metrics;
  std::map<std::string, bool> pass_flags;
  std::vector<std::string> files;
  double wall_time_s = 0.0;

  bool all_passed() const;
  std::string to_json() const;
};

/// Failure inside one named stage of an experiment.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// Runs one experiment, writing its CSV files and summary.json into out_dir.
RunSummary run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace predlab
