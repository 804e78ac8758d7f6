#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdg/io.hpp"

namespace sdg {

/// Parsed experiment. The raw JSON blocks are kept for task parameters;
/// the typed fields are the validated core.
struct ExperimentConfig {
  std::string text;  // bytes hashed into the provenance
  nlohmann::json model;
  nlohmann::json grid;
  nlohmann::json classes;
  nlohmann::json task;
  nlohmann::json output;

  std::string game;
  nlohmann::json game_params;
  double t0 = 0.0;
  double T = 1.0;
  std::size_t n_steps = 50;
  std::size_t m_paths = 10000;
  std::uint64_t seed = 1;
  std::string task_kind;
  std::string out_dir = "out";
  std::vector<std::string> formats{"json", "csv"};
};

/// ConfigInvalid with the offending field path ("task.delta", ...);
/// UnknownKey for unknown registry keys.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

enum class PlotKind { ValueVsX, EnvelopeVsN, PdeSurface, DppBracket };

PlotKind plot_kind_from_string(const std::string& name);
const char* to_string(PlotKind kind);

struct RunResult {
  std::string task;
  bool pass = false;
  std::string summary;
  nlohmann::json report;  // task payload, without meta
  /// Plot tables keyed by the kind they feed; filled by the task.
  std::map<PlotKind, CsvTable> plots;
};

/// Runs the configured task in memory.
RunResult execute(const ExperimentConfig& cfg);

/// CSV for one plot kind. KindMismatch if the task does not produce it.
std::string emit_plotdata(const RunResult& result, PlotKind kind, const Provenance& prov);

struct RunOptions {
  std::optional<unsigned> threads;
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed;
};

inline constexpr int kExitPass = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitAssertion = 2;

/// Loads, executes and persists one experiment. Prints a one-line summary
/// to `log` and errors to `err`. Returns 0 (pass), 2 (assertion failed) or
/// 1 (error).
int run(const std::filesystem::path& config, const RunOptions& opts, std::ostream& log,
        std::ostream& err);

/// Config check only. 0 when valid, 1 otherwise.
int validate_config(const std::filesystem::path& config, std::ostream& log, std::ostream& err);

}  // namespace sdg
