#pragma once

#include <filesystem>
#include <string_view>

#include <nlohmann/json.hpp>

#include "disent/data.hpp"
#include "disent/eval.hpp"
#include "disent/training.hpp"

namespace disent {

using json = nlohmann::json;

inline constexpr int kConfigSchemaVersion = 1;

/// Every knob of a CLI run, resolved from defaults, a JSON document and flags.
struct ExperimentConfig {
  std::uint64_t seed = 7;
  std::filesystem::path out = "out";
  std::size_t jobs = 1;

  /// Synthetic data unless data_dir names a directory with train/test/aux CSVs.
  SynthSpec synth;
  std::optional<std::filesystem::path> data_dir;

  TrainConfig train;
  ProbeConfig probe;

  std::vector<Regularizer> sweep_measures = {Regularizer::kGaussianW};
  std::vector<double> sweep_lambdas = {0.001, 0.01, 0.1, 1.0, 10.0};

  std::optional<std::filesystem::path> checkpoint;  // evaluate, export-embeddings
  std::optional<std::filesystem::path> data_csv;    // evaluate, export-embeddings
  std::optional<std::filesystem::path> run_dir;     // correlate
  std::optional<std::filesystem::path> output;      // export-embeddings file
};

/// The full configuration document with every default filled in.
json default_config_json();

/// Parses a user document on top of the defaults. Unknown keys, wrong types
/// and invalid values raise ErrorCode::kConfig.
ExperimentConfig resolve_config(const json& user);

json to_json(const ExperimentConfig& cfg);

/// Loads the train/test/aux split the config describes.
DatasetSplit load_data(const ExperimentConfig& cfg);

json record_to_json(const RunRecord& rec);
RunRecord record_from_json(const json& j);
json report_to_json(const ProbeReport& report);
json report_to_json(const CorrelationReport& report);

json cmd_generate(const ExperimentConfig& cfg);
json cmd_train(const ExperimentConfig& cfg);
json cmd_sweep(const ExperimentConfig& cfg);
json cmd_evaluate(const ExperimentConfig& cfg);
json cmd_correlate(const ExperimentConfig& cfg);
json cmd_export_embeddings(const ExperimentConfig& cfg);

inline constexpr std::string_view kCommands[] = {"generate", "train",     "sweep",
                                                 "evaluate", "correlate", "export-embeddings"};

/// Resolves `user_config`, echoes it into the output directory and runs the
/// named command. Returns the command's JSON summary.
json run_command(std::string_view command, const json& user_config);

}  // namespace disent
