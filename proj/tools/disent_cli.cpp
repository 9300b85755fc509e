// Command-line front end. Talks to the library only through disent.h.
//
// Precedence: built-in defaults < --config file < command-line flags.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "disent/disent.h"

namespace {

using json = nlohmann::json;

struct Flags {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  std::vector<std::string> measures;
  std::vector<double> lambdas;
  std::optional<std::string> checkpoint;
  std::optional<std::string> data;
  std::optional<std::string> run;
  std::optional<std::string> output;
};

int report_error(int code, const std::string& name, const std::string& message) {
  const json err = {{"error", name}, {"code", code}, {"message", message}};
  std::cerr << err.dump() << std::endl;
  return code == 0 ? 1 : code;
}

json load_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file " + path);
  return json::parse(is);
}

// Overlays the flags onto the config document.
void apply_flags(const std::string& command, const Flags& f, json& cfg) {
  if (f.out) cfg["out"] = *f.out;
  if (f.seed) cfg["seed"] = *f.seed;
  if (f.jobs) cfg["jobs"] = *f.jobs;
  if (command == "sweep") {
    if (!f.measures.empty()) cfg["sweep"]["measures"] = f.measures;
    if (!f.lambdas.empty()) cfg["sweep"]["lambdas"] = f.lambdas;
  } else {
    if (f.measures.size() > 1 || f.lambdas.size() > 1) {
      throw std::invalid_argument("--measure and --lambda repeat only for sweep");
    }
    if (!f.measures.empty()) cfg["train"]["measure"] = f.measures.front();
    if (!f.lambdas.empty()) cfg["train"]["lambda"] = f.lambdas.front();
  }
  if (f.checkpoint) cfg["inputs"]["checkpoint"] = *f.checkpoint;
  if (f.data) cfg["inputs"]["data"] = *f.data;
  if (f.run) cfg["inputs"]["run"] = *f.run;
  if (f.output) cfg["inputs"]["output"] = *f.output;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Disentangled representation learning with similarity-measure regularizers"};
  app.set_version_flag("--version", std::string(disent_version()));
  app.require_subcommand(1, 1);

  Flags flags;
  bool print_config = false;
  const char* commands[] = {"generate", "train", "sweep", "evaluate", "correlate",
                            "export-embeddings"};
  const char* help[] = {
      "Write synthetic train/test/aux CSVs and a manifest",
      "Train one model; writes records.jsonl, checkpoints and summary.json",
      "Train over a lambda grid per measure; writes sweep.csv",
      "Score a checkpoint: main accuracy and sensitive probe accuracy",
      "Correlate regularizer values with probe leakage across a run's checkpoints",
      "Write encoder outputs with labels as CSV",
  };
  for (std::size_t i = 0; i < std::size(commands); ++i) {
    CLI::App* sub = app.add_subcommand(commands[i], help[i]);
    sub->add_option("--config", flags.config, "JSON config file");
    sub->add_option("--out", flags.out, "Output directory");
    sub->add_option("--seed", flags.seed, "Master seed");
    sub->add_option("--jobs", flags.jobs, "Concurrent runs (sweep)")->check(CLI::PositiveNumber);
    sub->add_option("--measure", flags.measures,
                    "none|mmd|sinkhorn|jeffrey|fisher_rao|gaussian_w|adversarial (repeatable for sweep)");
    sub->add_option("--lambda", flags.lambdas, "Regularization weight (repeatable for sweep)");
    sub->add_option("--checkpoint", flags.checkpoint, "Checkpoint file");
    sub->add_option("--data", flags.data, "Labeled CSV");
    sub->add_option("--run", flags.run, "Run directory (correlate)");
    sub->add_option("--output", flags.output, "Output file (export-embeddings)");
    sub->add_flag("--print-config", print_config, "Print the resolved config and exit");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report_error(DISENT_ERR_CONFIG, "config_error", e.what());
  }

  const std::string command = app.get_subcommands().front()->get_name();
  json cfg = json::object();
  try {
    if (!flags.config.empty()) cfg = load_config_file(flags.config);
    if (!cfg.is_object()) throw std::invalid_argument("config file must hold a JSON object");
    apply_flags(command, flags, cfg);
  } catch (const std::exception& e) {
    return report_error(DISENT_ERR_CONFIG, "config_error", e.what());
  }

  char* result = nullptr;
  const std::string doc = cfg.dump();
  const disent_status status = print_config ? disent_resolve_config(doc.c_str(), &result)
                                            : disent_run_command(command.c_str(), doc.c_str(), &result);
  if (status != DISENT_OK) {
    return report_error(status, disent_status_name(status), disent_last_error());
  }
  std::cout << result << std::endl;
  disent_string_free(result);
  return 0;
}
