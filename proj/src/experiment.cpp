#include "disent/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "disent/error.hpp"
#include "disent/rng.hpp"

namespace disent {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kTrainSeedStream = 101;
constexpr std::uint64_t kProbeSeedStream = 102;

// ---- config parsing helpers ----

void reject_unknown_keys(const json& user, const json& schema, const std::string& where) {
  if (!user.is_object()) fail(ErrorCode::kConfig, where + ": expected an object");
  for (const auto& [key, value] : user.items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    if (!schema.contains(key)) fail(ErrorCode::kConfig, "unknown config key '" + path + "'");
    if (schema[key].is_object()) reject_unknown_keys(value, schema[key], path);
  }
}

void overlay(json& base, const json& user) {
  for (const auto& [key, value] : user.items()) {
    if (value.is_object() && base[key].is_object()) {
      overlay(base[key], value);
    } else {
      base[key] = value;
    }
  }
}

template <typename T>
T get_as(const json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::kConfig, "config key '" + where + key + "' has the wrong type");
  }
}

template <typename T>
std::optional<T> get_opt(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return get_as<T>(j, key, where);
}

std::size_t get_count(const json& j, const char* key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    fail(ErrorCode::kConfig, "config key '" + where + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::vector<std::size_t> get_widths(const json& j, const char* key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_array()) fail(ErrorCode::kConfig, "config key '" + where + key + "' must be an array");
  std::vector<std::size_t> out;
  for (const auto& e : v) {
    if (!e.is_number_integer() || e.get<long long>() <= 0) {
      fail(ErrorCode::kConfig, "config key '" + where + key + "' must hold positive integers");
    }
    out.push_back(e.get<std::size_t>());
  }
  return out;
}

Regularizer get_regularizer(const json& v, const std::string& where) {
  if (!v.is_string()) fail(ErrorCode::kConfig, where + " must be a string");
  const auto r = parse_regularizer(v.get<std::string>());
  if (!r) fail(ErrorCode::kConfig, "unknown measure '" + v.get<std::string>() + "' in " + where);
  return *r;
}

json optional_path(const std::optional<fs::path>& p) {
  return p ? json(p->string()) : json(nullptr);
}

template <typename T>
json optional_value(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

// ---- file helpers ----

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  os << text;
  if (!os) fail(ErrorCode::kIo, "write failed for " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::kIo, "cannot create directory " + dir.string() + ": " + ec.message());
}

std::string format_lambda(double lambda) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", lambda);
  return buf;
}

std::string checkpoint_name(std::size_t step) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "step_%06zu.ckpt", step);
  return buf;
}

json stats_to_json(const TrainStats& s) {
  return {{"outer_updates", s.outer_updates},
          {"inner_updates", s.inner_updates},
          {"processed_batches", s.processed_batches},
          {"skipped_batches", s.skipped_batches}};
}

// Persists a finished run into `dir` and returns its summary.
json write_run(const fs::path& dir, const TrainConfig& train_cfg, TrainResult& result,
               const DatasetSplit& data, const ProbeConfig& probe_cfg) {
  ensure_dir(dir / "checkpoints");
  std::string jsonl;
  for (std::size_t i = 0; i < result.records.size(); ++i) {
    const std::string rel = "checkpoints/" + checkpoint_name(result.records[i].step);
    save_checkpoint(result.checkpoints[i], dir / rel);
    result.records[i].checkpoint_path = rel;
    jsonl += record_to_json(result.records[i]).dump() + "\n";
  }
  write_text(dir / "records.jsonl", jsonl);
  save_checkpoint(result.params, dir / "final.ckpt");

  const ProbeReport report = evaluate(result.params, data.test, probe_cfg);
  json summary = {
      {"measure", regularizer_name(train_cfg.measure)},
      {"lambda", train_cfg.lambda},
      {"steps", train_cfg.steps},
      {"main_acc", report.main_acc},
      {"sensitive_acc", report.sensitive_acc},
      {"reg_value", result.records.empty() ? json(nullptr)
                                           : optional_value(result.records.back().reg_value)},
      {"final_checkpoint", "final.ckpt"},
      {"records", result.records.size()},
      {"stats", stats_to_json(result.stats)},
  };
  write_json(dir / "summary.json", summary);
  return summary;
}

}  // namespace

json default_config_json() {
  const ExperimentConfig d;
  json j = to_json(d);
  j["data"]["y_shift"] = nullptr;
  j["data"]["s_shift"] = nullptr;
  return j;
}

json to_json(const ExperimentConfig& c) {
  const auto& t = c.train;
  const auto& sk = t.divergence.sinkhorn;
  json measures = json::array();
  for (Regularizer r : c.sweep_measures) measures.push_back(regularizer_name(r));
  return {
      {"schema_version", kConfigSchemaVersion},
      {"seed", c.seed},
      {"out", c.out.string()},
      {"jobs", c.jobs},
      {"data",
       {{"dir", optional_path(c.data_dir)},
        {"n", c.synth.n},
        {"d_in", c.synth.d_in},
        {"y_shift", c.synth.y_shift},
        {"s_shift", c.synth.s_shift},
        {"correlation", c.synth.correlation},
        {"noise_std", c.synth.noise_std}}},
      {"train",
       {{"lambda", t.lambda},
        {"measure", regularizer_name(t.measure)},
        {"batch_size", t.batch_size},
        {"steps", t.steps},
        {"lr", t.lr},
        {"weight_decay", t.weight_decay},
        {"unroll", optional_value(t.unroll)},
        {"checkpoint_every", t.checkpoint_every},
        {"encoder_hidden", t.encoder_hidden},
        {"embedding_dim", t.embedding_dim},
        {"classifier_hidden", t.classifier_hidden},
        {"adversary_hidden", t.adversary_hidden},
        {"leaky_slope", t.leaky_slope},
        {"monitor_rows", t.monitor_rows},
        {"sinkhorn",
         {{"epsilon", optional_value(sk.epsilon)},
          {"epsilon_scale", sk.epsilon_scale},
          {"power", sk.power},
          {"max_iter", sk.max_iter},
          {"tol", sk.tol}}},
        {"mmd_bandwidth", optional_value(t.divergence.mmd_bandwidth)}}},
      {"probe",
       {{"hidden", c.probe.hidden},
        {"steps", c.probe.steps},
        {"batch_size", c.probe.batch_size},
        {"lr", c.probe.lr},
        {"weight_decay", c.probe.weight_decay},
        {"train_fraction", c.probe.train_fraction}}},
      {"sweep", {{"measures", measures}, {"lambdas", c.sweep_lambdas}}},
      {"inputs",
       {{"checkpoint", optional_path(c.checkpoint)},
        {"data", optional_path(c.data_csv)},
        {"run", optional_path(c.run_dir)},
        {"output", optional_path(c.output)}}},
  };
}

ExperimentConfig resolve_config(const json& user) {
  const json schema = default_config_json();
  if (user.is_null()) return resolve_config(json::object());
  reject_unknown_keys(user, schema, "");
  if (user.contains("schema_version") && user["schema_version"] != kConfigSchemaVersion) {
    fail(ErrorCode::kConfig, "unsupported schema_version (expected " +
                                 std::to_string(kConfigSchemaVersion) + ")");
  }
  json j = schema;
  overlay(j, user);

  ExperimentConfig c;
  const json& seed = j["seed"];
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0))
    fail(ErrorCode::kConfig, "seed must be a non-negative integer");
  c.seed = j["seed"].get<std::uint64_t>();
  c.out = get_as<std::string>(j, "out", "");
  c.jobs = get_count(j, "jobs", "");
  if (c.jobs < 1) fail(ErrorCode::kConfig, "jobs must be >= 1");

  const json& d = j["data"];
  c.data_dir = get_opt<std::string>(d, "dir", "data.");
  c.synth.n = get_count(d, "n", "data.");
  c.synth.d_in = get_count(d, "d_in", "data.");
  c.synth.correlation = get_as<double>(d, "correlation", "data.");
  c.synth.noise_std = get_as<double>(d, "noise_std", "data.");
  c.synth.seed = c.seed;
  c.synth.y_shift = get_opt<std::vector<double>>(d, "y_shift", "data.")
                        .value_or(SynthSpec::default_y_shift(c.synth.d_in));
  c.synth.s_shift = get_opt<std::vector<double>>(d, "s_shift", "data.")
                        .value_or(SynthSpec::default_s_shift(c.synth.d_in));
  try {
    c.synth.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kConfig, e.what());
  }

  const json& t = j["train"];
  auto& tc = c.train;
  tc.lambda = get_as<double>(t, "lambda", "train.");
  tc.measure = get_regularizer(t["measure"], "train.measure");
  tc.batch_size = get_count(t, "batch_size", "train.");
  tc.steps = get_count(t, "steps", "train.");
  tc.lr = get_as<double>(t, "lr", "train.");
  tc.weight_decay = get_as<double>(t, "weight_decay", "train.");
  if (!t["unroll"].is_null()) tc.unroll = get_count(t, "unroll", "train.");
  tc.checkpoint_every = get_count(t, "checkpoint_every", "train.");
  tc.encoder_hidden = get_widths(t, "encoder_hidden", "train.");
  tc.embedding_dim = get_count(t, "embedding_dim", "train.");
  tc.classifier_hidden = get_widths(t, "classifier_hidden", "train.");
  tc.adversary_hidden = get_widths(t, "adversary_hidden", "train.");
  tc.leaky_slope = get_as<double>(t, "leaky_slope", "train.");
  tc.monitor_rows = get_count(t, "monitor_rows", "train.");
  const json& sk = t["sinkhorn"];
  tc.divergence.sinkhorn.epsilon = get_opt<double>(sk, "epsilon", "train.sinkhorn.");
  tc.divergence.sinkhorn.epsilon_scale = get_as<double>(sk, "epsilon_scale", "train.sinkhorn.");
  tc.divergence.sinkhorn.power = get_as<int>(sk, "power", "train.sinkhorn.");
  tc.divergence.sinkhorn.max_iter = get_count(sk, "max_iter", "train.sinkhorn.");
  tc.divergence.sinkhorn.tol = get_as<double>(sk, "tol", "train.sinkhorn.");
  tc.divergence.mmd_bandwidth = get_opt<double>(t, "mmd_bandwidth", "train.");
  tc.seed = derive_seed(c.seed, kTrainSeedStream);
  tc.validate();

  const json& p = j["probe"];
  c.probe.hidden = get_widths(p, "hidden", "probe.");
  c.probe.steps = get_count(p, "steps", "probe.");
  c.probe.batch_size = get_count(p, "batch_size", "probe.");
  c.probe.lr = get_as<double>(p, "lr", "probe.");
  c.probe.weight_decay = get_as<double>(p, "weight_decay", "probe.");
  c.probe.train_fraction = get_as<double>(p, "train_fraction", "probe.");
  c.probe.seed = derive_seed(c.seed, kProbeSeedStream);
  c.probe.validate();

  const json& s = j["sweep"];
  if (!s["measures"].is_array() || !s["lambdas"].is_array()) {
    fail(ErrorCode::kConfig, "sweep.measures and sweep.lambdas must be arrays");
  }
  c.sweep_measures.clear();
  for (const auto& m : s["measures"]) c.sweep_measures.push_back(get_regularizer(m, "sweep.measures"));
  c.sweep_lambdas = get_as<std::vector<double>>(s, "lambdas", "sweep.");
  for (double l : c.sweep_lambdas)
    if (!(l >= 0.0)) fail(ErrorCode::kConfig, "sweep.lambdas must be >= 0");

  const json& in = j["inputs"];
  c.checkpoint = get_opt<std::string>(in, "checkpoint", "inputs.");
  c.data_csv = get_opt<std::string>(in, "data", "inputs.");
  c.run_dir = get_opt<std::string>(in, "run", "inputs.");
  c.output = get_opt<std::string>(in, "output", "inputs.");
  return c;
}

DatasetSplit load_data(const ExperimentConfig& cfg) {
  if (!cfg.data_dir) return generate(cfg.synth);
  return {read_csv(*cfg.data_dir / "train.csv"), read_csv(*cfg.data_dir / "test.csv"),
          read_csv(*cfg.data_dir / "aux.csv")};
}

json record_to_json(const RunRecord& r) {
  return {{"step", r.step},
          {"main_loss", r.main_loss},
          {"reg_value", optional_value(r.reg_value)},
          {"main_acc", r.main_acc},
          {"probe_acc", optional_value(r.probe_acc)},
          {"checkpoint_path", optional_value(r.checkpoint_path)}};
}

RunRecord record_from_json(const json& j) {
  RunRecord r;
  try {
    r.step = j.at("step").get<std::size_t>();
    r.main_loss = j.at("main_loss").get<double>();
    if (!j.at("reg_value").is_null()) r.reg_value = j["reg_value"].get<double>();
    r.main_acc = j.at("main_acc").get<double>();
    if (!j.at("probe_acc").is_null()) r.probe_acc = j["probe_acc"].get<double>();
    if (!j.at("checkpoint_path").is_null()) r.checkpoint_path = j["checkpoint_path"].get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, std::string("run record: ") + e.what());
  }
  return r;
}

json report_to_json(const ProbeReport& r) {
  return {{"main_acc", r.main_acc},
          {"sensitive_acc", r.sensitive_acc},
          {"probe_train_loss_curve", r.probe_train_loss_curve},
          {"n_eval", r.n_eval}};
}

json report_to_json(const CorrelationReport& r) {
  json pairs = json::array();
  for (const auto& p : r.pairs) {
    pairs.push_back({{"step", p.step}, {"reg_value", p.reg_value}, {"sensitive_acc", p.sensitive_acc}});
  }
  return {{"correlation", r.correlation},
          {"abs_correlation", r.abs_correlation},
          {"low_sample", r.low_sample},
          {"pairs", pairs}};
}

json cmd_generate(const ExperimentConfig& cfg) {
  if (cfg.data_dir) fail(ErrorCode::kConfig, "generate: data.dir must be null (synthetic only)");
  const DatasetSplit split = generate(cfg.synth);
  write_csv(split.train, cfg.out / "train.csv");
  write_csv(split.test, cfg.out / "test.csv");
  write_csv(split.aux, cfg.out / "aux.csv");
  const json manifest = {
      {"schema_version", kConfigSchemaVersion},
      {"seed", cfg.seed},
      {"spec", to_json(cfg)["data"]},
      {"rows", {{"train", split.train.size()}, {"test", split.test.size()}, {"aux", split.aux.size()}}},
      {"files", {"train.csv", "test.csv", "aux.csv"}},
  };
  write_json(cfg.out / "manifest.json", manifest);
  return manifest;
}

json cmd_train(const ExperimentConfig& cfg) {
  const DatasetSplit data = load_data(cfg);
  TrainResult result = train(data, cfg.train);
  return write_run(cfg.out, cfg.train, result, data, cfg.probe);
}

json cmd_sweep(const ExperimentConfig& cfg) {
  if (cfg.sweep_lambdas.empty()) fail(ErrorCode::kConfig, "sweep: lambda grid is empty");
  if (cfg.sweep_measures.empty()) fail(ErrorCode::kConfig, "sweep: measure list is empty");
  const DatasetSplit data = load_data(cfg);

  struct Row {
    std::string measure;
    double lambda;
    double main_acc;
    double sensitive_acc;
  };
  std::vector<Row> rows;
  json runs = json::array();
  for (Regularizer measure : cfg.sweep_measures) {
    TrainConfig base = cfg.train;
    base.measure = measure;
    base.validate();
    auto entries = sweep(data, base, cfg.sweep_lambdas, cfg.jobs);
    for (auto& entry : entries) {
      const std::string name(regularizer_name(measure));
      const fs::path rel = fs::path(name) / ("lambda_" + format_lambda(entry.lambda));
      json summary = write_run(cfg.out / rel, entry.config, entry.result, data, cfg.probe);
      rows.push_back({name, entry.lambda, summary["main_acc"].get<double>(),
                      summary["sensitive_acc"].get<double>()});
      summary["dir"] = rel.string();
      runs.push_back(summary);
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.measure != b.measure ? a.measure < b.measure : a.lambda < b.lambda;
  });
  std::ostringstream csv;
  csv.precision(17);
  csv << "measure,lambda,main_acc,sensitive_acc\n";
  for (const auto& r : rows) {
    csv << r.measure << ',' << r.lambda << ',' << r.main_acc << ',' << r.sensitive_acc << '\n';
  }
  write_text(cfg.out / "sweep.csv", csv.str());
  const json summary = {{"rows", rows.size()}, {"table", "sweep.csv"}, {"runs", runs}};
  write_json(cfg.out / "sweep.json", summary);
  return summary;
}

json cmd_evaluate(const ExperimentConfig& cfg) {
  if (!cfg.checkpoint) fail(ErrorCode::kConfig, "evaluate: inputs.checkpoint is required");
  const ModelParams params = load_checkpoint(*cfg.checkpoint);
  const LabeledBatch test = cfg.data_csv ? read_csv(*cfg.data_csv) : load_data(cfg).test;
  const json report = report_to_json(evaluate(params, test, cfg.probe));
  write_json(cfg.out / "report.json", report);
  return report;
}

json cmd_correlate(const ExperimentConfig& cfg) {
  if (!cfg.run_dir) fail(ErrorCode::kConfig, "correlate: inputs.run is required");
  const fs::path run = *cfg.run_dir;
  // The run's own config decides which data its checkpoints are scored on.
  const ExperimentConfig run_cfg = resolve_config(read_json(run / "config.json"));
  const LabeledBatch test = cfg.data_csv ? read_csv(*cfg.data_csv) : load_data(run_cfg).test;

  std::ifstream is(run / "records.jsonl");
  if (!is) fail(ErrorCode::kIo, "correlate: cannot open " + (run / "records.jsonl").string());
  std::vector<CheckpointSample> checkpoints;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(ErrorCode::kParse, "records.jsonl: " + std::string(e.what()));
    }
    const RunRecord rec = record_from_json(j);
    if (!rec.checkpoint_path || !rec.reg_value) continue;
    checkpoints.push_back({rec.step, load_checkpoint(run / *rec.checkpoint_path), *rec.reg_value});
  }
  if (checkpoints.size() < 2) {
    fail(ErrorCode::kInsufficientSamples,
         "correlate: run has " + std::to_string(checkpoints.size()) +
             " checkpoint(s) with a regularizer value; need at least 2");
  }
  const json report = report_to_json(correlation_analysis(checkpoints, test, cfg.probe));
  write_json(cfg.out / "correlation.json", report);
  return report;
}

json cmd_export_embeddings(const ExperimentConfig& cfg) {
  if (!cfg.checkpoint) fail(ErrorCode::kConfig, "export-embeddings: inputs.checkpoint is required");
  const ModelParams params = load_checkpoint(*cfg.checkpoint);
  LabeledBatch batch = cfg.data_csv ? read_csv(*cfg.data_csv) : load_data(cfg).test;
  batch.samples = params.encoder.forward(batch.samples);
  const fs::path target = cfg.output.value_or(cfg.out / "embeddings.csv");
  if (target.has_parent_path()) ensure_dir(target.parent_path());
  write_csv(batch, target);
  return {{"path", target.string()}, {"rows", batch.size()}, {"cols", batch.samples.cols()}};
}

json run_command(std::string_view command, const json& user_config) {
  try {
    const ExperimentConfig cfg = resolve_config(user_config);
    using Handler = json (*)(const ExperimentConfig&);
    static const std::map<std::string_view, Handler> handlers = {
        {"generate", cmd_generate},     {"train", cmd_train},
        {"sweep", cmd_sweep},           {"evaluate", cmd_evaluate},
        {"correlate", cmd_correlate},   {"export-embeddings", cmd_export_embeddings},
    };
    const auto it = handlers.find(command);
    if (it == handlers.end()) fail(ErrorCode::kConfig, "unknown command '" + std::string(command) + "'");
    ensure_dir(cfg.out);
    write_json(cfg.out / "config.json", to_json(cfg));
    return it->second(cfg);
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, e.what());
  } catch (const fs::filesystem_error& e) {
    fail(ErrorCode::kIo, e.what());
  }
}

}  // namespace disent
