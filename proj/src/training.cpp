#include "disent/training.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <string>
#include <thread>

#include "disent/error.hpp"
#include "disent/rng.hpp"

namespace disent {

namespace {

// Stream ids for derive_seed; each consumer of randomness gets its own stream.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kBatchStream = 2;
constexpr std::uint64_t kAuxBatchStream = 3;
constexpr std::uint64_t kAdversaryInitStream = 4;

struct Regularized {
  Regularizer kind;
  std::string_view name;
};

constexpr Regularized kRegularizers[] = {
    {Regularizer::kNone, "none"},           {Regularizer::kMmd, "mmd"},
    {Regularizer::kSinkhorn, "sinkhorn"},   {Regularizer::kJeffrey, "jeffrey"},
    {Regularizer::kFisherRao, "fisher_rao"}, {Regularizer::kGaussianW, "gaussian_w"},
    {Regularizer::kAdversarial, "adversarial"},
};

std::vector<std::size_t> sample_batch(Rng& rng, std::size_t n, std::size_t batch_size) {
  std::vector<std::size_t> idx(batch_size);
  for (auto& i : idx) i = rng.index(n);
  return idx;
}

// Every measure fits per-group statistics, which needs two rows per group.
bool has_both_groups(const LabeledBatch& batch) {
  std::size_t seen[2] = {0, 0};
  for (Label s : batch.sensitive) ++seen[s];
  return seen[0] >= 2 && seen[1] >= 2;
}

// Draws batches until both sensitive groups have at least two rows. Other
// batches are counted and skipped; too many of them is a data error.
LabeledBatch next_batch(Rng& rng, const LabeledBatch& source, const TrainConfig& cfg,
                        TrainStats& stats) {
  const std::size_t max_skips = std::max<std::size_t>(1, cfg.steps / 5);
  while (true) {
    auto idx = sample_batch(rng, source.size(), cfg.batch_size);
    LabeledBatch batch = subset(source, idx);
    if (has_both_groups(batch)) {
      ++stats.processed_batches;
      return batch;
    }
    if (++stats.skipped_batches > max_skips) {
      fail(ErrorCode::kDataBalance, "training: more than 20% of sampled batches contain a single "
                                    "sensitive class");
    }
  }
}

void append_grads(const Mlp& grads, std::vector<double>& out) { grads.flatten_into(out); }

void apply_update(Mlp& net, std::vector<double> grads, AdamWState& state, const AdamWHyper& hyper) {
  std::vector<double> flat;
  net.flatten_into(flat);
  adamw_step(flat, grads, state, hyper);
  net.unflatten_from(flat);
}

// Adds lambda * SM gradients into dz (rows in batch order). Returns SM value.
double add_similarity_grad(Measure m, const Matrix& z, std::span<const Label> sensitive,
                           double lambda, const DivergenceConfig& dcfg, Matrix& dz) {
  auto [idx0, idx1] = sensitive_groups(sensitive);
  const DivGrad dg = compute_measure(m, gather_rows(z, idx0), gather_rows(z, idx1), dcfg);
  if (lambda != 0.0) {
    for (std::size_t r = 0; r < idx0.size(); ++r) {
      auto dst = dz.row(idx0[r]);
      auto src = dg.grad0.row(r);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += lambda * src[c];
    }
    for (std::size_t r = 0; r < idx1.size(); ++r) {
      auto dst = dz.row(idx1[r]);
      auto src = dg.grad1.row(r);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += lambda * src[c];
    }
  }
  return dg.value;
}

LabeledBatch monitor_batch(const LabeledBatch& train, std::size_t rows) {
  std::vector<std::size_t> idx(std::min(rows, train.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return subset(train, idx);
}

RunRecord make_record(std::size_t step, const ModelParams& params, const LabeledBatch& monitor,
                      const TrainConfig& cfg) {
  RunRecord rec;
  rec.step = step;
  const Matrix z = params.encoder.forward(monitor.samples);
  const Matrix logits = params.classifier.forward(z);
  rec.main_loss = cross_entropy(logits, monitor.main).loss;
  rec.main_acc = accuracy(logits, monitor.main);
  if (auto m = similarity_measure(cfg.measure)) {
    auto [idx0, idx1] = sensitive_groups(monitor.sensitive);
    if (idx0.size() >= 2 && idx1.size() >= 2) {
      rec.reg_value =
          compute_measure(*m, gather_rows(z, idx0), gather_rows(z, idx1), cfg.divergence).value;
    }
  } else if (cfg.measure == Regularizer::kAdversarial && params.adversary) {
    rec.reg_value = cross_entropy(params.adversary->forward(z), monitor.sensitive).loss;
  }
  return rec;
}

bool is_record_step(std::size_t step, const TrainConfig& cfg) {
  return step == 0 || step == cfg.steps || step % cfg.checkpoint_every == 0;
}

}  // namespace

std::string_view regularizer_name(Regularizer r) noexcept {
  for (const auto& entry : kRegularizers)
    if (entry.kind == r) return entry.name;
  return "unknown";
}

std::optional<Regularizer> parse_regularizer(std::string_view name) noexcept {
  for (const auto& entry : kRegularizers)
    if (entry.name == name) return entry.kind;
  return std::nullopt;
}

std::optional<Measure> similarity_measure(Regularizer r) noexcept {
  switch (r) {
    case Regularizer::kMmd: return Measure::kMmd;
    case Regularizer::kSinkhorn: return Measure::kSinkhorn;
    case Regularizer::kJeffrey: return Measure::kJeffrey;
    case Regularizer::kFisherRao: return Measure::kFisherRao;
    case Regularizer::kGaussianW: return Measure::kGaussianW;
    case Regularizer::kNone:
    case Regularizer::kAdversarial: return std::nullopt;
  }
  return std::nullopt;
}

void TrainConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail(ErrorCode::kConfig, "lambda must be >= 0");
  if (batch_size < 4) fail(ErrorCode::kConfig, "batch_size must be >= 4");
  if (steps < 1) fail(ErrorCode::kConfig, "steps must be >= 1");
  if (!(lr > 0.0)) fail(ErrorCode::kConfig, "lr must be > 0");
  if (!(weight_decay >= 0.0)) fail(ErrorCode::kConfig, "weight_decay must be >= 0");
  if (checkpoint_every < 1) fail(ErrorCode::kConfig, "checkpoint_every must be >= 1");
  if (embedding_dim < 1) fail(ErrorCode::kConfig, "embedding_dim must be >= 1");
  if (monitor_rows < 4) fail(ErrorCode::kConfig, "monitor_rows must be >= 4");
  if (measure == Regularizer::kAdversarial && (!unroll || *unroll < 1)) {
    fail(ErrorCode::kConfig, "measure adversarial requires unroll >= 1");
  }
  if (divergence.mmd_bandwidth && !(*divergence.mmd_bandwidth > 0.0)) {
    fail(ErrorCode::kConfig, "mmd_bandwidth must be > 0");
  }
  try {
    divergence.sinkhorn.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kConfig, e.what());
  }
}

ModelSpec TrainConfig::model_spec(std::size_t d_in) const {
  ModelSpec spec;
  spec.encoder.widths.push_back(d_in);
  spec.encoder.widths.insert(spec.encoder.widths.end(), encoder_hidden.begin(), encoder_hidden.end());
  spec.encoder.widths.push_back(embedding_dim);
  spec.encoder.leaky_slope = leaky_slope;
  spec.classifier.widths.push_back(embedding_dim);
  spec.classifier.widths.insert(spec.classifier.widths.end(), classifier_hidden.begin(),
                                classifier_hidden.end());
  spec.classifier.widths.push_back(2);
  spec.classifier.leaky_slope = leaky_slope;
  if (measure == Regularizer::kAdversarial) {
    MlpSpec adv;
    adv.widths.push_back(embedding_dim);
    adv.widths.insert(adv.widths.end(), adversary_hidden.begin(), adversary_hidden.end());
    adv.widths.push_back(2);
    adv.leaky_slope = leaky_slope;
    spec.adversary = adv;
  }
  return spec;
}

void adamw_step(std::span<double> params, std::span<const double> grads, AdamWState& state,
                const AdamWHyper& h) {
  if (grads.size() != params.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    fail(ErrorCode::kShape, "adamw_step: parameter, gradient and state sizes differ");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(h.beta1, t);
  const double bc2 = 1.0 - std::pow(h.beta2, t);
  const double decay = 1.0 - h.lr * h.weight_decay;
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = h.beta1 * state.m[i] + (1.0 - h.beta1) * grads[i];
    state.v[i] = h.beta2 * state.v[i] + (1.0 - h.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params[i] -= h.lr * m_hat / (std::sqrt(v_hat) + h.eps);
    params[i] *= decay;
  }
}

ObjectiveEval single_loop_objective(const ModelParams& params, const LabeledBatch& batch,
                                    const TrainConfig& cfg) {
  auto [z, enc_tape] = encode(params, batch.samples);
  ForwardTape cls_tape;
  const Matrix logits = params.classifier.forward(z, &cls_tape);
  const CrossEntropy ce = cross_entropy(logits, batch.main);
  MlpBackward cls_back = backward(params.classifier, cls_tape, ce.dlogits);
  Matrix dz = std::move(cls_back.input_grad);

  ObjectiveEval out;
  out.main_loss = ce.loss;
  // lambda == 0 skips the measure entirely so the trajectory is bit-identical
  // to an unregularized run.
  if (auto m = similarity_measure(cfg.measure); m && cfg.lambda != 0.0) {
    out.reg_value = add_similarity_grad(*m, z, batch.sensitive, cfg.lambda, cfg.divergence, dz);
  }
  MlpBackward enc_back = backward(params.encoder, enc_tape, dz);
  out.grad.reserve(params.encoder.num_params() + params.classifier.num_params());
  append_grads(enc_back.param_grads, out.grad);
  append_grads(cls_back.param_grads, out.grad);
  return out;
}

TrainResult train_single_loop(const DatasetSplit& data, const TrainConfig& cfg) {
  cfg.validate();
  if (cfg.measure == Regularizer::kAdversarial) {
    fail(ErrorCode::kConfig, "train_single_loop: adversarial training needs the nested loop");
  }
  data.train.validate();
  Rng init_rng(derive_seed(cfg.seed, kInitStream));
  Rng batch_rng(derive_seed(cfg.seed, kBatchStream));

  TrainResult result;
  result.params = ModelParams::random(cfg.model_spec(data.train.samples.cols()), init_rng);
  const LabeledBatch monitor = monitor_batch(data.train, cfg.monitor_rows);
  const AdamWHyper hyper{cfg.lr, cfg.weight_decay};
  AdamWState state(result.params.num_params());

  auto record = [&](std::size_t step) {
    result.records.push_back(make_record(step, result.params, monitor, cfg));
    result.checkpoints.push_back(result.params);
  };
  record(0);
  for (std::size_t step = 1; step <= cfg.steps; ++step) {
    const LabeledBatch batch = next_batch(batch_rng, data.train, cfg, result.stats);
    const ObjectiveEval eval = single_loop_objective(result.params, batch, cfg);
    std::vector<double> flat = result.params.flatten();
    adamw_step(flat, eval.grad, state, hyper);
    result.params.unflatten(flat);
    ++result.stats.outer_updates;
    if (is_record_step(step, cfg)) record(step);
  }
  return result;
}

TrainResult train_nested_loop(const DatasetSplit& data, const TrainConfig& cfg) {
  cfg.validate();
  if (cfg.measure != Regularizer::kAdversarial) {
    fail(ErrorCode::kConfig, "train_nested_loop: measure must be adversarial");
  }
  data.train.validate();
  data.aux.validate();
  const ModelSpec spec = cfg.model_spec(data.train.samples.cols());
  Rng init_rng(derive_seed(cfg.seed, kInitStream));
  Rng adv_rng(derive_seed(cfg.seed, kAdversaryInitStream));
  Rng batch_rng(derive_seed(cfg.seed, kBatchStream));
  Rng aux_rng(derive_seed(cfg.seed, kAuxBatchStream));

  TrainResult result;
  ModelSpec base = spec;
  base.adversary.reset();
  result.params = ModelParams::random(base, init_rng);
  result.params.adversary = Mlp::random(*spec.adversary, adv_rng);

  const LabeledBatch monitor = monitor_batch(data.train, cfg.monitor_rows);
  const AdamWHyper hyper{cfg.lr, cfg.weight_decay};
  AdamWState enc_state(result.params.encoder.num_params());
  AdamWState cls_state(result.params.classifier.num_params());
  AdamWState adv_state(result.params.adversary->num_params());
  auto& params = result.params;

  auto record = [&](std::size_t step) {
    result.records.push_back(make_record(step, params, monitor, cfg));
    result.checkpoints.push_back(params);
  };
  record(0);
  for (std::size_t step = 1; step <= cfg.steps; ++step) {
    // Inner loop on the aux split: the main head and the adversary fit the frozen encoder.
    for (std::size_t u = 0; u < *cfg.unroll; ++u) {
      const LabeledBatch inner = next_batch(aux_rng, data.aux, cfg, result.stats);
      const Matrix z = params.encoder.forward(inner.samples);
      ForwardTape cls_tape, adv_tape;
      const Matrix cls_logits = params.classifier.forward(z, &cls_tape);
      const Matrix adv_logits = params.adversary->forward(z, &adv_tape);
      const CrossEntropy cls_ce = cross_entropy(cls_logits, inner.main);
      const CrossEntropy adv_ce = cross_entropy(adv_logits, inner.sensitive);
      std::vector<double> cls_grad, adv_grad;
      append_grads(backward(params.classifier, cls_tape, cls_ce.dlogits).param_grads, cls_grad);
      append_grads(backward(*params.adversary, adv_tape, adv_ce.dlogits).param_grads, adv_grad);
      apply_update(params.classifier, std::move(cls_grad), cls_state, hyper);
      apply_update(*params.adversary, std::move(adv_grad), adv_state, hyper);
      ++result.stats.inner_updates;
    }
    // Outer step on D: encoder only, against CE(main) - lambda * CE(adversary).
    const LabeledBatch batch = next_batch(batch_rng, data.train, cfg, result.stats);
    auto [z, enc_tape] = encode(params, batch.samples);
    ForwardTape cls_tape, adv_tape;
    const CrossEntropy cls_ce =
        cross_entropy(params.classifier.forward(z, &cls_tape), batch.main);
    Matrix dz = backward(params.classifier, cls_tape, cls_ce.dlogits).input_grad;
    if (cfg.lambda != 0.0) {
      const CrossEntropy adv_ce =
          cross_entropy(params.adversary->forward(z, &adv_tape), batch.sensitive);
      const Matrix dz_adv = backward(*params.adversary, adv_tape, adv_ce.dlogits).input_grad;
      for (std::size_t k = 0; k < dz.size(); ++k) dz.data()[k] -= cfg.lambda * dz_adv.data()[k];
    }
    std::vector<double> enc_grad;
    append_grads(backward(params.encoder, enc_tape, dz).param_grads, enc_grad);
    apply_update(params.encoder, std::move(enc_grad), enc_state, hyper);
    ++result.stats.outer_updates;
    if (is_record_step(step, cfg)) record(step);
  }
  return result;
}

TrainResult train(const DatasetSplit& data, const TrainConfig& cfg) {
  return cfg.measure == Regularizer::kAdversarial ? train_nested_loop(data, cfg)
                                                  : train_single_loop(data, cfg);
}

std::vector<SweepEntry> sweep(const DatasetSplit& data, const TrainConfig& base,
                              std::span<const double> lambdas, std::size_t jobs) {
  if (lambdas.empty()) fail(ErrorCode::kConfig, "sweep: lambda grid is empty");
  std::vector<SweepEntry> entries(lambdas.size());
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    entries[i].lambda = lambdas[i];
    entries[i].config = base;
    entries[i].config.lambda = lambdas[i];
    entries[i].config.seed = derive_seed(base.seed, 1000 + i);
    entries[i].config.validate();
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(entries.size());
  auto worker = [&] {
    for (std::size_t i = next++; i < entries.size(); i = next++) {
      try {
        entries[i].result = train(data, entries[i].config);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(jobs, 1, entries.size());
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return entries;
}

}  // namespace disent
