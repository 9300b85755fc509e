#include "disent/eval.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "disent/error.hpp"
#include "disent/rng.hpp"
#include "disent/training.hpp"

namespace disent {

namespace {

constexpr std::uint64_t kProbeInitStream = 11;
constexpr std::uint64_t kProbeBatchStream = 12;
constexpr std::uint64_t kProbeSplitStream = 13;

Matrix standardize(const Matrix& z, const std::vector<double>& mean,
                   const std::vector<double>& scale) {
  Matrix out = z;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto row = out.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = (row[j] - mean[j]) / scale[j];
  }
  return out;
}

}  // namespace

void ProbeConfig::validate() const {
  if (steps < 1) fail(ErrorCode::kConfig, "probe.steps must be >= 1");
  if (batch_size < 1) fail(ErrorCode::kConfig, "probe.batch_size must be >= 1");
  if (!(lr > 0.0)) fail(ErrorCode::kConfig, "probe.lr must be > 0");
  if (!(weight_decay >= 0.0)) fail(ErrorCode::kConfig, "probe.weight_decay must be >= 0");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    fail(ErrorCode::kConfig, "probe.train_fraction must lie in (0, 1)");
  }
  for (std::size_t w : hidden)
    if (w == 0) fail(ErrorCode::kConfig, "probe.hidden widths must be positive");
}

Matrix Probe::logits(const Matrix& z) const { return net.forward(standardize(z, mean, scale)); }

Probe train_probe(const Matrix& z, std::span<const Label> labels, const ProbeConfig& cfg,
                  std::vector<double>* loss_curve) {
  cfg.validate();
  if (z.rows() != labels.size()) fail(ErrorCode::kShape, "train_probe: label count mismatch");
  std::size_t count[2] = {0, 0};
  for (Label l : labels) {
    if (l > 1) fail(ErrorCode::kParse, "train_probe: non-binary label");
    ++count[l];
  }
  if (count[0] < 2 || count[1] < 2) {
    fail(ErrorCode::kSingleClassBatch, "train_probe: need at least 2 examples of each class");
  }

  Probe probe;
  const std::size_t d = z.cols();
  probe.mean.assign(d, 0.0);
  probe.scale.assign(d, 0.0);
  for (std::size_t i = 0; i < z.rows(); ++i)
    for (std::size_t j = 0; j < d; ++j) probe.mean[j] += z(i, j);
  for (double& m : probe.mean) m /= static_cast<double>(z.rows());
  for (std::size_t i = 0; i < z.rows(); ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double c = z(i, j) - probe.mean[j];
      probe.scale[j] += c * c;
    }
  for (double& s : probe.scale) {
    s = std::sqrt(s / static_cast<double>(z.rows()));
    if (!(s > 1e-12)) s = 1.0;  // constant column: centered value is 0 anyway
  }
  const Matrix x = standardize(z, probe.mean, probe.scale);

  MlpSpec spec;
  spec.widths.push_back(d);
  spec.widths.insert(spec.widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  spec.widths.push_back(2);
  Rng init_rng(derive_seed(cfg.seed, kProbeInitStream));
  Rng batch_rng(derive_seed(cfg.seed, kProbeBatchStream));
  probe.net = Mlp::random(spec, init_rng);

  AdamWState state(probe.net.num_params());
  const AdamWHyper hyper{cfg.lr, cfg.weight_decay};
  const std::size_t batch = std::min(cfg.batch_size, z.rows());
  std::vector<std::size_t> idx(batch);
  std::vector<Label> batch_labels(batch);
  double window_loss = 0.0;
  std::size_t window = 0;
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    for (std::size_t b = 0; b < batch; ++b) {
      idx[b] = batch_rng.index(z.rows());
      batch_labels[b] = labels[idx[b]];
    }
    ForwardTape tape;
    const Matrix logits = probe.net.forward(gather_rows(x, idx), &tape);
    const CrossEntropy ce = cross_entropy(logits, batch_labels);
    std::vector<double> grads, flat;
    backward(probe.net, tape, ce.dlogits).param_grads.flatten_into(grads);
    probe.net.flatten_into(flat);
    adamw_step(flat, grads, state, hyper);
    probe.net.unflatten_from(flat);
    window_loss += ce.loss;
    if (++window == 100 || step + 1 == cfg.steps) {
      if (loss_curve) loss_curve->push_back(window_loss / static_cast<double>(window));
      window_loss = 0.0;
      window = 0;
    }
  }
  return probe;
}

ProbeScore probe_accuracy(const Matrix& z, std::span<const Label> labels, const ProbeConfig& cfg) {
  cfg.validate();
  if (z.rows() != labels.size()) fail(ErrorCode::kShape, "probe_accuracy: label count mismatch");
  std::vector<std::size_t> order(z.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng split_rng(derive_seed(cfg.seed, kProbeSplitStream));
  split_rng.shuffle(std::span<std::size_t>(order));
  const auto n_fit = static_cast<std::size_t>(std::floor(cfg.train_fraction * z.rows()));
  if (n_fit < 4 || n_fit >= z.rows()) {
    fail(ErrorCode::kInsufficientSamples, "probe_accuracy: too few rows to split");
  }
  const std::span<const std::size_t> fit_idx(order.data(), n_fit);
  const std::span<const std::size_t> score_idx(order.data() + n_fit, order.size() - n_fit);
  std::vector<Label> fit_labels, score_labels;
  for (std::size_t i : fit_idx) fit_labels.push_back(labels[i]);
  for (std::size_t i : score_idx) score_labels.push_back(labels[i]);

  ProbeScore score;
  const Probe probe = train_probe(gather_rows(z, fit_idx), fit_labels, cfg, &score.loss_curve);
  score.accuracy = accuracy(probe.logits(gather_rows(z, score_idx)), score_labels);
  score.n_eval = score_idx.size();
  return score;
}

ProbeReport evaluate(const ModelParams& params, const LabeledBatch& test, const ProbeConfig& cfg) {
  test.validate();
  const Matrix z = params.encoder.forward(test.samples);
  ProbeReport report;
  report.main_acc = accuracy(params.classifier.forward(z), test.main);
  ProbeScore score = probe_accuracy(z, test.sensitive, cfg);
  report.sensitive_acc = score.accuracy;
  report.n_eval = score.n_eval;
  report.probe_train_loss_curve = std::move(score.loss_curve);
  return report;
}

CorrelationReport correlate_pairs(std::vector<CorrelationPair> pairs) {
  if (pairs.size() < 2) {
    fail(ErrorCode::kInsufficientSamples, "correlation_analysis: need at least 2 checkpoints");
  }
  std::vector<double> reg, acc;
  for (const auto& p : pairs) {
    reg.push_back(p.reg_value);
    acc.push_back(p.sensitive_acc);
  }
  CorrelationReport report;
  report.correlation = pearson(reg, acc);
  report.abs_correlation = std::abs(report.correlation);
  report.low_sample = pairs.size() < 3;
  report.pairs = std::move(pairs);
  return report;
}

CorrelationReport correlation_analysis(std::span<const CheckpointSample> checkpoints,
                                       const LabeledBatch& test, const ProbeConfig& cfg) {
  if (checkpoints.size() < 2) {
    fail(ErrorCode::kInsufficientSamples, "correlation_analysis: need at least 2 checkpoints");
  }
  std::vector<CorrelationPair> pairs;
  for (const auto& cp : checkpoints) {
    const Matrix z = cp.params.encoder.forward(test.samples);
    pairs.push_back({cp.step, cp.reg_value, probe_accuracy(z, test.sensitive, cfg).accuracy});
  }
  return correlate_pairs(std::move(pairs));
}

}  // namespace disent
