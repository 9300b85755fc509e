#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "disent/model.hpp"
#include "disent/stats.hpp"

namespace disent {

struct ProbeConfig {
  std::vector<std::size_t> hidden = {64};
  std::size_t steps = 2000;
  std::size_t batch_size = 128;
  double lr = 3e-3;
  double weight_decay = 0.0;
  /// Share of the evaluation rows used to fit the probe; the rest are scored.
  double train_fraction = 0.7;
  std::uint64_t seed = 7;

  void validate() const;
};

/// A sensitive-attribute classifier trained on frozen embeddings. Inputs are
/// standardized with statistics of the probe's training rows.
struct Probe {
  Mlp net;
  std::vector<double> mean;
  std::vector<double> scale;

  Matrix logits(const Matrix& z) const;
};

/// Fits a fresh probe predicting `labels` from `z`. Appends the mean training
/// loss of every 100-step window to `loss_curve` when given.
Probe train_probe(const Matrix& z, std::span<const Label> labels, const ProbeConfig& cfg,
                  std::vector<double>* loss_curve = nullptr);

struct ProbeScore {
  double accuracy = 0.0;
  std::size_t n_eval = 0;
  std::vector<double> loss_curve;
};

/// Splits rows train_fraction / rest, fits a probe on the first part and
/// returns its accuracy on the second.
ProbeScore probe_accuracy(const Matrix& z, std::span<const Label> labels, const ProbeConfig& cfg);

struct ProbeReport {
  double main_acc = 0.0;
  double sensitive_acc = 0.0;
  std::vector<double> probe_train_loss_curve;
  std::size_t n_eval = 0;
};

/// Main accuracy of C_phi on the whole test batch plus held-out accuracy of
/// a fresh sensitive probe on the encoder's test embeddings.
ProbeReport evaluate(const ModelParams& params, const LabeledBatch& test, const ProbeConfig& cfg);

struct CheckpointSample {
  std::size_t step = 0;
  ModelParams params;
  double reg_value = 0.0;
};

struct CorrelationPair {
  std::size_t step = 0;
  double reg_value = 0.0;
  double sensitive_acc = 0.0;
};

struct CorrelationReport {
  std::vector<CorrelationPair> pairs;
  double correlation = 0.0;
  double abs_correlation = 0.0;
  /// Fewer than three pairs: the correlation is +-1 by construction.
  bool low_sample = false;
};

/// Pearson correlation of (reg_value, sensitive probe accuracy) over checkpoints.
CorrelationReport correlate_pairs(std::vector<CorrelationPair> pairs);

/// Probes every checkpoint on `test` and correlates leakage with reg_value.
CorrelationReport correlation_analysis(std::span<const CheckpointSample> checkpoints,
                                       const LabeledBatch& test, const ProbeConfig& cfg);

}  // namespace disent
