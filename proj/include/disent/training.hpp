#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "disent/data.hpp"
#include "disent/divergences.hpp"
#include "disent/model.hpp"

namespace disent {

/// What the training objective adds to the main cross-entropy.
enum class Regularizer { kNone, kMmd, kSinkhorn, kJeffrey, kFisherRao, kGaussianW, kAdversarial };

std::string_view regularizer_name(Regularizer r) noexcept;
std::optional<Regularizer> parse_regularizer(std::string_view name) noexcept;
/// The similarity measure behind a regularizer, if it is one.
std::optional<Measure> similarity_measure(Regularizer r) noexcept;

struct TrainConfig {
  double lambda = 1.0;
  Regularizer measure = Regularizer::kNone;
  std::size_t batch_size = 128;
  std::size_t steps = 2000;
  double lr = 1e-3;
  double weight_decay = 0.01;
  /// Inner adversary updates per encoder update; required for kAdversarial.
  std::optional<std::size_t> unroll;
  std::uint64_t seed = 7;
  std::size_t checkpoint_every = 500;

  std::vector<std::size_t> encoder_hidden = {32};
  std::size_t embedding_dim = 2;
  std::vector<std::size_t> classifier_hidden = {};
  std::vector<std::size_t> adversary_hidden = {64};
  double leaky_slope = 0.01;

  DivergenceConfig divergence;
  /// Rows of the training split used to compute RunRecord metrics.
  std::size_t monitor_rows = 512;

  void validate() const;
  ModelSpec model_spec(std::size_t d_in) const;
};

struct AdamWHyper {
  double lr = 1e-3;
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamWState {
  std::vector<double> m;
  std::vector<double> v;
  std::size_t step = 0;

  explicit AdamWState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

/// One AdamW update: bias-corrected adaptive step, then decoupled decay
/// params *= (1 - lr * weight_decay).
void adamw_step(std::span<double> params, std::span<const double> grads, AdamWState& state,
                const AdamWHyper& hyper);

struct RunRecord {
  std::size_t step = 0;
  double main_loss = 0.0;
  std::optional<double> reg_value;
  double main_acc = 0.0;
  std::optional<double> probe_acc;
  std::optional<std::string> checkpoint_path;
};

struct TrainStats {
  std::size_t outer_updates = 0;
  std::size_t inner_updates = 0;
  std::size_t processed_batches = 0;
  std::size_t skipped_batches = 0;
};

struct TrainResult {
  ModelParams params;
  std::vector<RunRecord> records;
  /// Parameters at each record, aligned with `records`.
  std::vector<ModelParams> checkpoints;
  TrainStats stats;
};

/// Single-loop training of CE + lambda * SM(P0, P1) on (theta, phi).
TrainResult train_single_loop(const DatasetSplit& data, const TrainConfig& cfg);

/// Nested-loop adversarial baseline: `unroll` updates of (phi, psi) on the
/// aux split, then one encoder update on CE(main) - lambda * CE(adversary).
TrainResult train_nested_loop(const DatasetSplit& data, const TrainConfig& cfg);

/// Dispatches on cfg.measure.
TrainResult train(const DatasetSplit& data, const TrainConfig& cfg);

/// Gradient of CE + lambda * SM with respect to the flat (theta, phi) vector
/// on one batch. Exposed for gradient checks.
struct ObjectiveEval {
  double main_loss = 0.0;
  double reg_value = 0.0;
  std::vector<double> grad;
};
ObjectiveEval single_loop_objective(const ModelParams& params, const LabeledBatch& batch,
                                    const TrainConfig& cfg);

inline constexpr double kDefaultLambdaGrid[] = {0.001, 0.01, 0.1, 1.0, 10.0};

struct SweepEntry {
  double lambda = 0.0;
  TrainConfig config;
  TrainResult result;
};

/// One independent training per lambda, seeded from (base.seed, index).
/// Up to `jobs` runs execute concurrently; results keep the input order.
std::vector<SweepEntry> sweep(const DatasetSplit& data, const TrainConfig& base,
                              std::span<const double> lambdas, std::size_t jobs = 1);

}  // namespace disent
