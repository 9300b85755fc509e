#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "disent/stats.hpp"

namespace disent {

/// Synthetic inputs x = noise + y * y_shift + s * s_shift with Y ~ Bernoulli(1/2)
/// and S equal to Y with probability `correlation`.
struct SynthSpec {
  std::size_t n = 5000;
  std::size_t d_in = 8;
  std::vector<double> y_shift;
  std::vector<double> s_shift;
  double correlation = 0.8;
  double noise_std = 1.0;
  std::uint64_t seed = 7;

  /// The default shift vectors for a given input dimension.
  static std::vector<double> default_y_shift(std::size_t d_in);
  static std::vector<double> default_s_shift(std::size_t d_in);
  /// Spec with n, d_in and seed set and default shifts filled in.
  static SynthSpec with_defaults(std::size_t n, std::size_t d_in, std::uint64_t seed);

  void validate() const;
};

struct DatasetSplit {
  LabeledBatch train;
  LabeledBatch test;
  /// Held-out split used only by the nested-loop baseline.
  LabeledBatch aux;
};

/// 60/20/20 train/test/aux split of n generated examples.
DatasetSplit generate(const SynthSpec& spec);

/// CSV with header f0,...,f{d-1},y,s; one example per row.
LabeledBatch read_csv(const std::filesystem::path& path);
void write_csv(const LabeledBatch& batch, const std::filesystem::path& path);

}  // namespace disent
