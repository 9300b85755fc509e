#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "disent/matrix.hpp"

namespace disent {

using Label = std::uint8_t;

/// Standard deviations below this value are clamped to it.
inline constexpr double kStdFloor = 1e-4;

/// Diagonal Gaussian summary: per-dimension mean and standard deviation.
struct GaussianDiag {
  std::vector<double> mean;
  std::vector<double> std;

  std::size_t dim() const noexcept { return mean.size(); }
};

/// Embeddings (or raw inputs) with their main label Y and sensitive label S.
struct LabeledBatch {
  Matrix samples;
  std::vector<Label> main;
  std::vector<Label> sensitive;

  std::size_t size() const noexcept { return samples.rows(); }
  /// Throws kShape on length mismatch and kParse on labels outside {0,1}.
  void validate() const;
};

LabeledBatch subset(const LabeledBatch& batch, std::span<const std::size_t> rows);

/// Rows with S=0 and S=1, each in input order.
/// Throws kSingleClassBatch if either group is empty.
std::pair<Matrix, Matrix> split_by_sensitive(const LabeledBatch& batch);

/// Row indices of each sensitive group, in input order. No error on empty groups.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> sensitive_groups(
    std::span<const Label> sensitive);

/// Column means and unbiased (n-1) column standard deviations, floored at kStdFloor.
GaussianDiag fit_gaussian_diag(const Matrix& samples);

/// Back-propagates gradients with respect to a fitted GaussianDiag's mean
/// and std onto the samples it was fitted from. Floored dimensions
/// receive no std gradient.
Matrix gaussian_diag_backward(const Matrix& samples, const GaussianDiag& fit,
                              std::span<const double> dmean, std::span<const double> dstd);

/// Sample Pearson correlation. Throws kUndefinedCorrelation when either input is constant.
double pearson(std::span<const double> x, std::span<const double> y);

/// Unbiased empirical covariance matrix (d x d).
Matrix covariance(const Matrix& samples);

/// ||C - diag(C)||_F / ||C||_F for the empirical covariance C.
double diag_distance(const Matrix& samples);

}  // namespace disent
