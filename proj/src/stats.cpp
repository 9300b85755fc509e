#include "disent/stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "disent/error.hpp"

namespace disent {

void LabeledBatch::validate() const {
  if (main.size() != samples.rows() || sensitive.size() != samples.rows()) {
    fail(ErrorCode::kShape, "LabeledBatch: " + std::to_string(samples.rows()) + " rows but " +
                                std::to_string(main.size()) + " main and " +
                                std::to_string(sensitive.size()) + " sensitive labels");
  }
  for (std::size_t i = 0; i < main.size(); ++i) {
    if (main[i] > 1 || sensitive[i] > 1) {
      fail(ErrorCode::kParse, "LabeledBatch: non-binary label at row " + std::to_string(i));
    }
  }
}

LabeledBatch subset(const LabeledBatch& batch, std::span<const std::size_t> rows) {
  LabeledBatch out;
  out.samples = gather_rows(batch.samples, rows);
  out.main.reserve(rows.size());
  out.sensitive.reserve(rows.size());
  for (std::size_t r : rows) {
    out.main.push_back(batch.main[r]);
    out.sensitive.push_back(batch.sensitive[r]);
  }
  return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> sensitive_groups(
    std::span<const Label> sensitive) {
  std::pair<std::vector<std::size_t>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < sensitive.size(); ++i) {
    (sensitive[i] == 0 ? groups.first : groups.second).push_back(i);
  }
  return groups;
}

std::pair<Matrix, Matrix> split_by_sensitive(const LabeledBatch& batch) {
  batch.validate();
  auto [idx0, idx1] = sensitive_groups(batch.sensitive);
  if (idx0.empty() || idx1.empty()) {
    fail(ErrorCode::kSingleClassBatch,
         "split_by_sensitive: batch of " + std::to_string(batch.size()) +
             " rows contains only sensitive=" + (idx0.empty() ? "1" : "0"));
  }
  return {gather_rows(batch.samples, idx0), gather_rows(batch.samples, idx1)};
}

GaussianDiag fit_gaussian_diag(const Matrix& samples) {
  const std::size_t n = samples.rows();
  const std::size_t d = samples.cols();
  if (n < 2) {
    fail(ErrorCode::kInsufficientSamples,
         "fit_gaussian_diag: need at least 2 rows, got " + std::to_string(n));
  }
  GaussianDiag fit{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    auto row = samples.row(i);
    for (std::size_t j = 0; j < d; ++j) fit.mean[j] += row[j];
  }
  for (double& m : fit.mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = samples.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      const double c = row[j] - fit.mean[j];
      fit.std[j] += c * c;
    }
  }
  for (double& s : fit.std) s = std::max(std::sqrt(s / static_cast<double>(n - 1)), kStdFloor);
  return fit;
}

Matrix gaussian_diag_backward(const Matrix& samples, const GaussianDiag& fit,
                              std::span<const double> dmean, std::span<const double> dstd) {
  const std::size_t n = samples.rows();
  const std::size_t d = samples.cols();
  Matrix grad(n, d);
  const double inv_n = 1.0 / static_cast<double>(n);
  const double inv_nm1 = 1.0 / static_cast<double>(n - 1);
  // d std_j / d z_ij = (z_ij - mean_j) / ((n-1) std_j); the mean's own
  // dependence on z_ij cancels because centered residuals sum to zero.
  std::vector<double> std_coef(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    if (fit.std[j] > kStdFloor) std_coef[j] = dstd[j] * inv_nm1 / fit.std[j];
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto row = samples.row(i);
    auto g = grad.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      g[j] = dmean[j] * inv_n + std_coef[j] * (row[j] - fit.mean[j]);
    }
  }
  return grad;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorCode::kShape, "pearson: length mismatch");
  if (x.size() < 2) fail(ErrorCode::kInsufficientSamples, "pearson: need at least 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    fail(ErrorCode::kUndefinedCorrelation, "pearson: constant input");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

Matrix covariance(const Matrix& samples) {
  const std::size_t n = samples.rows();
  const std::size_t d = samples.cols();
  if (n < 2) fail(ErrorCode::kInsufficientSamples, "covariance: need at least 2 rows");
  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) mean[j] += samples(i, j);
  for (double& m : mean) m /= static_cast<double>(n);
  Matrix cov(d, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < d; ++a) {
      const double ca = samples(i, a) - mean[a];
      for (std::size_t b = a; b < d; ++b) cov(a, b) += ca * (samples(i, b) - mean[b]);
    }
  }
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a; b < d; ++b) {
      cov(a, b) /= static_cast<double>(n - 1);
      cov(b, a) = cov(a, b);
    }
  }
  return cov;
}

double diag_distance(const Matrix& samples) {
  const Matrix cov = covariance(samples);
  double total = 0.0, off = 0.0;
  for (std::size_t a = 0; a < cov.rows(); ++a) {
    for (std::size_t b = 0; b < cov.cols(); ++b) {
      const double v = cov(a, b) * cov(a, b);
      total += v;
      if (a != b) off += v;
    }
  }
  if (total == 0.0) fail(ErrorCode::kDegenerate, "diag_distance: zero covariance");
  return std::sqrt(off / total);
}

}  // namespace disent
