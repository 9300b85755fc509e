#pragma once

#include <functional>

#include "disent/matrix.hpp"

namespace disent {

using ScalarFn = std::function<double(const Matrix&)>;

inline constexpr double kDefaultFdStep = 1e-5;

/// Central-difference gradient of `f` at `x`, one coordinate at a time.
/// Throws ErrorCode::kNumeric if any evaluation is non-finite.
Matrix finite_diff_grad(const ScalarFn& f, const Matrix& x, double h = kDefaultFdStep);

/// Central difference along a single coordinate (row, col).
double finite_diff_at(const ScalarFn& f, const Matrix& x, std::size_t row, std::size_t col,
                      double h = kDefaultFdStep);

/// |a - b| / max(|a|, |b|, 1e-8)
double relative_error(double a, double b) noexcept;

/// Largest entrywise relative_error between two equally shaped matrices.
double max_relative_error(const Matrix& a, const Matrix& b);

}  // namespace disent
