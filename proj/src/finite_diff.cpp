#include "disent/finite_diff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "disent/error.hpp"

namespace disent {

namespace {

double checked_eval(const ScalarFn& f, const Matrix& x) {
  const double v = f(x);
  if (!std::isfinite(v)) fail(ErrorCode::kNumeric, "finite_diff_grad: non-finite evaluation");
  return v;
}

}  // namespace

double finite_diff_at(const ScalarFn& f, const Matrix& x, std::size_t row, std::size_t col,
                      double h) {
  if (!(h > 0.0)) fail(ErrorCode::kParameter, "finite_diff_grad: step must be positive");
  Matrix probe = x;
  const double orig = x(row, col);
  probe(row, col) = orig + h;
  const double up = checked_eval(f, probe);
  probe(row, col) = orig - h;
  const double down = checked_eval(f, probe);
  return (up - down) / (2.0 * h);
}

Matrix finite_diff_grad(const ScalarFn& f, const Matrix& x, double h) {
  Matrix grad(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) grad(r, c) = finite_diff_at(f, x, r, c, h);
  return grad;
}

double relative_error(double a, double b) noexcept {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-8});
  return std::abs(a - b) / scale;
}

double max_relative_error(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    fail(ErrorCode::kShape, "max_relative_error: shape mismatch");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, relative_error(a.data()[i], b.data()[i]));
  return worst;
}

}  // namespace disent
