#include "disent/divergences.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "disent/error.hpp"

namespace disent {

namespace {

void require_cols(const Matrix& z0, const Matrix& z1, const char* op) {
  if (z0.cols() != z1.cols()) {
    fail(ErrorCode::kShape, std::string(op) + ": column mismatch " +
                                std::to_string(z0.cols()) + " vs " + std::to_string(z1.cols()));
  }
}

void require_rows(const Matrix& z, std::size_t min_rows, const char* op) {
  if (z.rows() < min_rows) {
    fail(ErrorCode::kInsufficientSamples, std::string(op) + ": need at least " +
                                              std::to_string(min_rows) + " rows per group, got " +
                                              std::to_string(z.rows()));
  }
}

double log_sum_exp(std::span<const double> xs) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double x : xs) hi = std::max(hi, x);
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

// Writes d/dx cost(x, y) scaled by `weight` into `out`.
void accumulate_cost_grad(std::span<const double> x, std::span<const double> y, int power,
                          double weight, std::span<double> out) {
  if (power == 2) {
    for (std::size_t k = 0; k < x.size(); ++k) out[k] += weight * 2.0 * (x[k] - y[k]);
    return;
  }
  double norm = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) norm += (x[k] - y[k]) * (x[k] - y[k]);
  norm = std::sqrt(norm);
  if (norm == 0.0) return;  // subgradient 0 at coincident points
  for (std::size_t k = 0; k < x.size(); ++k) out[k] += weight * (x[k] - y[k]) / norm;
}

// Gradient of <plan, C(x, y)> with respect to x (rows of plan index x).
Matrix plan_grad_first(const Matrix& plan, const Matrix& x, const Matrix& y, int power) {
  Matrix grad(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < y.rows(); ++j)
      if (plan(i, j) != 0.0) accumulate_cost_grad(x.row(i), y.row(j), power, plan(i, j), grad.row(i));
  return grad;
}

// Gradient of <plan, C(x, x)> with respect to x; x appears in both arguments.
Matrix plan_grad_self(const Matrix& plan, const Matrix& x, int power) {
  Matrix grad(x.rows(), x.cols());
  for (std::size_t k = 0; k < x.rows(); ++k)
    for (std::size_t l = 0; l < x.rows(); ++l) {
      const double w = plan(k, l) + plan(l, k);
      if (w != 0.0 && k != l) accumulate_cost_grad(x.row(k), x.row(l), power, w, grad.row(k));
    }
  return grad;
}

struct Fitted {
  GaussianDiag p0;
  GaussianDiag p1;
};

Fitted fit_both(const Matrix& z0, const Matrix& z1, const char* op) {
  require_cols(z0, z1, op);
  require_rows(z0, 2, op);
  require_rows(z1, 2, op);
  return {fit_gaussian_diag(z0), fit_gaussian_diag(z1)};
}

// Gradients of a function of the two fitted Gaussians, pulled back to samples.
struct ParamGrads {
  std::vector<double> dmean0, dstd0, dmean1, dstd1;
  explicit ParamGrads(std::size_t d) : dmean0(d), dstd0(d), dmean1(d), dstd1(d) {}
};

DivGrad pull_back(double value, const Matrix& z0, const Matrix& z1, const Fitted& fit,
                  const ParamGrads& pg) {
  return {value, gaussian_diag_backward(z0, fit.p0, pg.dmean0, pg.dstd0),
          gaussian_diag_backward(z1, fit.p1, pg.dmean1, pg.dstd1)};
}

struct FisherRaoTerm {
  double value;
  double dm0, ds0, dm1, ds1;
};

constexpr double kFisherRaoClamp = 1.0 + 1e-12;

// With A = sqrt(dm^2/2 + (s0+s1)^2) and B = sqrt(dm^2/2 + (s0-s1)^2) the
// distance is sqrt2 * log((A+B)/(A-B)). Since A^2 - B^2 = 4 s0 s1 the ratio
// equals (A+B)^2 / (4 s0 s1), which avoids the cancellation in A-B.
FisherRaoTerm fisher_rao_term(double m0, double s0, double m1, double s1) {
  const double dm = m0 - m1;
  const double half_dm2 = 0.5 * dm * dm;
  const double a = std::sqrt(half_dm2 + (s0 + s1) * (s0 + s1));
  const double b = std::sqrt(half_dm2 + (s0 - s1) * (s0 - s1));
  const double ratio = (a + b) * (a + b) / (4.0 * s0 * s1);
  if (ratio < kFisherRaoClamp) {
    return {std::numbers::sqrt2 * std::log(kFisherRaoClamp), 0.0, 0.0, 0.0, 0.0};
  }
  const double value = std::numbers::sqrt2 * std::log(ratio);
  // d/dx log ratio = 2 (dA/dx + dB/dx) / (A+B) - d/dx log(s0 s1)
  const double inv_b = b > 0.0 ? 1.0 / b : 0.0;
  const double coef = 2.0 * std::numbers::sqrt2 / (a + b);
  const double da_dm = 0.5 * dm / a;
  const double db_dm = 0.5 * dm * inv_b;
  const double dd_dm = coef * (da_dm + db_dm);
  const double dd_ds0 = coef * ((s0 + s1) / a + (s0 - s1) * inv_b) - std::numbers::sqrt2 / s0;
  const double dd_ds1 = coef * ((s0 + s1) / a - (s0 - s1) * inv_b) - std::numbers::sqrt2 / s1;
  return {value, dd_dm, dd_ds0, -dd_dm, dd_ds1};
}

}  // namespace

void SinkhornConfig::validate() const {
  if (epsilon && !(*epsilon > 0.0)) fail(ErrorCode::kParameter, "sinkhorn: epsilon must be > 0");
  if (!(epsilon_scale > 0.0)) fail(ErrorCode::kParameter, "sinkhorn: epsilon_scale must be > 0");
  if (power != 1 && power != 2) fail(ErrorCode::kParameter, "sinkhorn: power must be 1 or 2");
  if (!(tol > 0.0)) fail(ErrorCode::kParameter, "sinkhorn: tol must be > 0");
  if (max_iter == 0) fail(ErrorCode::kParameter, "sinkhorn: max_iter must be >= 1");
}

Matrix cost_matrix(const Matrix& x, const Matrix& y, int power) {
  Matrix cost = pairwise_sq_dists(x, y);
  if (power == 1) {
    for (double& v : cost.data()) v = std::sqrt(v);
  } else if (power != 2) {
    fail(ErrorCode::kParameter, "cost_matrix: power must be 1 or 2");
  }
  return cost;
}

double median_entry(const Matrix& m) {
  if (m.empty()) fail(ErrorCode::kShape, "median_entry: empty matrix");
  std::vector<double> v = m.data();
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  if (v.size() % 2 == 1) return v[mid];
  const double upper = v[mid];
  const double lower = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lower + upper);
}

double resolve_epsilon(const Matrix& cost, const SinkhornConfig& cfg) {
  if (cfg.epsilon) return *cfg.epsilon;
  return std::max(cfg.epsilon_scale * median_entry(cost), 1e-12);
}

namespace {

// Symmetric cost with equal uniform marginals: the optimal potentials satisfy f = g,
// and the averaged fixed-point step f <- (f + T(f)) / 2 avoids the
// oscillation that plain alternating updates show on these problems.
TransportPlan sinkhorn_plan_symmetric(const Matrix& cost, double eps, const SinkhornConfig& cfg) {
  const std::size_t n = cost.rows();
  const double log_a = -std::log(static_cast<double>(n));
  const double a = 1.0 / static_cast<double>(n);
  TransportPlan out;
  out.epsilon = eps;
  out.f.assign(n, 0.0);
  std::vector<double> t(n), scratch(n);
  auto apply_t = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      auto c_row = cost.row(i);
      for (std::size_t j = 0; j < n; ++j) scratch[j] = log_a + (out.f[j] - c_row[j]) / eps;
      t[i] = -eps * log_sum_exp({scratch.data(), n});
    }
  };
  for (out.iterations = 1; out.iterations <= cfg.max_iter; ++out.iterations) {
    apply_t();
    // Row i of the plan built from (f, f) sums to a * exp((f_i - T(f)_i) / eps).
    double residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) residual += a * std::abs(std::expm1((out.f[i] - t[i]) / eps));
    if (2.0 * residual < cfg.tol) {
      out.converged = true;
      break;
    }
    for (std::size_t i = 0; i < n; ++i) out.f[i] = 0.5 * (out.f[i] + t[i]);
  }
  out.iterations = std::min(out.iterations, cfg.max_iter);
  out.g = out.f;
  out.plan = Matrix(n, n);
  std::vector<double> row_sums(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double p = std::exp(2.0 * log_a + (out.f[i] + out.f[j] - cost(i, j)) / eps);
      out.plan(i, j) = p;
      row_sums[i] += p;
    }
  out.residual = 0.0;
  for (double r : row_sums) out.residual += 2.0 * std::abs(r - a);
  return out;
}

bool is_symmetric(const Matrix& m) {
  if (m.rows() != m.cols()) return false;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j)
      if (m(i, j) != m(j, i)) return false;
  return true;
}

}  // namespace

TransportPlan sinkhorn_plan(const Matrix& cost, const SinkhornConfig& cfg) {
  cfg.validate();
  const std::size_t n0 = cost.rows();
  const std::size_t n1 = cost.cols();
  if (n0 == 0 || n1 == 0) fail(ErrorCode::kShape, "sinkhorn_plan: empty cost matrix");
  for (double c : cost.data()) {
    if (!(c >= 0.0) || !std::isfinite(c)) {
      fail(ErrorCode::kParameter, "sinkhorn_plan: cost entries must be finite and >= 0");
    }
  }
  const double eps = resolve_epsilon(cost, cfg);
  // Alternating updates crawl on these problems (identical batches in particular).
  if (is_symmetric(cost)) return sinkhorn_plan_symmetric(cost, eps, cfg);
  const double log_a = -std::log(static_cast<double>(n0));
  const double log_b = -std::log(static_cast<double>(n1));

  TransportPlan out;
  out.epsilon = eps;
  out.f.assign(n0, 0.0);
  out.g.assign(n1, 0.0);
  std::vector<double> f_next(n0);
  std::vector<double> scratch(std::max(n0, n1));

  auto update_g = [&](const std::vector<double>& f) {
    for (std::size_t j = 0; j < n1; ++j) {
      for (std::size_t i = 0; i < n0; ++i) scratch[i] = log_a + (f[i] - cost(i, j)) / eps;
      out.g[j] = -eps * log_sum_exp({scratch.data(), n0});
    }
  };
  auto update_f = [&](std::vector<double>& f) {
    for (std::size_t i = 0; i < n0; ++i) {
      auto c_row = cost.row(i);
      for (std::size_t j = 0; j < n1; ++j) scratch[j] = log_b + (out.g[j] - c_row[j]) / eps;
      f[i] = -eps * log_sum_exp({scratch.data(), n1});
    }
  };

  // Each pass solves the column constraint exactly; the row violation of
  // (f, g) is read off from the next row update for free:
  // row_sum_i = a_i exp((f_i - f_next_i) / eps).
  const double a = std::exp(log_a);
  for (out.iterations = 1; out.iterations <= cfg.max_iter; ++out.iterations) {
    update_g(out.f);
    update_f(f_next);
    double row_residual = 0.0;
    for (std::size_t i = 0; i < n0; ++i) {
      row_residual += a * std::abs(std::expm1((out.f[i] - f_next[i]) / eps));
    }
    if (row_residual < cfg.tol) {
      out.converged = true;
      break;
    }
    out.f.swap(f_next);
  }
  out.iterations = std::min(out.iterations, cfg.max_iter);

  out.plan = Matrix(n0, n1);
  std::vector<double> row_sums(n0, 0.0), col_sums(n1, 0.0);
  for (std::size_t i = 0; i < n0; ++i)
    for (std::size_t j = 0; j < n1; ++j) {
      const double p = std::exp(log_a + log_b + (out.f[i] + out.g[j] - cost(i, j)) / eps);
      out.plan(i, j) = p;
      row_sums[i] += p;
      col_sums[j] += p;
    }
  out.residual = 0.0;
  for (double r : row_sums) out.residual += std::abs(r - 1.0 / static_cast<double>(n0));
  for (double c : col_sums) out.residual += std::abs(c - 1.0 / static_cast<double>(n1));
  return out;
}


double entropic_cost(const TransportPlan& tp, const Matrix& cost) {
  const std::size_t n0 = tp.plan.rows(), n1 = tp.plan.cols();
  if (cost.rows() != n0 || cost.cols() != n1 || tp.f.size() != n0 || tp.g.size() != n1) {
    fail(ErrorCode::kShape, "entropic_cost: plan, potentials and cost disagree");
  }
  // Dual objective. It equals the primal value at the optimum and its error
  // is second order in the marginal violation, where the primal's is first order.
  double value = 0.0;
  for (double f : tp.f) value += f / static_cast<double>(n0);
  for (double g : tp.g) value += g / static_cast<double>(n1);
  double mass = 0.0;
  for (double p : tp.plan.data()) mass += p;
  return value - tp.epsilon * (mass - 1.0);
}

double wasserstein_eps(const Matrix& z0, const Matrix& z1, const SinkhornConfig& cfg) {
  require_cols(z0, z1, "wasserstein_eps");
  require_rows(z0, 1, "wasserstein_eps");
  require_rows(z1, 1, "wasserstein_eps");
  const Matrix cost = cost_matrix(z0, z1, cfg.power);
  return entropic_cost(sinkhorn_plan(cost, cfg), cost);
}

DivGrad sinkhorn_divergence(const Matrix& z0, const Matrix& z1, const SinkhornConfig& cfg) {
  require_cols(z0, z1, "sinkhorn_divergence");
  require_rows(z0, 1, "sinkhorn_divergence");
  require_rows(z1, 1, "sinkhorn_divergence");
  cfg.validate();
  const Matrix c01 = cost_matrix(z0, z1, cfg.power);
  const Matrix c00 = cost_matrix(z0, z0, cfg.power);
  const Matrix c11 = cost_matrix(z1, z1, cfg.power);
  // One epsilon for all three problems, otherwise the self terms do not debias.
  SinkhornConfig fixed = cfg;
  fixed.epsilon = resolve_epsilon(c01, cfg);
  const TransportPlan p01 = sinkhorn_plan(c01, fixed);
  const TransportPlan p00 = sinkhorn_plan_symmetric(c00, *fixed.epsilon, fixed);
  const TransportPlan p11 = sinkhorn_plan_symmetric(c11, *fixed.epsilon, fixed);

  DivGrad out;
  out.value = entropic_cost(p01, c01) - 0.5 * (entropic_cost(p00, c00) + entropic_cost(p11, c11));
  out.grad0 = plan_grad_first(p01.plan, z0, z1, cfg.power);
  out.grad0 -= plan_grad_self(p00.plan, z0, cfg.power) * 0.5;
  out.grad1 = plan_grad_first(transpose(p01.plan), z1, z0, cfg.power);
  out.grad1 -= plan_grad_self(p11.plan, z1, cfg.power) * 0.5;
  return out;
}

DivGrad mmd(const Matrix& z0, const Matrix& z1, double bandwidth) {
  require_cols(z0, z1, "mmd");
  require_rows(z0, 2, "mmd");
  require_rows(z1, 2, "mmd");
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    fail(ErrorCode::kParameter, "mmd: bandwidth must be positive");
  }
  const double n0 = static_cast<double>(z0.rows());
  const double n1 = static_cast<double>(z1.rows());
  const double inv_2s2 = 1.0 / (2.0 * bandwidth * bandwidth);
  const double inv_s2 = 2.0 * inv_2s2;

  DivGrad out{0.0, Matrix(z0.rows(), z0.cols()), Matrix(z1.rows(), z1.cols())};

  // Within-group term: sum over ordered pairs i != k, weight w.
  auto within = [&](const Matrix& z, double w, Matrix& grad) {
    const Matrix d2 = pairwise_sq_dists(z, z);
    double sum = 0.0;
    for (std::size_t i = 0; i < z.rows(); ++i)
      for (std::size_t k = i + 1; k < z.rows(); ++k) {
        const double kv = std::exp(-d2(i, k) * inv_2s2);
        sum += 2.0 * kv;
        // Each unordered pair appears twice in the ordered sum.
        const double coef = -2.0 * w * kv * inv_s2;
        auto zi = z.row(i);
        auto zk = z.row(k);
        auto gi = grad.row(i);
        auto gk = grad.row(k);
        for (std::size_t c = 0; c < z.cols(); ++c) {
          const double diff = zi[c] - zk[c];
          gi[c] += coef * diff;
          gk[c] -= coef * diff;
        }
      }
    return w * sum;
  };
  out.value += within(z0, 1.0 / (n0 * (n0 - 1.0)), out.grad0);
  out.value += within(z1, 1.0 / (n1 * (n1 - 1.0)), out.grad1);

  const double w01 = 2.0 / (n0 * n1);
  const Matrix d01 = pairwise_sq_dists(z0, z1);
  double cross = 0.0;
  for (std::size_t i = 0; i < z0.rows(); ++i)
    for (std::size_t j = 0; j < z1.rows(); ++j) {
      const double kv = std::exp(-d01(i, j) * inv_2s2);
      cross += kv;
      // d/dz0_i of -w01 k(z0_i, z1_j) = w01 k (z0_i - z1_j) / s^2
      const double coef = w01 * kv * inv_s2;
      auto xi = z0.row(i);
      auto yj = z1.row(j);
      auto gi = out.grad0.row(i);
      auto gj = out.grad1.row(j);
      for (std::size_t c = 0; c < z0.cols(); ++c) {
        const double diff = xi[c] - yj[c];
        gi[c] += coef * diff;
        gj[c] -= coef * diff;
      }
    }
  out.value -= w01 * cross;
  return out;
}

double median_bandwidth(const Matrix& z0, const Matrix& z1) {
  const Matrix pooled = vstack(z0, z1);
  if (pooled.rows() < 2) {
    fail(ErrorCode::kInsufficientSamples, "median_bandwidth: need at least 2 rows");
  }
  const Matrix d2 = pairwise_sq_dists(pooled, pooled);
  std::vector<double> dists;
  dists.reserve(pooled.rows() * (pooled.rows() - 1) / 2);
  for (std::size_t i = 0; i < pooled.rows(); ++i)
    for (std::size_t j = i + 1; j < pooled.rows(); ++j) dists.push_back(std::sqrt(d2(i, j)));
  const std::size_t count = dists.size();
  return std::max(median_entry(Matrix(1, count, std::move(dists))), 1e-6);
}

double kl_gaussian_diag(const GaussianDiag& p, const GaussianDiag& q) {
  if (p.dim() != q.dim() || p.std.size() != p.dim() || q.std.size() != q.dim()) {
    fail(ErrorCode::kShape, "kl_gaussian_diag: dimension mismatch");
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < p.dim(); ++j) {
    const double vp = p.std[j] * p.std[j];
    const double vq = q.std[j] * q.std[j];
    const double dm = p.mean[j] - q.mean[j];
    acc += std::log(vq / vp) - 1.0 + vp / vq + dm * dm / vq;
  }
  return 0.5 * acc;
}

DivGrad jeffrey(const Matrix& z0, const Matrix& z1) {
  const Fitted fit = fit_both(z0, z1, "jeffrey");
  const double value =
      0.5 * (kl_gaussian_diag(fit.p0, fit.p1) + kl_gaussian_diag(fit.p1, fit.p0));
  // Per dimension J = 1/4 [v0/v1 + v1/v0 - 2 + dm^2 (1/v0 + 1/v1)].
  ParamGrads pg(z0.cols());
  for (std::size_t j = 0; j < z0.cols(); ++j) {
    const double s0 = fit.p0.std[j], s1 = fit.p1.std[j];
    const double v0 = s0 * s0, v1 = s1 * s1;
    const double dm = fit.p0.mean[j] - fit.p1.mean[j];
    pg.dmean0[j] = 0.5 * dm * (1.0 / v0 + 1.0 / v1);
    pg.dmean1[j] = -pg.dmean0[j];
    pg.dstd0[j] = 0.5 * (s0 / v1 - (v1 + dm * dm) / (v0 * s0));
    pg.dstd1[j] = 0.5 * (s1 / v0 - (v0 + dm * dm) / (v1 * s1));
  }
  return pull_back(value, z0, z1, fit, pg);
}

double fisher_rao_uni(double m0, double s0, double m1, double s1) {
  if (!(s0 > 0.0) || !(s1 > 0.0)) {
    fail(ErrorCode::kParameter, "fisher_rao_uni: standard deviations must be positive");
  }
  return fisher_rao_term(m0, s0, m1, s1).value;
}

DivGrad fisher_rao(const Matrix& z0, const Matrix& z1) {
  const Fitted fit = fit_both(z0, z1, "fisher_rao");
  const std::size_t d = z0.cols();
  std::vector<FisherRaoTerm> terms;
  terms.reserve(d);
  double sum_sq = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    terms.push_back(fisher_rao_term(fit.p0.mean[j], fit.p0.std[j], fit.p1.mean[j], fit.p1.std[j]));
    sum_sq += terms.back().value * terms.back().value;
  }
  const double value = std::sqrt(sum_sq);
  ParamGrads pg(d);
  if (value > 0.0) {
    for (std::size_t j = 0; j < d; ++j) {
      const double w = terms[j].value / value;
      pg.dmean0[j] = w * terms[j].dm0;
      pg.dstd0[j] = w * terms[j].ds0;
      pg.dmean1[j] = w * terms[j].dm1;
      pg.dstd1[j] = w * terms[j].ds1;
    }
  }
  return pull_back(value, z0, z1, fit, pg);
}

DivGrad gaussian_wasserstein(const Matrix& z0, const Matrix& z1) {
  const Fitted fit = fit_both(z0, z1, "gaussian_wasserstein");
  ParamGrads pg(z0.cols());
  double value = 0.0;
  for (std::size_t j = 0; j < z0.cols(); ++j) {
    const double dm = fit.p0.mean[j] - fit.p1.mean[j];
    const double ds = fit.p0.std[j] - fit.p1.std[j];
    value += dm * dm + ds * ds;
    pg.dmean0[j] = 2.0 * dm;
    pg.dmean1[j] = -2.0 * dm;
    pg.dstd0[j] = 2.0 * ds;
    pg.dstd1[j] = -2.0 * ds;
  }
  return pull_back(value, z0, z1, fit, pg);
}

std::string_view measure_name(Measure m) noexcept {
  switch (m) {
    case Measure::kMmd: return "mmd";
    case Measure::kSinkhorn: return "sinkhorn";
    case Measure::kJeffrey: return "jeffrey";
    case Measure::kFisherRao: return "fisher_rao";
    case Measure::kGaussianW: return "gaussian_w";
  }
  return "unknown";
}

std::optional<Measure> parse_measure(std::string_view name) noexcept {
  for (Measure m : kAllMeasures)
    if (measure_name(m) == name) return m;
  return std::nullopt;
}

DivGrad compute_measure(Measure m, const Matrix& z0, const Matrix& z1,
                        const DivergenceConfig& cfg) {
  switch (m) {
    case Measure::kMmd:
      return mmd(z0, z1, cfg.mmd_bandwidth ? *cfg.mmd_bandwidth : median_bandwidth(z0, z1));
    case Measure::kSinkhorn: return sinkhorn_divergence(z0, z1, cfg.sinkhorn);
    case Measure::kJeffrey: return jeffrey(z0, z1);
    case Measure::kFisherRao: return fisher_rao(z0, z1);
    case Measure::kGaussianW: return gaussian_wasserstein(z0, z1);
  }
  fail(ErrorCode::kInternal, "compute_measure: unknown measure");
}

}  // namespace disent
