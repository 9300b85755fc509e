#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "disent/matrix.hpp"
#include "disent/stats.hpp"

namespace disent {

/// A similarity value between two sample batches and its gradient with
/// respect to every coordinate of each batch.
struct DivGrad {
  double value = 0.0;
  Matrix grad0;  // n0 x d
  Matrix grad1;  // n1 x d
};

struct SinkhornConfig {
  /// Entropic weight. When unset, epsilon_scale times the median of the
  /// cross cost matrix is used (and held constant for differentiation).
  std::optional<double> epsilon;
  double epsilon_scale = 0.1;
  int power = 2;
  std::size_t max_iter = 500;
  double tol = 1e-6;

  void validate() const;
};

struct TransportPlan {
  Matrix plan;            // n0 x n1
  std::vector<double> f;  // row potentials
  std::vector<double> g;  // column potentials
  double epsilon = 0.0;
  std::size_t iterations = 0;
  /// L1 marginal violation, rows plus columns.
  double residual = 0.0;
  /// False when max_iter was reached first; the plan is still usable.
  bool converged = false;
};

/// Per-entry cost ||x_i - y_j||^power for power in {1, 2}.
Matrix cost_matrix(const Matrix& x, const Matrix& y, int power);

double median_entry(const Matrix& m);

/// The entropic weight the config resolves to for a given cost matrix.
double resolve_epsilon(const Matrix& cost, const SinkhornConfig& cfg);

/// Log-domain Sinkhorn-Knopp with uniform marginals.
TransportPlan sinkhorn_plan(const Matrix& cost, const SinkhornConfig& cfg);

/// Entropic OT value min <P, C> + epsilon * KL(P | a b^T), evaluated through
/// the dual objective of the plan's potentials.
double entropic_cost(const TransportPlan& plan, const Matrix& cost);

double wasserstein_eps(const Matrix& z0, const Matrix& z1, const SinkhornConfig& cfg);

/// Debiased Sinkhorn divergence. The gradient holds the three transport
/// plans fixed at their optimum (envelope rule).
DivGrad sinkhorn_divergence(const Matrix& z0, const Matrix& z1, const SinkhornConfig& cfg);

/// Unbiased MMD^2 U-statistic with a Gaussian kernel of the given bandwidth.
DivGrad mmd(const Matrix& z0, const Matrix& z1, double bandwidth);

/// Median pairwise Euclidean distance over the pooled rows, floored at 1e-6.
double median_bandwidth(const Matrix& z0, const Matrix& z1);

/// KL(p || q) for diagonal Gaussians.
double kl_gaussian_diag(const GaussianDiag& p, const GaussianDiag& q);

/// Symmetrized KL between diagonal Gaussians fitted to each batch.
DivGrad jeffrey(const Matrix& z0, const Matrix& z1);

/// Fisher-Rao distance between univariate normals N(m0, s0^2) and N(m1, s1^2).
double fisher_rao_uni(double m0, double s0, double m1, double s1);

/// Root-sum-of-squares of per-dimension Fisher-Rao distances between
/// diagonal Gaussians fitted to each batch.
DivGrad fisher_rao(const Matrix& z0, const Matrix& z1);

/// 2-Wasserstein closed form between fitted diagonal Gaussians:
/// ||mu0 - mu1||^2 + sum_j (s0_j - s1_j)^2.
DivGrad gaussian_wasserstein(const Matrix& z0, const Matrix& z1);

enum class Measure { kMmd, kSinkhorn, kJeffrey, kFisherRao, kGaussianW };

inline constexpr Measure kAllMeasures[] = {Measure::kMmd, Measure::kSinkhorn, Measure::kJeffrey,
                                           Measure::kFisherRao, Measure::kGaussianW};

std::string_view measure_name(Measure m) noexcept;
std::optional<Measure> parse_measure(std::string_view name) noexcept;

struct DivergenceConfig {
  SinkhornConfig sinkhorn;
  /// Fixed MMD bandwidth; median_bandwidth of each batch when unset.
  std::optional<double> mmd_bandwidth;
};

DivGrad compute_measure(Measure m, const Matrix& z0, const Matrix& z1,
                        const DivergenceConfig& cfg);

}  // namespace disent
