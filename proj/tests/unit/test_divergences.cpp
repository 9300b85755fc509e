#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "disent/divergences.hpp"
#include "disent/error.hpp"
#include "disent/finite_diff.hpp"
#include "helpers.hpp"

using namespace disent;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

// Worst relative error of grad0 and grad1 against finite differences at
// `count` random coordinates.
double spot_check_gradient(const std::function<DivGrad(const Matrix&, const Matrix&)>& m,
                           const Matrix& z0, const Matrix& z1, Rng& rng, int count) {
  const DivGrad g = m(z0, z1);
  double worst = 0.0;
  for (int t = 0; t < count; ++t) {
    const bool first = rng.bernoulli(0.5);
    const Matrix& z = first ? z0 : z1;
    const std::size_t r = rng.index(z.rows()), c = rng.index(z.cols());
    const ScalarFn f = [&](const Matrix& x) { return first ? m(x, z1).value : m(z0, x).value; };
    const double fd = finite_diff_at(f, z, r, c);
    const double an = first ? g.grad0(r, c) : g.grad1(r, c);
    worst = std::max(worst, relative_error(an, fd));
  }
  return worst;
}

}  // namespace

TEST_CASE("mmd hand values") {
  const Matrix p{{1, 2}, {1, 2}};
  CHECK(mmd(p, p, 1.0).value == doctest::Approx(0.0));
  const Matrix zero{{0, 0}, {0, 0}}, far{{30, 40}, {30, 40}};
  CHECK(mmd(zero, far, 1.0).value == doctest::Approx(2.0 - 2.0 * std::exp(-2500.0 / 2.0)));
  CHECK(code_of([] { mmd(Matrix{{1.0}}, Matrix{{1.0}, {2.0}}, 1.0); }) ==
        ErrorCode::kInsufficientSamples);
  CHECK(code_of([] { mmd(Matrix{{1.0}, {0.0}}, Matrix{{1.0}, {2.0}}, 0.0); }) ==
        ErrorCode::kParameter);
}

TEST_CASE("mmd matches quadruple-loop oracle and finite differences") {
  Rng rng(21);
  const Matrix z0 = testing::random_matrix(5, 3, rng);
  const Matrix z1 = testing::random_matrix(7, 3, rng, 1.0, 0.5);
  const double h = 1.3;
  const auto r = mmd(z0, z1, h);
  CHECK(std::abs(r.value - oracle::mmd_quadruple(testing::to_rows(z0), testing::to_rows(z1), h)) < 1e-12);
  const auto fd0 = finite_diff_grad([&](const Matrix& x) { return mmd(x, z1, h).value; }, z0);
  const auto fd1 = finite_diff_grad([&](const Matrix& x) { return mmd(z0, x, h).value; }, z1);
  CHECK(max_relative_error(r.grad0, fd0) < 1e-4);
  CHECK(max_relative_error(r.grad1, fd1) < 1e-4);
}

TEST_CASE("median_bandwidth") {
  CHECK(median_bandwidth(Matrix{{0, 0}}, Matrix{{3, 4}}) == doctest::Approx(5.0));
  CHECK(median_bandwidth(Matrix{{1, 1}, {1, 1}}, Matrix{{1, 1}}) == 1e-6);
  Rng rng(22);
  const Matrix a = testing::random_matrix(4, 2, rng), b = testing::random_matrix(5, 2, rng);
  auto rows = testing::to_rows(vstack(a, b));
  std::vector<double> d;
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = i + 1; j < rows.size(); ++j) d.push_back(std::sqrt(oracle::sq_dist(rows[i], rows[j])));
  std::sort(d.begin(), d.end());
  const double med = d.size() % 2 ? d[d.size() / 2] : 0.5 * (d[d.size() / 2 - 1] + d[d.size() / 2]);
  CHECK(median_bandwidth(a, b) == doctest::Approx(med).epsilon(1e-14));
}

TEST_CASE("sinkhorn_plan basics") {
  SinkhornConfig cfg;
  cfg.epsilon = 0.1;
  const auto one = sinkhorn_plan(Matrix{{3.0}}, cfg);
  CHECK(one.plan(0, 0) == doctest::Approx(1.0));
  CHECK(one.residual < 1e-12);

  cfg.epsilon = 1e-3;
  const auto two = sinkhorn_plan(Matrix{{0, 10}, {10, 0}}, cfg);
  CHECK(std::abs(two.plan(0, 0) - 0.5) < 1e-3);
  CHECK(std::abs(two.plan(0, 1)) < 1e-3);
  CHECK(std::abs(two.plan(1, 1) - 0.5) < 1e-3);

  // Distinct points on a line: the self-plan at small epsilon is the identity.
  Matrix z(6, 2);
  for (std::size_t i = 0; i < 6; ++i) z(i, 0) = static_cast<double>(i);
  const Matrix cost = cost_matrix(z, z, 2);
  SinkhornConfig diag;
  diag.epsilon = 0.01 * median_entry(cost);
  diag.max_iter = 10000;
  const auto p = sinkhorn_plan(cost, diag);
  for (std::size_t i = 0; i < 6; ++i) CHECK(p.plan(i, i) >= 0.99 / 6.0);

  Matrix bad{{1.0, -1.0}};
  CHECK(code_of([&] { sinkhorn_plan(bad, cfg); }) == ErrorCode::kParameter);
}

TEST_CASE("sinkhorn marginals within tol on converged plans") {
  Rng rng(24);
  for (int t = 0; t < 10; ++t) {
    const Matrix a = testing::random_matrix(5 + t, 3, rng), b = testing::random_matrix(4 + t, 3, rng);
    const auto p = sinkhorn_plan(cost_matrix(a, b, 2), SinkhornConfig{});
    REQUIRE(p.converged);
    CHECK(p.residual < 1e-6);
    for (double v : p.plan.data()) CHECK(v >= 0.0);
  }
}

TEST_CASE("wasserstein_eps against exact OT") {
  const Matrix a{{1, 2}}, b{{4, 6}};
  CHECK(wasserstein_eps(a, b, SinkhornConfig{}) == doctest::Approx(25.0));
  SinkhornConfig p1;
  p1.power = 1;
  CHECK(wasserstein_eps(a, b, p1) == doctest::Approx(5.0));

  Rng rng(25);
  const Matrix x = testing::random_matrix(4, 2, rng), y = testing::random_matrix(4, 2, rng);
  SinkhornConfig cfg;
  cfg.epsilon = 1e-3;
  cfg.max_iter = 100000;
  const double exact = oracle::ot_permutation(testing::to_rows(x), testing::to_rows(y), 2);
  CHECK(std::abs(wasserstein_eps(x, y, cfg) - exact) / exact < 1e-2);
}

TEST_CASE("sinkhorn divergence") {
  Rng rng(26);
  const Matrix z = testing::random_matrix(8, 2, rng);
  CHECK(std::abs(sinkhorn_divergence(z, z, SinkhornConfig{}).value) < 1e-6);

  // Translating one cluster toward the other lowers the divergence.
  const Matrix c0 = testing::random_matrix(6, 2, rng, 0.3);
  double prev = INFINITY;
  for (int step = 0; step < 5; ++step) {
    Matrix c1 = c0;
    for (std::size_t i = 0; i < c1.rows(); ++i) c1(i, 0) += 10.0 - 2.0 * step;
    SinkhornConfig cfg;
    cfg.epsilon = 0.05;
    const double v = sinkhorn_divergence(c0, c1, cfg).value;
    CHECK(v > 0.0);
    CHECK(v < prev);
    prev = v;
  }

  const Matrix a = testing::random_matrix(6, 2, rng), b = testing::random_matrix(6, 2, rng, 1.0, 0.7);
  // Epsilon is fixed here; the default one scales with the cost and is detached.
  SinkhornConfig tight;
  tight.epsilon = 0.5;
  tight.tol = 1e-12;
  tight.max_iter = 5000;
  const auto r = sinkhorn_divergence(a, b, tight);
  const auto fd0 = finite_diff_grad([&](const Matrix& x) { return sinkhorn_divergence(x, b, tight).value; }, a);
  const auto fd1 = finite_diff_grad([&](const Matrix& x) { return sinkhorn_divergence(a, x, tight).value; }, b);
  CHECK(max_relative_error(r.grad0, fd0) < 1e-2);
  CHECK(max_relative_error(r.grad1, fd1) < 1e-2);
}

TEST_CASE("kl_gaussian_diag") {
  const GaussianDiag p{{0.0}, {1.0}}, q{{1.0}, {1.0}};
  CHECK(kl_gaussian_diag(p, p) == 0.0);
  CHECK(kl_gaussian_diag(q, p) == doctest::Approx(0.5));
  const GaussianDiag wide{{0.0}, {2.0}};
  CHECK(kl_gaussian_diag(wide, p) == doctest::Approx(1.5 - std::log(2.0)));
  CHECK(std::abs(kl_gaussian_diag(wide, p) - oracle::kl_monte_carlo({0}, {2}, {0}, {1}, 1000000, 3)) < 5e-3);
  CHECK(code_of([&] { kl_gaussian_diag(p, GaussianDiag{{0, 0}, {1, 1}}); }) == ErrorCode::kShape);
}

TEST_CASE("jeffrey composes fit and kl") {
  Rng rng(27);
  const Matrix a = testing::random_matrix(10, 2, rng), b = testing::random_matrix(10, 2, rng, 1.5, 0.3);
  const auto fa = fit_gaussian_diag(a), fb = fit_gaussian_diag(b);
  const double expect = 0.5 * (kl_gaussian_diag(fa, fb) + kl_gaussian_diag(fb, fa));
  const auto j = jeffrey(a, b);
  CHECK(j.value == doctest::Approx(expect).epsilon(1e-12));
  CHECK(jeffrey(b, a).value == doctest::Approx(j.value).epsilon(1e-13));
  CHECK(jeffrey(a, a).value == doctest::Approx(0.0));
  CHECK(max_relative_error(j.grad0, finite_diff_grad([&](const Matrix& x) { return jeffrey(x, b).value; }, a)) < 1e-4);
  CHECK(max_relative_error(j.grad1, finite_diff_grad([&](const Matrix& x) { return jeffrey(a, x).value; }, b)) < 1e-4);
}

TEST_CASE("fisher_rao_uni") {
  CHECK(fisher_rao_uni(0, 1, 0, 1) == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(fisher_rao_uni(0, 1, 0, 2) == doctest::Approx(std::sqrt(2.0) * std::log(2.0)));
  CHECK(code_of([] { fisher_rao_uni(0, 0, 0, 1); }) == ErrorCode::kParameter);
  Rng rng(28);
  for (int t = 0; t < 100; ++t) {
    const double m0 = rng.normal(), m1 = rng.normal(), s0 = rng.uniform(0.1, 3), s1 = rng.uniform(0.1, 3);
    const double v = fisher_rao_uni(m0, s0, m1, s1);
    CHECK(v == doctest::Approx(fisher_rao_uni(m1, s1, m0, s0)).epsilon(1e-12));
    CHECK(v == doctest::Approx(oracle::fisher_rao_halfplane(m0, s0, m1, s1)).epsilon(1e-9));
  }
}

TEST_CASE("fisher_rao multivariate") {
  Rng rng(29);
  const Matrix a = testing::random_matrix(12, 3, rng);
  Matrix b = a;
  for (std::size_t i = 0; i < b.rows(); ++i) b(i, 1) = 2.0 * b(i, 1) + 0.5;
  const auto fa = fit_gaussian_diag(a), fb = fit_gaussian_diag(b);
  CHECK(fisher_rao(a, b).value ==
        doctest::Approx(fisher_rao_uni(fa.mean[1], fa.std[1], fb.mean[1], fb.std[1])).epsilon(1e-9));
  CHECK(fisher_rao(a, a).value < 1e-6);
  const Matrix c = testing::random_matrix(12, 3, rng, 1.3, 0.4);
  const auto r = fisher_rao(a, c);
  CHECK(max_relative_error(r.grad0, finite_diff_grad([&](const Matrix& x) { return fisher_rao(x, c).value; }, a)) < 1e-4);
  CHECK(max_relative_error(r.grad1, finite_diff_grad([&](const Matrix& x) { return fisher_rao(a, x).value; }, c)) < 1e-4);
}

TEST_CASE("gaussian_wasserstein") {
  const Matrix a{{-1, -1}, {1, 1}}, b{{2, 3}, {4, 5}};
  CHECK(gaussian_wasserstein(a, b).value == doctest::Approx(25.0));
  const Matrix s1{{-1}, {1}}, s3{{-3}, {3}};
  // Unbiased std of {-1, 1} is sqrt(2); scale both to get 1 and 3.
  const Matrix u1 = s1 * (1.0 / std::sqrt(2.0)), u3 = s3 * (1.0 / std::sqrt(2.0));
  CHECK(gaussian_wasserstein(u1, u3).value == doctest::Approx(4.0));
  Rng rng(30);
  const Matrix x = testing::random_matrix(9, 3, rng), y = testing::random_matrix(7, 3, rng, 2.0, 1.0);
  const auto r = gaussian_wasserstein(x, y);
  CHECK(max_relative_error(r.grad0, finite_diff_grad([&](const Matrix& m) { return gaussian_wasserstein(m, y).value; }, x)) < 1e-4);
  CHECK(max_relative_error(r.grad1, finite_diff_grad([&](const Matrix& m) { return gaussian_wasserstein(x, m).value; }, y)) < 1e-4);
}

TEST_CASE("properties across measures") {
  Rng rng(31);
  DivergenceConfig cfg;
  cfg.sinkhorn.tol = 1e-10;
  cfg.sinkhorn.max_iter = 5000;
  for (Measure m : kAllMeasures) {
    CAPTURE(measure_name(m));
    const Matrix a = testing::random_matrix(8, 3, rng), b = testing::random_matrix(10, 3, rng, 1.2, 0.5);
    const double ab = compute_measure(m, a, b, cfg).value;
    const double ba = compute_measure(m, b, a, cfg).value;
    CHECK(ab >= -1e-8);
    CHECK(std::abs(ab - ba) < (m == Measure::kSinkhorn ? 1e-6 : 1e-10));
    if (m != Measure::kMmd) CHECK(std::abs(compute_measure(m, a, a, cfg).value) <= 1e-6);

    // Joint translation leaves the value unchanged, so the gradients cancel.
    const auto g = compute_measure(m, a, b, cfg);
    const std::vector<double> v{0.3, -0.5, 0.8};
    double s = 0, norm = 0;
    for (std::size_t i = 0; i < a.rows(); ++i)
      for (std::size_t c = 0; c < 3; ++c) s += g.grad0(i, c) * v[c], norm += std::abs(g.grad0(i, c));
    for (std::size_t i = 0; i < b.rows(); ++i)
      for (std::size_t c = 0; c < 3; ++c) s += g.grad1(i, c) * v[c], norm += std::abs(g.grad1(i, c));
    CHECK(std::abs(s) < 1e-8 * std::max(1.0, norm));
  }
  // The unbiased estimator is not zero on identical samples: with two points at
  // squared distance 5 it is k - 1 where k = exp(-5 / 2).
  CHECK(mmd(Matrix{{1, 2}, {3, 1}}, Matrix{{1, 2}, {3, 1}}, 1.0).value ==
        doctest::Approx(std::exp(-2.5) - 1.0));
}

TEST_CASE("translation sensitivity") {
  Rng rng(32);
  const Matrix a = testing::random_matrix(10, 2, rng);
  const Matrix& b0 = a;
  for (Measure m : {Measure::kGaussianW, Measure::kJeffrey, Measure::kFisherRao, Measure::kMmd}) {
    CAPTURE(measure_name(m));
    double prev = -INFINITY;
    for (int t = 0; t < 5; ++t) {
      Matrix b = b0;
      for (std::size_t i = 0; i < b.rows(); ++i) b(i, 0) += 0.5 * t;
      DivergenceConfig cfg;
      cfg.mmd_bandwidth = 2.0;
      const double v = compute_measure(m, a, b, cfg).value;
      CHECK(v >= prev - 1e-12);
      prev = v;
    }
  }
}

TEST_CASE("measure names round trip") {
  for (Measure m : kAllMeasures) CHECK(parse_measure(measure_name(m)) == m);
  CHECK_FALSE(parse_measure("hausdorff").has_value());
}

TEST_CASE("sinkhorn on a symmetric cost converges to symmetric potentials") {
  Rng rng(33);
  for (int t = 0; t < 5; ++t) {
    const Matrix z = testing::random_matrix(9, 3, rng);
    const Matrix cost = cost_matrix(z, z, 2);
    const auto p = sinkhorn_plan(cost, SinkhornConfig{});
    REQUIRE(p.converged);
    CHECK(p.residual < 1e-6);
    CHECK(p.f == p.g);
    for (std::size_t i = 0; i < 9; ++i)
      for (std::size_t j = 0; j < 9; ++j) CHECK(p.plan(i, j) == p.plan(j, i));
    CHECK(std::abs(sinkhorn_divergence(z, z, SinkhornConfig{}).value) < 1e-9);
  }
}
