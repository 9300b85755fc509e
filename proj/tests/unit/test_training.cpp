#include <doctest.h>

#include <cmath>

#include "disent/error.hpp"
#include "disent/finite_diff.hpp"
#include "disent/eval.hpp"
#include "disent/training.hpp"
#include "helpers.hpp"

using namespace disent;

namespace {

DatasetSplit small_data(std::uint64_t seed = 7, std::size_t n = 600) {
  return generate(SynthSpec::with_defaults(n, 4, seed));
}

TrainConfig small_config(Regularizer measure, double lambda = 1.0) {
  TrainConfig cfg;
  cfg.measure = measure;
  cfg.lambda = lambda;
  cfg.steps = 60;
  cfg.checkpoint_every = 20;
  cfg.batch_size = 32;
  cfg.encoder_hidden = {8};
  cfg.embedding_dim = 2;
  cfg.adversary_hidden = {8};
  cfg.monitor_rows = 128;
  return cfg;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

}  // namespace

TEST_CASE("adamw examples") {
  std::vector<double> p{1.0, -2.0}, zero{0.0, 0.0};
  AdamWState st(2);
  adamw_step(p, zero, st, {0.01, 0.0});
  CHECK(p == std::vector<double>{1.0, -2.0});
  adamw_step(p, zero, st, {0.01, 0.1});
  CHECK(p[0] == doctest::Approx(0.999));
  CHECK(p[1] == doctest::Approx(-1.998));

  std::vector<double> theta{0.6, 0.8};
  AdamWState bowl(2);
  for (int i = 0; i < 200; ++i) {
    const std::vector<double> g{2 * theta[0], 2 * theta[1]};
    adamw_step(theta, g, bowl, {0.05, 0.0});
  }
  CHECK(std::hypot(theta[0], theta[1]) < 1e-2);

  std::vector<double> short_grad{1.0};
  CHECK(code_of([&] { adamw_step(p, short_grad, st, {}); }) == ErrorCode::kShape);
}

TEST_CASE("config validation") {
  TrainConfig cfg;
  cfg.measure = Regularizer::kAdversarial;
  CHECK(code_of([&] { cfg.validate(); }) == ErrorCode::kConfig);
  cfg.unroll = 1;
  CHECK_NOTHROW(cfg.validate());
  TrainConfig small;
  small.batch_size = 3;
  CHECK(code_of([&] { small.validate(); }) == ErrorCode::kConfig);
  TrainConfig neg;
  neg.lambda = -1.0;
  CHECK(code_of([&] { neg.validate(); }) == ErrorCode::kConfig);
  for (auto r : {Regularizer::kNone, Regularizer::kMmd, Regularizer::kSinkhorn, Regularizer::kJeffrey,
                 Regularizer::kFisherRao, Regularizer::kGaussianW, Regularizer::kAdversarial}) {
    CHECK(parse_regularizer(regularizer_name(r)) == r);
  }
}

TEST_CASE("lambda zero is bit-identical to no regularizer") {
  const auto data = small_data();
  const auto none = train(data, small_config(Regularizer::kNone));
  for (auto m : {Regularizer::kGaussianW, Regularizer::kSinkhorn, Regularizer::kMmd}) {
    const auto zero = train(data, small_config(m, 0.0));
    CHECK(zero.params == none.params);
  }
}

TEST_CASE("training is deterministic and counts steps") {
  const auto data = small_data();
  const auto cfg = small_config(Regularizer::kJeffrey);
  const auto a = train(data, cfg);
  const auto b = train(data, cfg);
  CHECK(a.params == b.params);
  REQUIRE(a.records.size() == 4);
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].step == 20 * i);
    CHECK(a.records[i].main_loss == b.records[i].main_loss);
    CHECK(a.records[i].reg_value == b.records[i].reg_value);
  }
  CHECK(a.checkpoints.size() == a.records.size());
  CHECK(a.checkpoints.back() == a.params);
  CHECK(a.stats.outer_updates == 60);
  CHECK(a.stats.inner_updates == 0);
  CHECK(a.stats.processed_batches == 60);
}

TEST_CASE("nested loop counters and decoupling") {
  const auto data = small_data();
  auto cfg = small_config(Regularizer::kAdversarial);
  cfg.unroll = 3;
  const auto r = train(data, cfg);
  CHECK(r.stats.outer_updates == 60);
  CHECK(r.stats.inner_updates == 180);
  CHECK(r.stats.processed_batches == 240);
  CHECK(r.params.adversary.has_value());
  REQUIRE(r.records.back().reg_value.has_value());

  // At lambda 0 the adversary never reaches the encoder: changing its width
  // leaves the encoder trajectory untouched.
  auto c0 = cfg;
  c0.lambda = 0.0;
  c0.unroll = 1;
  auto c1 = c0;
  c1.adversary_hidden = {16, 4};
  CHECK(train(data, c0).params.encoder == train(data, c1).params.encoder);
}

TEST_CASE("regularizer gradient is linear in lambda") {
  const auto data = small_data();
  Rng rng(3);
  const auto base = small_config(Regularizer::kGaussianW);
  const ModelParams params = ModelParams::random(base.model_spec(4), rng);
  std::vector<std::size_t> rows(64);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  const LabeledBatch batch = subset(data.train, rows);
  auto at = [&](double lambda) {
    auto cfg = base;
    cfg.lambda = lambda;
    return single_loop_objective(params, batch, cfg).grad;
  };
  const auto g0 = at(0.0), ga = at(0.5), g2a = at(1.0);
  for (std::size_t k = 0; k < g0.size(); ++k) {
    const double expect = g0[k] + 2.0 * (ga[k] - g0[k]);
    CHECK(std::abs(g2a[k] - expect) <= 1e-10 * std::max(1.0, std::abs(expect)));
  }
}

TEST_CASE("single-loop objective gradient matches finite differences") {
  const auto data = small_data();
  Rng rng(4);
  for (auto m : {Regularizer::kGaussianW, Regularizer::kJeffrey, Regularizer::kMmd}) {
    auto cfg = small_config(m, 0.7);
    cfg.divergence.mmd_bandwidth = 1.5;
    const ModelParams params = ModelParams::random(cfg.model_spec(4), rng);
    std::vector<std::size_t> rows(24);
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = 3 * i;
    const LabeledBatch batch = subset(data.train, rows);
    const auto eval = single_loop_objective(params, batch, cfg);
    const auto flat = params.flatten();
    for (int t = 0; t < 10; ++t) {
      const std::size_t k = rng.index(flat.size());
      auto f = [&](double delta) {
        auto p = flat;
        p[k] += delta;
        ModelParams q = params;
        q.unflatten(p);
        const auto e = single_loop_objective(q, batch, cfg);
        return e.main_loss + cfg.lambda * e.reg_value;
      };
      const double fd = (f(1e-5) - f(-1e-5)) / 2e-5;
      CHECK(relative_error(eval.grad[k], fd) < 1e-4);
    }
  }
}

TEST_CASE("single-class batches") {
  auto data = small_data();
  // Nearly every sample S=0: batches of 32 almost always single-class.
  for (std::size_t i = 0; i < data.train.size(); ++i) data.train.sensitive[i] = i == 0 ? 1 : 0;
  CHECK(code_of([&] { train(data, small_config(Regularizer::kGaussianW)); }) == ErrorCode::kDataBalance);

  auto mixed = small_data();
  for (std::size_t i = 0; i < mixed.train.size(); ++i) mixed.train.sensitive[i] = i % 4 == 0;
  auto cfg = small_config(Regularizer::kGaussianW);
  cfg.batch_size = 16;
  cfg.steps = 500;
  cfg.checkpoint_every = 500;
  const auto r = train(mixed, cfg);
  CHECK(r.stats.skipped_batches > 0);
  CHECK(r.stats.processed_batches == 500);
}

TEST_CASE("regularized training lowers the measure") {
  const auto data = small_data(7, 2000);
  auto cfg = small_config(Regularizer::kGaussianW);
  cfg.steps = 800;
  cfg.checkpoint_every = 400;
  cfg.batch_size = 64;
  const auto r = train(data, cfg);
  CHECK(*r.records.back().reg_value < 0.1 * *r.records.front().reg_value);

  auto sk = cfg;
  sk.measure = Regularizer::kSinkhorn;
  sk.steps = 200;
  sk.checkpoint_every = 100;
  const auto s = train(data, sk);
  CHECK(s.records.back().main_loss < s.records.front().main_loss);
}

TEST_CASE("sweep") {
  const auto data = small_data();
  const auto base = small_config(Regularizer::kGaussianW);
  const auto a = sweep(data, base, kDefaultLambdaGrid, 3);
  const auto b = sweep(data, base, kDefaultLambdaGrid, 1);
  REQUIRE(a.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(a[i].lambda == kDefaultLambdaGrid[i]);
    CHECK(a[i].result.params == b[i].result.params);
  }
  CHECK(a[0].config.seed != a[1].config.seed);
  const double zero[] = {0.0};
  const auto single = sweep(data, base, zero);
  CHECK(single.size() == 1);
  CHECK(code_of([&] { sweep(data, base, std::span<const double>{}); }) == ErrorCode::kConfig);
}
