#include <doctest.h>

#include <cmath>
#include <fstream>

#include "disent/error.hpp"
#include "disent/finite_diff.hpp"
#include "disent/model.hpp"
#include "helpers.hpp"

using namespace disent;

namespace {

double inner(const Matrix& a, const Matrix& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i] * b.data()[i];
  return s;
}

Mlp identity_layer(std::size_t d) {
  Mlp net(MlpSpec{{d, d}});
  for (std::size_t i = 0; i < d; ++i) net.layers()[0].weight(i, i) = 1.0;
  return net;
}

}  // namespace

TEST_CASE("forward special cases") {
  Rng rng(41);
  const Matrix x = testing::random_matrix(5, 3, rng);
  CHECK(identity_layer(3).forward(x) == x);
  CHECK(Mlp(MlpSpec{{3, 4, 2}}).forward(x) == Matrix(5, 2, 0.0));
  CHECK_THROWS_AS(identity_layer(4).forward(x), Error);
}

TEST_CASE("forward matches layer-by-layer recomputation") {
  Rng rng(42);
  const Mlp net = Mlp::random(MlpSpec{{3, 6, 2}, 0.1}, rng);
  const Matrix x = testing::random_matrix(4, 3, rng);
  const Matrix out = net.forward(x);
  for (std::size_t r = 0; r < 4; ++r) {
    std::vector<double> h(6);
    for (std::size_t j = 0; j < 6; ++j) {
      double s = net.layers()[0].bias[j];
      for (std::size_t i = 0; i < 3; ++i) s += x(r, i) * net.layers()[0].weight(i, j);
      h[j] = s > 0 ? s : 0.1 * s;
    }
    for (std::size_t k = 0; k < 2; ++k) {
      double s = net.layers()[1].bias[k];
      for (std::size_t j = 0; j < 6; ++j) s += h[j] * net.layers()[1].weight(j, k);
      CHECK(out(r, k) == doctest::Approx(s).epsilon(1e-13));
    }
  }
}

TEST_CASE("backward") {
  Rng rng(43);
  const Mlp lin = Mlp::random(MlpSpec{{3, 2}}, rng);
  const Matrix x = testing::random_matrix(4, 3, rng);
  ForwardTape tape;
  lin.forward(x, &tape);
  const auto zero = backward(lin, tape, Matrix(4, 2, 0.0));
  CHECK(zero.input_grad == Matrix(4, 3, 0.0));
  CHECK(zero.param_grads.layers()[0].weight == Matrix(3, 2, 0.0));

  const Matrix u = testing::random_matrix(4, 2, rng);
  const auto g = backward(lin, tape, u);
  CHECK(max_relative_error(g.param_grads.layers()[0].weight, matmul(transpose(x), u)) < 1e-13);
  CHECK(max_relative_error(g.input_grad, matmul(u, transpose(lin.layers()[0].weight))) < 1e-13);

  const Mlp net = Mlp::random(MlpSpec{{3, 5, 4, 2}, 0.2}, rng);
  ForwardTape t2;
  net.forward(x, &t2);
  const auto b = backward(net, t2, u);
  std::vector<double> flat, grads;
  net.flatten_into(flat);
  b.param_grads.flatten_into(grads);
  for (std::size_t k = 0; k < flat.size(); ++k) {
    const ScalarFn f = [&](const Matrix& p) {
      Mlp copy = net;
      copy.unflatten_from(p.data());
      return inner(u, copy.forward(x));
    };
    const Matrix pm(1, flat.size(), flat);
    CHECK(relative_error(grads[k], finite_diff_at(f, pm, 0, k)) < 1e-4);
  }
  const auto fx = finite_diff_grad([&](const Matrix& m) { return inner(u, net.forward(m)); }, x);
  CHECK(max_relative_error(b.input_grad, fx) < 1e-4);
}

TEST_CASE("cross entropy") {
  const std::vector<Label> y{0, 1, 1};
  CHECK(cross_entropy(Matrix(3, 2, 0.0), y).loss == doctest::Approx(std::log(2.0)));
  CHECK(cross_entropy(Matrix{{20, 0}, {0, 20}, {0, 20}}, y).loss < 1e-8);
  Rng rng(44);
  const Matrix logits = testing::random_matrix(3, 2, rng);
  const auto ce = cross_entropy(logits, y);
  const auto fd = finite_diff_grad([&](const Matrix& l) { return cross_entropy(l, y).loss; }, logits);
  CHECK(max_relative_error(ce.dlogits, fd) < 1e-5);
  CHECK_THROWS_AS(cross_entropy(Matrix(2, 2), y), Error);
}

TEST_CASE("accuracy") {
  const std::vector<Label> y{0, 1, 1, 0};
  CHECK(accuracy(Matrix{{1, 0}, {0, 1}, {0, 1}, {1, 0}}, y) == 1.0);
  CHECK(accuracy(Matrix{{0, 1}, {1, 0}, {1, 0}, {0, 1}}, y) == 0.0);
  CHECK(accuracy(Matrix{{0, 0}, {0, 0}, {0, 0}, {0, 0}}, y) == 0.5);  // ties -> class 0
  Rng rng(45);
  const Matrix logits = testing::random_matrix(50, 2, rng);
  std::vector<Label> labels(50);
  int correct = 0;
  for (int i = 0; i < 50; ++i) {
    labels[i] = rng.bernoulli(0.5);
    correct += (logits(i, 1) > logits(i, 0) ? 1 : 0) == labels[i];
  }
  CHECK(accuracy(logits, labels) == doctest::Approx(correct / 50.0));
}

TEST_CASE("composite loss gradient") {
  Rng rng(46);
  ModelSpec spec{MlpSpec{{4, 6, 3}}, MlpSpec{{3, 2}}, std::nullopt};
  ModelParams params = ModelParams::random(spec, rng);
  const Matrix x = testing::random_matrix(8, 4, rng);
  std::vector<Label> y(8);
  for (auto& v : y) v = rng.bernoulli(0.5);
  auto loss = [&](const ModelParams& p) {
    return cross_entropy(p.classifier.forward(p.encoder.forward(x)), y).loss;
  };
  auto [z, tape] = encode(params, x);
  ForwardTape ctape;
  const Matrix logits = params.classifier.forward(z, &ctape);
  const auto ce = cross_entropy(logits, y);
  const auto cb = backward(params.classifier, ctape, ce.dlogits);
  const auto eb = backward(params.encoder, tape, cb.input_grad);
  std::vector<double> g;
  eb.param_grads.flatten_into(g);
  cb.param_grads.flatten_into(g);
  const auto flat = params.flatten();
  REQUIRE(g.size() == flat.size());
  for (int t = 0; t < 50; ++t) {
    const std::size_t k = rng.index(flat.size());
    const ScalarFn f = [&](const Matrix& p) {
      ModelParams copy = params;
      copy.unflatten(p.data());
      return loss(copy);
    };
    CHECK(relative_error(g[k], finite_diff_at(f, Matrix(1, flat.size(), flat), 0, k)) < 1e-4);
  }
}

TEST_CASE("flatten round trip and checkpoints") {
  Rng rng(47);
  ModelSpec spec{MlpSpec{{4, 6, 3}, 0.05}, MlpSpec{{3, 2}}, MlpSpec{{3, 5, 2}}};
  const ModelParams p = ModelParams::random(spec, rng);
  ModelParams q = ModelParams::random(spec, rng);
  q.unflatten(p.flatten());
  CHECK(q == p);

  const auto dir = testing::scratch_dir("model");
  save_checkpoint(p, dir / "a.ckpt");
  CHECK(load_checkpoint(dir / "a.ckpt") == p);

  ModelParams no_adv = p;
  no_adv.adversary.reset();
  save_checkpoint(no_adv, dir / "b.ckpt");
  CHECK(load_checkpoint(dir / "b.ckpt") == no_adv);

  {
    std::ofstream os(dir / "bad.ckpt", std::ios::binary);
    os << "NOTACKPT";
  }
  try {
    load_checkpoint(dir / "bad.ckpt");
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
  }
  {
    std::ifstream is(dir / "a.ckpt", std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(is)), {});
    std::ofstream os(dir / "trunc.ckpt", std::ios::binary);
    os << bytes.substr(0, bytes.size() - 3);
  }
  CHECK_THROWS_AS(load_checkpoint(dir / "trunc.ckpt"), Error);
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.ckpt"), Error);
}
