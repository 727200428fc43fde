#include <doctest.h>

#include <array>
#include <cmath>
#include <filesystem>
#include <limits>

#include "holgraph/checkpoint.hpp"
#include "holgraph/numerics.hpp"

using namespace holgraph;
using Md = Matrix<double>;

namespace {

Md random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Md m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

MlpParams<double> random_mlp(std::size_t input, std::vector<std::size_t> widths, Rng& rng) {
  auto p = make_mlp<double>(input, widths, Activation::Relu, Activation::Identity, rng);
  std::normal_distribution<double> n(0.0, 0.3);
  for (auto& l : p.layers) {
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias.data()[i] = n(rng);
  }
  return p;
}

// Triple-loop matrix product and activation, no Eigen expressions involved.
Md oracle_forward(const MlpParams<double>& p, const Md& x) {
  Md cur = x;
  for (const auto& l : p.layers) {
    Md next(cur.rows(), l.weight.cols());
    for (Eigen::Index r = 0; r < cur.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) {
        double s = l.bias(0, c);
        for (Eigen::Index k = 0; k < cur.cols(); ++k) s += cur(r, k) * l.weight(k, c);
        next(r, c) = l.activation == Activation::Relu ? std::max(s, 0.0) : s;
      }
    }
    cur = next;
  }
  return cur;
}

double brute_aucroc(const std::vector<double>& l, const std::vector<std::uint8_t>& pos, const std::vector<int>& goal) {
  double total = 0;
  for (std::size_t i = 0; i < l.size(); ++i) {
    for (std::size_t j = 0; j < l.size(); ++j) {
      if (!pos[i] || pos[j]) continue;
      const double w = goal[i] == goal[j] ? 2.0 : 1.0;
      total += w * std::log(1.0 + std::exp(-(l[i] - l[j])));
    }
  }
  return total;
}

}  // namespace

TEST_CASE("identity layer with ReLU clamps negatives") {
  Rng rng(0);
  std::array<std::size_t, 1> w{3};
  auto p = make_mlp<double>(3, w, Activation::Relu, Activation::Relu, rng);
  p.layers[0].weight = Md::Identity(3, 3);
  p.layers[0].bias.setZero();
  Md x(1, 3);
  x << -1.5, 0.0, 2.5;
  const Md y = mlp_forward(p, x, 1.0, false, rng).output;
  CHECK(y(0, 0) == 0.0);
  CHECK(y(0, 1) == 0.0);
  CHECK(y(0, 2) == 2.5);
}

TEST_CASE("keep 1 makes training and evaluation identical") {
  Rng rng(1);
  auto p = random_mlp(5, {4, 3}, rng);
  const Md x = random_matrix(6, 5, rng);
  Rng a(2), b(2);
  CHECK(mlp_forward(p, x, 1.0, true, a).output == mlp_forward(p, x, 1.0, false, b).output);
  CHECK(mlp_apply(p, x) == mlp_forward(p, x, 1.0, false, a).output);
}

TEST_CASE("MLP forward matches a loop oracle") {
  Rng rng(3);
  auto p = random_mlp(7, {6, 4}, rng);
  const Md x = random_matrix(5, 7, rng);
  const Md got = mlp_apply(p, x);
  const Md want = oracle_forward(p, x);
  CHECK((got - want).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("MLP backward matches central differences") {
  Rng rng(4);
  auto p = random_mlp(4, {5, 6, 3}, rng);
  const Md x = random_matrix(3, 4, rng);
  const Md upstream = random_matrix(3, 3, rng);
  auto loss = [&](const MlpParams<double>& q, const Md& in) { return mlp_apply(q, in).cwiseProduct(upstream).sum(); };
  auto res = mlp_forward(p, x, 1.0, false, rng);
  auto grads = p.zeros_like();
  const Md dx = mlp_backward(p, res.tape, upstream, grads);
  const double eps = 1e-5;
  double worst = 0;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8}); };
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    for (Md* m : {&p.layers[l].weight, &p.layers[l].bias}) {
      const Md& g = m == &p.layers[l].weight ? grads.layers[l].weight : grads.layers[l].bias;
      for (Eigen::Index i = 0; i < m->size(); ++i) {
        const double saved = m->data()[i];
        m->data()[i] = saved + eps;
        const double up = loss(p, x);
        m->data()[i] = saved - eps;
        const double down = loss(p, x);
        m->data()[i] = saved;
        worst = std::max(worst, rel(g.data()[i], (up - down) / (2 * eps)));
      }
    }
  }
  Md xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double saved = xp.data()[i];
    xp.data()[i] = saved + eps;
    const double up = loss(p, xp);
    xp.data()[i] = saved - eps;
    const double down = loss(p, xp);
    xp.data()[i] = saved;
    worst = std::max(worst, rel(dx.data()[i], (up - down) / (2 * eps)));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("backward edge cases") {
  Rng rng(5);
  auto p = random_mlp(3, {4, 2}, rng);
  const Md x = random_matrix(2, 3, rng);
  auto res = mlp_forward(p, x, 1.0, false, rng);
  auto grads = p.zeros_like();
  const Md dx = mlp_backward(p, res.tape, Md(Md::Zero(2, 2)), grads);
  CHECK(dx.isZero(0));
  for (const auto& l : grads.layers) {
    CHECK(l.weight.isZero(0));
    CHECK(l.bias.isZero(0));
  }
  CHECK_THROWS_AS(mlp_backward(p, res.tape, Md(Md::Zero(2, 2)), grads), NumericsError);

  std::array<std::size_t, 1> w{2};
  auto linear = make_mlp<double>(3, w, Activation::Identity, Activation::Identity, rng);
  auto lres = mlp_forward(linear, x, 1.0, false, rng);
  const Md up = random_matrix(2, 2, rng);
  auto lg = linear.zeros_like();
  mlp_backward(linear, lres.tape, up, lg);
  CHECK(lg.layers[0].weight == Md(x.transpose() * up));
}

TEST_CASE("dropout preserves the expectation") {
  Rng rng(6);
  std::array<std::size_t, 1> w{1};
  auto p = make_mlp<double>(1, w, Activation::Identity, Activation::Identity, rng);
  p.layers[0].weight(0, 0) = 1.0;
  p.layers[0].bias.setZero();
  Md x(10000, 1);
  x.setConstant(3.0);
  const double mean = mlp_forward(p, x, 0.5, true, rng).output.mean();
  CHECK(std::abs(mean - 3.0) < 0.02 * 3.0);
}

TEST_CASE("softmax cross-entropy") {
  Md uniform = Md::Zero(3, 41);
  const std::array<int, 3> labels{0, 17, 40};
  CHECK(std::abs(softmax_xent<double>(uniform, labels).loss - std::log(41.0)) < 1e-12);
  Md peaked = Md::Zero(1, 41);
  const std::array<int, 1> one{5};
  peaked(0, 5) = 50;
  CHECK(softmax_xent<double>(peaked, one).loss < 1e-20);
  const std::array<int, 1> bad{41};
  CHECK_THROWS_AS(softmax_xent<double>(uniform.topRows(1), bad), NumericsError);

  Rng rng(7);
  Md logits = random_matrix(2, 5, rng);
  const std::array<int, 2> l2{3, 1};
  const auto r = softmax_xent<double>(logits, l2);
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    Md a = logits, b = logits;
    a.data()[i] += 1e-5;
    b.data()[i] -= 1e-5;
    const double fd = (softmax_xent<double>(a, l2).loss - softmax_xent<double>(b, l2).loss) / 2e-5;
    CHECK(std::abs(fd - r.grad[static_cast<std::size_t>(i)]) < 1e-8);
  }
}

TEST_CASE("sigmoid cross-entropy") {
  CHECK(std::abs(sigmoid_xent(0.0, 1).first - std::log(2.0)) < 1e-15);
  CHECK(std::abs(sigmoid_xent(0.0, 0).first - std::log(2.0)) < 1e-15);
  CHECK(std::isfinite(sigmoid_xent(1e4, 0).first));
  CHECK(std::abs(sigmoid_xent(-1e4, 1).first - 1e4) < 1e-9);
  CHECK(sigmoid_xent(1e4, 1).first == 0.0);
  for (double z : {-3.0, -0.2, 0.7, 4.0}) {
    for (int y : {0, 1}) {
      const double fd = (sigmoid_xent(z + 1e-6, y).first - sigmoid_xent(z - 1e-6, y).first) / 2e-6;
      CHECK(std::abs(fd - sigmoid_xent(z, y).second) < 1e-8);
    }
  }
}

TEST_CASE("AUCROC loss") {
  const std::vector<double> equal{0.3, 0.3};
  const std::vector<std::uint8_t> pn{1, 0};
  CHECK(std::abs(aucroc_loss<double>(equal, pn, std::vector<int>{0, 1}).loss - std::log(2.0)) < 1e-15);
  CHECK(std::abs(aucroc_loss<double>(equal, pn, std::vector<int>{0, 0}).loss - 2 * std::log(2.0)) < 1e-15);
  CHECK_THROWS_AS(aucroc_loss<double>(equal, std::vector<std::uint8_t>{1, 1}, std::vector<int>{0, 0}),
                  NumericsError);

  Rng rng(8);
  std::normal_distribution<double> n(0.0, 2.0);
  std::vector<double> l(8);
  for (auto& v : l) v = n(rng);
  const std::vector<std::uint8_t> pos{1, 0, 1, 0, 0, 1, 0, 0};
  const std::vector<int> goal{0, 0, 1, 1, 2, 2, 0, 1};
  const auto r = aucroc_loss<double>(l, pos, goal);
  CHECK(std::abs(r.loss - brute_aucroc(l, pos, goal)) < 1e-12);
  CHECK(r.loss >= 0);
  for (std::size_t i = 0; i < l.size(); ++i) {
    auto a = l, b = l;
    a[i] += 1e-6;
    b[i] -= 1e-6;
    CHECK(std::abs((brute_aucroc(a, pos, goal) - brute_aucroc(b, pos, goal)) / 2e-6 - r.grad[i]) < 1e-7);
  }
  auto raised = l;
  raised[2] += 0.5;
  CHECK(aucroc_loss<double>(raised, pos, goal).loss < r.loss);
}

TEST_CASE("Adam on a scalar with a constant gradient") {
  AdamConfig c;
  c.learning_rate = 0.1;
  c.decay_rate = 1.0;
  Md x(1, 1), g(1, 1);
  x(0, 0) = 1.0;
  g(0, 0) = 0.5;
  std::array<Md*, 1> params{&x};
  std::array<const Md*, 1> grads{&g};
  auto state = make_optimizer_state<double>(c, params);
  // Hand-rolled bias-corrected Adam.
  double m = 0, v = 0, want = 1.0;
  for (int t = 1; t <= 3; ++t) {
    REQUIRE(adam_step<double>(state, params, grads));
    m = 0.9 * m + 0.1 * 0.5;
    v = 0.999 * v + 0.001 * 0.25;
    const double mh = m / (1 - std::pow(0.9, t)), vh = v / (1 - std::pow(0.999, t));
    want -= 0.1 * mh / (std::sqrt(vh) + 1e-8);
    CHECK(std::abs(x(0, 0) - want) < 1e-12);
  }
  CHECK(state.step == 3);
}

TEST_CASE("Adam edge cases") {
  AdamConfig c;
  Md x = Md::Constant(2, 2, 1.0), zero = Md::Zero(2, 2);
  std::array<Md*, 1> params{&x};
  std::array<const Md*, 1> grads{&zero};
  auto state = make_optimizer_state<double>(c, params);
  state.shadow[0].setZero();
  adam_step<double>(state, params, grads);
  CHECK(x == Md::Constant(2, 2, 1.0));
  CHECK(state.shadow[0](0, 0) > 0.0);

  c.polyak_rate = 0;
  auto s0 = make_optimizer_state<double>(c, params);
  Md g = Md::Constant(2, 2, 0.3);
  std::array<const Md*, 1> g1{&g};
  adam_step<double>(s0, params, g1);
  CHECK(s0.shadow[0] == x);

  Md bad = zero;
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  std::array<const Md*, 1> gb{&bad};
  const Md before = x;
  CHECK_FALSE(adam_step<double>(s0, params, gb));
  CHECK(x == before);
  CHECK(s0.step == 1);
  CHECK(s0.skipped == 1);

  Md wrong = Md::Zero(3, 2);
  std::array<const Md*, 1> gw{&wrong};
  CHECK_THROWS_AS(adam_step<double>(s0, params, gw), NumericsError);
}

TEST_CASE("learning rate decays per period") {
  AdamConfig c;
  CHECK(effective_learning_rate(c, 0) == doctest::Approx(1e-4));
  CHECK(effective_learning_rate(c, 1000) == doctest::Approx(0.98e-4));
  CHECK(effective_learning_rate(c, 2500) == doctest::Approx(1e-4 * std::pow(0.98, 2.5)));
}

TEST_CASE("checkpoint roundtrip is bit-identical") {
  Rng rng(9);
  Checkpoint<float> ck;
  ck.metadata = {{"k", 1}};
  ck.tensors.emplace_back("a", random_matrix(3, 4, rng).cast<float>());
  ck.tensors.emplace_back("b/c", random_matrix(1, 7, rng).cast<float>());
  const auto path = std::filesystem::temp_directory_path() / "holgraph_ck_test.bin";
  save_checkpoint(path, ck);
  const auto back = load_checkpoint<float>(path);
  CHECK(back.metadata == ck.metadata);
  REQUIRE(back.tensors.size() == 2);
  CHECK(back.tensor("a") == ck.tensors[0].second);
  CHECK(back.tensor("b/c") == ck.tensors[1].second);
  CHECK(checkpoint_identity(back) == checkpoint_identity(ck));
  CHECK(checkpoint_scalar_bytes(path) == 4);
  CHECK_THROWS(load_checkpoint<double>(path));
  std::filesystem::remove(path);
}
