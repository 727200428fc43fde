#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "fixtures.hpp"
#include "gnn_oracle.hpp"
#include "holgraph/gnn.hpp"
#include "holgraph/graph.hpp"
#include "holgraph/sexpr.hpp"
#include "random_terms.hpp"

using namespace holgraph;

namespace {

GnnConfig small_config(int hops, std::size_t width = 3) {
  GnnConfig c;
  c.hops = hops;
  c.token_dim = width;
  c.node_dim = width;
  c.hidden_dim = width + 1;
  c.pool_widths = {4, 5};
  return c;
}

GnnParams<double> deterministic_params(const GnnConfig& config, std::size_t vocab) {
  Rng rng(3);
  auto p = make_gnn_params<double>(config, vocab, rng);
  gnn_oracle::fill_deterministic(p);
  return p;
}

// Path t0 -> t1 -> ... each edge labeled 0.
TermGraph chain(const std::vector<std::string>& tokens) {
  TermGraph g;
  for (std::size_t i = 0; i < tokens.size(); ++i) g.nodes.push_back({i, tokens[i]});
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) g.edges.push_back({i, i + 1, kLeftChildLabel});
  return g;
}

Vocabulary vocab_of(std::initializer_list<const char*> tokens) {
  Vocabulary v;
  for (const char* t : tokens) v.add(t);
  return v;
}

double max_diff(const Matrix<double>& a, const std::vector<gnn_oracle::Vec>& b) {
  double worst = 0;
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      worst = std::max(worst, std::abs(a(r, c) - b[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]));
  return worst;
}

// Same parameters with the message rounds dropped.
GnnParams<double> without_rounds(GnnParams<double> p) {
  p.rounds.clear();
  return p;
}

Matrix<double> run(const TermGraph& g, const Vocabulary& v, const GnnParams<double>& p, const GnnConfig& c) {
  Rng rng(0);
  return encode<double>(g, v, p, c, false, rng);
}

}  // namespace

TEST_CASE("two-node two-round trace matches the scalar equations") {
  const auto config = small_config(2, 2);
  const auto vocab = vocab_of({"p", "q"});
  const auto params = deterministic_params(config, vocab.size());
  const TermGraph g = chain({"p", "q"});

  const auto got = run(g, vocab, params, config);
  const auto want = gnn_oracle::encode(g, vocab, params, config);
  REQUIRE(got.rows() == 2);
  REQUIRE(got.cols() == 2);
  CHECK(max_diff(got, want) < 1e-12);
  // Both nodes moved away from their initial projection.
  const auto init = run(g, vocab, without_rounds(params), small_config(0, 2));
  CHECK((got - init).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("batched encoder agrees with the oracle on random representations") {
  random_terms::Generator gen(5);
  const auto vocab = [] {
    Vocabulary v;
    for (const char* t : {"a", "v", "c", "l", "fun", "A", "B", "bool", "N", "x", "y", "z", "f", "=", "!", "T"}) v.add(t);
    return v;
  }();
  for (int hops : {0, 1, 3}) {
    const auto config = small_config(hops);
    const auto params = deterministic_params(config, vocab.size());
    for (int i = 0; i < 40; ++i) {
      RepresentationConfig rc;
      rc.sharing = static_cast<Sharing>(i % 3);
      rc.random_edges = i % 4 == 0;
      rc.random_seed = static_cast<std::uint64_t>(i);
      if (rc.sharing == Sharing::Subexpression && i % 2 == 1) rc.direction = i % 4 == 1 ? Direction::TopDown : Direction::BottomUp;
      const TermGraph g = make_graph(gen.any(4), rc);
      CAPTURE(hops);
      CAPTURE(i);
      CHECK(max_diff(run(g, vocab, params, config), gnn_oracle::encode(g, vocab, params, config)) < 1e-10);
    }
  }
}

TEST_CASE("zero rounds ignore edges entirely") {
  const auto config = small_config(0);
  const auto vocab = vocab_of({"a", "b", "c"});
  const auto params = deterministic_params(config, vocab.size());
  TermGraph g = chain({"a", "b", "c", "a"});
  TermGraph bare = g;
  bare.edges.clear();
  CHECK(run(g, vocab, params, config) == run(bare, vocab, params, config));
}

TEST_CASE("graph embedding is invariant under node relabeling") {
  random_terms::Generator gen(9);
  Vocabulary vocab;
  for (const char* t : {"a", "v", "c", "l", "fun", "A", "B", "bool", "x", "y", "f", "=", "g"}) vocab.add(t);
  const auto config = small_config(2);
  const auto params = deterministic_params(config, vocab.size());
  Rng shuffle(17);
  for (int i = 0; i < 20; ++i) {
    const TermGraph g = make_graph(gen.any(4), {});
    std::vector<std::size_t> perm(g.node_count());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), shuffle);
    TermGraph h = g;
    for (std::size_t v = 0; v < g.node_count(); ++v) h.nodes[perm[v]] = {perm[v], g.nodes[v].token};
    for (auto& e : h.edges) e = {perm[e.src], perm[e.dst], e.label};
    std::reverse(h.edges.begin(), h.edges.end());
    h.root = perm[g.root];

    const auto a = run(g, vocab, params, config);
    const auto b = run(h, vocab, params, config);
    for (std::size_t v = 0; v < g.node_count(); ++v)
      CHECK((a.row(static_cast<Eigen::Index>(v)) - b.row(static_cast<Eigen::Index>(perm[v]))).cwiseAbs().maxCoeff() <
            1e-12);
    Rng r1(0), r2(0);
    const auto pa = pool<double>(a, params, config, false, r1);
    const auto pb = pool<double>(b, params, config, false, r2);
    CHECK((pa - pb).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("information travels one edge per round") {
  const auto vocab = vocab_of({"a", "b"});
  for (int hops = 0; hops <= 4; ++hops) {
    const auto config = small_config(hops);
    const auto params = deterministic_params(config, vocab.size());
    const std::size_t length = static_cast<std::size_t>(hops) + 3;
    const std::vector<std::string> base(length, "a");
    const auto reference = run(chain(base), vocab, params, config).row(0).eval();
    for (std::size_t d = 1; d < length; ++d) {
      auto tokens = base;
      tokens[d] = "b";
      const auto perturbed = run(chain(tokens), vocab, params, config).row(0).eval();
      CAPTURE(hops);
      CAPTURE(d);
      if (d > static_cast<std::size_t>(hops)) {
        CHECK(perturbed == reference);
      } else {
        CHECK((perturbed - reference).cwiseAbs().maxCoeff() > 1e-9);
      }
    }
  }
}

TEST_CASE("direction restriction blocks the opposite flow") {
  const auto vocab = vocab_of({"a", "b"});
  const auto config = small_config(3);
  const auto params = deterministic_params(config, vocab.size());
  auto with = [&](Direction d, std::vector<std::string> tokens) {
    TermGraph g = chain(tokens);
    g.kind = GraphKind::SubexprShared;
    g.direction = d;
    return run(g, vocab, params, config);
  };
  const std::vector<std::string> base{"a", "a", "a"};
  const std::vector<std::string> leaf{"a", "a", "b"};
  const std::vector<std::string> root{"b", "a", "a"};

  // Top-down: the root never hears about its descendants.
  CHECK(with(Direction::TopDown, base).row(0) == with(Direction::TopDown, leaf).row(0));
  CHECK((with(Direction::TopDown, base).row(2) - with(Direction::TopDown, root).row(2)).cwiseAbs().maxCoeff() > 1e-9);
  // Bottom-up: the mirror image.
  CHECK(with(Direction::BottomUp, base).row(2) == with(Direction::BottomUp, root).row(2));
  CHECK((with(Direction::BottomUp, base).row(0) - with(Direction::BottomUp, leaf).row(0)).cwiseAbs().maxCoeff() > 1e-9);
  // Both: each end sees the other.
  CHECK((with(Direction::Both, base).row(0) - with(Direction::Both, leaf).row(0)).cwiseAbs().maxCoeff() > 1e-9);
}

TEST_CASE("a zero update keeps the initial projection") {
  const auto vocab = vocab_of({"a", "b"});
  const auto config = small_config(3);
  auto params = deterministic_params(config, vocab.size());
  for (auto& round : params.rounds) {
    round.aggregate.layers.back().weight.setZero();
    round.aggregate.layers.back().bias.setZero();
  }
  const TermGraph g = chain({"a", "b", "a"});
  CHECK(run(g, vocab, params, config) == run(g, vocab, without_rounds(params), small_config(0)));
}

TEST_CASE("pooling takes the coordinatewise maximum of projected nodes") {
  const auto vocab = vocab_of({"a", "b", "c"});
  const auto config = small_config(1);
  const auto params = deterministic_params(config, vocab.size());
  const auto nodes = run(chain({"a", "b", "c"}), vocab, params, config);
  Rng rng(0);
  const auto pooled = pool<double>(nodes, params, config, false, rng);
  REQUIRE(pooled.rows() == 1);
  REQUIRE(static_cast<std::size_t>(pooled.cols()) == config.embedding_dim());
  const auto projected = mlp_apply(params.pool_mlp, nodes);
  CHECK(pooled == projected.colwise().maxCoeff());

  // Duplicated rows do not change a maximum.
  Matrix<double> doubled(nodes.rows() * 2, nodes.cols());
  doubled << nodes, nodes;
  CHECK(pool<double>(doubled, params, config, false, rng) == pooled);

  // A single node pools to its own projection.
  CHECK(pool<double>(nodes.topRows(1), params, config, false, rng) == projected.topRows(1));
}

TEST_CASE("disjoint-union batch reproduces per-graph embeddings") {
  random_terms::Generator gen(21);
  Vocabulary vocab;
  for (const char* t : {"a", "v", "c", "l", "fun", "A", "B", "x", "y", "f"}) vocab.add(t);
  const auto config = small_config(2);
  const auto params = deterministic_params(config, vocab.size());
  std::vector<TermGraph> graphs;
  for (int i = 0; i < 5; ++i) graphs.push_back(make_graph(gen.any(4), {}));
  std::vector<const TermGraph*> ptrs;
  for (const auto& g : graphs) ptrs.push_back(&g);
  const auto batch = make_graph_batch(ptrs, vocab);
  Rng rng(0);
  const auto out = gnn_forward<double>(params, config, batch, false, rng, nullptr);
  REQUIRE(out.pooled.rows() == 5);
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const auto single = pool<double>(run(graphs[i], vocab, params, config), params, config, false, rng);
    CHECK((out.pooled.row(static_cast<Eigen::Index>(i)) - single).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("unknown tokens map to the reserved row") {
  const auto vocab = vocab_of({"a"});
  const auto config = small_config(1);
  const auto params = deterministic_params(config, vocab.size());
  CHECK(run(chain({"a", "zzz"}), vocab, params, config) ==
        run(chain({"a", std::string(Vocabulary::kUnknown)}), vocab, params, config));
}
