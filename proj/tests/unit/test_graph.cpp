#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "holgraph/graph.hpp"
#include "random_terms.hpp"

using namespace holgraph;

namespace {

TermGraph ast(const std::string& text) { return build_ast(parse(text)); }

std::vector<int> labels(const TermGraph& g) {
  std::vector<int> out;
  for (const auto& e : g.edges) out.push_back(e.label);
  return out;
}

// Longest root path by enumerating every path, independent of stats().
std::size_t brute_force_depth(const TermGraph& g, std::size_t v) {
  std::size_t best = 0;
  for (const auto& e : g.edges) {
    if (e.src == v && e.structural()) best = std::max(best, 1 + brute_force_depth(g, e.dst));
  }
  return best;
}

// Canonical string of the structure reachable from the root, ignoring ids.
std::string canonical(const TermGraph& g) {
  std::map<std::size_t, std::size_t> ids;
  std::ostringstream out;
  const auto order = topological_order(g);
  const auto children = structural_children(g);
  for (std::size_t v : order) ids.emplace(v, ids.size());
  for (std::size_t v : order) {
    out << ids[v] << ':' << g.nodes[v].token;
    for (std::size_t c : children[v]) out << ' ' << ids[c];
    out << ';';
  }
  return out.str();
}

}  // namespace

TEST_CASE("AST node counts") {
  const TermGraph v = ast("(v A x)");
  CHECK(v.node_count() == 3);
  CHECK(labels(v) == std::vector<int>{0, 1});
  CHECK(ast("(a (v (fun A B) f) (v A x))").node_count() == 9);
  CHECK(ast(fixtures::kForallRefl).node_count() == 27);
  CHECK(ast(fixtures::kForallRefl).kind == GraphKind::Tree);
}

TEST_CASE("AST arity rules") {
  CHECK_THROWS_AS(ast("(a x y z)"), GraphError);
  CHECK_THROWS_AS(ast("((a) x)"), GraphError);
  CHECK_THROWS_AS(ast("(foo)"), GraphError);
  CHECK(ast("x").node_count() == 1);
}

TEST_CASE("subexpression sharing") {
  CHECK(share_subexpressions(ast(fixtures::kForallRefl)).node_count() == 15);
  CHECK(share_subexpressions(ast("(a (v (fun A B) f) (v A x))")).node_count() == 8);
  CHECK(share_subexpressions(ast("(a (v B f) (c C g))")).node_count() == 7);
  const TermGraph shared = share_subexpressions(ast(fixtures::kForallRefl));
  CHECK(shared.kind == GraphKind::SubexprShared);
  CHECK(unparse(shared) == parse(fixtures::kForallRefl));
}

TEST_CASE("leaf sharing") {
  const TermGraph g = share_leaves(ast("(a (a x y) (a x y))"));
  CHECK(g.node_count() == 5);  // three a nodes, one x, one y
  CHECK(g.kind == GraphKind::LeafShared);
  CHECK(share_leaves(ast("(a (v B f) (c C g))")).node_count() == 7);
  const std::size_t n = share_leaves(ast(fixtures::kForallRefl)).node_count();
  CHECK(n > 15);
  CHECK(n < 27);
  CHECK(n == 18);
}

TEST_CASE("variable blinding renames names only") {
  const TermGraph g = blind_variables(ast("(v A foo)"));
  REQUIRE(g.node_count() == 3);
  CHECK(g.nodes[0].token == "v");
  CHECK(g.nodes[1].token == "A");
  CHECK(g.nodes[2].token == "x");
  const TermGraph plain = ast("(a (c (fun A A) f) (c A g))");
  CHECK(blind_variables(plain) == plain);
  const std::string y =
      "(a (c (fun (fun A bool) bool) !) (l (v A y) (a (a (c (fun A (fun A bool)) =) (v A y)) (v A y))))";
  const TermGraph bx = blind_variables(share_subexpressions(ast(fixtures::kForallRefl)));
  const TermGraph by = blind_variables(share_subexpressions(ast(y)));
  CHECK(canonical(bx) == canonical(by));
  const TermGraph two = blind_variables(ast("(a (v A p) (v A q))"));
  CHECK(two.node_count() == 7);
}

TEST_CASE("blinding before leaf sharing merges the renamed leaves") {
  const TermGraph tree = ast("(a (v A f) (v A g))");
  CHECK(blind_variables(share_leaves(tree)).node_count() == 6);
  CHECK(share_leaves(blind_variables(tree)).node_count() == 5);
  CHECK(blind_variables(share_leaves(ast("(a (v A f) (v A f))"))).node_count() ==
        share_leaves(blind_variables(ast("(a (v A f) (v A f))"))).node_count());
}

TEST_CASE("random edges") {
  const TermGraph g = share_subexpressions(ast(fixtures::kForallRefl));
  const TermGraph r = add_random_edges(g, 5);
  CHECK(r.edge_count() == g.edge_count() + 3 * g.node_count());
  CHECK(add_random_edges(g, 5) == r);
  std::size_t random = 0;
  for (const auto& e : r.edges) random += e.label == kRandomEdgeLabel ? 1 : 0;
  CHECK(random == 3 * g.node_count());
  random_terms::Generator gen(4);
  SExpr big = gen.term(6);
  while (build_ast(big).node_count() < 20) big = gen.term(6);
  const TermGraph t = build_ast(big);
  CHECK(add_random_edges(t, 1).edges != add_random_edges(t, 2).edges);
}

TEST_CASE("direction restriction") {
  const TermGraph shared = share_subexpressions(ast(fixtures::kForallRefl));
  CHECK(restrict_direction(shared, Direction::TopDown).direction == Direction::TopDown);
  CHECK(restrict_direction(shared, Direction::TopDown).edges == shared.edges);
  CHECK(restrict_direction(shared, Direction::Both) == shared);
  CHECK_THROWS_AS(restrict_direction(ast(fixtures::kForallRefl), Direction::TopDown), GraphError);
  RepresentationConfig c;
  c.sharing = Sharing::Leaf;
  c.direction = Direction::BottomUp;
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
}

TEST_CASE("unparse") {
  CHECK(unparse(ast("x")) == parse("x"));
  TermGraph broken = ast("(v A x)");
  broken.edges[1].label = 0;
  CHECK_THROWS_AS(unparse(broken), GraphError);
  broken.edges[1].label = 1;
  broken.edges[0].label = 1;
  CHECK_THROWS_AS(unparse(broken), GraphError);
}

TEST_CASE("stats") {
  const GraphStats single = stats(ast("x"));
  CHECK(single.node_count == 1);
  CHECK(single.edge_count == 0);
  CHECK(single.depth == 0);
  const TermGraph tree = ast(fixtures::kForallRefl);
  const TermGraph dag = share_subexpressions(tree);
  CHECK(stats(tree).node_count == 27);
  CHECK(stats(dag).node_count == 15);
  CHECK(stats(dag).depth == brute_force_depth(dag, dag.root));
  CHECK(stats(dag).depth == 7);
  CHECK(stats(tree).depth == brute_force_depth(tree, tree.root));
}

TEST_CASE("representation properties on random terms") {
  random_terms::Generator gen(2);
  for (int i = 0; i < 300; ++i) {
    const SExpr e = gen.any(6);
    const TermGraph tree = build_ast(e);
    REQUIRE(unparse(tree) == e);
    const TermGraph shared = share_subexpressions(tree);
    const TermGraph leaf = share_leaves(tree);
    REQUIRE(share_subexpressions(shared) == shared);
    REQUIRE(shared.node_count() <= leaf.node_count());
    REQUIRE(leaf.node_count() <= tree.node_count());
    REQUIRE(unparse(shared) == e);
    REQUIRE(unparse(leaf) == e);
    REQUIRE(stats(shared).depth == brute_force_depth(shared, shared.root));
    REQUIRE(stats(shared).depth < shared.node_count());
    // No two nodes share token and ordered children.
    std::set<std::pair<std::string, std::vector<std::size_t>>> keys;
    const auto children = structural_children(shared);
    for (std::size_t v = 0; v < shared.node_count(); ++v) {
      REQUIRE(keys.insert({shared.nodes[v].token, children[v]}).second);
    }
    // Blinding first can only create extra leaf or subexpression merges.
    REQUIRE(share_leaves(blind_variables(tree)).node_count() <= blind_variables(leaf).node_count());
    REQUIRE(share_subexpressions(blind_variables(tree)).node_count() <= shared.node_count());
  }
}

TEST_CASE("interchange format roundtrip") {
  RepresentationConfig c;
  c.random_edges = true;
  c.random_seed = 9;
  const TermGraph g = make_graph(parse(fixtures::kForallRefl), c);
  std::istringstream in(format_graph(g));
  CHECK(read_graph(in) == g);
  CHECK(format_graph(g).rfind("nodes 15 edges 65 root", 0) == 0);
}
