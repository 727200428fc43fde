#include "holgraph/graph.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <utility>

namespace holgraph {

void validate(const RepresentationConfig& config) {
  if (config.direction != Direction::Both && config.sharing != Sharing::Subexpression) {
    throw std::invalid_argument("top-down/bottom-up restriction requires subexpression sharing");
  }
}

TermGraph build_ast(const SExpr& expr) {
  TermGraph graph;
  struct Pending {
    const SExpr* expr;
    std::size_t parent;
    int label;
  };
  constexpr std::size_t kNoParent = static_cast<std::size_t>(-1);
  std::vector<Pending> stack{{&expr, kNoParent, 0}};
  while (!stack.empty()) {
    const Pending item = stack.back();
    stack.pop_back();
    const std::size_t id = graph.nodes.size();
    const SExpr& e = *item.expr;
    if (e.is_atom()) {
      graph.nodes.push_back({id, e.token()});
    } else {
      const auto& children = e.children();
      if (!children.front().is_atom()) throw GraphError("list head is not an atom: " + serialize(e));
      if (children.size() < 2) throw GraphError("list without arguments cannot be represented: " + serialize(e));
      if (children.size() > 3) {
        throw GraphError("list with more than two arguments: " + serialize(e));
      }
      graph.nodes.push_back({id, children.front().token()});
      // Reverse push keeps preorder numbering left to right.
      for (std::size_t i = children.size() - 1; i >= 1; --i) {
        stack.push_back({&children[i], id, static_cast<int>(i - 1)});
      }
    }
    if (item.parent != kNoParent) graph.edges.push_back({item.parent, id, item.label});
  }
  std::stable_sort(graph.edges.begin(), graph.edges.end(), [](const GraphEdge& a, const GraphEdge& b) {
    return std::tie(a.src, a.label) < std::tie(b.src, b.label);
  });
  graph.root = 0;
  graph.kind = GraphKind::Tree;
  return graph;
}

std::vector<std::vector<std::size_t>> structural_children(const TermGraph& graph) {
  std::vector<std::vector<std::pair<int, std::size_t>>> labeled(graph.nodes.size());
  for (const GraphEdge& e : graph.edges) {
    if (e.structural()) labeled.at(e.src).push_back({e.label, e.dst});
  }
  std::vector<std::vector<std::size_t>> children(graph.nodes.size());
  for (std::size_t v = 0; v < labeled.size(); ++v) {
    std::stable_sort(labeled[v].begin(), labeled[v].end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [label, child] : labeled[v]) children[v].push_back(child);
  }
  return children;
}

std::vector<std::size_t> topological_order(const TermGraph& graph) {
  const std::size_t n = graph.nodes.size();
  std::vector<std::size_t> indegree(n, 0);
  for (const GraphEdge& e : graph.edges) {
    if (e.structural()) ++indegree.at(e.dst);
  }
  const auto children = structural_children(graph);
  std::vector<std::size_t> ready;
  for (std::size_t v = n; v-- > 0;) {
    if (indegree[v] == 0) ready.push_back(v);
  }
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    const std::size_t v = ready.back();
    ready.pop_back();
    order.push_back(v);
    for (std::size_t c : children[v]) {
      if (--indegree[c] == 0) ready.push_back(c);
    }
  }
  if (order.size() != n) throw GraphError("graph has a structural cycle");
  return order;
}

namespace {

void require_no_random_edges(const TermGraph& graph, const char* what) {
  for (const GraphEdge& e : graph.edges) {
    if (!e.structural()) throw GraphError(std::string(what) + " must be applied before random edges are added");
  }
}

// Builds the quotient graph for a node partition. Classes are numbered by
// first preorder visit from the root; each class takes the outgoing structural
// edges of its first visited member.
TermGraph quotient(const TermGraph& graph, const std::vector<std::size_t>& cls, std::size_t class_count,
                   GraphKind kind) {
  const auto children = structural_children(graph);
  const std::size_t unset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> new_id(class_count, unset);
  std::vector<std::size_t> representative;
  std::vector<bool> visited(graph.nodes.size(), false);

  auto visit_from = [&](std::size_t start) {
    std::vector<std::size_t> stack{start};
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      if (visited[v]) continue;
      visited[v] = true;
      if (new_id[cls[v]] == unset) {
        new_id[cls[v]] = representative.size();
        representative.push_back(v);
      }
      for (auto it = children[v].rbegin(); it != children[v].rend(); ++it) {
        if (!visited[*it]) stack.push_back(*it);
      }
    }
  };
  if (!graph.nodes.empty()) visit_from(graph.root);
  for (std::size_t v = 0; v < graph.nodes.size(); ++v) {
    if (!visited[v]) visit_from(v);
  }

  std::vector<std::vector<std::pair<int, std::size_t>>> labeled(graph.nodes.size());
  for (const GraphEdge& e : graph.edges) labeled[e.src].push_back({e.label, e.dst});

  TermGraph out;
  out.kind = kind;
  out.direction = graph.direction;
  out.root = graph.nodes.empty() ? 0 : new_id[cls[graph.root]];
  for (std::size_t c = 0; c < representative.size(); ++c) {
    const std::size_t rep = representative[c];
    out.nodes.push_back({c, graph.nodes[rep].token});
    auto edges = labeled[rep];
    std::stable_sort(edges.begin(), edges.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [label, dst] : edges) out.edges.push_back({c, new_id[cls[dst]], label});
  }
  return out;
}

}  // namespace

TermGraph share_subexpressions(const TermGraph& graph) {
  require_no_random_edges(graph, "subexpression sharing");
  const auto children = structural_children(graph);
  std::vector<std::vector<std::pair<int, std::size_t>>> labeled(graph.nodes.size());
  for (const GraphEdge& e : graph.edges) labeled[e.src].push_back({e.label, e.dst});
  for (auto& l : labeled) std::stable_sort(l.begin(), l.end());

  const auto order = topological_order(graph);
  using Key = std::pair<std::string, std::vector<std::pair<int, std::size_t>>>;
  std::map<Key, std::size_t> classes;
  std::vector<std::size_t> cls(graph.nodes.size(), 0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::size_t v = *it;
    Key key{graph.nodes[v].token, {}};
    for (const auto& [label, child] : labeled[v]) key.second.push_back({label, cls[child]});
    auto [pos, inserted] = classes.emplace(std::move(key), classes.size());
    cls[v] = pos->second;
  }
  return quotient(graph, cls, classes.size(), GraphKind::SubexprShared);
}

TermGraph share_leaves(const TermGraph& graph) {
  require_no_random_edges(graph, "leaf sharing");
  const auto children = structural_children(graph);
  std::map<std::string, std::size_t> leaf_class;
  std::vector<std::size_t> cls(graph.nodes.size());
  std::size_t next = 0;
  for (std::size_t v = 0; v < graph.nodes.size(); ++v) {
    if (children[v].empty()) {
      auto [pos, inserted] = leaf_class.emplace(graph.nodes[v].token, next);
      if (inserted) ++next;
      cls[v] = pos->second;
    } else {
      cls[v] = next++;
    }
  }
  const GraphKind kind = graph.kind == GraphKind::SubexprShared ? GraphKind::SubexprShared : GraphKind::LeafShared;
  return quotient(graph, cls, next, kind);
}

TermGraph blind_variables(const TermGraph& graph) {
  TermGraph out = graph;
  for (const GraphEdge& e : graph.edges) {
    if (e.label == kRightChildLabel && graph.nodes[e.src].token == "v") out.nodes[e.dst].token = "x";
  }
  return out;
}

TermGraph add_random_edges(const TermGraph& graph, std::uint64_t seed, int edges_per_node) {
  TermGraph out = graph;
  const std::size_t n = graph.nodes.size();
  if (n == 0 || edges_per_node <= 0) return out;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> target(0, n - 1);
  for (std::size_t v = 0; v < n; ++v) {
    for (int k = 0; k < edges_per_node; ++k) out.edges.push_back({v, target(rng), kRandomEdgeLabel});
  }
  return out;
}

TermGraph restrict_direction(const TermGraph& graph, Direction direction) {
  if (direction != Direction::Both && graph.kind != GraphKind::SubexprShared) {
    throw GraphError("direction restriction requires a subexpression-shared graph");
  }
  topological_order(graph);  // throws on a cycle
  TermGraph out = graph;
  out.direction = direction;
  return out;
}

namespace {

SExpr expand(const TermGraph& graph, const std::vector<std::vector<std::size_t>>& children, std::size_t v) {
  if (children[v].empty()) return SExpr::atom(graph.nodes[v].token);
  std::vector<SExpr> items;
  items.reserve(children[v].size() + 1);
  items.push_back(SExpr::atom(graph.nodes[v].token));
  for (std::size_t c : children[v]) items.push_back(expand(graph, children, c));
  return SExpr::node(std::move(items));
}

}  // namespace

SExpr unparse(const TermGraph& graph) {
  if (graph.nodes.empty()) throw GraphError("cannot unparse an empty graph");
  std::vector<std::vector<int>> labels(graph.nodes.size());
  for (const GraphEdge& e : graph.edges) {
    if (e.structural()) labels.at(e.src).push_back(e.label);
  }
  for (std::size_t v = 0; v < labels.size(); ++v) {
    auto& l = labels[v];
    std::sort(l.begin(), l.end());
    for (std::size_t i = 0; i < l.size(); ++i) {
      if (i > 0 && l[i] == l[i - 1]) {
        throw GraphError("duplicate child label " + std::to_string(l[i]) + " on node " + std::to_string(v));
      }
      if (l[i] != static_cast<int>(i)) {
        throw GraphError("missing child label " + std::to_string(i) + " on node " + std::to_string(v));
      }
    }
  }
  topological_order(graph);
  return expand(graph, structural_children(graph), graph.root);
}

GraphStats stats(const TermGraph& graph) {
  GraphStats s;
  s.node_count = graph.nodes.size();
  s.edge_count = graph.edges.size();
  if (graph.nodes.empty()) return s;
  const auto order = topological_order(graph);
  const auto children = structural_children(graph);
  constexpr std::size_t unreached = static_cast<std::size_t>(-1);
  std::vector<std::size_t> depth(graph.nodes.size(), unreached);
  depth[graph.root] = 0;
  for (std::size_t v : order) {
    if (depth[v] == unreached) continue;
    s.depth = std::max(s.depth, depth[v]);
    for (std::size_t c : children[v]) {
      if (depth[c] == unreached || depth[c] < depth[v] + 1) depth[c] = depth[v] + 1;
    }
  }
  return s;
}

TermGraph make_graph(const SExpr& expr, const RepresentationConfig& config) {
  validate(config);
  TermGraph graph = build_ast(expr);
  switch (config.sharing) {
    case Sharing::None:
      break;
    case Sharing::Leaf:
      graph = share_leaves(graph);
      break;
    case Sharing::Subexpression:
      graph = share_subexpressions(graph);
      break;
  }
  if (config.variable_blinding) graph = blind_variables(graph);
  if (config.direction != Direction::Both) graph = restrict_direction(graph, config.direction);
  if (config.random_edges) graph = add_random_edges(graph, config.random_seed);
  return graph;
}

std::string to_string(GraphKind kind) {
  switch (kind) {
    case GraphKind::Tree:
      return "tree";
    case GraphKind::LeafShared:
      return "leaf_shared";
    case GraphKind::SubexprShared:
      return "subexpr_shared";
  }
  return "?";
}

std::string to_string(Direction direction) {
  switch (direction) {
    case Direction::Both:
      return "both";
    case Direction::TopDown:
      return "topdown";
    case Direction::BottomUp:
      return "bottomup";
  }
  return "?";
}

std::string to_string(Sharing sharing) {
  switch (sharing) {
    case Sharing::None:
      return "ast";
    case Sharing::Leaf:
      return "leaf";
    case Sharing::Subexpression:
      return "subexpr";
  }
  return "?";
}

GraphKind parse_graph_kind(std::string_view text) {
  if (text == "tree") return GraphKind::Tree;
  if (text == "leaf_shared") return GraphKind::LeafShared;
  if (text == "subexpr_shared") return GraphKind::SubexprShared;
  throw std::invalid_argument("unknown graph kind: " + std::string(text));
}

Direction parse_direction(std::string_view text) {
  if (text == "both") return Direction::Both;
  if (text == "topdown") return Direction::TopDown;
  if (text == "bottomup") return Direction::BottomUp;
  throw std::invalid_argument("unknown direction: " + std::string(text));
}

Sharing parse_sharing(std::string_view text) {
  if (text == "ast" || text == "none") return Sharing::None;
  if (text == "leaf") return Sharing::Leaf;
  if (text == "subexpr" || text == "subexpression") return Sharing::Subexpression;
  throw std::invalid_argument("unknown representation: " + std::string(text));
}

void write_graph(std::ostream& out, const TermGraph& graph) {
  out << "nodes " << graph.nodes.size() << " edges " << graph.edges.size() << " root " << graph.root << " kind "
      << to_string(graph.kind) << " direction " << to_string(graph.direction) << '\n';
  for (const GraphNode& n : graph.nodes) out << "node " << n.id << ' ' << n.token << '\n';
  for (const GraphEdge& e : graph.edges) out << "edge " << e.src << ' ' << e.dst << ' ' << e.label << '\n';
}

std::string format_graph(const TermGraph& graph) {
  std::ostringstream out;
  write_graph(out, graph);
  return out.str();
}

TermGraph read_graph(std::istream& in) {
  auto expect = [](std::istream& s, const char* word) {
    std::string got;
    if (!(s >> got) || got != word) throw GraphError(std::string("graph format: expected '") + word + "'");
  };
  TermGraph graph;
  std::size_t n = 0, m = 0;
  std::string kind, direction;
  expect(in, "nodes");
  in >> n;
  expect(in, "edges");
  in >> m;
  expect(in, "root");
  in >> graph.root;
  expect(in, "kind");
  in >> kind;
  expect(in, "direction");
  in >> direction;
  if (!in) throw GraphError("graph format: malformed header");
  graph.kind = parse_graph_kind(kind);
  graph.direction = parse_direction(direction);
  for (std::size_t i = 0; i < n; ++i) {
    GraphNode node;
    expect(in, "node");
    if (!(in >> node.id >> node.token) || node.id != i) throw GraphError("graph format: bad node line " + std::to_string(i));
    graph.nodes.push_back(std::move(node));
  }
  for (std::size_t i = 0; i < m; ++i) {
    GraphEdge edge;
    expect(in, "edge");
    if (!(in >> edge.src >> edge.dst >> edge.label) || edge.src >= n || edge.dst >= n || edge.label < 0 ||
        edge.label >= kEdgeLabelCount) {
      throw GraphError("graph format: bad edge line " + std::to_string(i));
    }
    graph.edges.push_back(edge);
  }
  if (n > 0 && graph.root >= n) throw GraphError("graph format: root out of range");
  return graph;
}

}  // namespace holgraph
