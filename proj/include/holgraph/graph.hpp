#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "holgraph/sexpr.hpp"

namespace holgraph {

enum class GraphKind { Tree, LeafShared, SubexprShared };
enum class Direction { Both, TopDown, BottomUp };
enum class Sharing { None, Leaf, Subexpression };

// Structural edges carry the child index; random edges use their own label.
inline constexpr int kLeftChildLabel = 0;
inline constexpr int kRightChildLabel = 1;
inline constexpr int kRandomEdgeLabel = 2;
inline constexpr int kEdgeLabelCount = 3;

struct GraphNode {
  std::size_t id = 0;
  std::string token;

  friend bool operator==(const GraphNode&, const GraphNode&) = default;
};

struct GraphEdge {
  std::size_t src = 0;
  std::size_t dst = 0;
  int label = 0;

  bool structural() const { return label != kRandomEdgeLabel; }
  friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

/// Labeled directed multigraph of a HOL term. Node ids are dense indices into
/// `nodes`; structural edges point from parent to child.
struct TermGraph {
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;
  std::size_t root = 0;
  GraphKind kind = GraphKind::Tree;
  Direction direction = Direction::Both;

  std::size_t node_count() const { return nodes.size(); }
  std::size_t edge_count() const { return edges.size(); }

  friend bool operator==(const TermGraph&, const TermGraph&) = default;
};

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GraphStats {
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  std::size_t depth = 0;
};

struct RepresentationConfig {
  Sharing sharing = Sharing::Subexpression;
  bool variable_blinding = false;
  bool random_edges = false;
  Direction direction = Direction::Both;
  std::uint64_t random_seed = 0;
};

/// Throws std::invalid_argument when a direction restriction is requested
/// without subexpression sharing.
void validate(const RepresentationConfig& config);

/// One graph node per S-expression list or atom; a list node takes its head
/// token and has edges to its (at most two) arguments labeled 0 and 1.
TermGraph build_ast(const SExpr& expr);

/// Hash-conses nodes bottom-up on (token, ordered child ids).
TermGraph share_subexpressions(const TermGraph& graph);

/// Merges childless nodes carrying the same token.
TermGraph share_leaves(const TermGraph& graph);

/// Renames the name child (label 1) of every `v` node to `x`.
TermGraph blind_variables(const TermGraph& graph);

TermGraph add_random_edges(const TermGraph& graph, std::uint64_t seed, int edges_per_node = 3);

/// Marks which structural message flow the GNN may use. Requires a
/// subexpression-shared (acyclic) graph.
TermGraph restrict_direction(const TermGraph& graph, Direction direction);

/// Expands the structural edges back into an S-expression. Shared nodes are
/// duplicated, so this also inverts the sharing transforms.
SExpr unparse(const TermGraph& graph);

GraphStats stats(const TermGraph& graph);

/// build_ast followed by the transforms selected in `config`, in the order
/// sharing, blinding, direction, random edges.
TermGraph make_graph(const SExpr& expr, const RepresentationConfig& config);

/// Children of each node via structural edges, ordered by label.
std::vector<std::vector<std::size_t>> structural_children(const TermGraph& graph);

/// Node ids in an order where every node precedes its structural children.
/// Throws GraphError on a cycle.
std::vector<std::size_t> topological_order(const TermGraph& graph);

std::string to_string(GraphKind kind);
std::string to_string(Direction direction);
std::string to_string(Sharing sharing);
GraphKind parse_graph_kind(std::string_view text);
Direction parse_direction(std::string_view text);
Sharing parse_sharing(std::string_view text);

/// Line-oriented interchange format:
///   nodes <n> edges <m> root <id> kind <k> direction <d>
///   node <id> <token>     (n lines)
///   edge <src> <dst> <label>   (m lines)
void write_graph(std::ostream& out, const TermGraph& graph);
std::string format_graph(const TermGraph& graph);
TermGraph read_graph(std::istream& in);

}  // namespace holgraph
