#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "holgraph/graph.hpp"
#include "holgraph/numerics.hpp"

namespace holgraph {

/// Token -> row index of the embedding table. Id 0 is the out-of-vocabulary
/// token.
class Vocabulary {
 public:
  static constexpr std::string_view kUnknown = "<unk>";

  Vocabulary();
  /// `tokens[0]` must be kUnknown.
  explicit Vocabulary(std::vector<std::string> tokens);

  std::size_t add(std::string_view token);
  std::size_t id(std::string_view token) const;
  bool contains(std::string_view token) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, std::size_t, std::less<>> ids_;
};

struct GnnConfig {
  /// Message-passing rounds. 0 leaves the token projection only.
  int hops = 2;
  std::size_t token_dim = 128;
  std::size_t node_dim = 128;
  std::size_t hidden_dim = 256;
  std::vector<std::size_t> pool_widths{512, 1024};
  double mlp_keep = 0.5;
  double pool_keep = 0.5;

  std::size_t embedding_dim() const { return pool_widths.empty() ? node_dim : pool_widths.back(); }
};

template <typename T>
struct GnnRound {
  MlpParams<T> parent_message;  // messages a node receives from its parents
  MlpParams<T> child_message;   // messages a node receives from its children
  MlpParams<T> aggregate;
};

template <typename T>
struct GnnParams {
  Matrix<T> token_embeddings;  // vocabulary x token_dim
  MlpParams<T> node_mlp;
  MlpParams<T> edge_mlp;
  std::vector<GnnRound<T>> rounds;
  MlpParams<T> pool_mlp;

  GnnParams zeros_like() const;
};

/// Token vectors ~ N(0, 0.1^2); every MLP has one hidden ReLU layer of
/// `hidden_dim` and a linear output of `node_dim`. Pooling layers use ReLU.
template <typename T>
GnnParams<T> make_gnn_params(const GnnConfig& config, std::size_t vocabulary_size, Rng& rng);

template <typename T>
void collect_parameters(GnnParams<T>& params, const std::string& prefix, std::vector<NamedParameter<T>>& out);

/// Message lists for a disjoint union of graphs. Each structural edge u->v
/// yields a parent message received at v and a child message received at u,
/// subject to the graph's direction flag. Random edges yield both regardless
/// of direction.
struct GraphBatch {
  std::vector<std::size_t> tokens;
  std::vector<std::size_t> graph_offsets;  // graphs + 1 entries
  std::vector<int> edge_labels;
  std::vector<std::size_t> parent_sender, parent_receiver, parent_edge;
  std::vector<std::size_t> child_sender, child_receiver, child_edge;
  std::vector<double> parent_norm, child_norm;  // 1/p(v), 1/c(v), or 0

  std::size_t node_count() const { return tokens.size(); }
  std::size_t graph_count() const { return graph_offsets.empty() ? 0 : graph_offsets.size() - 1; }
};

GraphBatch make_graph_batch(std::span<const TermGraph* const> graphs, const Vocabulary& vocabulary);

template <typename T>
struct GnnTape {
  MlpTape<T> node;
  MlpTape<T> edge;
  struct Round {
    MlpTape<T> parent;
    MlpTape<T> child;
    MlpTape<T> aggregate;
  };
  std::vector<Round> rounds;
  MlpTape<T> pool;
  std::vector<Eigen::Index> argmax;  // graphs x embedding_dim, node row of each maximum
};

template <typename T>
struct GnnOutput {
  Matrix<T> nodes;   // node_count x node_dim
  Matrix<T> pooled;  // graph_count x embedding_dim
};

/// Message passing followed by per-node projection and per-graph max pooling.
/// Records a tape when `tape` is non-null.
template <typename T>
GnnOutput<T> gnn_forward(const GnnParams<T>& params, const GnnConfig& config, const GraphBatch& batch, bool training,
                         Rng& rng, GnnTape<T>* tape);

/// Accumulates into `grads` given d loss / d pooled.
template <typename T>
void gnn_backward(const GnnParams<T>& params, const GnnConfig& config, const GraphBatch& batch, GnnTape<T>& tape,
                  const Matrix<T>& pooled_grad, GnnParams<T>& grads);

/// Node embeddings h_v after all rounds for a single graph.
template <typename T>
Matrix<T> encode(const TermGraph& graph, const Vocabulary& vocabulary, const GnnParams<T>& params,
                 const GnnConfig& config, bool training, Rng& rng);

/// Projects node embeddings through the pooling layers and takes the
/// coordinatewise maximum over nodes.
template <typename T>
Matrix<T> pool(const Matrix<T>& node_embeddings, const GnnParams<T>& params, const GnnConfig& config, bool training,
               Rng& rng);

}  // namespace holgraph
