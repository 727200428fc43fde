#include "holgraph/gnn.hpp"

#include <algorithm>
#include <array>

namespace holgraph {

Vocabulary::Vocabulary() { add(kUnknown); }

Vocabulary::Vocabulary(std::vector<std::string> tokens) {
  if (tokens.empty() || tokens.front() != kUnknown) {
    throw std::invalid_argument("vocabulary must start with the unknown token");
  }
  for (auto& t : tokens) {
    if (ids_.count(t) != 0) throw std::invalid_argument("duplicate vocabulary token: " + t);
    ids_.emplace(t, tokens_.size());
    tokens_.push_back(std::move(t));
  }
}

std::size_t Vocabulary::add(std::string_view token) {
  if (auto it = ids_.find(token); it != ids_.end()) return it->second;
  const std::size_t id = tokens_.size();
  tokens_.emplace_back(token);
  ids_.emplace(std::string(token), id);
  return id;
}

std::size_t Vocabulary::id(std::string_view token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? 0 : it->second;
}

bool Vocabulary::contains(std::string_view token) const { return ids_.find(token) != ids_.end(); }

template <typename T>
GnnParams<T> GnnParams<T>::zeros_like() const {
  GnnParams<T> out;
  out.token_embeddings = Matrix<T>::Zero(token_embeddings.rows(), token_embeddings.cols());
  out.node_mlp = node_mlp.zeros_like();
  out.edge_mlp = edge_mlp.zeros_like();
  for (const auto& r : rounds) {
    out.rounds.push_back({r.parent_message.zeros_like(), r.child_message.zeros_like(), r.aggregate.zeros_like()});
  }
  out.pool_mlp = pool_mlp.zeros_like();
  return out;
}

template <typename T>
GnnParams<T> make_gnn_params(const GnnConfig& config, std::size_t vocabulary_size, Rng& rng) {
  if (config.hops < 0) throw std::invalid_argument("hops must be non-negative");
  GnnParams<T> params;
  std::normal_distribution<double> normal(0.0, 0.1);
  params.token_embeddings.resize(static_cast<Eigen::Index>(vocabulary_size),
                                 static_cast<Eigen::Index>(config.token_dim));
  for (Eigen::Index i = 0; i < params.token_embeddings.size(); ++i) {
    params.token_embeddings.data()[i] = static_cast<T>(normal(rng));
  }
  const std::array<std::size_t, 2> widths{config.hidden_dim, config.node_dim};
  params.node_mlp = make_mlp<T>(config.token_dim, widths, Activation::Relu, Activation::Identity, rng);
  params.edge_mlp = make_mlp<T>(1, widths, Activation::Relu, Activation::Identity, rng);
  const std::size_t message_in = 3 * config.node_dim;
  for (int r = 0; r < config.hops; ++r) {
    GnnRound<T> round;
    round.parent_message = make_mlp<T>(message_in, widths, Activation::Relu, Activation::Identity, rng);
    round.child_message = make_mlp<T>(message_in, widths, Activation::Relu, Activation::Identity, rng);
    round.aggregate = make_mlp<T>(message_in, widths, Activation::Relu, Activation::Identity, rng);
    params.rounds.push_back(std::move(round));
  }
  if (!config.pool_widths.empty()) {
    params.pool_mlp = make_mlp<T>(config.node_dim, config.pool_widths, Activation::Relu, Activation::Relu, rng);
  }
  return params;
}

template <typename T>
void collect_parameters(GnnParams<T>& params, const std::string& prefix, std::vector<NamedParameter<T>>& out) {
  out.push_back({prefix + "/token_embeddings", &params.token_embeddings});
  collect_parameters(params.node_mlp, prefix + "/node_mlp", out);
  collect_parameters(params.edge_mlp, prefix + "/edge_mlp", out);
  for (std::size_t r = 0; r < params.rounds.size(); ++r) {
    const std::string p = prefix + "/round" + std::to_string(r);
    collect_parameters(params.rounds[r].parent_message, p + "/parent_message", out);
    collect_parameters(params.rounds[r].child_message, p + "/child_message", out);
    collect_parameters(params.rounds[r].aggregate, p + "/aggregate", out);
  }
  collect_parameters(params.pool_mlp, prefix + "/pool_mlp", out);
}

GraphBatch make_graph_batch(std::span<const TermGraph* const> graphs, const Vocabulary& vocabulary) {
  GraphBatch batch;
  batch.graph_offsets.push_back(0);
  std::vector<std::size_t> parent_count, child_count;
  for (const TermGraph* g : graphs) {
    const std::size_t base = batch.tokens.size();
    if (g->nodes.empty()) throw GraphError("cannot encode an empty graph");
    for (const GraphNode& n : g->nodes) batch.tokens.push_back(vocabulary.id(n.token));
    const bool parents_on = g->direction != Direction::BottomUp;
    const bool children_on = g->direction != Direction::TopDown;
    for (const GraphEdge& e : g->edges) {
      const std::size_t edge = batch.edge_labels.size();
      batch.edge_labels.push_back(e.label);
      const std::size_t u = base + e.src, v = base + e.dst;
      if (!e.structural() || parents_on) {
        batch.parent_sender.push_back(u);
        batch.parent_receiver.push_back(v);
        batch.parent_edge.push_back(edge);
      }
      if (!e.structural() || children_on) {
        batch.child_sender.push_back(v);
        batch.child_receiver.push_back(u);
        batch.child_edge.push_back(edge);
      }
    }
    batch.graph_offsets.push_back(batch.tokens.size());
  }
  const std::size_t n = batch.tokens.size();
  parent_count.assign(n, 0);
  child_count.assign(n, 0);
  for (std::size_t r : batch.parent_receiver) ++parent_count[r];
  for (std::size_t r : batch.child_receiver) ++child_count[r];
  batch.parent_norm.resize(n);
  batch.child_norm.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    batch.parent_norm[v] = parent_count[v] ? 1.0 / static_cast<double>(parent_count[v]) : 0.0;
    batch.child_norm[v] = child_count[v] ? 1.0 / static_cast<double>(child_count[v]) : 0.0;
  }
  return batch;
}

namespace {

template <typename T>
Matrix<T> gather_message_inputs(const Matrix<T>& h, const Matrix<T>& he, const std::vector<std::size_t>& sender,
                                const std::vector<std::size_t>& receiver, const std::vector<std::size_t>& edge) {
  const Eigen::Index d = h.cols();
  Matrix<T> x(static_cast<Eigen::Index>(sender.size()), 3 * d);
  for (std::size_t k = 0; k < sender.size(); ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    x.row(row).segment(0, d) = h.row(static_cast<Eigen::Index>(sender[k]));
    x.row(row).segment(d, d) = h.row(static_cast<Eigen::Index>(receiver[k]));
    x.row(row).segment(2 * d, d) = he.row(static_cast<Eigen::Index>(edge[k]));
  }
  return x;
}

template <typename T>
void scatter_mean(const Matrix<T>& messages, const std::vector<std::size_t>& receiver, const std::vector<double>& norm,
                  Matrix<T>& out, Eigen::Index column) {
  const Eigen::Index d = messages.cols();
  for (std::size_t k = 0; k < receiver.size(); ++k) {
    const auto v = static_cast<Eigen::Index>(receiver[k]);
    out.row(v).segment(column, d) += static_cast<T>(norm[receiver[k]]) * messages.row(static_cast<Eigen::Index>(k));
  }
}

template <typename T>
Matrix<T> edge_label_matrix(const GraphBatch& batch) {
  Matrix<T> labels(static_cast<Eigen::Index>(batch.edge_labels.size()), 1);
  for (std::size_t e = 0; e < batch.edge_labels.size(); ++e) {
    labels(static_cast<Eigen::Index>(e), 0) = static_cast<T>(batch.edge_labels[e]);
  }
  return labels;
}

}  // namespace

template <typename T>
static GnnOutput<T> forward_impl(const GnnParams<T>& params, const GnnConfig& config, const GraphBatch& batch, bool training,
                                 Rng& rng, GnnTape<T>* tape, bool pool_stage) {
  if (static_cast<int>(params.rounds.size()) != config.hops) {
    throw std::invalid_argument("GNN parameters have " + std::to_string(params.rounds.size()) +
                                " rounds, config asks for " + std::to_string(config.hops));
  }
  const std::size_t n = batch.node_count();
  if (n == 0 || batch.graph_count() == 0) throw GraphError("cannot encode an empty graph batch");
  const Eigen::Index d = static_cast<Eigen::Index>(config.node_dim);

  Matrix<T> x(static_cast<Eigen::Index>(n), params.token_embeddings.cols());
  for (std::size_t v = 0; v < n; ++v) {
    const auto t = static_cast<Eigen::Index>(batch.tokens[v]);
    if (t >= params.token_embeddings.rows()) throw std::out_of_range("token id outside the embedding table");
    x.row(static_cast<Eigen::Index>(v)) = params.token_embeddings.row(t);
  }
  auto node = mlp_forward(params.node_mlp, x, config.mlp_keep, training, rng);
  Matrix<T> h = std::move(node.output);

  Matrix<T> he;
  MlpTape<T> edge_tape;
  if (!batch.edge_labels.empty() && !params.rounds.empty()) {
    auto edge = mlp_forward(params.edge_mlp, edge_label_matrix<T>(batch), config.mlp_keep, training, rng);
    he = std::move(edge.output);
    edge_tape = std::move(edge.tape);
  }
  if (tape) {
    tape->node = std::move(node.tape);
    tape->edge = std::move(edge_tape);
    tape->rounds.clear();
  }

  for (const GnnRound<T>& round : params.rounds) {
    Matrix<T> z = Matrix<T>::Zero(static_cast<Eigen::Index>(n), 3 * d);
    z.leftCols(d) = h;
    typename GnnTape<T>::Round round_tape;
    if (!batch.parent_sender.empty()) {
      auto s = mlp_forward(round.parent_message,
                           gather_message_inputs(h, he, batch.parent_sender, batch.parent_receiver, batch.parent_edge),
                           config.mlp_keep, training, rng);
      scatter_mean(s.output, batch.parent_receiver, batch.parent_norm, z, d);
      round_tape.parent = std::move(s.tape);
    }
    if (!batch.child_sender.empty()) {
      auto s = mlp_forward(round.child_message,
                           gather_message_inputs(h, he, batch.child_sender, batch.child_receiver, batch.child_edge),
                           config.mlp_keep, training, rng);
      scatter_mean(s.output, batch.child_receiver, batch.child_norm, z, 2 * d);
      round_tape.child = std::move(s.tape);
    }
    auto update = mlp_forward(round.aggregate, z, config.mlp_keep, training, rng);
    h += update.output;
    round_tape.aggregate = std::move(update.tape);
    if (tape) tape->rounds.push_back(std::move(round_tape));
  }

  GnnOutput<T> out;
  if (!pool_stage) {
    out.nodes = std::move(h);
    return out;
  }
  Matrix<T> projected;
  if (params.pool_mlp.layers.empty()) {
    projected = h;
  } else {
    auto p = mlp_forward(params.pool_mlp, h, config.pool_keep, training, rng);
    projected = std::move(p.output);
    if (tape) tape->pool = std::move(p.tape);
  }
  const std::size_t graphs = batch.graph_count();
  const Eigen::Index width = projected.cols();
  out.pooled.resize(static_cast<Eigen::Index>(graphs), width);
  if (tape) tape->argmax.assign(graphs * static_cast<std::size_t>(width), 0);
  for (std::size_t g = 0; g < graphs; ++g) {
    const auto begin = static_cast<Eigen::Index>(batch.graph_offsets[g]);
    const auto end = static_cast<Eigen::Index>(batch.graph_offsets[g + 1]);
    for (Eigen::Index c = 0; c < width; ++c) {
      Eigen::Index best = begin;
      T value = projected(begin, c);
      for (Eigen::Index r = begin + 1; r < end; ++r) {
        if (projected(r, c) > value) {
          value = projected(r, c);
          best = r;
        }
      }
      out.pooled(static_cast<Eigen::Index>(g), c) = value;
      if (tape) tape->argmax[g * static_cast<std::size_t>(width) + static_cast<std::size_t>(c)] = best;
    }
  }
  out.nodes = std::move(h);
  return out;
}

template <typename T>
GnnOutput<T> gnn_forward(const GnnParams<T>& params, const GnnConfig& config, const GraphBatch& batch, bool training,
                         Rng& rng, GnnTape<T>* tape) {
  return forward_impl(params, config, batch, training, rng, tape, true);
}

template <typename T>
void gnn_backward(const GnnParams<T>& params, const GnnConfig& config, const GraphBatch& batch, GnnTape<T>& tape,
                  const Matrix<T>& pooled_grad, GnnParams<T>& grads) {
  const std::size_t n = batch.node_count();
  const std::size_t graphs = batch.graph_count();
  const Eigen::Index d = static_cast<Eigen::Index>(config.node_dim);
  const Eigen::Index width = pooled_grad.cols();
  if (static_cast<std::size_t>(pooled_grad.rows()) != graphs) throw NumericsError("pooled gradient shape mismatch");

  Matrix<T> d_projected = Matrix<T>::Zero(static_cast<Eigen::Index>(n), width);
  for (std::size_t g = 0; g < graphs; ++g) {
    for (Eigen::Index c = 0; c < width; ++c) {
      const Eigen::Index r = tape.argmax[g * static_cast<std::size_t>(width) + static_cast<std::size_t>(c)];
      d_projected(r, c) += pooled_grad(static_cast<Eigen::Index>(g), c);
    }
  }
  Matrix<T> dh = params.pool_mlp.layers.empty()
                     ? std::move(d_projected)
                     : mlp_backward(params.pool_mlp, tape.pool, d_projected, grads.pool_mlp);

  Matrix<T> dhe;
  if (!batch.edge_labels.empty() && !params.rounds.empty()) {
    dhe = Matrix<T>::Zero(static_cast<Eigen::Index>(batch.edge_labels.size()), d);
  }
  for (std::size_t r = params.rounds.size(); r-- > 0;) {
    const GnnRound<T>& round = params.rounds[r];
    auto& round_tape = tape.rounds[r];
    Matrix<T> dz = mlp_backward(round.aggregate, round_tape.aggregate, dh, grads.rounds[r].aggregate);
    dh += dz.leftCols(d);
    auto back_messages = [&](const MlpParams<T>& mlp, MlpTape<T>& mtape, MlpParams<T>& mgrads,
                             const std::vector<std::size_t>& sender, const std::vector<std::size_t>& receiver,
                             const std::vector<std::size_t>& edge, const std::vector<double>& norm,
                             Eigen::Index column) {
      if (sender.empty()) return;
      Matrix<T> ds(static_cast<Eigen::Index>(sender.size()), d);
      for (std::size_t k = 0; k < sender.size(); ++k) {
        ds.row(static_cast<Eigen::Index>(k)) =
            static_cast<T>(norm[receiver[k]]) * dz.row(static_cast<Eigen::Index>(receiver[k])).segment(column, d);
      }
      Matrix<T> dx = mlp_backward(mlp, mtape, ds, mgrads);
      for (std::size_t k = 0; k < sender.size(); ++k) {
        const auto row = static_cast<Eigen::Index>(k);
        dh.row(static_cast<Eigen::Index>(sender[k])) += dx.row(row).segment(0, d);
        dh.row(static_cast<Eigen::Index>(receiver[k])) += dx.row(row).segment(d, d);
        dhe.row(static_cast<Eigen::Index>(edge[k])) += dx.row(row).segment(2 * d, d);
      }
    };
    back_messages(round.parent_message, round_tape.parent, grads.rounds[r].parent_message, batch.parent_sender,
                  batch.parent_receiver, batch.parent_edge, batch.parent_norm, d);
    back_messages(round.child_message, round_tape.child, grads.rounds[r].child_message, batch.child_sender,
                  batch.child_receiver, batch.child_edge, batch.child_norm, 2 * d);
  }
  if (dhe.size() > 0) mlp_backward(params.edge_mlp, tape.edge, dhe, grads.edge_mlp);
  Matrix<T> dx = mlp_backward(params.node_mlp, tape.node, dh, grads.node_mlp);
  for (std::size_t v = 0; v < n; ++v) {
    grads.token_embeddings.row(static_cast<Eigen::Index>(batch.tokens[v])) += dx.row(static_cast<Eigen::Index>(v));
  }
}

template <typename T>
Matrix<T> encode(const TermGraph& graph, const Vocabulary& vocabulary, const GnnParams<T>& params,
                 const GnnConfig& config, bool training, Rng& rng) {
  const TermGraph* g = &graph;
  const GraphBatch batch = make_graph_batch(std::span<const TermGraph* const>(&g, 1), vocabulary);
  return forward_impl<T>(params, config, batch, training, rng, nullptr, false).nodes;
}

template <typename T>
Matrix<T> pool(const Matrix<T>& node_embeddings, const GnnParams<T>& params, const GnnConfig& config, bool training,
               Rng& rng) {
  if (node_embeddings.rows() == 0) throw GraphError("cannot pool an empty graph");
  Matrix<T> projected = params.pool_mlp.layers.empty()
                            ? node_embeddings
                            : mlp_forward(params.pool_mlp, node_embeddings, config.pool_keep, training, rng).output;
  return projected.colwise().maxCoeff();
}

#define HOLGRAPH_INSTANTIATE(T)                                                                                     \
  template struct GnnParams<T>;                                                                                     \
  template GnnParams<T> make_gnn_params<T>(const GnnConfig&, std::size_t, Rng&);                                    \
  template void collect_parameters<T>(GnnParams<T>&, const std::string&, std::vector<NamedParameter<T>>&);          \
  template GnnOutput<T> gnn_forward<T>(const GnnParams<T>&, const GnnConfig&, const GraphBatch&, bool, Rng&,        \
                                       GnnTape<T>*);                                                                \
  template void gnn_backward<T>(const GnnParams<T>&, const GnnConfig&, const GraphBatch&, GnnTape<T>&,              \
                                const Matrix<T>&, GnnParams<T>&);                                                   \
  template Matrix<T> encode<T>(const TermGraph&, const Vocabulary&, const GnnParams<T>&, const GnnConfig&, bool,    \
                               Rng&);                                                                               \
  template Matrix<T> pool<T>(const Matrix<T>&, const GnnParams<T>&, const GnnConfig&, bool, Rng&);

HOLGRAPH_INSTANTIATE(float)
HOLGRAPH_INSTANTIATE(double)

#undef HOLGRAPH_INSTANTIATE

}  // namespace holgraph
