#include "holgraph/model.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <unordered_map>

namespace holgraph {

nlohmann::json to_json(const ModelConfig& config) {
  const auto& r = config.representation;
  const auto& g = config.gnn;
  return {
      {"representation",
       {{"sharing", to_string(r.sharing)},
        {"blind_variables", r.variable_blinding},
        {"random_edges", r.random_edges},
        {"direction", to_string(r.direction)},
        {"random_seed", r.random_seed}}},
      {"gnn",
       {{"hops", g.hops},
        {"token_dim", g.token_dim},
        {"node_dim", g.node_dim},
        {"hidden_dim", g.hidden_dim},
        {"pool_widths", g.pool_widths},
        {"mlp_keep", g.mlp_keep},
        {"pool_keep", g.pool_keep}}},
      {"tactic_count", config.tactic_count},
      {"tactic_widths", config.tactic_widths},
      {"combiner_widths", config.combiner_widths},
      {"head_keep", config.head_keep},
      {"loss", {{"tactic", config.loss.tactic}, {"pairwise", config.loss.pairwise}, {"aucroc", config.loss.aucroc}}},
      {"goals_per_batch", config.goals_per_batch},
      {"negatives_per_goal", config.negatives_per_goal},
  };
}

ModelConfig model_config_from_json(const nlohmann::json& json) {
  ModelConfig c;
  const auto& r = json.at("representation");
  c.representation.sharing = parse_sharing(r.at("sharing").get<std::string>());
  c.representation.variable_blinding = r.at("blind_variables").get<bool>();
  c.representation.random_edges = r.at("random_edges").get<bool>();
  c.representation.direction = parse_direction(r.at("direction").get<std::string>());
  c.representation.random_seed = r.at("random_seed").get<std::uint64_t>();
  const auto& g = json.at("gnn");
  c.gnn.hops = g.at("hops").get<int>();
  c.gnn.token_dim = g.at("token_dim").get<std::size_t>();
  c.gnn.node_dim = g.at("node_dim").get<std::size_t>();
  c.gnn.hidden_dim = g.at("hidden_dim").get<std::size_t>();
  c.gnn.pool_widths = g.at("pool_widths").get<std::vector<std::size_t>>();
  c.gnn.mlp_keep = g.at("mlp_keep").get<double>();
  c.gnn.pool_keep = g.at("pool_keep").get<double>();
  c.tactic_count = json.at("tactic_count").get<std::size_t>();
  c.tactic_widths = json.at("tactic_widths").get<std::vector<std::size_t>>();
  c.combiner_widths = json.at("combiner_widths").get<std::vector<std::size_t>>();
  c.head_keep = json.at("head_keep").get<double>();
  const auto& l = json.at("loss");
  c.loss = {l.at("tactic").get<double>(), l.at("pairwise").get<double>(), l.at("aucroc").get<double>()};
  c.goals_per_batch = json.at("goals_per_batch").get<std::size_t>();
  c.negatives_per_goal = json.at("negatives_per_goal").get<std::size_t>();
  return c;
}

template <typename T>
ModelParams<T> ModelParams<T>::zeros_like() const {
  return {goal_gnn.zeros_like(), premise_gnn.zeros_like(), tactic_head.zeros_like(), combiner.zeros_like()};
}

template <typename T>
ModelParams<T> make_model_params(const ModelConfig& config, std::size_t vocabulary_size, Rng& rng) {
  validate(config.representation);
  ModelParams<T> p;
  p.goal_gnn = make_gnn_params<T>(config.gnn, vocabulary_size, rng);
  p.premise_gnn = make_gnn_params<T>(config.gnn, vocabulary_size, rng);
  const std::size_t d = config.gnn.embedding_dim();
  std::vector<std::size_t> widths = config.tactic_widths;
  widths.push_back(config.tactic_count);
  p.tactic_head = make_mlp<T>(d, widths, Activation::Relu, Activation::Identity, rng);
  widths = config.combiner_widths;
  widths.push_back(1);
  p.combiner = make_mlp<T>(3 * d, widths, Activation::Relu, Activation::Identity, rng);
  return p;
}

template <typename T>
std::vector<NamedParameter<T>> collect_parameters(ModelParams<T>& params) {
  std::vector<NamedParameter<T>> out;
  collect_parameters(params.goal_gnn, "goal_gnn", out);
  collect_parameters(params.premise_gnn, "premise_gnn", out);
  collect_parameters(params.tactic_head, "tactic_head", out);
  collect_parameters(params.combiner, "combiner", out);
  return out;
}

TermGraph term_graph(const SExpr& expr, const RepresentationConfig& config) {
  RepresentationConfig c = config;
  if (c.random_edges) c.random_seed = fnv1a64(serialize(expr), config.random_seed ^ 0xcbf29ce484222325ULL);
  return make_graph(expr, c);
}

template <typename T>
Matrix<T> embed_goals(const Model<T>& model, std::span<const TermGraph* const> graphs, bool training, Rng& rng) {
  const GraphBatch batch = make_graph_batch(graphs, model.vocabulary);
  return gnn_forward<T>(model.params.goal_gnn, model.config.gnn, batch, training, rng, nullptr).pooled;
}

template <typename T>
Matrix<T> embed_premises(const Model<T>& model, std::span<const TermGraph* const> graphs, bool training, Rng& rng) {
  const GraphBatch batch = make_graph_batch(graphs, model.vocabulary);
  return gnn_forward<T>(model.params.premise_gnn, model.config.gnn, batch, training, rng, nullptr).pooled;
}

template <typename T>
Matrix<T> embed_goal(const Model<T>& model, const TermGraph& graph) {
  Rng unused(0);
  const TermGraph* g = &graph;
  return embed_goals(model, std::span<const TermGraph* const>(&g, 1), false, unused);
}

template <typename T>
Matrix<T> embed_premise(const Model<T>& model, const TermGraph& graph) {
  Rng unused(0);
  const TermGraph* g = &graph;
  return embed_premises(model, std::span<const TermGraph* const>(&g, 1), false, unused);
}

template <typename T>
Matrix<T> predict_tactic(const Model<T>& model, const Matrix<T>& goal_embeddings) {
  return mlp_apply(model.params.tactic_head, goal_embeddings);
}

template <typename T>
Matrix<T> combiner_input(const Matrix<T>& goals, const Matrix<T>& premises) {
  if (goals.rows() != premises.rows() || goals.cols() != premises.cols()) {
    throw NumericsError("combiner input shape mismatch");
  }
  const Eigen::Index d = goals.cols();
  Matrix<T> x(goals.rows(), 3 * d);
  x.leftCols(d) = goals;
  x.middleCols(d, d) = premises;
  x.rightCols(d) = goals.cwiseProduct(premises);
  return x;
}

template <typename T>
std::vector<T> score_premises(const Model<T>& model, const Matrix<T>& goal, const Matrix<T>& premises) {
  if (goal.rows() != 1) throw NumericsError("score_premises expects a single goal row");
  if (premises.rows() == 0) return {};
  const Matrix<T> goals = goal.replicate(premises.rows(), 1);
  const Matrix<T> logits = mlp_apply(model.params.combiner, combiner_input(goals, premises));
  return std::vector<T>(logits.data(), logits.data() + logits.size());
}

template <typename T>
T score_premise(const Model<T>& model, const Matrix<T>& goal, const Matrix<T>& premise) {
  return score_premises(model, goal, premise).at(0);
}

template <typename T>
std::size_t PremiseCache<T>::row(std::size_t index) const {
  auto it = std::lower_bound(indices.begin(), indices.end(), index);
  if (it == indices.end() || *it != index) {
    throw std::out_of_range("premise " + std::to_string(index) + " is not in the cache");
  }
  return static_cast<std::size_t>(it - indices.begin());
}

template <typename T>
PremiseCache<T> build_premise_cache(const Model<T>& model, std::span<const std::size_t> indices,
                                    std::span<const SExpr> statements) {
  PremiseCache<T> cache;
  cache.identity = model_identity(model);
  cache.indices.assign(indices.begin(), indices.end());
  std::sort(cache.indices.begin(), cache.indices.end());
  cache.indices.erase(std::unique(cache.indices.begin(), cache.indices.end()), cache.indices.end());
  const auto d = static_cast<Eigen::Index>(model.config.gnn.embedding_dim());
  cache.embeddings.resize(static_cast<Eigen::Index>(cache.indices.size()), d);
  for (std::size_t i = 0; i < cache.indices.size(); ++i) {
    const std::size_t index = cache.indices[i];
    if (index >= statements.size()) throw std::out_of_range("premise index outside the theorem database");
    cache.embeddings.row(static_cast<Eigen::Index>(i)) =
        embed_premise(model, term_graph(statements[index], model.config.representation));
  }
  return cache;
}

namespace {

constexpr char kCacheMagic[8] = {'H', 'G', 'P', 'C', 'A', 'C', 'H', 'E'};
constexpr std::uint32_t kCacheVersion = 1;

template <typename V>
void put(std::ostream& out, V value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(V));
}

template <typename V>
V get(std::istream& in) {
  V value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(V))) throw std::runtime_error("premise cache: truncated file");
  return value;
}

}  // namespace

template <typename T>
void save_premise_cache(const std::filesystem::path& path, const PremiseCache<T>& cache) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write premise cache " + path.string());
  out.write(kCacheMagic, 8);
  put<std::uint32_t>(out, kCacheVersion);
  put<std::uint64_t>(out, cache.identity);
  put<std::uint32_t>(out, sizeof(T) * 8);
  put<std::uint64_t>(out, cache.indices.size());
  put<std::uint64_t>(out, static_cast<std::uint64_t>(cache.embeddings.cols()));
  for (std::size_t i = 0; i < cache.indices.size(); ++i) {
    put<std::uint64_t>(out, cache.indices[i]);
    out.write(reinterpret_cast<const char*>(cache.embeddings.row(static_cast<Eigen::Index>(i)).data()),
              static_cast<std::streamsize>(cache.embeddings.cols() * sizeof(T)));
  }
  if (!out) throw std::runtime_error("failed writing premise cache " + path.string());
}

template <typename T>
PremiseCache<T> load_premise_cache(const std::filesystem::path& path, std::uint64_t expected_identity) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open premise cache " + path.string());
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kCacheMagic, 8) != 0) {
    throw std::runtime_error("not a premise cache (bad magic): " + path.string());
  }
  if (get<std::uint32_t>(in) != kCacheVersion) throw std::runtime_error("unsupported premise cache version");
  PremiseCache<T> cache;
  cache.identity = get<std::uint64_t>(in);
  if (cache.identity != expected_identity) {
    throw std::runtime_error("premise cache was built for a different checkpoint");
  }
  if (get<std::uint32_t>(in) != sizeof(T) * 8) throw std::runtime_error("premise cache value width mismatch");
  const auto records = get<std::uint64_t>(in);
  const auto width = get<std::uint64_t>(in);
  cache.embeddings.resize(static_cast<Eigen::Index>(records), static_cast<Eigen::Index>(width));
  for (std::uint64_t i = 0; i < records; ++i) {
    cache.indices.push_back(get<std::uint64_t>(in));
    if (i > 0 && cache.indices[i] <= cache.indices[i - 1]) throw std::runtime_error("premise cache out of order");
    if (!in.read(reinterpret_cast<char*>(cache.embeddings.row(static_cast<Eigen::Index>(i)).data()),
                 static_cast<std::streamsize>(width * sizeof(T)))) {
      throw std::runtime_error("premise cache: truncated file");
    }
  }
  return cache;
}

template <typename T>
std::vector<RankedPremise> rank_premises(const Model<T>& model, const TermGraph& goal, const PremiseCache<T>& cache,
                                         std::span<const std::size_t> eligible, std::size_t k) {
  const Matrix<T> g = embed_goal(model, goal);
  Matrix<T> premises(static_cast<Eigen::Index>(eligible.size()), cache.embeddings.cols());
  for (std::size_t i = 0; i < eligible.size(); ++i) {
    premises.row(static_cast<Eigen::Index>(i)) = cache.embeddings.row(static_cast<Eigen::Index>(cache.row(eligible[i])));
  }
  const std::vector<T> scores = score_premises(model, g, premises);
  const std::vector<double> wide(scores.begin(), scores.end());
  return top_k(eligible, wide, k);
}

template <typename T>
Checkpoint<T> to_checkpoint(const Model<T>& model, const nlohmann::json& extra) {
  Checkpoint<T> ck;
  ck.metadata = extra;
  ck.metadata["model"] = to_json(model.config);
  ck.metadata["vocabulary"] = model.vocabulary.tokens();
  ck.metadata["initialization"] = {{"dense", "uniform +-sqrt(3/fan_in), zero bias"}, {"tokens", "normal sigma 0.1"}};
  auto& params = const_cast<ModelParams<T>&>(model.params);
  for (const auto& p : collect_parameters(params)) ck.tensors.emplace_back(p.name, *p.value);
  return ck;
}

template <typename T>
Model<T> from_checkpoint(const Checkpoint<T>& checkpoint) {
  Model<T> model;
  model.config = model_config_from_json(checkpoint.metadata.at("model"));
  model.vocabulary = Vocabulary(checkpoint.metadata.at("vocabulary").template get<std::vector<std::string>>());
  Rng rng(0);
  model.params = make_model_params<T>(model.config, model.vocabulary.size(), rng);
  for (const auto& p : collect_parameters(model.params)) {
    const Matrix<T>& stored = checkpoint.tensor(p.name);
    if (stored.rows() != p.value->rows() || stored.cols() != p.value->cols()) {
      throw std::runtime_error("checkpoint tensor " + p.name + " has the wrong shape");
    }
    *p.value = stored;
  }
  return model;
}

template <typename T>
std::uint64_t model_identity(const Model<T>& model) {
  return checkpoint_identity(to_checkpoint(model));
}

PairAudit audit(const TrainingBatch& batch) {
  PairAudit a;
  for (std::size_t i = 0; i < batch.goal_count(); ++i) {
    for (std::size_t j = 0; j < batch.premises.size(); ++j) {
      if (batch.positive(i, j)) {
        ++a.positives;
      } else if (j / batch.per_goal == i) {
        ++a.owned_negatives;
      } else {
        ++a.reused_negatives;
      }
    }
  }
  return a;
}

TrainingBatch build_batch(const TrainingSet& data, const ModelConfig& config, Rng& rng) {
  const std::size_t steps = data.goal_graphs.size();
  if (steps == 0) throw BatchError("no proof steps to sample from");
  std::vector<std::size_t> with_premises;
  for (std::size_t s = 0; s < steps; ++s) {
    if (!data.step_premises[s].empty()) with_premises.push_back(s);
  }
  if (with_premises.empty()) throw BatchError("no proof step cites a premise");
  if (data.negative_pool.size() < config.negatives_per_goal + 1) {
    throw BatchError("negative pool has " + std::to_string(data.negative_pool.size()) + " premises, need at least " +
                     std::to_string(config.negatives_per_goal + 1));
  }
  TrainingBatch batch;
  batch.per_goal = config.negatives_per_goal + 1;
  std::uniform_int_distribution<std::size_t> any_step(0, steps - 1);
  std::uniform_int_distribution<std::size_t> premise_step(0, with_premises.size() - 1);
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < config.goals_per_batch; ++i) {
    const std::size_t s = any_step(rng);
    batch.tactic_steps.push_back(s);
    batch.tactic_labels.push_back(data.tactics[s]);
    const std::size_t p = data.step_premises[s].empty() ? with_premises[premise_step(rng)] : s;
    batch.pair_steps.push_back(p);
    const auto& cited = data.step_premises[p];
    const std::size_t positive = cited[std::uniform_int_distribution<std::size_t>(0, cited.size() - 1)(rng)];
    batch.premises.push_back(positive);
    pool.clear();
    for (std::size_t t : data.negative_pool) {
      if (t != positive) pool.push_back(t);
    }
    for (std::size_t k = 0; k < config.negatives_per_goal; ++k) {
      const std::size_t pick = std::uniform_int_distribution<std::size_t>(k, pool.size() - 1)(rng);
      std::swap(pool[k], pool[pick]);
      batch.premises.push_back(pool[k]);
    }
  }
  return batch;
}

namespace {

template <typename T>
void accumulate(ModelParams<T>& into, ModelParams<T>& from) {
  auto a = collect_parameters(into);
  auto b = collect_parameters(from);
  for (std::size_t i = 0; i < a.size(); ++i) *a[i].value += *b[i].value;
}

// Assigns dense ids to distinct keys in first-seen order.
template <typename K>
struct Interner {
  std::map<K, std::size_t> ids;
  std::vector<K> keys;
  std::size_t operator()(const K& key) {
    auto [it, fresh] = ids.emplace(key, keys.size());
    if (fresh) keys.push_back(key);
    return it->second;
  }
};

}  // namespace

template <typename T>
LossAndGrads<T> compute_loss(const Model<T>& model, const TrainingSet& data, const TrainingBatch& batch,
                             bool training, Rng& rng) {
  const ModelConfig& config = model.config;
  const ModelParams<T>& params = model.params;
  LossAndGrads<T> result{{}, params.zeros_like()};
  ModelParams<T>& grads = result.grads;

  Interner<std::size_t> goal_ids, premise_ids;
  std::vector<std::size_t> tactic_rows, pair_rows, premise_cols;
  for (std::size_t s : batch.tactic_steps) tactic_rows.push_back(goal_ids(s));
  for (std::size_t s : batch.pair_steps) pair_rows.push_back(goal_ids(s));
  for (std::size_t t : batch.premises) premise_cols.push_back(premise_ids(t));

  std::vector<const TermGraph*> goal_graphs, premise_graphs;
  for (std::size_t s : goal_ids.keys) goal_graphs.push_back(&data.goal_graphs.at(s));
  for (std::size_t t : premise_ids.keys) premise_graphs.push_back(&data.theorem_graphs.at(t));

  const GraphBatch goal_batch = make_graph_batch(goal_graphs, model.vocabulary);
  const GraphBatch premise_batch = make_graph_batch(premise_graphs, model.vocabulary);
  GnnTape<T> goal_tape, premise_tape;
  const Matrix<T> g = gnn_forward(params.goal_gnn, config.gnn, goal_batch, training, rng, &goal_tape).pooled;
  const Matrix<T> p = gnn_forward(params.premise_gnn, config.gnn, premise_batch, training, rng, &premise_tape).pooled;
  const Eigen::Index d = g.cols();
  Matrix<T> dg = Matrix<T>::Zero(g.rows(), d);
  Matrix<T> dp = Matrix<T>::Zero(p.rows(), d);

  // Tactic classifier.
  Matrix<T> tactic_in(static_cast<Eigen::Index>(tactic_rows.size()), d);
  for (std::size_t i = 0; i < tactic_rows.size(); ++i) {
    tactic_in.row(static_cast<Eigen::Index>(i)) = g.row(static_cast<Eigen::Index>(tactic_rows[i]));
  }
  auto tactic = mlp_forward(params.tactic_head, tactic_in, config.head_keep, training, rng);
  const LossResult<T> xent = softmax_xent<T>(tactic.output, batch.tactic_labels);
  Matrix<T> d_logits = Eigen::Map<const Matrix<T>>(xent.grad.data(), tactic.output.rows(), tactic.output.cols()) *
                       static_cast<T>(config.loss.tactic);
  const Matrix<T> d_tactic_in = mlp_backward(params.tactic_head, tactic.tape, d_logits, grads.tactic_head);
  for (std::size_t i = 0; i < tactic_rows.size(); ++i) {
    dg.row(static_cast<Eigen::Index>(tactic_rows[i])) += d_tactic_in.row(static_cast<Eigen::Index>(i));
  }

  // Combiner over distinct (goal, premise) pairs.
  const std::size_t rows = batch.goal_count();
  const std::size_t cols = batch.premises.size();
  Interner<std::pair<std::size_t, std::size_t>> pair_ids;
  std::vector<std::size_t> cell(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) cell[i * cols + j] = pair_ids({pair_rows[i], premise_cols[j]});
  }
  const auto unique_pairs = static_cast<Eigen::Index>(pair_ids.keys.size());
  Matrix<T> pg(unique_pairs, d), pp(unique_pairs, d);
  for (Eigen::Index k = 0; k < unique_pairs; ++k) {
    pg.row(k) = g.row(static_cast<Eigen::Index>(pair_ids.keys[static_cast<std::size_t>(k)].first));
    pp.row(k) = p.row(static_cast<Eigen::Index>(pair_ids.keys[static_cast<std::size_t>(k)].second));
  }
  auto combined = mlp_forward(params.combiner, combiner_input(pg, pp), config.head_keep, training, rng);

  std::vector<T> logits(rows * cols);
  std::vector<std::uint8_t> positive(rows * cols);
  std::vector<int> owner(rows * cols);
  T pairwise{};
  Matrix<T> d_pair = Matrix<T>::Zero(unique_pairs, 1);
  const T pair_scale = static_cast<T>(config.loss.pairwise) / static_cast<T>(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const std::size_t c = i * cols + j;
      logits[c] = combined.output(static_cast<Eigen::Index>(cell[c]), 0);
      positive[c] = batch.positive(i, j) ? 1 : 0;
      owner[c] = static_cast<int>(i);
      const auto [loss, grad] = sigmoid_xent<T>(logits[c], positive[c]);
      pairwise += loss;
      d_pair(static_cast<Eigen::Index>(cell[c]), 0) += pair_scale * grad;
    }
  }
  pairwise /= static_cast<T>(rows * cols);
  const LossResult<T> auc = aucroc_loss<T>(logits, positive, owner);
  for (std::size_t c = 0; c < logits.size(); ++c) {
    d_pair(static_cast<Eigen::Index>(cell[c]), 0) += static_cast<T>(config.loss.aucroc) * auc.grad[c];
  }
  const Matrix<T> dx = mlp_backward(params.combiner, combined.tape, d_pair, grads.combiner);
  for (Eigen::Index k = 0; k < unique_pairs; ++k) {
    const auto [gi, pj] = pair_ids.keys[static_cast<std::size_t>(k)];
    const auto gr = static_cast<Eigen::Index>(gi), pr = static_cast<Eigen::Index>(pj);
    dg.row(gr) += dx.row(k).leftCols(d) + dx.row(k).rightCols(d).cwiseProduct(pp.row(k));
    dp.row(pr) += dx.row(k).middleCols(d, d) + dx.row(k).rightCols(d).cwiseProduct(pg.row(k));
  }

  gnn_backward(params.goal_gnn, config.gnn, goal_batch, goal_tape, dg, grads.goal_gnn);
  gnn_backward(params.premise_gnn, config.gnn, premise_batch, premise_tape, dp, grads.premise_gnn);

  auto& l = result.loss;
  l.tactic = static_cast<double>(xent.loss);
  l.pairwise = static_cast<double>(pairwise);
  l.aucroc = static_cast<double>(auc.loss);
  l.total = config.loss.tactic * l.tactic + config.loss.pairwise * l.pairwise + config.loss.aucroc * l.aucroc;
  return result;
}

template <typename T>
NeuralPolicy<T>::NeuralPolicy(const Model<T>& model, std::span<const SExpr> statements, const PremiseCache<T>* cache)
    : model_(model), statements_(statements), cache_(cache) {}

template <typename T>
Prediction NeuralPolicy<T>::predict(const SExpr& goal, std::span<const std::size_t> candidates) {
  const Matrix<T> g = embed_goal(model_, term_graph(goal, model_.config.representation));
  ++goal_embeddings_;
  const Matrix<T> logits = predict_tactic(model_, g);
  Matrix<T> premises(static_cast<Eigen::Index>(candidates.size()), g.cols());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    if (cache_) {
      premises.row(row) = cache_->embeddings.row(static_cast<Eigen::Index>(cache_->row(candidates[i])));
    } else {
      premises.row(row) =
          embed_premise(model_, term_graph(statements_[candidates[i]], model_.config.representation));
    }
  }
  const std::vector<T> scores = score_premises(model_, g, premises);
  return {std::vector<double>(logits.data(), logits.data() + logits.size()),
          std::vector<double>(scores.begin(), scores.end())};
}

#define HOLGRAPH_INSTANTIATE(T)                                                                                    \
  template struct ModelParams<T>;                                                                                  \
  template struct PremiseCache<T>;                                                                                 \
  template class NeuralPolicy<T>;                                                                                 \
  template ModelParams<T> make_model_params<T>(const ModelConfig&, std::size_t, Rng&);                             \
  template std::vector<NamedParameter<T>> collect_parameters<T>(ModelParams<T>&);                                  \
  template Matrix<T> embed_goals<T>(const Model<T>&, std::span<const TermGraph* const>, bool, Rng&);               \
  template Matrix<T> embed_premises<T>(const Model<T>&, std::span<const TermGraph* const>, bool, Rng&);            \
  template Matrix<T> embed_goal<T>(const Model<T>&, const TermGraph&);                                             \
  template Matrix<T> embed_premise<T>(const Model<T>&, const TermGraph&);                                          \
  template Matrix<T> predict_tactic<T>(const Model<T>&, const Matrix<T>&);                                         \
  template Matrix<T> combiner_input<T>(const Matrix<T>&, const Matrix<T>&);                                        \
  template std::vector<T> score_premises<T>(const Model<T>&, const Matrix<T>&, const Matrix<T>&);                  \
  template T score_premise<T>(const Model<T>&, const Matrix<T>&, const Matrix<T>&);                                \
  template PremiseCache<T> build_premise_cache<T>(const Model<T>&, std::span<const std::size_t>,                   \
                                                  std::span<const SExpr>);                                         \
  template void save_premise_cache<T>(const std::filesystem::path&, const PremiseCache<T>&);                       \
  template PremiseCache<T> load_premise_cache<T>(const std::filesystem::path&, std::uint64_t);                     \
  template std::vector<RankedPremise> rank_premises<T>(const Model<T>&, const TermGraph&, const PremiseCache<T>&,  \
                                                       std::span<const std::size_t>, std::size_t);                 \
  template Checkpoint<T> to_checkpoint<T>(const Model<T>&, const nlohmann::json&);                                 \
  template Model<T> from_checkpoint<T>(const Checkpoint<T>&);                                                      \
  template std::uint64_t model_identity<T>(const Model<T>&);                                                       \
  template LossAndGrads<T> compute_loss<T>(const Model<T>&, const TrainingSet&, const TrainingBatch&, bool, Rng&);

HOLGRAPH_INSTANTIATE(float)
HOLGRAPH_INSTANTIATE(double)

#undef HOLGRAPH_INSTANTIATE

}  // namespace holgraph
