#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "holgraph/checkpoint.hpp"
#include "holgraph/gnn.hpp"
#include "holgraph/graph.hpp"
#include "holgraph/numerics.hpp"
#include "holgraph/policy.hpp"
#include "holgraph/sexpr.hpp"

namespace holgraph {

struct LossWeights {
  double tactic = 1.0;
  double pairwise = 0.2;
  double aucroc = 4.0;
};

struct ModelConfig {
  RepresentationConfig representation;
  GnnConfig gnn;
  std::size_t tactic_count = 41;
  std::vector<std::size_t> tactic_widths{512, 256};
  std::vector<std::size_t> combiner_widths{1024, 512};
  double head_keep = 0.7;
  LossWeights loss;
  std::size_t goals_per_batch = 16;
  std::size_t negatives_per_goal = 15;
};

nlohmann::json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& json);

template <typename T>
struct ModelParams {
  GnnParams<T> goal_gnn;
  GnnParams<T> premise_gnn;
  MlpParams<T> tactic_head;
  MlpParams<T> combiner;

  ModelParams zeros_like() const;
};

template <typename T>
ModelParams<T> make_model_params(const ModelConfig& config, std::size_t vocabulary_size, Rng& rng);

/// Every trainable matrix with a stable name, in a fixed order.
template <typename T>
std::vector<NamedParameter<T>> collect_parameters(ModelParams<T>& params);

template <typename T>
struct Model {
  ModelConfig config;
  Vocabulary vocabulary;
  ModelParams<T> params;
};

/// Builds the graph of a term under the model's representation. The random
/// edge seed is mixed with the term text so each term gets its own edges.
TermGraph term_graph(const SExpr& expr, const RepresentationConfig& config);

/// Pooled embeddings, one row per graph.
template <typename T>
Matrix<T> embed_goals(const Model<T>& model, std::span<const TermGraph* const> graphs, bool training, Rng& rng);
template <typename T>
Matrix<T> embed_premises(const Model<T>& model, std::span<const TermGraph* const> graphs, bool training, Rng& rng);

/// 1 x embedding_dim, evaluation mode.
template <typename T>
Matrix<T> embed_goal(const Model<T>& model, const TermGraph& graph);
template <typename T>
Matrix<T> embed_premise(const Model<T>& model, const TermGraph& graph);

/// Logits, one row per goal embedding row. No softmax.
template <typename T>
Matrix<T> predict_tactic(const Model<T>& model, const Matrix<T>& goal_embeddings);

/// Combiner input [g, p, g*p] for each row pair.
template <typename T>
Matrix<T> combiner_input(const Matrix<T>& goals, const Matrix<T>& premises);

/// Scores one goal embedding (1 x d) against every row of `premises`.
template <typename T>
std::vector<T> score_premises(const Model<T>& model, const Matrix<T>& goal, const Matrix<T>& premises);

template <typename T>
T score_premise(const Model<T>& model, const Matrix<T>& goal, const Matrix<T>& premise);

/// Embeddings P(p) of a set of premises, tied to one parameter set.
template <typename T>
struct PremiseCache {
  std::uint64_t identity = 0;
  std::vector<std::size_t> indices;  // ascending theorem indices
  Matrix<T> embeddings;              // one row per index

  /// Row of `index`; throws std::out_of_range when absent.
  std::size_t row(std::size_t index) const;
};

template <typename T>
PremiseCache<T> build_premise_cache(const Model<T>& model, std::span<const std::size_t> indices,
                                    std::span<const SExpr> statements);

/// Layout: magic "HGPCACHE", u32 format version, u64 checkpoint identity,
/// u32 value bits, u64 records, u64 width, then per record u64 theorem index
/// and `width` raw values.
template <typename T>
void save_premise_cache(const std::filesystem::path& path, const PremiseCache<T>& cache);

/// Rejects a cache whose identity differs from `expected_identity`.
template <typename T>
PremiseCache<T> load_premise_cache(const std::filesystem::path& path, std::uint64_t expected_identity);

/// Top-k premises among those in `eligible` using cached embeddings.
template <typename T>
std::vector<RankedPremise> rank_premises(const Model<T>& model, const TermGraph& goal, const PremiseCache<T>& cache,
                                         std::span<const std::size_t> eligible, std::size_t k);

template <typename T>
Checkpoint<T> to_checkpoint(const Model<T>& model, const nlohmann::json& extra = nlohmann::json::object());
template <typename T>
Model<T> from_checkpoint(const Checkpoint<T>& checkpoint);

template <typename T>
std::uint64_t model_identity(const Model<T>& model);

/// One sampled training step. Goal i owns premise columns
/// [i * per_goal, (i + 1) * per_goal); its positive is the first of them.
struct TrainingBatch {
  std::vector<std::size_t> tactic_steps;    // proof-step ids feeding the tactic loss
  std::vector<int> tactic_labels;
  std::vector<std::size_t> pair_steps;      // proof-step ids whose goals form the pair grid rows
  std::vector<std::size_t> premises;        // theorem indices, goals * per_goal
  std::size_t per_goal = 0;

  std::size_t goal_count() const { return pair_steps.size(); }
  std::size_t pair_count() const { return pair_steps.size() * premises.size(); }
  bool positive(std::size_t goal, std::size_t column) const { return column == goal * per_goal; }
};

struct PairAudit {
  std::size_t positives = 0;
  std::size_t owned_negatives = 0;
  std::size_t reused_negatives = 0;
  std::size_t total() const { return positives + owned_negatives + reused_negatives; }
};

PairAudit audit(const TrainingBatch& batch);

/// Training material: one goal graph and tactic per proof step, premise
/// lists, and a graph per theorem statement.
struct TrainingSet {
  std::vector<TermGraph> goal_graphs;
  std::vector<int> tactics;
  std::vector<std::vector<std::size_t>> step_premises;
  std::vector<TermGraph> theorem_graphs;
  std::vector<std::size_t> negative_pool;  // theorems used at least once as a positive premise
};

class BatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

TrainingBatch build_batch(const TrainingSet& data, const ModelConfig& config, Rng& rng);

struct LossComponents {
  double tactic = 0;
  double pairwise = 0;
  double aucroc = 0;
  double total = 0;
};

template <typename T>
struct LossAndGrads {
  LossComponents loss;
  ModelParams<T> grads;
};

/// Weighted loss over a batch and its gradient for every parameter. Each
/// distinct goal and premise graph is embedded once and each distinct
/// (goal, premise) pair goes through the combiner once.
template <typename T>
LossAndGrads<T> compute_loss(const Model<T>& model, const TrainingSet& data, const TrainingBatch& batch,
                             bool training, Rng& rng);

/// Policy backed by a model. Premise embeddings come from `cache` when given,
/// otherwise each candidate is embedded on the fly; both paths produce the
/// same bits.
template <typename T>
class NeuralPolicy : public Policy {
 public:
  NeuralPolicy(const Model<T>& model, std::span<const SExpr> statements, const PremiseCache<T>* cache = nullptr);
  Prediction predict(const SExpr& goal, std::span<const std::size_t> candidates) override;
  std::size_t goal_embeddings() const { return goal_embeddings_; }

 private:
  const Model<T>& model_;
  std::span<const SExpr> statements_;
  const PremiseCache<T>* cache_;
  std::size_t goal_embeddings_ = 0;
};

}  // namespace holgraph
