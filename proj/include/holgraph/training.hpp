#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "holgraph/corpus.hpp"
#include "holgraph/model.hpp"

namespace holgraph {

enum class ParamSource { Averaged, Live };

std::string to_string(ParamSource source);
ParamSource parse_param_source(std::string_view text);

struct TrainConfig {
  ModelConfig model;
  AdamConfig adam;
  std::uint64_t seed = 0;
  long steps = 3000;
  long eval_every = 100;
  ParamSource eval_params = ParamSource::Averaged;
  /// Stops once both proxy metrics reach this value at an evaluation.
  std::optional<double> target_accuracy;
  std::uint64_t metric_seed = 1;
};

nlohmann::json to_json(const TrainConfig& config);

struct MetricRecord {
  long step = 0;
  LossComponents loss;
  double tactic_accuracy = 0;
  double premise_accuracy = 0;

  double selection_score() const { return tactic_accuracy + premise_accuracy; }
};

/// Vocabulary over every statement in the database and every logged goal.
Vocabulary build_vocabulary(const TheoremDb& db, std::span<const ProofStep> steps);

TrainingSet make_training_set(const TheoremDb& db, std::span<const ProofStep> steps,
                              const RepresentationConfig& representation);

template <typename T>
struct TrainResult {
  Model<T> live;
  OptimizerState<T> optimizer;
  Model<T> selected;  // best evaluation by tactic + premise accuracy
  std::vector<MetricRecord> metrics;
  long steps_run = 0;
};

/// Both proxy metrics on `steps` with dropout off.
template <typename T>
MetricRecord evaluate_metrics(const Model<T>& model, const TheoremDb& db, std::span<const ProofStep> steps,
                              std::uint64_t metric_seed);

/// Trains on `train_steps`, evaluating on `eval_steps` every `eval_every`
/// steps and at the end. Each evaluation is written to `log` as one line.
template <typename T>
TrainResult<T> train(const TrainConfig& config, const TheoremDb& db, std::span<const ProofStep> train_steps,
                     std::span<const ProofStep> eval_steps, std::ostream* log);

/// Live parameters, or the Polyak shadow when `source` is Averaged.
template <typename T>
Model<T> parameters_of(const Model<T>& live, const OptimizerState<T>& optimizer, ParamSource source);

void write_metric(std::ostream& out, const MetricRecord& m);

/// Model plus Adam moments, Polyak shadow and step counter.
template <typename T>
void save_training_checkpoint(const std::filesystem::path& path, const Model<T>& model,
                              const OptimizerState<T>* optimizer, const nlohmann::json& extra = {});

template <typename T>
struct LoadedCheckpoint {
  Model<T> model;
  std::optional<OptimizerState<T>> optimizer;
  nlohmann::json metadata;
};

template <typename T>
LoadedCheckpoint<T> load_training_checkpoint(const std::filesystem::path& path);

/// The model a checkpoint evaluates with: the stored shadow when `source` is
/// Averaged and one is present, the live parameters otherwise.
template <typename T>
Model<T> load_model(const std::filesystem::path& path, ParamSource source);

}  // namespace holgraph
