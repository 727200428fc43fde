#include "holgraph/training.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <ostream>
#include <set>

namespace holgraph {

std::string to_string(ParamSource source) { return source == ParamSource::Averaged ? "averaged" : "live"; }

ParamSource parse_param_source(std::string_view text) {
  if (text == "averaged") return ParamSource::Averaged;
  if (text == "live") return ParamSource::Live;
  throw std::invalid_argument("unknown parameter source: " + std::string(text));
}

namespace {

nlohmann::json adam_json(const AdamConfig& a) {
  return {{"learning_rate", a.learning_rate}, {"decay_rate", a.decay_rate}, {"decay_steps", a.decay_steps},
          {"beta1", a.beta1},                 {"beta2", a.beta2},           {"epsilon", a.epsilon},
          {"polyak_rate", a.polyak_rate}};
}

AdamConfig adam_from_json(const nlohmann::json& j) {
  AdamConfig a;
  a.learning_rate = j.at("learning_rate").get<double>();
  a.decay_rate = j.at("decay_rate").get<double>();
  a.decay_steps = j.at("decay_steps").get<long>();
  a.beta1 = j.at("beta1").get<double>();
  a.beta2 = j.at("beta2").get<double>();
  a.epsilon = j.at("epsilon").get<double>();
  a.polyak_rate = j.at("polyak_rate").get<double>();
  return a;
}

void collect_atoms(const SExpr& e, std::set<std::string>& out) {
  if (e.is_atom()) {
    out.insert(e.token());
    return;
  }
  for (const auto& c : e.children()) collect_atoms(c, out);
}

template <typename T>
std::vector<Matrix<T>*> pointers(std::vector<NamedParameter<T>>& named) {
  std::vector<Matrix<T>*> out;
  for (auto& p : named) out.push_back(p.value);
  return out;
}

}  // namespace

nlohmann::json to_json(const TrainConfig& config) {
  nlohmann::json j = {{"model", to_json(config.model)},
                      {"adam", adam_json(config.adam)},
                      {"seed", config.seed},
                      {"steps", config.steps},
                      {"eval_every", config.eval_every},
                      {"eval_params", to_string(config.eval_params)},
                      {"metric_seed", config.metric_seed}};
  j["target_accuracy"] = config.target_accuracy ? nlohmann::json(*config.target_accuracy) : nlohmann::json();
  return j;
}

Vocabulary build_vocabulary(const TheoremDb& db, std::span<const ProofStep> steps) {
  std::set<std::string> tokens;
  for (const auto& r : db.records) collect_atoms(r.statement, tokens);
  for (const auto& s : steps) collect_atoms(s.goal, tokens);
  Vocabulary v;
  for (const auto& t : tokens) v.add(t);
  return v;
}

TrainingSet make_training_set(const TheoremDb& db, std::span<const ProofStep> steps,
                              const RepresentationConfig& representation) {
  TrainingSet data;
  std::set<std::size_t> cited;
  for (const auto& s : steps) {
    data.goal_graphs.push_back(term_graph(s.goal, representation));
    data.tactics.push_back(s.tactic);
    data.step_premises.push_back(s.premises);
    cited.insert(s.premises.begin(), s.premises.end());
  }
  data.theorem_graphs.resize(db.size());
  for (std::size_t t : cited) data.theorem_graphs.at(t) = term_graph(db.at(t).statement, representation);
  data.negative_pool.assign(cited.begin(), cited.end());
  return data;
}

template <typename T>
MetricRecord evaluate_metrics(const Model<T>& model, const TheoremDb& db, std::span<const ProofStep> steps,
                              std::uint64_t metric_seed) {
  const std::vector<SExpr> statements = db.statements();
  NeuralPolicy<T> policy(model, statements);
  MetricRecord m;
  m.tactic_accuracy = tactic_accuracy(policy, steps);
  Rng rng(metric_seed);
  m.premise_accuracy = relative_premise_accuracy(policy, steps, rng).fraction();
  return m;
}

template <typename T>
Model<T> parameters_of(const Model<T>& live, const OptimizerState<T>& optimizer, ParamSource source) {
  Model<T> out = live;
  if (source == ParamSource::Live) return out;
  auto named = collect_parameters(out.params);
  if (named.size() != optimizer.shadow.size()) throw std::runtime_error("shadow does not match the parameters");
  for (std::size_t i = 0; i < named.size(); ++i) *named[i].value = optimizer.shadow[i];
  return out;
}

void write_metric(std::ostream& out, const MetricRecord& m) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "step %ld loss %.17g tactic_loss %.17g pairwise_loss %.17g aucroc_loss %.17g tactic_accuracy %.17g "
                "premise_accuracy %.17g\n",
                m.step, m.loss.total, m.loss.tactic, m.loss.pairwise, m.loss.aucroc, m.tactic_accuracy,
                m.premise_accuracy);
  out << buf << std::flush;
}

template <typename T>
TrainResult<T> train(const TrainConfig& config, const TheoremDb& db, std::span<const ProofStep> train_steps,
                     std::span<const ProofStep> eval_steps, std::ostream* log) {
  if (train_steps.empty()) throw std::invalid_argument("no training examples");
  if (eval_steps.empty()) throw std::invalid_argument("no evaluation examples");
  Rng rng(config.seed);
  TrainResult<T> result;
  Model<T>& model = result.live;
  model.config = config.model;
  model.vocabulary = build_vocabulary(db, train_steps);
  model.params = make_model_params<T>(config.model, model.vocabulary.size(), rng);
  const TrainingSet data = make_training_set(db, train_steps, config.model.representation);

  auto named = collect_parameters(model.params);
  const auto params = pointers(named);
  result.optimizer = make_optimizer_state<T>(config.adam, params);
  result.selected = model;
  double best = -std::numeric_limits<double>::infinity();
  LossComponents running;
  long counted = 0;

  for (long step = 1; step <= config.steps; ++step) {
    const TrainingBatch batch = build_batch(data, config.model, rng);
    LossAndGrads<T> lg = compute_loss(model, data, batch, true, rng);
    result.steps_run = step;
    if (!std::isfinite(lg.loss.total)) {
      std::clog << "train: non-finite loss at step " << step << ", update skipped\n";
    } else {
      auto grad_named = collect_parameters(lg.grads);
      std::vector<const Matrix<T>*> grads;
      for (auto& g : grad_named) grads.push_back(g.value);
      if (adam_step<T>(result.optimizer, params, grads)) {
        running.tactic += lg.loss.tactic;
        running.pairwise += lg.loss.pairwise;
        running.aucroc += lg.loss.aucroc;
        running.total += lg.loss.total;
        ++counted;
      }
    }
    if (step % config.eval_every != 0 && step != config.steps) continue;
    const Model<T> evaluated = parameters_of(model, result.optimizer, config.eval_params);
    MetricRecord m = evaluate_metrics(evaluated, db, eval_steps, config.metric_seed);
    m.step = step;
    if (counted > 0) {
      const double n = static_cast<double>(counted);
      m.loss = {running.tactic / n, running.pairwise / n, running.aucroc / n, running.total / n};
    }
    running = {};
    counted = 0;
    if (log) write_metric(*log, m);
    result.metrics.push_back(m);
    if (m.selection_score() > best) {
      best = m.selection_score();
      result.selected = evaluated;
    }
    if (config.target_accuracy && m.tactic_accuracy >= *config.target_accuracy &&
        m.premise_accuracy >= *config.target_accuracy) {
      break;
    }
  }
  return result;
}

template <typename T>
void save_training_checkpoint(const std::filesystem::path& path, const Model<T>& model,
                              const OptimizerState<T>* optimizer, const nlohmann::json& extra) {
  nlohmann::json meta = extra.is_object() ? extra : nlohmann::json::object();
  Checkpoint<T> ck = to_checkpoint(model, meta);
  if (optimizer) {
    ck.metadata["optimizer"] = {{"adam", adam_json(optimizer->config)},
                                {"step", optimizer->step},
                                {"skipped", optimizer->skipped}};
    const std::size_t n = ck.tensors.size();
    if (optimizer->shadow.size() != n) throw std::runtime_error("optimizer state does not match the model");
    for (std::size_t i = 0; i < n; ++i) {
      const std::string name = ck.tensors[i].first;
      ck.tensors.emplace_back("adam_m/" + name, optimizer->first_moment[i]);
      ck.tensors.emplace_back("adam_v/" + name, optimizer->second_moment[i]);
      ck.tensors.emplace_back("shadow/" + name, optimizer->shadow[i]);
    }
  }
  save_checkpoint(path, ck);
}

template <typename T>
LoadedCheckpoint<T> load_training_checkpoint(const std::filesystem::path& path) {
  const Checkpoint<T> ck = load_checkpoint<T>(path);
  LoadedCheckpoint<T> out{from_checkpoint(ck), std::nullopt, ck.metadata};
  if (ck.metadata.contains("optimizer")) {
    const auto& o = ck.metadata.at("optimizer");
    OptimizerState<T> state;
    state.config = adam_from_json(o.at("adam"));
    state.step = o.at("step").template get<long>();
    state.skipped = o.at("skipped").template get<long>();
    for (const auto& p : collect_parameters(out.model.params)) {
      state.first_moment.push_back(ck.tensor("adam_m/" + p.name));
      state.second_moment.push_back(ck.tensor("adam_v/" + p.name));
      state.shadow.push_back(ck.tensor("shadow/" + p.name));
    }
    out.optimizer = std::move(state);
  }
  return out;
}

template <typename T>
Model<T> load_model(const std::filesystem::path& path, ParamSource source) {
  LoadedCheckpoint<T> loaded = load_training_checkpoint<T>(path);
  if (source == ParamSource::Averaged && loaded.optimizer) {
    return parameters_of(loaded.model, *loaded.optimizer, source);
  }
  return std::move(loaded.model);
}

#define HOLGRAPH_INSTANTIATE(T)                                                                                  \
  template MetricRecord evaluate_metrics<T>(const Model<T>&, const TheoremDb&, std::span<const ProofStep>,      \
                                            std::uint64_t);                                                      \
  template Model<T> parameters_of<T>(const Model<T>&, const OptimizerState<T>&, ParamSource);                    \
  template TrainResult<T> train<T>(const TrainConfig&, const TheoremDb&, std::span<const ProofStep>,             \
                                   std::span<const ProofStep>, std::ostream*);                                   \
  template void save_training_checkpoint<T>(const std::filesystem::path&, const Model<T>&,                       \
                                            const OptimizerState<T>*, const nlohmann::json&);                    \
  template LoadedCheckpoint<T> load_training_checkpoint<T>(const std::filesystem::path&);                        \
  template Model<T> load_model<T>(const std::filesystem::path&, ParamSource);

HOLGRAPH_INSTANTIATE(float)
HOLGRAPH_INSTANTIATE(double)

#undef HOLGRAPH_INSTANTIATE

}  // namespace holgraph
