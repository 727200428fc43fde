#pragma once

#include <random>

#include "fixtures.hpp"

namespace fixtures {

using namespace holgraph;

struct MicroProblem {
  TheoremDb db;
  ProofLog log;
  TrainingSet data;
  Model<double> model;
  TrainingBatch batch;
};

inline MicroProblem micro_problem(int hops, Direction direction = Direction::Both, bool random_edges = false) {
  MicroProblem p;
  p.db = load_theorem_db(fixtures::data_path("overfit.db"));
  p.log = load_proof_log(fixtures::data_path("overfit.log"));
  ModelConfig config = fixtures::tiny_config(hops);
  config.representation.direction = direction;
  config.representation.random_edges = random_edges;
  Rng rng(11);
  p.model.config = config;
  p.model.vocabulary = build_vocabulary(p.db, p.log);
  p.model.params = make_model_params<double>(config, p.model.vocabulary.size(), rng);
  // Zero biases put ReLUs exactly on their kink for label-0 edges and for
  // rows dropout wipes out; move them to a generic point.
  std::normal_distribution<double> jitter(0.0, 0.05);
  for (auto& n : collect_parameters(p.model.params)) {
    if (n.name.ends_with("/bias")) {
      for (Eigen::Index i = 0; i < n.value->size(); ++i) n.value->data()[i] = jitter(rng);
    }
  }
  p.data = make_training_set(p.db, p.log, config.representation);
  p.batch = build_batch(p.data, config, rng);
  return p;
}

}  // namespace fixtures
