#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "holgraph/sexpr.hpp"

namespace holgraph {

struct Prediction {
  std::vector<double> tactic_logits;
  std::vector<double> premise_scores;  // aligned with the candidates
};

/// Anything that can rank tactics and premises for a goal.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual Prediction predict(const SExpr& goal, std::span<const std::size_t> candidates) = 0;
};

struct RankedPremise {
  std::size_t index;
  double score;
};

/// Descending score, ties to the lower index; at most k entries.
std::vector<RankedPremise> top_k(std::span<const std::size_t> indices, std::span<const double> scores, std::size_t k);

/// Ids 0..n-1 of the k largest values, ties to the lower id.
std::vector<std::size_t> top_k_ids(std::span<const double> values, std::size_t k);

}  // namespace holgraph
