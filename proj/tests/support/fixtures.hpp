#pragma once

#include <string>

#include "holgraph/corpus.hpp"
#include "holgraph/model.hpp"
#include "holgraph/training.hpp"

namespace fixtures {

inline const std::string kForallRefl =
    "(a (c (fun (fun A bool) bool) !) (l (v A x) (a (a (c (fun A (fun A bool)) =) (v A x)) (v A x))))";

inline std::string data_path(const std::string& name) { return std::string(HOLGRAPH_TEST_DATA) + "/" + name; }

// Narrow architecture so finite differences stay cheap.
inline holgraph::ModelConfig tiny_config(int hops) {
  holgraph::ModelConfig c;
  c.gnn.hops = hops;
  c.gnn.token_dim = 6;
  c.gnn.node_dim = 5;
  c.gnn.hidden_dim = 7;
  c.gnn.pool_widths = {8, 9};
  c.tactic_widths = {6, 5};
  c.combiner_widths = {7, 4};
  c.goals_per_batch = 2;
  c.negatives_per_goal = 3;
  return c;
}

}  // namespace fixtures
