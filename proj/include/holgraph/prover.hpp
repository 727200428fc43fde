#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "holgraph/calculus.hpp"
#include "holgraph/corpus.hpp"
#include "holgraph/policy.hpp"

namespace holgraph {

struct ProverConfig {
  std::size_t k1 = 5;   // tactics tried per goal
  std::size_t k2 = 20;  // premises attached to each tactic
  std::size_t max_expansions = 100;
  double time_limit_seconds = 60.0;
};

enum class GoalStatus { Open, Closed, Failed };

/// One tactic application that succeeded on a goal.
struct Application {
  int tactic = 0;
  std::vector<std::size_t> premises;
  std::vector<std::size_t> subgoals;  // goal node ids; empty when it closed the goal
};

struct GoalNode {
  SExpr goal;
  GoalStatus status = GoalStatus::Open;
  bool expanded = false;
  std::vector<Application> applications;  // alternative branches
};

struct FailedAttempt {
  std::size_t goal;
  int tactic;
};

/// Search graph of one theorem. Goals are deduplicated by S-expression.
struct ProofSearchState {
  std::vector<GoalNode> nodes;  // node 0 is the theorem
  std::map<std::string, std::size_t> ids;
  std::vector<FailedAttempt> failures;
  std::size_t expansions = 0;
  std::size_t attempts = 0;
  std::size_t successes = 0;
};

/// One step of an extracted proof: the goal, the tactic and its premises.
struct ProofRecord {
  SExpr goal;
  int tactic = 0;
  std::vector<std::size_t> premises;
};

struct ProofResult {
  bool closed = false;
  std::size_t proof_length = 0;  // tactic applications in the closing proof
  std::size_t expansions = 0;
  std::size_t attempts = 0;
  std::size_t successes = 0;
  std::vector<ProofRecord> proof;  // preorder; empty unless closed
};

/// Breadth-first search from the statement of `theorem`: each dequeued goal
/// is scored once, its top-k1 tactics are applied with the top-k2 eligible
/// premises, new subgoals are queued FIFO. Stops when the theorem closes or a
/// budget runs out.
ProofResult prove(const TheoremDb& db, std::size_t theorem, Policy& policy, const ProverConfig& config,
                  ProofSearchState* state = nullptr);

/// Re-checks a proof with apply_tactic alone.
bool replay_proof(const TheoremDb& db, std::size_t theorem, std::span<const ProofRecord> proof);

struct TheoremReport {
  std::size_t theorem = 0;
  ProofResult result;
  bool replayed = false;
};

struct EvaluationReport {
  std::vector<TheoremReport> theorems;

  std::size_t closed() const;
  double closed_fraction() const;
  double mean_proof_length() const;  // over closed theorems
  double success_rate() const;       // successful / attempted tactic applications
  bool all_closures_replay() const;
};

EvaluationReport evaluate_prover(const TheoremDb& db, std::span<const std::size_t> theorems, Policy& policy,
                                 const ProverConfig& config);

/// One `theorem ...` line per theorem and a `summary ...` footer.
void write_report(std::ostream& out, const EvaluationReport& report);

/// Uniform random tactic logits and premise scores.
class RandomPolicy : public Policy {
 public:
  explicit RandomPolicy(std::uint64_t seed, std::size_t tactic_count = tactics::kCount);
  Prediction predict(const SExpr& goal, std::span<const std::size_t> candidates) override;

 private:
  Rng rng_;
  std::size_t tactic_count_;
};

/// Replays a proof log: the logged tactic and premises of a goal score 1,
/// everything else 0.
class ReplayPolicy : public Policy {
 public:
  explicit ReplayPolicy(const ProofLog& log, std::size_t tactic_count = tactics::kCount);
  Prediction predict(const SExpr& goal, std::span<const std::size_t> candidates) override;

 private:
  std::map<std::string, const ProofStep*> steps_;
  std::size_t tactic_count_;
};

}  // namespace holgraph
