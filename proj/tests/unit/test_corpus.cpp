#include <doctest.h>

#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "holgraph/prover.hpp"

using namespace holgraph;

namespace {

ToyCorpus corpus(std::uint64_t seed, std::size_t theorems = 60) {
  ToyCorpusOptions o;
  o.seed = seed;
  o.theorems = theorems;
  return generate_toy_corpus(o);
}

std::size_t error_line(const std::string& db_text) {
  std::istringstream in(db_text);
  try {
    read_theorem_db(in);
  } catch (const CorpusError& e) {
    return e.line();
  }
  return 0;
}

std::size_t log_error_line(const std::string& log_text) {
  std::istringstream in(log_text);
  try {
    read_proof_log(in);
  } catch (const CorpusError& e) {
    return e.line();
  }
  return 0;
}

const std::string kTwoRecords = "def 0 train d0 (c A k)\nthm 1 valid t1 (c A k)\n";

}  // namespace

TEST_CASE("generator is deterministic in its seed") {
  const ToyCorpus a = corpus(3), b = corpus(3), c = corpus(4);
  CHECK(a.db == b.db);
  CHECK(a.log == b.log);
  CHECK_FALSE(a.db == c.db);
}

TEST_CASE("generated corpus is consistent") {
  const ToyCorpus c = corpus(1);
  CHECK_NOTHROW(validate(c.log, c.db));
  std::size_t theorems = 0;
  for (const auto& r : c.db.records) theorems += r.kind == TheoremKind::Theorem ? 1 : 0;
  CHECK(theorems == 60);
  for (const auto& s : c.log) {
    CHECK(c.db.at(s.theorem).kind == TheoremKind::Theorem);
    for (std::size_t p : s.premises) CHECK(p < s.theorem);
    CHECK(s.tactic < tactics::kCount);
  }
  const auto valid = theorems_in_split(c.db, Split::Valid);
  CHECK_FALSE(valid.empty());
  for (const auto& s : select_split(c.log, c.db, Split::Valid)) {
    CHECK(c.db.at(s.theorem).split == Split::Valid);
  }
  const auto pool = negative_pool(c.log);
  std::set<std::size_t> cited;
  for (const auto& s : c.log) cited.insert(s.premises.begin(), s.premises.end());
  CHECK(std::set<std::size_t>(pool.begin(), pool.end()) == cited);
}

TEST_CASE("every generated theorem is closed by replaying its log") {
  const ToyCorpus c = corpus(2);
  std::set<std::size_t> logged;
  for (const auto& s : c.log) logged.insert(s.theorem);
  const std::vector<std::size_t> targets(logged.begin(), logged.end());
  ReplayPolicy replay(c.log);
  const EvaluationReport report = evaluate_prover(c.db, targets, replay, ProverConfig{});
  CHECK(report.closed() == targets.size());
  CHECK(report.all_closures_replay());
}

TEST_CASE("database and log survive a text roundtrip") {
  const ToyCorpus c = corpus(5);
  std::stringstream db_text, log_text;
  write_theorem_db(db_text, c.db);
  write_proof_log(log_text, c.log);
  CHECK(read_theorem_db(db_text) == c.db);
  CHECK(read_proof_log(log_text) == c.log);
}

TEST_CASE("malformed files report the offending line") {
  CHECK(error_line(kTwoRecords) == 0);
  CHECK(error_line("def 0 train d0 (c A k)\nlemma 1 train t1 (c A k)\n") == 2);
  CHECK(error_line("def 0 train d0 (c A k)\nthm 2 train t1 (c A k)\n") == 2);
  CHECK(error_line("def 0 train d0 (c A k\n") == 1);
  CHECK(error_line("def 0 sideways d0 (c A k)\n") == 1);
  CHECK(error_line("def 0 train\n") == 1);

  CHECK(log_error_line("step 1 2 0 (c A k)\n") == 0);
  CHECK(log_error_line("step 1 2 0 (c A k)\nstep 1 41 0 (c A k)\n") == 2);
  CHECK(log_error_line("step 1 2 1 (c A k)\n") == 1);
  CHECK(log_error_line("step 1 2 0 (c A k\n") == 1);
  CHECK(log_error_line("step 1 x NONE (c A k)\n") == 1);

  std::istringstream db_in(kTwoRecords), log_in("step 5 0 NONE (c A k)\n");
  const TheoremDb db = read_theorem_db(db_in);
  CHECK_THROWS_AS(validate(read_proof_log(log_in), db), CorpusError);
}

namespace {

// Knows the cited premises of every logged goal.
class OraclePolicy : public Policy {
 public:
  explicit OraclePolicy(const ProofLog& log) {
    for (const auto& s : log) cited_[serialize(s.goal)] = s.premises;
  }
  Prediction predict(const SExpr& goal, std::span<const std::size_t> candidates) override {
    Prediction p;
    p.tactic_logits.assign(tactics::kCount, 0.0);
    const auto& cited = cited_.at(serialize(goal));
    for (std::size_t c : candidates)
      p.premise_scores.push_back(std::find(cited.begin(), cited.end(), c) != cited.end() ? 1.0 : 0.0);
    return p;
  }

 private:
  std::map<std::string, std::vector<std::size_t>> cited_;
};

}  // namespace

TEST_CASE("proxy metrics on oracle and random policies") {
  const ToyCorpus c = corpus(6);
  OraclePolicy oracle(c.log);
  Rng rng(1);
  const PremiseAccuracy perfect = relative_premise_accuracy(oracle, c.log, rng);
  CHECK(perfect.comparisons > 0);
  CHECK(perfect.fraction() == 1.0);

  RandomPolicy random(9);
  std::size_t comparisons = 0, wins = 0;
  for (int round = 0; round < 20; ++round) {
    const PremiseAccuracy a = relative_premise_accuracy(random, c.log, rng);
    comparisons += a.comparisons;
    wins += a.wins;
  }
  const double chance = static_cast<double>(wins) / static_cast<double>(comparisons);
  CHECK(chance > 0.45);
  CHECK(chance < 0.55);

  ReplayPolicy replay(c.log);
  CHECK(tactic_accuracy(replay, c.log) == 1.0);
  CHECK_THROWS_AS(tactic_accuracy(replay, std::span<const ProofStep>{}), std::invalid_argument);
}
