#include "holgraph/prover.hpp"

#include <chrono>
#include <deque>
#include <functional>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>

namespace holgraph {

namespace {

constexpr std::size_t kUnclosed = std::numeric_limits<std::size_t>::max();

std::size_t intern(ProofSearchState& s, const SExpr& goal, std::deque<std::size_t>& queue) {
  std::string key = serialize(goal);
  auto it = s.ids.find(key);
  if (it != s.ids.end()) return it->second;
  const std::size_t id = s.nodes.size();
  s.nodes.push_back({goal, GoalStatus::Open, false, {}});
  s.ids.emplace(std::move(key), id);
  queue.push_back(id);
  return id;
}

// Least fixpoint of "some application has all subgoals closed". A node's rank
// is the pass in which it closed; its justifying application only uses nodes
// of lower rank, so extracted proofs are well founded.
std::vector<std::size_t> closure_ranks(const ProofSearchState& s) {
  std::vector<std::size_t> rank(s.nodes.size(), kUnclosed);
  for (std::size_t pass = 1;; ++pass) {
    std::vector<std::size_t> newly;
    for (std::size_t i = 0; i < s.nodes.size(); ++i) {
      if (rank[i] != kUnclosed) continue;
      for (const auto& app : s.nodes[i].applications) {
        bool ok = true;
        for (std::size_t c : app.subgoals) ok = ok && rank[c] < pass;
        if (ok) {
          newly.push_back(i);
          break;
        }
      }
    }
    if (newly.empty()) return rank;
    for (std::size_t i : newly) rank[i] = pass;
  }
}

void extract(const ProofSearchState& s, const std::vector<std::size_t>& rank, std::size_t node,
             std::set<std::size_t>& seen, std::vector<ProofRecord>& out) {
  if (!seen.insert(node).second) return;
  for (const auto& app : s.nodes[node].applications) {
    bool ok = true;
    for (std::size_t c : app.subgoals) ok = ok && rank[c] < rank[node];
    if (!ok) continue;
    out.push_back({s.nodes[node].goal, app.tactic, app.premises});
    for (std::size_t c : app.subgoals) extract(s, rank, c, seen, out);
    return;
  }
}

}  // namespace

ProofResult prove(const TheoremDb& db, std::size_t theorem, Policy& policy, const ProverConfig& config,
                  ProofSearchState* state) {
  ProofSearchState local;
  ProofSearchState& s = state ? *state : local;
  s = ProofSearchState{};
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::size_t> eligible(theorem);
  std::iota(eligible.begin(), eligible.end(), std::size_t{0});

  std::deque<std::size_t> queue;
  intern(s, db.at(theorem).statement, queue);
  std::vector<std::size_t> rank(1, kUnclosed);
  std::vector<SExpr> cited;

  while (!queue.empty() && s.expansions < config.max_expansions && rank[0] == kUnclosed) {
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed > config.time_limit_seconds) break;
    const std::size_t id = queue.front();
    queue.pop_front();
    ++s.expansions;
    s.nodes[id].expanded = true;
    const SExpr goal = s.nodes[id].goal;
    const Prediction p = policy.predict(goal, eligible);
    const auto premises = top_k(eligible, p.premise_scores, config.k2);
    std::vector<std::size_t> premise_ids;
    cited.clear();
    for (const auto& r : premises) {
      premise_ids.push_back(r.index);
      cited.push_back(db.at(r.index).statement);
    }
    for (std::size_t tactic : top_k_ids(p.tactic_logits, config.k1)) {
      ++s.attempts;
      const TacticOutcome outcome = apply_tactic(goal, static_cast<int>(tactic), cited);
      if (std::holds_alternative<Failed>(outcome)) {
        s.failures.push_back({id, static_cast<int>(tactic)});
        continue;
      }
      ++s.successes;
      Application app{static_cast<int>(tactic), premise_ids, {}};
      if (const auto* sub = std::get_if<Subgoals>(&outcome)) {
        for (const SExpr& g : sub->goals) app.subgoals.push_back(intern(s, g, queue));
      }
      s.nodes[id].applications.push_back(std::move(app));
    }
    rank = closure_ranks(s);
  }

  rank = closure_ranks(s);
  for (std::size_t i = 0; i < s.nodes.size(); ++i) {
    auto& n = s.nodes[i];
    n.status = rank[i] != kUnclosed ? GoalStatus::Closed
               : n.expanded && n.applications.empty() ? GoalStatus::Failed
                                                      : GoalStatus::Open;
  }
  ProofResult result;
  result.expansions = s.expansions;
  result.attempts = s.attempts;
  result.successes = s.successes;
  result.closed = rank[0] != kUnclosed;
  if (result.closed) {
    std::set<std::size_t> seen;
    extract(s, rank, 0, seen, result.proof);
    result.proof_length = result.proof.size();
  }
  return result;
}

bool replay_proof(const TheoremDb& db, std::size_t theorem, std::span<const ProofRecord> proof) {
  std::map<std::string, const ProofRecord*> by_goal;
  for (const auto& r : proof) by_goal.emplace(serialize(r.goal), &r);
  std::function<bool(const SExpr&, std::size_t)> check = [&](const SExpr& goal, std::size_t depth) {
    if (depth > proof.size()) return false;
    auto it = by_goal.find(serialize(goal));
    if (it == by_goal.end()) return false;
    const ProofRecord& r = *it->second;
    std::vector<SExpr> premises;
    for (std::size_t p : r.premises) {
      if (p >= theorem) return false;
      premises.push_back(db.at(p).statement);
    }
    const TacticOutcome outcome = apply_tactic(goal, r.tactic, premises);
    if (std::holds_alternative<Closed>(outcome)) return true;
    if (const auto* sub = std::get_if<Subgoals>(&outcome)) {
      for (const SExpr& g : sub->goals) {
        if (!check(g, depth + 1)) return false;
      }
      return true;
    }
    return false;
  };
  return !proof.empty() && check(db.at(theorem).statement, 0);
}

std::size_t EvaluationReport::closed() const {
  std::size_t n = 0;
  for (const auto& t : theorems) n += t.result.closed ? 1 : 0;
  return n;
}

double EvaluationReport::closed_fraction() const {
  return theorems.empty() ? 0.0 : static_cast<double>(closed()) / static_cast<double>(theorems.size());
}

double EvaluationReport::mean_proof_length() const {
  std::size_t total = 0;
  for (const auto& t : theorems) total += t.result.closed ? t.result.proof_length : 0;
  const std::size_t n = closed();
  return n ? static_cast<double>(total) / static_cast<double>(n) : 0.0;
}

double EvaluationReport::success_rate() const {
  std::size_t attempts = 0, successes = 0;
  for (const auto& t : theorems) {
    attempts += t.result.attempts;
    successes += t.result.successes;
  }
  return attempts ? static_cast<double>(successes) / static_cast<double>(attempts) : 0.0;
}

bool EvaluationReport::all_closures_replay() const {
  for (const auto& t : theorems) {
    if (t.result.closed && !t.replayed) return false;
  }
  return true;
}

EvaluationReport evaluate_prover(const TheoremDb& db, std::span<const std::size_t> theorems, Policy& policy,
                                 const ProverConfig& config) {
  if (theorems.empty()) throw std::invalid_argument("no theorems to prove");
  EvaluationReport report;
  for (std::size_t t : theorems) {
    TheoremReport r;
    r.theorem = t;
    r.result = prove(db, t, policy, config);
    r.replayed = r.result.closed && replay_proof(db, t, r.result.proof);
    report.theorems.push_back(std::move(r));
  }
  return report;
}

void write_report(std::ostream& out, const EvaluationReport& report) {
  for (const auto& t : report.theorems) {
    const auto& r = t.result;
    out << "theorem " << t.theorem << " closed " << (r.closed ? 1 : 0) << " length " << r.proof_length
        << " expansions " << r.expansions << " successes " << r.successes << " attempts " << r.attempts
        << " replayed " << (t.replayed ? 1 : 0) << '\n';
  }
  out << std::setprecision(6) << "summary theorems " << report.theorems.size() << " closed " << report.closed()
      << " fraction " << report.closed_fraction() << " mean_length " << report.mean_proof_length()
      << " success_rate " << report.success_rate() << '\n';
}

RandomPolicy::RandomPolicy(std::uint64_t seed, std::size_t tactic_count) : rng_(seed), tactic_count_(tactic_count) {}

Prediction RandomPolicy::predict(const SExpr&, std::span<const std::size_t> candidates) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Prediction p;
  for (std::size_t i = 0; i < tactic_count_; ++i) p.tactic_logits.push_back(unit(rng_));
  for (std::size_t i = 0; i < candidates.size(); ++i) p.premise_scores.push_back(unit(rng_));
  return p;
}

ReplayPolicy::ReplayPolicy(const ProofLog& log, std::size_t tactic_count) : tactic_count_(tactic_count) {
  for (const auto& s : log) steps_.emplace(serialize(s.goal), &s);
}

Prediction ReplayPolicy::predict(const SExpr& goal, std::span<const std::size_t> candidates) {
  Prediction p;
  p.tactic_logits.assign(tactic_count_, 0.0);
  p.premise_scores.assign(candidates.size(), 0.0);
  auto it = steps_.find(serialize(goal));
  if (it == steps_.end()) return p;
  const ProofStep& s = *it->second;
  p.tactic_logits.at(static_cast<std::size_t>(s.tactic)) = 1.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    for (std::size_t k = 0; k < s.premises.size(); ++k) {
      // Earlier cited premises rank higher.
      if (candidates[i] == s.premises[k]) p.premise_scores[i] = 2.0 - static_cast<double>(k) / s.premises.size();
    }
  }
  return p;
}

}  // namespace holgraph
