#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "holgraph/numerics.hpp"
#include "holgraph/policy.hpp"
#include "holgraph/sexpr.hpp"

namespace holgraph {

enum class TheoremKind { Theorem, Definition };
enum class Split { Train, Valid, Test };

std::string to_string(Split split);
Split parse_split(std::string_view text);

struct TheoremRecord {
  std::size_t index = 0;
  std::string name;
  SExpr statement;
  TheoremKind kind = TheoremKind::Theorem;
  Split split = Split::Train;

  bool operator==(const TheoremRecord&) const = default;
};

/// Ordered theorems and definitions. A premise is eligible for theorem t iff
/// its index is below t.
struct TheoremDb {
  std::vector<TheoremRecord> records;

  std::size_t size() const { return records.size(); }
  const TheoremRecord& at(std::size_t index) const { return records.at(index); }
  std::vector<SExpr> statements() const;
  bool operator==(const TheoremDb&) const = default;
};

struct ProofStep {
  std::size_t theorem = 0;
  int tactic = 0;
  std::vector<std::size_t> premises;  // empty when the tactic takes none
  SExpr goal;

  bool operator==(const ProofStep&) const = default;
};

using ProofLog = std::vector<ProofStep>;

class CorpusError : public std::runtime_error {
 public:
  CorpusError(const std::string& message, std::size_t line);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Lines `thm <index> <split> <name> <sexpr>` or `def ...` for definitions.
/// Blank lines and lines starting with '#' are ignored.
TheoremDb read_theorem_db(std::istream& in);
TheoremDb load_theorem_db(const std::filesystem::path& path);
void write_theorem_db(std::ostream& out, const TheoremDb& db);
void save_theorem_db(const std::filesystem::path& path, const TheoremDb& db);

/// Lines `step <thm-index> <tactic-id> <i,j,...|NONE> <goal-sexpr>`.
ProofLog read_proof_log(std::istream& in, std::size_t tactic_count = 41);
ProofLog load_proof_log(const std::filesystem::path& path, std::size_t tactic_count = 41);
void write_proof_log(std::ostream& out, const ProofLog& log);
void save_proof_log(const std::filesystem::path& path, const ProofLog& log);

/// Checks that every step names an existing theorem and cites existing,
/// preceding premises. Throws CorpusError with the 1-based step number.
void validate(const ProofLog& log, const TheoremDb& db);

/// Steps of theorems in `split`.
ProofLog select_split(const ProofLog& log, const TheoremDb& db, Split split);
std::vector<std::size_t> theorems_in_split(const TheoremDb& db, Split split);

/// Sorted theorems cited at least once in `log`.
std::vector<std::size_t> negative_pool(const ProofLog& log);

struct ToyCorpusOptions {
  std::uint64_t seed = 0;
  std::size_t theorems = 200;
  std::size_t tactic_count = 41;
  std::size_t alphabet = 6;           // unary function symbols
  double rule_density = 0.6;          // fraction of letter pairs that are rewrite rules
  double erase_probability = 0.3;     // rule right sides that drop both letters
  std::size_t min_length = 4;
  std::size_t max_length = 7;
  double conjunction_fraction = 0.2;
  double reflexive_fraction = 0.1;
  double valid_fraction = 0.15;
  double test_fraction = 0.0;
};

struct ToyCorpus {
  TheoremDb db;
  ProofLog log;
};

/// Definitions `!x. p (q x) = w x` over unary symbols, followed by theorems
/// `!x. W x = V x` where V comes from rewriting the outermost redex until
/// none remains, conjunctions of two such equations, and reflexive
/// equations. Each theorem's logged proof replays in the toy calculus.
ToyCorpus generate_toy_corpus(const ToyCorpusOptions& options);

/// Fraction of steps whose highest tactic logit (ties to the lower id) is the
/// logged tactic.
double tactic_accuracy(Policy& policy, std::span<const ProofStep> steps);

struct PremiseAccuracy {
  std::size_t comparisons = 0;
  std::size_t wins = 0;
  double fraction() const { return comparisons ? static_cast<double>(wins) / static_cast<double>(comparisons) : 0.0; }
};

/// For every logged premise, draws one eligible premise uniformly from those
/// below the step's theorem that the step does not cite, and counts how often
/// the logged one scores strictly higher. Steps without premises are skipped.
PremiseAccuracy relative_premise_accuracy(Policy& policy, std::span<const ProofStep> steps, Rng& rng);

}  // namespace holgraph
