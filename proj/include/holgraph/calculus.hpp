#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "holgraph/sexpr.hpp"

namespace holgraph {

/// Simulated tactic engine over HOL-style terms. Tactics:
///   0  reflexivity: closes `!x1..xn. s = s`
///   1  conjunction split: `!xs. P /\ Q` -> `!xs. P`, `!xs. Q`
///   2  one-shot rewrite: the first cited premise `!ys. l = r` whose `l`
///      matches a subterm of the goal body rewrites its leftmost-outermost
///      occurrence; closes the goal when the result is `s = s`
///   3..40 inert, always fail.
namespace tactics {
inline constexpr int kRefl = 0;
inline constexpr int kConj = 1;
inline constexpr int kRewrite = 2;
inline constexpr int kCount = 41;
}  // namespace tactics

const char* tactic_name(int tactic);

class TacticError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Failed {
  bool operator==(const Failed&) const = default;
};
struct Closed {
  bool operator==(const Closed&) const = default;
};
struct Subgoals {
  std::vector<SExpr> goals;  // never empty
  bool operator==(const Subgoals&) const = default;
};
using TacticOutcome = std::variant<Failed, Closed, Subgoals>;

/// `premises` are statements, in the order they are cited. Throws
/// TacticError for a tactic id outside 0..40.
TacticOutcome apply_tactic(const SExpr& goal, int tactic, std::span<const SExpr> premises);

// Term construction helpers shared by the corpus generator and the tests.
namespace term {

SExpr type_fun(const SExpr& from, const SExpr& to);
SExpr var(const SExpr& type, const std::string& name);
SExpr constant(const SExpr& type, const std::string& name);
SExpr app(const SExpr& f, const SExpr& x);
SExpr lambda(const SExpr& variable, const SExpr& body);
SExpr eq(const SExpr& type, const SExpr& lhs, const SExpr& rhs);
SExpr conj(const SExpr& p, const SExpr& q);
SExpr forall(const SExpr& variable, const SExpr& body);
SExpr bool_type();

/// Type of a well-formed term; throws TacticError on ill-typed input.
SExpr type_of(const SExpr& t);

struct Equation {
  SExpr lhs, rhs;
};
std::optional<Equation> as_eq(const SExpr& t);
std::optional<std::pair<SExpr, SExpr>> as_conj(const SExpr& t);

/// Strips leading universal quantifiers: bound variables, outermost first.
std::pair<std::vector<SExpr>, SExpr> strip_forall(const SExpr& t);
SExpr list_forall(const std::vector<SExpr>& variables, SExpr body);

using Substitution = std::vector<std::pair<SExpr, SExpr>>;  // variable -> term

/// Matches `pattern` against `t`, treating `pattern_vars` as placeholders
/// that bind type-compatible subterms consistently.
bool match(const SExpr& pattern, const SExpr& t, std::span<const SExpr> pattern_vars, Substitution& sigma);
SExpr instantiate(const SExpr& t, const Substitution& sigma);

/// Rewrites the leftmost-outermost subterm of `t` matching `lhs`.
std::optional<SExpr> rewrite_once(const SExpr& t, const SExpr& lhs, const SExpr& rhs,
                                  std::span<const SExpr> pattern_vars);

}  // namespace term

}  // namespace holgraph
