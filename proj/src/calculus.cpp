#include "holgraph/calculus.hpp"

#include <algorithm>

namespace holgraph {

const char* tactic_name(int tactic) {
  switch (tactic) {
    case tactics::kRefl:
      return "REFL_TAC";
    case tactics::kConj:
      return "CONJ_TAC";
    case tactics::kRewrite:
      return "ONCE_REWRITE_TAC";
    default:
      return tactic >= 0 && tactic < tactics::kCount ? "INERT_TAC" : "UNKNOWN";
  }
}

namespace term {

namespace {

const SExpr& child(const SExpr& t, std::size_t i) { return t.children().at(i); }

bool is_constant(const SExpr& t, std::string_view name) {
  return !t.is_atom() && t.head() == "c" && t.children().size() == 3 && child(t, 2).is_atom() &&
         child(t, 2).token() == name;
}

// (a (a (c _ name) x) y) -> {x, y}
std::optional<std::pair<SExpr, SExpr>> as_binary(const SExpr& t, std::string_view name) {
  if (t.is_atom() || t.head() != "a" || t.children().size() != 3) return std::nullopt;
  const SExpr& inner = child(t, 1);
  if (inner.is_atom() || inner.head() != "a" || inner.children().size() != 3) return std::nullopt;
  if (!is_constant(child(inner, 1), name)) return std::nullopt;
  return std::make_pair(child(inner, 2), child(t, 2));
}

bool is_pattern_var(const SExpr& t, std::span<const SExpr> vars) {
  return std::find(vars.begin(), vars.end(), t) != vars.end();
}

}  // namespace

SExpr bool_type() { return SExpr::atom("bool"); }
SExpr type_fun(const SExpr& from, const SExpr& to) { return SExpr::node({SExpr::atom("fun"), from, to}); }
SExpr var(const SExpr& type, const std::string& name) {
  return SExpr::node({SExpr::atom("v"), type, SExpr::atom(name)});
}
SExpr constant(const SExpr& type, const std::string& name) {
  return SExpr::node({SExpr::atom("c"), type, SExpr::atom(name)});
}
SExpr app(const SExpr& f, const SExpr& x) { return SExpr::node({SExpr::atom("a"), f, x}); }
SExpr lambda(const SExpr& variable, const SExpr& body) { return SExpr::node({SExpr::atom("l"), variable, body}); }

SExpr eq(const SExpr& type, const SExpr& lhs, const SExpr& rhs) {
  return app(app(constant(type_fun(type, type_fun(type, bool_type())), "="), lhs), rhs);
}

SExpr conj(const SExpr& p, const SExpr& q) {
  return app(app(constant(type_fun(bool_type(), type_fun(bool_type(), bool_type())), "/\\"), p), q);
}

SExpr forall(const SExpr& variable, const SExpr& body) {
  const SExpr& type = child(variable, 1);
  return app(constant(type_fun(type_fun(type, bool_type()), bool_type()), "!"), lambda(variable, body));
}

SExpr type_of(const SExpr& t) {
  if (t.is_atom()) throw TacticError("not a term: " + t.token());
  const std::string_view head = t.head();
  if ((head == "v" || head == "c") && t.children().size() == 3) return child(t, 1);
  if (head == "a" && t.children().size() == 3) {
    const SExpr f = type_of(child(t, 1));
    if (f.is_atom() || f.head() != "fun" || f.children().size() != 3) throw TacticError("applying a non-function");
    if (type_of(child(t, 2)) != child(f, 1)) throw TacticError("argument type mismatch");
    return child(f, 2);
  }
  if (head == "l" && t.children().size() == 3) return type_fun(type_of(child(t, 1)), type_of(child(t, 2)));
  throw TacticError("not a term: " + serialize(t));
}

std::optional<Equation> as_eq(const SExpr& t) {
  auto b = as_binary(t, "=");
  if (!b) return std::nullopt;
  return Equation{b->first, b->second};
}

std::optional<std::pair<SExpr, SExpr>> as_conj(const SExpr& t) { return as_binary(t, "/\\"); }

std::pair<std::vector<SExpr>, SExpr> strip_forall(const SExpr& t) {
  std::vector<SExpr> vars;
  const SExpr* cur = &t;
  while (!cur->is_atom() && cur->head() == "a" && cur->children().size() == 3 && is_constant(child(*cur, 1), "!")) {
    const SExpr& abs = child(*cur, 2);
    if (abs.is_atom() || abs.head() != "l" || abs.children().size() != 3) break;
    vars.push_back(child(abs, 1));
    cur = &child(abs, 2);
  }
  return {std::move(vars), *cur};
}

SExpr list_forall(const std::vector<SExpr>& variables, SExpr body) {
  for (auto it = variables.rbegin(); it != variables.rend(); ++it) body = forall(*it, body);
  return body;
}

bool match(const SExpr& pattern, const SExpr& t, std::span<const SExpr> pattern_vars, Substitution& sigma) {
  if (is_pattern_var(pattern, pattern_vars)) {
    for (const auto& [v, bound] : sigma) {
      if (v == pattern) return bound == t;
    }
    try {
      if (type_of(t) != child(pattern, 1)) return false;
    } catch (const TacticError&) {
      return false;
    }
    sigma.emplace_back(pattern, t);
    return true;
  }
  if (!pattern.is_atom() && pattern.head() == "a" && pattern.children().size() == 3) {
    if (t.is_atom() || t.head() != "a" || t.children().size() != 3) return false;
    const std::size_t mark = sigma.size();
    if (match(child(pattern, 1), child(t, 1), pattern_vars, sigma) &&
        match(child(pattern, 2), child(t, 2), pattern_vars, sigma)) {
      return true;
    }
    sigma.resize(mark);
    return false;
  }
  return pattern == t;
}

SExpr instantiate(const SExpr& t, const Substitution& sigma) {
  for (const auto& [v, bound] : sigma) {
    if (v == t) return bound;
  }
  if (t.is_atom() || (t.head() != "a" && t.head() != "l")) return t;
  std::vector<SExpr> children = t.children();
  for (std::size_t i = 1; i < children.size(); ++i) children[i] = instantiate(children[i], sigma);
  return SExpr::node(std::move(children));
}

std::optional<SExpr> rewrite_once(const SExpr& t, const SExpr& lhs, const SExpr& rhs,
                                  std::span<const SExpr> pattern_vars) {
  Substitution sigma;
  if (match(lhs, t, pattern_vars, sigma)) return instantiate(rhs, sigma);
  if (t.is_atom() || t.children().size() != 3) return std::nullopt;
  if (t.head() == "a") {
    if (auto f = rewrite_once(child(t, 1), lhs, rhs, pattern_vars)) return app(*f, child(t, 2));
    if (auto x = rewrite_once(child(t, 2), lhs, rhs, pattern_vars)) return app(child(t, 1), *x);
  } else if (t.head() == "l") {
    if (auto b = rewrite_once(child(t, 2), lhs, rhs, pattern_vars)) return lambda(child(t, 1), *b);
  }
  return std::nullopt;
}

}  // namespace term

TacticOutcome apply_tactic(const SExpr& goal, int tactic, std::span<const SExpr> premises) {
  if (tactic < 0 || tactic >= tactics::kCount) throw TacticError("unknown tactic id " + std::to_string(tactic));
  auto [vars, body] = term::strip_forall(goal);
  switch (tactic) {
    case tactics::kRefl: {
      auto e = term::as_eq(body);
      if (e && e->lhs == e->rhs) return Closed{};
      return Failed{};
    }
    case tactics::kConj: {
      auto c = term::as_conj(body);
      if (!c) return Failed{};
      return Subgoals{{term::list_forall(vars, c->first), term::list_forall(vars, c->second)}};
    }
    case tactics::kRewrite: {
      for (const SExpr& premise : premises) {
        auto [pvars, pbody] = term::strip_forall(premise);
        auto e = term::as_eq(pbody);
        if (!e) continue;
        auto rewritten = term::rewrite_once(body, e->lhs, e->rhs, pvars);
        if (!rewritten || *rewritten == body) continue;
        auto r = term::as_eq(*rewritten);
        if (r && r->lhs == r->rhs) return Closed{};
        return Subgoals{{term::list_forall(vars, *rewritten)}};
      }
      return Failed{};
    }
    default:
      return Failed{};
  }
}

}  // namespace holgraph
