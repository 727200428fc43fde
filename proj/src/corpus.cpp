#include "holgraph/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "holgraph/calculus.hpp"

namespace holgraph {

std::string to_string(Split split) {
  switch (split) {
    case Split::Train:
      return "train";
    case Split::Valid:
      return "valid";
    case Split::Test:
      return "test";
  }
  return "train";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::Train;
  if (text == "valid") return Split::Valid;
  if (text == "test") return Split::Test;
  throw std::invalid_argument("unknown split: " + std::string(text));
}

std::vector<SExpr> TheoremDb::statements() const {
  std::vector<SExpr> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.statement);
  return out;
}

CorpusError::CorpusError(const std::string& message, std::size_t line)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

namespace {

// Splits off `count` whitespace-separated fields; the remainder (trimmed) is
// returned in `rest`.
bool split_fields(const std::string& line, std::size_t count, std::vector<std::string>& fields, std::string& rest) {
  fields.clear();
  std::size_t pos = 0;
  for (std::size_t i = 0; i < count; ++i) {
    pos = line.find_first_not_of(" \t", pos);
    if (pos == std::string::npos) return false;
    const std::size_t end = line.find_first_of(" \t", pos);
    fields.push_back(line.substr(pos, end == std::string::npos ? std::string::npos : end - pos));
    pos = end == std::string::npos ? line.size() : end;
  }
  const std::size_t start = line.find_first_not_of(" \t", pos);
  const std::size_t stop = line.find_last_not_of(" \t\r");
  rest = start == std::string::npos || stop < start ? std::string() : line.substr(start, stop - start + 1);
  return true;
}

std::size_t parse_index(const std::string& text, std::size_t line, const char* what) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw CorpusError(std::string("bad ") + what + " '" + text + "'", line);
  }
  return value;
}

bool skip_line(const std::string& line) {
  const std::size_t pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '#';
}

SExpr parse_term(const std::string& text, std::size_t line) {
  if (text.empty()) throw CorpusError("missing S-expression", line);
  try {
    return parse(text);
  } catch (const ParseError& e) {
    throw CorpusError(std::string("bad S-expression: ") + e.what(), line);
  }
}

template <typename F>
void with_file(const std::filesystem::path& path, F&& f) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  f(in);
}

template <typename F>
void to_file(const std::filesystem::path& path, F&& f) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  f(out);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

TheoremDb read_theorem_db(std::istream& in) {
  TheoremDb db;
  std::string line, rest;
  std::vector<std::string> f;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (skip_line(line)) continue;
    if (!split_fields(line, 4, f, rest)) throw CorpusError("expected 'thm|def <index> <split> <name> <sexpr>'", n);
    TheoremRecord r;
    if (f[0] == "thm") {
      r.kind = TheoremKind::Theorem;
    } else if (f[0] == "def") {
      r.kind = TheoremKind::Definition;
    } else {
      throw CorpusError("unknown record type '" + f[0] + "'", n);
    }
    r.index = parse_index(f[1], n, "index");
    if (r.index != db.records.size()) {
      throw CorpusError("index " + f[1] + " out of order, expected " + std::to_string(db.records.size()), n);
    }
    try {
      r.split = parse_split(f[2]);
    } catch (const std::invalid_argument& e) {
      throw CorpusError(e.what(), n);
    }
    r.name = f[3];
    r.statement = parse_term(rest, n);
    db.records.push_back(std::move(r));
  }
  return db;
}

TheoremDb load_theorem_db(const std::filesystem::path& path) {
  TheoremDb db;
  with_file(path, [&](std::istream& in) { db = read_theorem_db(in); });
  return db;
}

void write_theorem_db(std::ostream& out, const TheoremDb& db) {
  for (const auto& r : db.records) {
    out << (r.kind == TheoremKind::Definition ? "def " : "thm ") << r.index << ' ' << to_string(r.split) << ' '
        << r.name << ' ' << serialize(r.statement) << '\n';
  }
}

void save_theorem_db(const std::filesystem::path& path, const TheoremDb& db) {
  to_file(path, [&](std::ostream& out) { write_theorem_db(out, db); });
}

ProofLog read_proof_log(std::istream& in, std::size_t tactic_count) {
  ProofLog log;
  std::string line, rest;
  std::vector<std::string> f;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (skip_line(line)) continue;
    if (!split_fields(line, 4, f, rest) || f[0] != "step") {
      throw CorpusError("expected 'step <thm-index> <tactic-id> <premises|NONE> <goal>'", n);
    }
    ProofStep s;
    s.theorem = parse_index(f[1], n, "theorem index");
    const std::size_t tactic = parse_index(f[2], n, "tactic id");
    if (tactic >= tactic_count) throw CorpusError("unknown tactic id " + f[2], n);
    s.tactic = static_cast<int>(tactic);
    if (f[3] != "NONE") {
      std::stringstream list(f[3]);
      std::string item;
      while (std::getline(list, item, ',')) {
        const std::size_t p = parse_index(item, n, "premise index");
        if (p >= s.theorem) {
          throw CorpusError("premise " + item + " does not precede theorem " + f[1], n);
        }
        s.premises.push_back(p);
      }
      if (s.premises.empty()) throw CorpusError("empty premise list", n);
    }
    s.goal = parse_term(rest, n);
    log.push_back(std::move(s));
  }
  return log;
}

ProofLog load_proof_log(const std::filesystem::path& path, std::size_t tactic_count) {
  ProofLog log;
  with_file(path, [&](std::istream& in) { log = read_proof_log(in, tactic_count); });
  return log;
}

void write_proof_log(std::ostream& out, const ProofLog& log) {
  for (const auto& s : log) {
    out << "step " << s.theorem << ' ' << s.tactic << ' ';
    if (s.premises.empty()) {
      out << "NONE";
    } else {
      for (std::size_t i = 0; i < s.premises.size(); ++i) out << (i ? "," : "") << s.premises[i];
    }
    out << ' ' << serialize(s.goal) << '\n';
  }
}

void save_proof_log(const std::filesystem::path& path, const ProofLog& log) {
  to_file(path, [&](std::ostream& out) { write_proof_log(out, log); });
}

void validate(const ProofLog& log, const TheoremDb& db) {
  for (std::size_t i = 0; i < log.size(); ++i) {
    const ProofStep& s = log[i];
    if (s.theorem >= db.size()) throw CorpusError("step names unknown theorem " + std::to_string(s.theorem), i + 1);
    for (std::size_t p : s.premises) {
      if (p >= s.theorem) throw CorpusError("premise " + std::to_string(p) + " is not eligible", i + 1);
    }
  }
}

ProofLog select_split(const ProofLog& log, const TheoremDb& db, Split split) {
  ProofLog out;
  for (const auto& s : log) {
    if (db.at(s.theorem).split == split) out.push_back(s);
  }
  return out;
}

std::vector<std::size_t> theorems_in_split(const TheoremDb& db, Split split) {
  std::vector<std::size_t> out;
  for (const auto& r : db.records) {
    if (r.kind == TheoremKind::Theorem && r.split == split) out.push_back(r.index);
  }
  return out;
}

std::vector<std::size_t> negative_pool(const ProofLog& log) {
  std::set<std::size_t> used;
  for (const auto& s : log) used.insert(s.premises.begin(), s.premises.end());
  return {used.begin(), used.end()};
}

namespace {

constexpr const char* kLetters[] = {"f", "g", "h", "k", "m", "n", "p", "q", "r", "s", "t", "u", "w", "y", "z"};

struct Rule {
  int first, second;
  int replacement;  // -1 erases both letters
  std::size_t index;
};

class ToyGenerator {
 public:
  explicit ToyGenerator(const ToyCorpusOptions& o) : options_(o), rng_(o.seed), rules_(o.alphabet * o.alphabet) {}

  ToyCorpus run() {
    const auto& o = options_;
    if (o.theorems < 20) throw std::invalid_argument("toy corpus needs at least 20 theorems");
    if (o.alphabet < 2 || o.alphabet > std::size(kLetters)) throw std::invalid_argument("alphabet size out of range");
    if (o.tactic_count < 3 || o.tactic_count > static_cast<std::size_t>(tactics::kCount)) {
      throw std::invalid_argument("tactic count must be between 3 and 41");
    }
    if (o.min_length < 2 || o.max_length < o.min_length) throw std::invalid_argument("bad word length range");
    make_rules();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::set<std::string> seen;
    const std::size_t first = corpus_.db.size();
    std::size_t attempts = 0;
    while (corpus_.db.size() - first < o.theorems) {
      if (++attempts > 1000 * o.theorems) throw std::runtime_error("toy corpus generator ran out of fresh theorems");
      const double u = unit(rng_);
      const std::size_t index = corpus_.db.size();
      ProofLog steps;
      SExpr statement;
      if (u < o.reflexive_fraction) {
        const SExpr w = word_term(random_word());
        statement = term::forall(x_, term::eq(n_, w, w));
        steps.push_back({index, tactics::kRefl, {}, statement});
      } else if (u < o.reflexive_fraction + o.conjunction_fraction) {
        auto [w1, v1] = random_equation();
        auto [w2, v2] = random_equation();
        if (w1 == w2) continue;
        const SExpr left = term::forall(x_, term::eq(n_, word_term(w1), word_term(v1)));
        const SExpr right = term::forall(x_, term::eq(n_, word_term(w2), word_term(v2)));
        statement = term::forall(x_, term::conj(term::eq(n_, word_term(w1), word_term(v1)),
                                                term::eq(n_, word_term(w2), word_term(v2))));
        steps.push_back({index, tactics::kConj, {}, statement});
        rewrite_proof(index, w1, v1, steps);
        rewrite_proof(index, w2, v2, steps);
      } else {
        auto [w, v] = random_equation();
        statement = term::forall(x_, term::eq(n_, word_term(w), word_term(v)));
        rewrite_proof(index, w, v, steps);
      }
      if (!seen.insert(serialize(statement)).second) continue;
      corpus_.db.records.push_back(
          {index, "thm_" + std::to_string(index - first), statement, TheoremKind::Theorem, Split::Train});
      corpus_.log.insert(corpus_.log.end(), steps.begin(), steps.end());
    }
    assign_splits(first);
    return std::move(corpus_);
  }

 private:
  using Word = std::vector<int>;

  void make_rules() {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> letter(0, static_cast<int>(options_.alphabet) - 1);
    const int a = static_cast<int>(options_.alphabet);
    for (int p = 0; p < a; ++p) {
      for (int q = 0; q < a; ++q) {
        auto& slot = rules_[static_cast<std::size_t>(p * a + q)];
        if (unit(rng_) >= options_.rule_density) continue;
        const int replacement = unit(rng_) < options_.erase_probability ? -1 : letter(rng_);
        const std::size_t index = corpus_.db.size();
        slot = Rule{p, q, replacement, index};
        Word lhs{p, q}, rhs;
        if (replacement >= 0) rhs.push_back(replacement);
        const SExpr statement = term::forall(x_, term::eq(n_, word_term(lhs), word_term(rhs)));
        std::string name = std::string("ax_") + kLetters[p] + kLetters[q];
        corpus_.db.records.push_back({index, std::move(name), statement, TheoremKind::Definition, Split::Train});
      }
    }
  }

  const std::optional<Rule>& rule_at(const Word& w, std::size_t i) const {
    return rules_[static_cast<std::size_t>(w[i] * static_cast<int>(options_.alphabet) + w[i + 1])];
  }

  // Outermost redex position, or npos.
  std::size_t outermost_redex(const Word& w) const {
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
      if (rule_at(w, i)) return i;
    }
    return std::string::npos;
  }

  Word random_word() {
    std::uniform_int_distribution<std::size_t> length(options_.min_length, options_.max_length);
    std::uniform_int_distribution<int> letter(0, static_cast<int>(options_.alphabet) - 1);
    Word w(length(rng_));
    for (int& c : w) c = letter(rng_);
    return w;
  }

  std::pair<Word, Word> random_equation() {
    for (;;) {
      Word w = random_word();
      if (outermost_redex(w) == std::string::npos) continue;
      Word v = w;
      for (std::size_t i; (i = outermost_redex(v)) != std::string::npos;) v = apply(v, i);
      return {w, v};
    }
  }

  Word apply(const Word& w, std::size_t i) const {
    const Rule& r = *rule_at(w, i);
    Word out(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(i));
    if (r.replacement >= 0) out.push_back(r.replacement);
    out.insert(out.end(), w.begin() + static_cast<std::ptrdiff_t>(i + 2), w.end());
    return out;
  }

  void rewrite_proof(std::size_t theorem, Word w, const Word& v, ProofLog& steps) {
    const SExpr target = word_term(v);
    for (std::size_t i; (i = outermost_redex(w)) != std::string::npos;) {
      const Rule& r = *rule_at(w, i);
      SExpr goal = term::forall(x_, term::eq(n_, word_term(w), target));
      steps.push_back({theorem, tactics::kRewrite, {r.index}, std::move(goal)});
      w = apply(w, i);
    }
    if (w != v) throw std::logic_error("toy proof does not reach its normal form");
  }

  SExpr word_term(const Word& w) const {
    SExpr t = x_;
    for (auto it = w.rbegin(); it != w.rend(); ++it) t = term::app(term::constant(nn_, kLetters[*it]), t);
    return t;
  }

  void assign_splits(std::size_t first) {
    const std::size_t n = corpus_.db.size() - first;
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = first + i;
    std::shuffle(order.begin(), order.end(), rng_);
    const auto valid = static_cast<std::size_t>(options_.valid_fraction * static_cast<double>(n) + 0.5);
    const auto test = static_cast<std::size_t>(options_.test_fraction * static_cast<double>(n) + 0.5);
    for (std::size_t i = 0; i < n; ++i) {
      auto& r = corpus_.db.records[order[i]];
      r.split = i < valid ? Split::Valid : i < valid + test ? Split::Test : Split::Train;
    }
  }

  ToyCorpusOptions options_;
  Rng rng_;
  std::vector<std::optional<Rule>> rules_;
  ToyCorpus corpus_;
  SExpr n_ = SExpr::atom("N");
  SExpr nn_ = term::type_fun(n_, n_);
  SExpr x_ = term::var(n_, "x");
};

}  // namespace

ToyCorpus generate_toy_corpus(const ToyCorpusOptions& options) { return ToyGenerator(options).run(); }

double tactic_accuracy(Policy& policy, std::span<const ProofStep> steps) {
  if (steps.empty()) throw std::invalid_argument("tactic accuracy needs at least one example");
  std::size_t correct = 0;
  for (const auto& s : steps) {
    const Prediction p = policy.predict(s.goal, {});
    if (p.tactic_logits.empty()) throw std::runtime_error("policy returned no tactic logits");
    if (top_k_ids(p.tactic_logits, 1).front() == static_cast<std::size_t>(s.tactic)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(steps.size());
}

PremiseAccuracy relative_premise_accuracy(Policy& policy, std::span<const ProofStep> steps, Rng& rng) {
  PremiseAccuracy acc;
  std::vector<std::size_t> candidates;
  for (const auto& s : steps) {
    if (s.premises.empty()) continue;
    std::set<std::size_t> cited(s.premises.begin(), s.premises.end());
    if (s.theorem <= cited.size()) continue;
    std::uniform_int_distribution<std::size_t> pick(0, s.theorem - 1);
    candidates.assign(s.premises.begin(), s.premises.end());
    for (std::size_t i = 0; i < s.premises.size(); ++i) {
      std::size_t r;
      do {
        r = pick(rng);
      } while (cited.count(r) != 0);
      candidates.push_back(r);
    }
    const Prediction p = policy.predict(s.goal, candidates);
    const std::size_t k = s.premises.size();
    for (std::size_t i = 0; i < k; ++i) {
      ++acc.comparisons;
      if (p.premise_scores.at(i) > p.premise_scores.at(k + i)) ++acc.wins;
    }
  }
  return acc;
}

}  // namespace holgraph
