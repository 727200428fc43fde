#include "holgraph/sexpr.hpp"

#include <cctype>
#include <utility>

namespace holgraph {

SExpr SExpr::atom(std::string token) {
  if (token.empty()) throw std::invalid_argument("atom token must be non-empty");
  for (char c : token) {
    if (c == '(' || c == ')' || std::isspace(static_cast<unsigned char>(c))) {
      throw std::invalid_argument("atom token contains whitespace or parentheses: " + token);
    }
  }
  SExpr e;
  e.is_atom_ = true;
  e.token_ = std::move(token);
  return e;
}

SExpr SExpr::node(std::vector<SExpr> children) {
  if (children.empty()) throw std::invalid_argument("list node must have at least one child");
  SExpr e;
  e.is_atom_ = false;
  e.children_ = std::move(children);
  return e;
}

std::string_view SExpr::head() const {
  if (is_atom_ || !children_.front().is_atom()) return {};
  return children_.front().token();
}

ParseError::ParseError(const std::string& message, std::size_t offset)
    : std::runtime_error(message + " at byte " + std::to_string(offset)), offset_(offset) {}

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::size_t skip_space(std::string_view text, std::size_t pos) {
  while (pos < text.size() && is_space(text[pos])) ++pos;
  return pos;
}

std::size_t token_end(std::string_view text, std::size_t pos) {
  while (pos < text.size() && !is_space(text[pos]) && text[pos] != '(' && text[pos] != ')') ++pos;
  return pos;
}

}  // namespace

SExpr parse(std::string_view text, const ParseOptions& options) {
  struct Frame {
    std::size_t open_offset;
    std::vector<SExpr> children;
  };
  std::vector<Frame> stack;
  std::size_t pos = skip_space(text, 0);
  if (pos == text.size()) throw ParseError("empty input", pos);

  SExpr result;
  bool done = false;
  while (!done) {
    pos = skip_space(text, pos);
    if (pos == text.size()) {
      throw ParseError("unbalanced parentheses: missing ')'", stack.empty() ? pos : stack.back().open_offset);
    }
    const char c = text[pos];
    SExpr finished;
    if (c == '(') {
      if (stack.size() >= options.max_depth) throw ParseError("maximum nesting depth exceeded", pos);
      stack.push_back({pos, {}});
      ++pos;
      continue;
    }
    if (c == ')') {
      if (stack.empty()) throw ParseError("unbalanced parentheses: unexpected ')'", pos);
      if (stack.back().children.empty()) throw ParseError("empty list", stack.back().open_offset);
      finished = SExpr::node(std::move(stack.back().children));
      stack.pop_back();
      ++pos;
    } else {
      const std::size_t end = token_end(text, pos);
      finished = SExpr::atom(std::string(text.substr(pos, end - pos)));
      pos = end;
    }
    if (stack.empty()) {
      result = std::move(finished);
      done = true;
    } else {
      stack.back().children.push_back(std::move(finished));
    }
  }

  pos = skip_space(text, pos);
  if (pos != text.size()) throw ParseError("trailing characters after expression", pos);
  return result;
}

namespace {

void serialize_into(const SExpr& expr, std::string& out) {
  if (expr.is_atom()) {
    out += expr.token();
    return;
  }
  out += '(';
  bool first = true;
  for (const SExpr& child : expr.children()) {
    if (!first) out += ' ';
    first = false;
    serialize_into(child, out);
  }
  out += ')';
}

}  // namespace

std::string serialize(const SExpr& expr) {
  std::string out;
  serialize_into(expr, out);
  return out;
}

std::size_t tree_size(const SExpr& expr) {
  std::size_t n = 1;
  for (const SExpr& child : expr.children()) n += tree_size(child);
  return n;
}

}  // namespace holgraph
