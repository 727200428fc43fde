#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace holgraph {

/// A HOL term in S-expression form: either an atom or an ordered list of
/// children. By HOL convention the first child of a list is its head token
/// (`a`, `v`, `l`, `c`, `fun`, ...), but the parser does not enforce that.
class SExpr {
 public:
  SExpr() = default;

  static SExpr atom(std::string token);
  static SExpr node(std::vector<SExpr> children);

  bool is_atom() const { return is_atom_; }
  const std::string& token() const { return token_; }
  const std::vector<SExpr>& children() const { return children_; }

  /// Head token of a list whose first child is an atom; empty otherwise.
  std::string_view head() const;

  friend bool operator==(const SExpr&, const SExpr&) = default;

 private:
  bool is_atom_ = true;
  std::string token_;
  std::vector<SExpr> children_;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t offset);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

struct ParseOptions {
  std::size_t max_depth = 10000;
};

/// Parses a single parenthesized S-expression or a bare atom. Errors carry the
/// byte offset at which they were detected.
SExpr parse(std::string_view text, const ParseOptions& options = {});

/// Canonical single-space form; `parse(serialize(e)) == e`.
std::string serialize(const SExpr& expr);

/// Nodes plus atoms in the tree.
std::size_t tree_size(const SExpr& expr);

}  // namespace holgraph
