#pragma once

#include <random>
#include <string>
#include <vector>

#include "holgraph/numerics.hpp"
#include "holgraph/sexpr.hpp"

namespace random_terms {

using holgraph::SExpr;

// Random HOL-shaped terms over the a/v/c/l/fun grammar. Small name pools make
// repeated subterms common so that sharing has something to do.
class Generator {
 public:
  explicit Generator(std::uint64_t seed) : rng_(seed) {}

  SExpr type(int depth) {
    if (depth <= 0 || coin(0.6)) return SExpr::atom(pick({"A", "B", "bool", "N"}));
    return SExpr::node({SExpr::atom("fun"), type(depth - 1), type(depth - 1)});
  }

  SExpr term(int depth) {
    const int choice = depth <= 0 ? uniform(0, 1) : uniform(0, 4);
    switch (choice) {
      case 0:
        return SExpr::node({SExpr::atom("v"), type(1), SExpr::atom(pick({"x", "y", "z", "f"}))});
      case 1:
        return SExpr::node({SExpr::atom("c"), type(2), SExpr::atom(pick({"=", "!", "/\\", "T", "g", "h"}))});
      case 2:
      case 3:
        return SExpr::node({SExpr::atom("a"), term(depth - 1), term(depth - 1)});
      default:
        return SExpr::node(
            {SExpr::atom("l"), SExpr::node({SExpr::atom("v"), type(1), SExpr::atom(pick({"x", "y"}))}),
             term(depth - 1)});
    }
  }

  // Depth drawn from [1, max_depth].
  SExpr any(int max_depth) { return term(uniform(1, max_depth)); }

  holgraph::Rng& rng() { return rng_; }

 private:
  bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }
  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  std::string pick(std::initializer_list<const char*> options) {
    std::vector<const char*> v(options);
    return v[static_cast<std::size_t>(uniform(0, static_cast<int>(v.size()) - 1))];
  }

  holgraph::Rng rng_;
};

}  // namespace random_terms
