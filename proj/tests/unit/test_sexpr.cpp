#include <doctest.h>

#include "fixtures.hpp"
#include "holgraph/sexpr.hpp"
#include "random_terms.hpp"

using namespace holgraph;

namespace {

SExpr A(const char* t) { return SExpr::atom(t); }
SExpr N(std::vector<SExpr> c) { return SExpr::node(std::move(c)); }

std::size_t error_offset(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.offset();
  }
  FAIL("no parse error for " << text);
  return 0;
}

}  // namespace

TEST_CASE("parse builds the expected tree") {
  const SExpr e = parse("(a (v (fun A B) f) (v A x))");
  CHECK(e == N({A("a"), N({A("v"), N({A("fun"), A("A"), A("B")}), A("f")}), N({A("v"), A("A"), A("x")})}));
  CHECK(parse("x") == A("x"));
  CHECK(parse("  x \n") == A("x"));
  CHECK(parse("( v\tA\n x )") == N({A("v"), A("A"), A("x")}));
}

TEST_CASE("serialize uses single spaces") {
  CHECK(serialize(A("x")) == "x");
  CHECK(serialize(N({A("v"), A("A"), A("x")})) == "(v A x)");
  CHECK(serialize(parse(fixtures::kForallRefl)) == fixtures::kForallRefl);
}

TEST_CASE("malformed input reports a byte offset") {
  CHECK(error_offset("()") == 0);
  CHECK(error_offset("(a b) c") == 6);
  CHECK(error_offset("(a (b") == 3);
  CHECK(error_offset("a)") == 1);
  CHECK(error_offset("") == 0);
  CHECK(error_offset("(a () b)") == 3);
}

TEST_CASE("nesting depth is bounded") {
  std::string deep(50, '(');
  deep += "x";
  deep += std::string(50, ')');
  CHECK_NOTHROW(parse(deep));
  CHECK_THROWS_AS(parse(deep, ParseOptions{49}), ParseError);
  std::string very_deep(200000, '(');
  very_deep += "x";
  very_deep += std::string(200000, ')');
  CHECK_THROWS_AS(parse(very_deep), ParseError);
}

TEST_CASE("serialize then parse is the identity on random terms") {
  random_terms::Generator gen(1);
  for (int i = 0; i < 1000; ++i) {
    const SExpr e = gen.any(6);
    REQUIRE(parse(serialize(e)) == e);
  }
}

TEST_CASE("tree size counts lists and atoms") {
  CHECK(tree_size(A("x")) == 1);
  CHECK(tree_size(parse("(v A x)")) == 4);
}
