#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "probfp/diagnostics.hpp"
#include "probfp/errors.hpp"
#include "probfp/lang.hpp"

using namespace probfp;

TEST_CASE("terms parse with the usual precedence") {
  CHECK(to_string(*parse_term("a + b * c")) == "a + b * c");
  CHECK(to_string(*parse_term("(a + b) * c")) == "(a + b) * c");
  CHECK(to_string(*parse_term("a - (b - c)")) == "a - (b - c)");
  CHECK(to_string(*parse_term("(a - b) - c")) == "a - b - c");
  CHECK(to_string(*parse_term("a / (b * c)")) == "a / (b * c)");
  CHECK(to_string(*parse_term("((x0 + x1) + x2)")) == "x0 + x1 + x2");
  CHECK(to_string(*parse_term("2.5 * x # comment")) == "2.5 * x");
  CHECK(to_string(*parse_term("-3 * x")) == "-3 * x");

  const TermPtr t = parse_term("x / (1 + y)");
  CHECK(t->kind == Term::Kind::binop);
  CHECK(t->op == Op::div);
  CHECK(t->vars == std::set<std::string>{"x", "y"});
  CHECK(t->right->left->literal == 1.0);
}

TEST_CASE("pretty printing round-trips") {
  for (const char* src : {"a + b * c - d / e", "(a + b) * (c - d)", "a / (b / (c / d))", "1e-3 * x + 0.5"}) {
    const TermPtr t = parse_term(src);
    const TermPtr u = parse_term(to_string(*t));
    CHECK(same_shape(*t, *u));
    CHECK(to_string(*t) == to_string(*u));
  }
  CHECK_FALSE(same_shape(*parse_term("a + b"), *parse_term("b + a")));
}

TEST_CASE("syntax errors carry positions") {
  try {
    parse_term("a +\n  * b");
    FAIL("no error");
  } catch (const syntax_error& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 3);
  }
  CHECK_THROWS_AS(parse_term("a + "), syntax_error);
  CHECK_THROWS_AS(parse_term("(a + b"), syntax_error);
  CHECK_THROWS_AS(parse_term("a $ b"), syntax_error);
  CHECK_THROWS_AS(parse_term("a b"), syntax_error);
  CHECK_THROWS_AS(parse_term("-x"), syntax_error);
}

TEST_CASE("programs parse but have no semantics") {
  const Parsed p = parse("x := a + b; if x < 1 then { y := x } else skip");
  REQUIRE(std::holds_alternative<ProgramAst>(p));
  const auto& prog = std::get<ProgramAst>(p);
  CHECK(prog.root->kind == Stmt::Kind::seq);
  CHECK(prog.root->body.size() == 2);
  CHECK(prog.root->body[1]->kind == Stmt::Kind::ite);
  CHECK(prog.root->body[1]->test.cmp == Test::Cmp::lt);
  const std::string printed = to_string(prog);
  CHECK(to_string(std::get<ProgramAst>(parse(printed))) == printed);

  CHECK_THROWS_AS(parse_term("x := 1"), unsupported_semantics);
  CHECK_THROWS_AS(interpret_program(prog, {}, FloatFormat::half()), unsupported_semantics);
  CHECK_THROWS_AS(parse("if x < 1 then skip"), syntax_error);
  CHECK_THROWS_AS(parse("if x <= 1 then skip else skip"), syntax_error);
}

TEST_CASE("tree-shape check reports every occurrence") {
  CHECK(check_tree(*parse_term("a + b * c")).ok);
  const TreeCheck tc = check_tree(*parse_term("x * y +\n x"));
  CHECK_FALSE(tc.ok);
  CHECK(tc.variable == "x");
  REQUIRE(tc.positions.size() == 2);
  CHECK(tc.positions[0] == SourcePos{1, 1});
  CHECK(tc.positions[1] == SourcePos{2, 2});

  ProbContext ctx;
  ctx.bindings.emplace("x", build(DistributionSpec::uniform(1, 2)));
  CHECK_THROWS_AS(interpret(*parse_term("x * x"), ctx, FloatFormat::half()), tree_violation);
}

TEST_CASE("unbound variables are named") {
  ProbContext ctx;
  ctx.bindings.emplace("x", build(DistributionSpec::uniform(1, 2)));
  try {
    interpret(*parse_term("x + zeta"), ctx, FloatFormat::half());
    FAIL("no error");
  } catch (const unbound_variable& e) {
    CHECK(e.name() == "zeta");
  }
}

TEST_CASE("interpretation without rounding is plain density arithmetic") {
  ProbContext ctx;
  ctx.error_mode = ErrorMode::none;
  const Density u = build(DistributionSpec::uniform(0, 1));
  ctx.bindings.emplace("a", u);
  ctx.bindings.emplace("b", u);
  ctx.bindings.emplace("c", u);
  const Interpretation r = interpret(*parse_term("a + b + c"), ctx, FloatFormat::half());
  CHECK(r.rounded_ops == 0);
  const Density& d = std::get<Density>(r.value);
  for (double x : {0.3, 1.2, 2.5}) CHECK(d(x) == doctest::Approx(oracle::irwin_hall(3, x)).epsilon(1e-8));

  // Literals act as exact scalars: 2 * a + 1 is uniform on [1, 3].
  const Density s = std::get<Density>(interpret(*parse_term("2 * a + 1"), ctx, FloatFormat::half()).value);
  CHECK(s.support().lo == doctest::Approx(1.0));
  CHECK(s.support().hi == doctest::Approx(3.0));
  CHECK(s(2.0) == doctest::Approx(0.5));
  // 0 * a is the constant zero.
  CHECK(std::get<double>(interpret(*parse_term("0 * a"), ctx, FloatFormat::half()).value) == 0.0);
}

TEST_CASE("constant subterms fold exactly with a warning when unrepresentable") {
  diagnostics::drain();
  ProbContext ctx;
  const Value v = interpret_term(*parse_term("1 / 3"), ctx, FloatFormat::half());
  CHECK(std::get<double>(v) == 1.0 / 3.0);
  CHECK(diagnostics::drain().size() == 1);
  CHECK(std::get<double>(interpret_term(*parse_term("0.5 + 0.25"), ctx, FloatFormat::half())) == 0.75);
  CHECK(diagnostics::drain().empty());
  CHECK_THROWS_AS(interpret_term(*parse_term("1 / 0"), ctx, FloatFormat::half()), singular_division);
}

TEST_CASE("rounding multiplies by 1 - u E") {
  const FloatFormat f(3, -2, 3);
  const Density z = build(DistributionSpec::uniform(2.0, 3.0));
  ExcludedMass ex;
  const Density r = apply_rounding(z, f, ErrorMode::exact, {}, &ex);
  CHECK(r.total_mass() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(ex.total() == 0.0);
  // The support widens by at most a factor (1 +- u).
  CHECK(r.support().lo >= 2.0 * (1.0 - f.u()) - 1e-12);
  CHECK(r.support().hi <= 3.0 * (1.0 + f.u()) + 1e-12);
  // Mean is preserved to first order: E[Z (1 - uE)] = E[Z] (1 - u E[E]) for independent E.
  double mean = 0.0;
  for (const auto& pc : r.pieces()) {
    const int n = 64;
    for (int i = 0; i < n; ++i) {
      const double x = pc.a + (pc.b - pc.a) * (i + 0.5) / n;
      mean += x * r(x) * (pc.b - pc.a) / n;
    }
  }
  CHECK(mean == doctest::Approx(2.5).epsilon(5e-3));

  ProbContext ctx;
  ctx.bindings.emplace("x", z);
  ctx.bindings.emplace("y", build(DistributionSpec::uniform(1.0, 2.0)));
  const Interpretation it = interpret(*parse_term("x * y"), ctx, f);
  CHECK(it.rounded_ops == 1);
  ctx.quantize_inputs = true;
  CHECK(interpret(*parse_term("x * y"), ctx, f).rounded_ops == 1);  // input rounding is not an op
}

TEST_CASE("quantization rounds constants and densities") {
  const FloatFormat f(3, -2, 3);
  ProbContext ctx;
  ctx.bindings.emplace("c", 1.1);
  ctx.bindings.emplace("x", build(DistributionSpec::uniform(2.0, 3.0)));
  diagnostics::drain();
  const ProbContext q = quantize(ctx, f);
  CHECK(std::get<double>(q.bindings.at("c")) == 1.125);
  CHECK(diagnostics::drain().size() == 1);
  CHECK(std::get<Density>(q.bindings.at("x")).support().hi > 3.0);
}
