#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "probfp/density.hpp"
#include "probfp/errordist.hpp"
#include "probfp/minifloat.hpp"

namespace probfp {

struct SourcePos {
  int line = 1;
  int column = 1;
  bool operator==(const SourcePos&) const = default;
};

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
  enum class Kind { literal, var, binop };
  Kind kind = Kind::literal;
  double literal = 0.0;
  std::string name;  // variable name
  Op op = Op::add;
  TermPtr left, right;
  std::set<std::string> vars;  // variables in this subtree
  SourcePos pos;

  static TermPtr make_literal(double v, SourcePos pos = {});
  static TermPtr make_var(std::string name, SourcePos pos = {});
  static TermPtr make_binop(Op op, TermPtr l, TermPtr r, SourcePos pos = {});
};

// Structural equality (positions ignored).
bool same_shape(const Term& a, const Term& b);
std::string to_string(const Term& t);

struct Test {
  enum class Cmp { lt, gt, eq };
  TermPtr lhs;
  Cmp cmp = Cmp::lt;
  double rhs = 0.0;
};

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;

struct Stmt {
  enum class Kind { skip, assign, seq, ite };
  Kind kind = Kind::skip;
  std::string target;           // assign
  TermPtr value;                // assign
  std::vector<StmtPtr> body;    // seq
  Test test;                    // ite
  StmtPtr then_branch, else_branch;
  SourcePos pos;
};

struct ProgramAst {
  StmtPtr root;
};
std::string to_string(const ProgramAst& p);

using Parsed = std::variant<TermPtr, ProgramAst>;
Parsed parse(std::string_view source);
// Parses a term; program sources raise unsupported_semantics.
TermPtr parse_term(std::string_view source);

struct TreeCheck {
  bool ok = true;
  std::string variable;              // first repeated variable
  std::vector<SourcePos> positions;  // all its occurrences
};
TreeCheck check_tree(const Term& t);

// A model value: an exact constant or a density.
using Value = std::variant<double, Density>;

struct ProbContext {
  std::map<std::string, Value> bindings;
  bool quantize_inputs = false;
  ErrorMode error_mode = ErrorMode::exact;
  BuildOptions build;
};

struct Interpretation {
  Value value;
  // Probability, accumulated over all rounded operations, that an
  // intermediate rounds to zero, overflows, or leaves |t| <= 1.
  double excluded_mass = 0.0;
  // The same quantity for the last operation alone.
  ExcludedMass last_excluded;
  int rounded_ops = 0;
};

// Density of Z (1 - u E) with E the error distribution of Z.
Density apply_rounding(const Density& z, const FloatFormat& fmt, ErrorMode mode, const BuildOptions& opts,
                       ExcludedMass* excluded = nullptr);
ProbContext quantize(const ProbContext& ctx, const FloatFormat& fmt);
Interpretation interpret(const Term& t, const ProbContext& ctx, const FloatFormat& fmt);
Value interpret_term(const Term& t, const ProbContext& ctx, const FloatFormat& fmt);
[[noreturn]] void interpret_program(const ProgramAst& p, const ProbContext& ctx, const FloatFormat& fmt);

}  // namespace probfp
