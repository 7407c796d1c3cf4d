#include <cmath>
#include <sstream>

#include "probfp/diagnostics.hpp"
#include "probfp/errors.hpp"
#include "probfp/lang.hpp"

namespace probfp {

Density apply_rounding(const Density& z, const FloatFormat& fmt, ErrorMode mode, const BuildOptions& opts,
                       ExcludedMass* excluded) {
  if (mode == ErrorMode::none) return z;
  ErrorDistribution e = error_distribution(mode, z, fmt, opts);
  if (excluded) *excluded = mode == ErrorMode::exact ? e.excluded : excluded_mass(z, fmt);
  // Relative error t = (x - round(x)) / (x u), so round(x) = x (1 - u t).
  const Density w = scalar_add(1.0, scalar_mul(-fmt.u(), e.density));
  return mul(z, w, opts);
}

ProbContext quantize(const ProbContext& ctx, const FloatFormat& fmt) {
  ProbContext out = ctx;
  if (ctx.error_mode == ErrorMode::none) return out;
  for (auto& [name, v] : out.bindings) {
    if (auto* c = std::get_if<double>(&v)) {
      const double r = round_value(*c, fmt);
      if (r != *c) diagnostics::warn("constant input '" + name + "' is not representable and was rounded");
      *c = r;
    } else {
      v = apply_rounding(std::get<Density>(v), fmt, ctx.error_mode, ctx.build);
    }
  }
  return out;
}

namespace {

double fold(Op op, double a, double b) {
  switch (op) {
    case Op::add: return a + b;
    case Op::sub: return a - b;
    case Op::mul: return a * b;
    case Op::div:
      if (b == 0.0) throw singular_division("constant division by zero");
      return a / b;
  }
  return 0.0;
}

// Density op constant, or constant op density, without rounding.
Value mixed(Op op, const Value& l, const Value& r, const BuildOptions& opts) {
  if (auto* c = std::get_if<double>(&r)) {
    const Density& x = std::get<Density>(l);
    switch (op) {
      case Op::add: return scalar_add(*c, x);
      case Op::sub: return scalar_add(-*c, x);
      case Op::mul: return *c == 0.0 ? Value(0.0) : Value(scalar_mul(*c, x));
      case Op::div:
        if (*c == 0.0) throw singular_division("division by the constant 0");
        return scalar_mul(1.0 / *c, x);
    }
  }
  const double c = std::get<double>(l);
  const Density& y = std::get<Density>(r);
  switch (op) {
    case Op::add: return scalar_add(c, y);
    case Op::sub: return scalar_add(c, scalar_mul(-1.0, y));
    case Op::mul: return c == 0.0 ? Value(0.0) : Value(scalar_mul(c, y));
    case Op::div: {
      const Density inv = reciprocal(y, opts);
      return c == 0.0 ? Value(0.0) : Value(scalar_mul(c, inv));
    }
  }
  return 0.0;
}

Density both(Op op, const Density& x, const Density& y, const BuildOptions& opts) {
  switch (op) {
    case Op::add: return add(x, y, opts);
    case Op::sub: return sub(x, y, opts);
    case Op::mul: return mul(x, y, opts);
    case Op::div: return div(x, y, opts);
  }
  return x;
}

class Interpreter {
 public:
  Interpreter(const ProbContext& ctx, const FloatFormat& fmt) : ctx_(ctx), fmt_(fmt) {}

  Value eval(const Term& t) {
    switch (t.kind) {
      case Term::Kind::literal: return t.literal;
      case Term::Kind::var: {
        auto it = ctx_.bindings.find(t.name);
        if (it == ctx_.bindings.end()) throw unbound_variable(t.name);
        return it->second;
      }
      case Term::Kind::binop: break;
    }
    Value l = eval(*t.left);
    Value r = eval(*t.right);
    const bool lc = std::holds_alternative<double>(l), rc = std::holds_alternative<double>(r);
    if (lc && rc) {
      const double v = fold(t.op, std::get<double>(l), std::get<double>(r));
      if (round_value(v, fmt_) != v) {
        std::ostringstream os;
        os << "constant subexpression at " << t.pos.line << ":" << t.pos.column << " evaluates to " << v
           << ", which is not representable in " << fmt_.describe();
        diagnostics::warn(os.str());
      }
      return v;
    }
    Value z = (lc || rc) ? mixed(t.op, l, r, ctx_.build)
                         : Value(both(t.op, std::get<Density>(l), std::get<Density>(r), ctx_.build));
    if (std::holds_alternative<double>(z)) return z;  // exact zero product
    if (ctx_.error_mode == ErrorMode::none) return z;
    ExcludedMass ex;
    Density rounded = apply_rounding(std::get<Density>(z), fmt_, ctx_.error_mode, ctx_.build, &ex);
    survive_ *= (1.0 - ex.total());
    last_ = ex;
    ++ops_;
    return rounded;
  }

  double excluded() const { return 1.0 - survive_; }
  ExcludedMass last() const { return last_; }
  int ops() const { return ops_; }

 private:
  const ProbContext& ctx_;
  const FloatFormat& fmt_;
  double survive_ = 1.0;
  ExcludedMass last_;
  int ops_ = 0;
};

}  // namespace

Interpretation interpret(const Term& t, const ProbContext& ctx, const FloatFormat& fmt) {
  const TreeCheck tc = check_tree(t);
  if (!tc.ok) {
    std::ostringstream os;
    os << "term is not tree-shaped: variable '" << tc.variable << "' occurs at";
    for (const auto& p : tc.positions) os << ' ' << p.line << ':' << p.column;
    throw tree_violation(os.str());
  }
  for (const auto& v : t.vars)
    if (!ctx.bindings.count(v)) throw unbound_variable(v);
  const ProbContext q = ctx.quantize_inputs ? quantize(ctx, fmt) : ctx;
  Interpreter in(q, fmt);
  Interpretation out;
  out.value = in.eval(t);
  out.excluded_mass = in.excluded();
  out.last_excluded = in.last();
  out.rounded_ops = in.ops();
  return out;
}

Value interpret_term(const Term& t, const ProbContext& ctx, const FloatFormat& fmt) {
  return interpret(t, ctx, fmt).value;
}

void interpret_program(const ProgramAst&, const ProbContext&, const FloatFormat&) {
  throw unsupported_semantics(
      "program statements (assignment, sequencing, conditionals) are parsed but not analysed; only tree-shaped "
      "terms have a semantics");
}

}  // namespace probfp
