#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fiberlin {

/// Raised by parse() with the byte offset of the offending token.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

/// Raised when an expression is evaluated outside its domain
/// (division by zero, negative base with fractional exponent, non-finite result).
class DomainError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class ExprKind { Const, Var, Add, Sub, Mul, Div, Neg, Pow, Call };
enum class Func { Sin, Cos, Exp, Abs, Sqrt };

/// Node of the arithmetic expression tree. Pow keeps its (constant) exponent
/// in `value` and the base as its only child.
struct Expr {
  ExprKind kind = ExprKind::Const;
  double value = 0.0;
  std::string name;
  Func fn = Func::Sin;
  std::vector<Expr> children;

  static Expr constant(double v);
  static Expr variable(std::string name);
  static Expr binary(ExprKind kind, Expr lhs, Expr rhs);
  static Expr negate(Expr e);
  static Expr power(Expr base, double exponent);
  static Expr call(Func fn, Expr arg);

  friend bool operator==(const Expr&, const Expr&) = default;
};

using Env = std::map<std::string, double, std::less<>>;

Expr parse(std::string_view text);
std::string print(const Expr& e);
double eval(const Expr& e, const Env& env);

/// Sorted, de-duplicated names of the free variables.
std::vector<std::string> free_variables(const Expr& e);

std::string_view func_name(Func fn);

/// An expression lowered to a postfix program over positional variable slots.
/// Immutable and safe to evaluate from many threads.
class CompiledExpr {
public:
  CompiledExpr() = default;
  /// Throws std::invalid_argument if a free variable is missing from `slots`.
  CompiledExpr(const Expr& e, std::span<const std::string> slots);

  double operator()(std::span<const double> args) const;
  const Expr& source() const noexcept { return source_; }

private:
  struct Op {
    ExprKind kind;
    double value;
    std::size_t slot;
    Func fn;
  };
  std::vector<Op> ops_;
  std::size_t max_depth_ = 0;
  Expr source_;
};

}  // namespace fiberlin
