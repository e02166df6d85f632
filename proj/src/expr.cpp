#include "fiberlin/expr.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <set>

namespace fiberlin {

Expr Expr::constant(double v) {
  Expr e;
  e.kind = ExprKind::Const;
  e.value = v;
  return e;
}

Expr Expr::variable(std::string name) {
  Expr e;
  e.kind = ExprKind::Var;
  e.name = std::move(name);
  return e;
}

Expr Expr::binary(ExprKind kind, Expr lhs, Expr rhs) {
  Expr e;
  e.kind = kind;
  e.children.push_back(std::move(lhs));
  e.children.push_back(std::move(rhs));
  return e;
}

Expr Expr::negate(Expr arg) {
  Expr e;
  e.kind = ExprKind::Neg;
  e.children.push_back(std::move(arg));
  return e;
}

Expr Expr::power(Expr base, double exponent) {
  Expr e;
  e.kind = ExprKind::Pow;
  e.value = exponent;
  e.children.push_back(std::move(base));
  return e;
}

Expr Expr::call(Func fn, Expr arg) {
  Expr e;
  e.kind = ExprKind::Call;
  e.fn = fn;
  e.children.push_back(std::move(arg));
  return e;
}

namespace {

constexpr std::array<std::pair<std::string_view, Func>, 5> kFuncs{{
    {"sin", Func::Sin},
    {"cos", Func::Cos},
    {"exp", Func::Exp},
    {"abs", Func::Abs},
    {"sqrt", Func::Sqrt},
}};

bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Recursive descent over
//   expr  := term (('+'|'-') term)*
//   term  := unary (('*'|'/') unary)*
//   unary := '-' unary | power
//   power := primary ('^' unary)?        exponent must fold to a constant
//   primary := number | ident | ident '(' expr ')' | '(' expr ')'
class Parser {
public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr run() {
    Expr e = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

private:
  std::string_view text_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError("syntax error: " + msg, pos_); }

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
                                   text_[pos_] == '\r'))
      ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr expr() {
    Expr lhs = term();
    for (;;) {
      if (accept('+'))
        lhs = Expr::binary(ExprKind::Add, std::move(lhs), term());
      else if (accept('-'))
        lhs = Expr::binary(ExprKind::Sub, std::move(lhs), term());
      else
        return lhs;
    }
  }

  Expr term() {
    Expr lhs = unary();
    for (;;) {
      if (accept('*'))
        lhs = Expr::binary(ExprKind::Mul, std::move(lhs), unary());
      else if (accept('/'))
        lhs = Expr::binary(ExprKind::Div, std::move(lhs), unary());
      else
        return lhs;
    }
  }

  Expr unary() {
    if (accept('-')) return Expr::negate(unary());
    return power();
  }

  static bool fold_constant(const Expr& e, double& out) {
    switch (e.kind) {
      case ExprKind::Const:
        out = e.value;
        return true;
      case ExprKind::Neg:
        if (!fold_constant(e.children[0], out)) return false;
        out = -out;
        return true;
      case ExprKind::Pow: {
        double base = 0.0;
        if (!fold_constant(e.children[0], base)) return false;
        out = std::pow(base, e.value);
        return std::isfinite(out);
      }
      default:
        return false;
    }
  }

  Expr power() {
    Expr base = primary();
    skip_ws();
    if (!accept('^')) return base;
    const std::size_t at = pos_;
    Expr exponent = unary();
    double p = 0.0;
    if (!fold_constant(exponent, p)) throw ParseError("syntax error: exponent must be a numeric constant", at);
    return Expr::power(std::move(base), p);
  }

  Expr primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (is_digit(c) || c == '.') return number();
    if (is_lower(c)) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && (is_lower(text_[pos_]) || is_digit(text_[pos_]))) ++pos_;
      std::string ident(text_.substr(start, pos_ - start));
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == '(') {
        auto it = std::find_if(kFuncs.begin(), kFuncs.end(), [&](const auto& f) { return f.first == ident; });
        if (it == kFuncs.end()) throw ParseError("unknown function '" + ident + "'", start);
        ++pos_;
        Expr arg = expr();
        if (!accept(')')) fail("expected ')'");
        return Expr::call(it->second, std::move(arg));
      }
      if (std::any_of(kFuncs.begin(), kFuncs.end(), [&](const auto& f) { return f.first == ident; }))
        throw ParseError("syntax error: function '" + ident + "' used without arguments", start);
      return Expr::variable(std::move(ident));
    }
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  Expr number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
      if (look < text_.size() && is_digit(text_[look])) {
        pos_ = look;
        while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
      }
    }
    double v = 0.0;
    const char* first = text_.data() + start;
    const char* last = text_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || pos_ == start) throw ParseError("syntax error: malformed number", start);
    return Expr::constant(v);
  }
};

// Binding strength used by the printer; matches the grammar above.
int precedence(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Add:
    case ExprKind::Sub:
      return 1;
    case ExprKind::Mul:
    case ExprKind::Div:
      return 2;
    case ExprKind::Neg:
      return 3;
    case ExprKind::Pow:
      return 4;
    default:
      return 5;
  }
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

void print_into(const Expr& e, std::string& out);

void print_child(const Expr& child, bool parens, std::string& out) {
  if (parens) out += '(';
  print_into(child, out);
  if (parens) out += ')';
}

void print_into(const Expr& e, std::string& out) {
  switch (e.kind) {
    case ExprKind::Const:
      out += format_number(e.value);
      return;
    case ExprKind::Var:
      out += e.name;
      return;
    case ExprKind::Add:
    case ExprKind::Sub:
    case ExprKind::Mul:
    case ExprKind::Div: {
      const int p = precedence(e);
      print_child(e.children[0], precedence(e.children[0]) < p, out);
      out += e.kind == ExprKind::Add ? "+" : e.kind == ExprKind::Sub ? "-" : e.kind == ExprKind::Mul ? "*" : "/";
      print_child(e.children[1], precedence(e.children[1]) <= p, out);
      return;
    }
    case ExprKind::Neg:
      out += '-';
      print_child(e.children[0], precedence(e.children[0]) < 3, out);
      return;
    case ExprKind::Pow:
      print_child(e.children[0], precedence(e.children[0]) <= 4, out);
      out += '^';
      out += format_number(e.value);
      return;
    case ExprKind::Call:
      out += func_name(e.fn);
      out += '(';
      print_into(e.children[0], out);
      out += ')';
      return;
  }
}

double apply_pow(double base, double p) {
  const bool integral = std::floor(p) == p;
  if (!integral && base < 0.0)
    throw DomainError("fractional power of a negative number (use abs(x)^p)");
  if (base == 0.0 && p < 0.0) throw DomainError("zero raised to a negative power");
  return std::pow(base, p);
}

double apply_func(Func fn, double x) {
  switch (fn) {
    case Func::Sin:
      return std::sin(x);
    case Func::Cos:
      return std::cos(x);
    case Func::Exp:
      return std::exp(x);
    case Func::Abs:
      return std::fabs(x);
    case Func::Sqrt:
      if (x < 0.0) throw DomainError("sqrt of a negative number");
      return std::sqrt(x);
  }
  return 0.0;
}

double checked(double v) {
  if (!std::isfinite(v)) throw DomainError("non-finite intermediate value");
  return v;
}

double eval_tree(const Expr& e, const Env& env) {
  switch (e.kind) {
    case ExprKind::Const:
      return e.value;
    case ExprKind::Var: {
      auto it = env.find(e.name);
      if (it == env.end()) throw std::invalid_argument("unbound variable '" + e.name + "'");
      return it->second;
    }
    case ExprKind::Add:
      return checked(eval_tree(e.children[0], env) + eval_tree(e.children[1], env));
    case ExprKind::Sub:
      return checked(eval_tree(e.children[0], env) - eval_tree(e.children[1], env));
    case ExprKind::Mul:
      return checked(eval_tree(e.children[0], env) * eval_tree(e.children[1], env));
    case ExprKind::Div: {
      const double num = eval_tree(e.children[0], env);
      const double den = eval_tree(e.children[1], env);
      if (den == 0.0) throw DomainError("division by zero");
      return checked(num / den);
    }
    case ExprKind::Neg:
      return -eval_tree(e.children[0], env);
    case ExprKind::Pow:
      return checked(apply_pow(eval_tree(e.children[0], env), e.value));
    case ExprKind::Call:
      return checked(apply_func(e.fn, eval_tree(e.children[0], env)));
  }
  return 0.0;
}

void collect_vars(const Expr& e, std::set<std::string>& out) {
  if (e.kind == ExprKind::Var) out.insert(e.name);
  for (const auto& c : e.children) collect_vars(c, out);
}

}  // namespace

std::string_view func_name(Func fn) {
  for (const auto& [name, f] : kFuncs)
    if (f == fn) return name;
  return "?";
}

Expr parse(std::string_view text) {
  for (std::size_t i = 0; i < text.size(); ++i)
    if (static_cast<unsigned char>(text[i]) > 127) throw ParseError("syntax error: non-ASCII input", i);
  return Parser(text).run();
}

std::string print(const Expr& e) {
  std::string out;
  print_into(e, out);
  return out;
}

double eval(const Expr& e, const Env& env) { return eval_tree(e, env); }

std::vector<std::string> free_variables(const Expr& e) {
  std::set<std::string> names;
  collect_vars(e, names);
  return {names.begin(), names.end()};
}

namespace {

void lower(const Expr& e, std::span<const std::string> slots, auto& ops) {
  for (const auto& c : e.children) lower(c, slots, ops);
  std::size_t slot = 0;
  if (e.kind == ExprKind::Var) {
    auto it = std::find(slots.begin(), slots.end(), e.name);
    if (it == slots.end()) throw std::invalid_argument("unbound variable '" + e.name + "'");
    slot = static_cast<std::size_t>(it - slots.begin());
  }
  ops.push_back({e.kind, e.value, slot, e.fn});
}

}  // namespace

CompiledExpr::CompiledExpr(const Expr& e, std::span<const std::string> slots) : source_(e) {
  lower(e, slots, ops_);
  // Postfix stack never exceeds the number of ops.
  max_depth_ = ops_.size();
}

double CompiledExpr::operator()(std::span<const double> args) const {
  constexpr std::size_t kInline = 64;
  std::array<double, kInline> small{};
  std::vector<double> big;
  double* stack = small.data();
  if (max_depth_ > kInline) {
    big.resize(max_depth_);
    stack = big.data();
  }
  std::size_t top = 0;
  for (const Op& op : ops_) {
    switch (op.kind) {
      case ExprKind::Const:
        stack[top++] = op.value;
        break;
      case ExprKind::Var:
        stack[top++] = args[op.slot];
        break;
      case ExprKind::Add:
        --top;
        stack[top - 1] = checked(stack[top - 1] + stack[top]);
        break;
      case ExprKind::Sub:
        --top;
        stack[top - 1] = checked(stack[top - 1] - stack[top]);
        break;
      case ExprKind::Mul:
        --top;
        stack[top - 1] = checked(stack[top - 1] * stack[top]);
        break;
      case ExprKind::Div:
        --top;
        if (stack[top] == 0.0) throw DomainError("division by zero");
        stack[top - 1] = checked(stack[top - 1] / stack[top]);
        break;
      case ExprKind::Neg:
        stack[top - 1] = -stack[top - 1];
        break;
      case ExprKind::Pow:
        stack[top - 1] = checked(apply_pow(stack[top - 1], op.value));
        break;
      case ExprKind::Call:
        stack[top - 1] = checked(apply_func(op.fn, stack[top - 1]));
        break;
    }
  }
  return stack[0];
}

}  // namespace fiberlin
