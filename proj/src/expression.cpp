#include "ergoinv/expression.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ergoinv/error.hpp"

namespace ergoinv {

struct Expression::Node {
  enum class Op { constant, variable, neg, add, sub, mul, div, pow, call };
  Op op = Op::constant;
  double value = 0.0;
  std::size_t slot = 0;
  double (*fn)(double) = nullptr;
  std::shared_ptr<const Node> lhs, rhs;

  double eval(std::span<const double> vars) const {
    switch (op) {
      case Op::constant: return value;
      case Op::variable: return vars[slot];
      case Op::neg: return -lhs->eval(vars);
      case Op::add: return lhs->eval(vars) + rhs->eval(vars);
      case Op::sub: return lhs->eval(vars) - rhs->eval(vars);
      case Op::mul: return lhs->eval(vars) * rhs->eval(vars);
      case Op::div: return lhs->eval(vars) / rhs->eval(vars);
      case Op::pow: {
        const double base = lhs->eval(vars);
        const double ex = rhs->eval(vars);
        // Small integer powers by multiplication keep polynomials exact in sign.
        if (ex == std::floor(ex) && std::abs(ex) <= 16.0) {
          double r = 1.0;
          for (int k = 0; k < static_cast<int>(std::abs(ex)); ++k) r *= base;
          return ex < 0 ? 1.0 / r : r;
        }
        return std::pow(base, ex);
      }
      case Op::call: return fn(lhs->eval(vars));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Op = Expression::Node::Op;

NodePtr make(Op op, NodePtr l = nullptr, NodePtr r = nullptr) {
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->lhs = std::move(l);
  n->rhs = std::move(r);
  return n;
}

double (*lookup_function(std::string_view name))(double) {
  if (name == "sqrt") return [](double v) { return std::sqrt(v); };
  if (name == "exp") return [](double v) { return std::exp(v); };
  if (name == "log") return [](double v) { return std::log(v); };
  if (name == "sin") return [](double v) { return std::sin(v); };
  if (name == "cos") return [](double v) { return std::cos(v); };
  if (name == "tan") return [](double v) { return std::tan(v); };
  if (name == "tanh") return [](double v) { return std::tanh(v); };
  if (name == "atan") return [](double v) { return std::atan(v); };
  if (name == "abs") return [](double v) { return std::abs(v); };
  return nullptr;
}

class Parser {
public:
  Parser(std::string_view text, const std::vector<std::string>& vars) : text_(text), vars_(vars) {}

  NodePtr parse() {
    auto n = expr();
    skip();
    if (pos_ != text_.size()) fail("unexpected character");
    return n;
  }

private:
  [[noreturn]] void fail(const std::string& msg) const {
    std::ostringstream os;
    os << "expression '" << text_ << "': " << msg << " at column " << (pos_ + 1);
    throw Error(ErrorKind::config, os.str());
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    auto lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make(Op::add, lhs, term());
      } else if (accept('-')) {
        lhs = make(Op::sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    auto lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make(Op::mul, lhs, unary());
      } else if (accept('/')) {
        lhs = make(Op::div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Op::neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    auto base = primary();
    if (accept('^')) return make(Op::pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      auto n = expr();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail("unexpected character");
  }

  NodePtr number() {
    const std::string rest(text_.substr(pos_));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(rest, &used);
    } catch (const std::exception&) {
      fail("malformed number");
    }
    pos_ += used;
    auto n = std::make_shared<Expression::Node>();
    n->value = v;
    return n;
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = text_.substr(start, pos_ - start);
    if (auto fn = lookup_function(name)) {
      if (!accept('(')) fail("expected '(' after function name");
      auto arg = expr();
      if (!accept(')')) fail("expected ')'");
      auto n = std::make_shared<Expression::Node>();
      n->op = Op::call;
      n->fn = fn;
      n->lhs = std::move(arg);
      return n;
    }
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (vars_[i] == name) {
        auto n = std::make_shared<Expression::Node>();
        n->op = Op::variable;
        n->slot = i;
        return n;
      }
    }
    // Single-variable expressions may write x1 for x.
    if (vars_.size() == 1 && vars_[0] == "x" && name == "x1") {
      auto n = std::make_shared<Expression::Node>();
      n->op = Op::variable;
      return n;
    }
    auto n = std::make_shared<Expression::Node>();
    if (name == "pi") {
      n->value = std::numbers::pi;
      return n;
    }
    if (name == "e") {
      n->value = std::numbers::e;
      return n;
    }
    pos_ = start;
    fail("unknown identifier '" + std::string(name) + "'");
  }

  std::string_view text_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::compile(std::string_view text, const std::vector<std::string>& variables) {
  Expression e;
  e.text_ = std::string(text);
  e.root_ = Parser(e.text_, variables).parse();
  return e;
}

double Expression::operator()(std::span<const double> vars) const { return root_->eval(vars); }

std::vector<std::string> coordinate_names(std::size_t d) {
  if (d == 1) return {"x"};
  std::vector<std::string> names;
  for (std::size_t i = 1; i <= d; ++i) names.push_back("x" + std::to_string(i));
  return names;
}

std::vector<std::string> split_list(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = text.find(sep, start);
    std::string_view piece = text.substr(start, pos == std::string_view::npos ? text.npos : pos - start);
    while (!piece.empty() && std::isspace(static_cast<unsigned char>(piece.front()))) piece.remove_prefix(1);
    while (!piece.empty() && std::isspace(static_cast<unsigned char>(piece.back()))) piece.remove_suffix(1);
    out.emplace_back(piece);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace ergoinv
