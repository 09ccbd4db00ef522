#include "expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <numbers>
#include <vector>

namespace hmin::cli {

struct Expression::Node {
  enum class Kind { kNumber, kX1, kX2, kUnary, kBinary, kCall } kind;
  double value = 0.0;
  char op = 0;
  double (*fn)(double) = nullptr;
  std::vector<std::shared_ptr<const Node>> args;

  double eval(Point x) const {
    switch (kind) {
      case Kind::kNumber: return value;
      case Kind::kX1: return x.x1;
      case Kind::kX2: return x.x2;
      case Kind::kUnary: return -args[0]->eval(x);
      case Kind::kCall: return fn(args[0]->eval(x));
      case Kind::kBinary: {
        const double a = args[0]->eval(x), b = args[1]->eval(x);
        switch (op) {
          case '+': return a + b;
          case '-': return a - b;
          case '*': return a * b;
          case '/': return a / b;
          default: return std::pow(a, b);
        }
      }
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

double sign(double x) { return x >= 0 ? 1.0 : -1.0; }

const std::map<std::string, double (*)(double)>& functions() {
  static const std::map<std::string, double (*)(double)> table{
      {"sin", [](double x) { return std::sin(x); }},   {"cos", [](double x) { return std::cos(x); }},
      {"tan", [](double x) { return std::tan(x); }},   {"exp", [](double x) { return std::exp(x); }},
      {"log", [](double x) { return std::log(x); }},   {"sqrt", [](double x) { return std::sqrt(x); }},
      {"abs", [](double x) { return std::abs(x); }},   {"tanh", [](double x) { return std::tanh(x); }},
      {"cosh", [](double x) { return std::cosh(x); }}, {"sinh", [](double x) { return std::sinh(x); }},
      {"sign", sign},
  };
  return table;
}

// expr := term (('+'|'-') term)*
// term := unary (('*'|'/') unary)*
// unary := '-' unary | power
// power := atom ('^' unary)?
class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr n = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ExpressionError(what, pos_ + 1); }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static NodePtr make(Kind k, char op, std::vector<NodePtr> args) {
    auto n = std::make_shared<Expression::Node>();
    n->kind = k;
    n->op = op;
    n->args = std::move(args);
    return n;
  }

  NodePtr expr() {
    NodePtr n = term();
    for (;;) {
      if (eat('+')) n = make(Kind::kBinary, '+', {n, term()});
      else if (eat('-')) n = make(Kind::kBinary, '-', {n, term()});
      else return n;
    }
  }
  NodePtr term() {
    NodePtr n = unary();
    for (;;) {
      if (eat('*')) n = make(Kind::kBinary, '*', {n, unary()});
      else if (eat('/')) n = make(Kind::kBinary, '/', {n, unary()});
      else return n;
    }
  }
  NodePtr unary() {
    if (eat('-')) return make(Kind::kUnary, '-', {unary()});
    if (eat('+')) return unary();
    return power();
  }
  NodePtr power() {
    NodePtr base = atom();
    if (eat('^')) return make(Kind::kBinary, '^', {base, unary()});
    return base;
  }
  NodePtr atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    if (eat('(')) {
      NodePtr n = expr();
      if (!eat(')')) fail("expected ')'");
      return n;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += static_cast<std::size_t>(end - begin);
      auto n = std::make_shared<Expression::Node>();
      n->kind = Kind::kNumber;
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string name = s_.substr(start, pos_ - start);
      auto n = std::make_shared<Expression::Node>();
      if (name == "x1") {
        n->kind = Kind::kX1;
        return n;
      }
      if (name == "x2") {
        n->kind = Kind::kX2;
        return n;
      }
      if (name == "pi") {
        n->kind = Kind::kNumber;
        n->value = std::numbers::pi;
        return n;
      }
      const auto it = functions().find(name);
      if (it == functions().end()) {
        pos_ = start;
        fail("unknown identifier '" + name + "'");
      }
      if (!eat('(')) fail("expected '(' after " + name);
      n->kind = Kind::kCall;
      n->fn = it->second;
      n->args = {expr()};
      if (!eat(')')) fail("expected ')'");
      return n;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression(const std::string& text) : text_(text), root_(Parser(text_).parse()) {}

double Expression::operator()(Point x) const { return root_->eval(x); }

}  // namespace hmin::cli
