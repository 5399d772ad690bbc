#pragma once

// Arithmetic expressions in x, y, r compiled to samplers.
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary ('^' unary)?
//   primary := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "abreu/errors.hpp"
#include "abreu/types.hpp"

namespace abreu {

class Expression {
 public:
  static Expression parse(std::string_view text) {
    Parser p{text, 0};
    Expression e;
    e.root_ = p.expr();
    p.skip();
    if (p.pos != text.size()) p.fail("unexpected '" + std::string(1, text[p.pos]) + "'");
    e.text_ = std::string(text);
    return e;
  }

  double operator()(double x, double y) const { return root_->eval(x, y, std::hypot(x, y)); }
  const std::string& text() const { return text_; }

  Sampler sampler() const {
    return [root = root_](double x, double y) { return root->eval(x, y, std::hypot(x, y)); };
  }

 private:
  struct Node {
    enum class Op { number, x, y, r, add, sub, mul, div, pow, neg, call } op = Op::number;
    double value = 0.0;
    double (*fn1)(double) = nullptr;
    double (*fn2)(double, double) = nullptr;
    std::vector<std::shared_ptr<const Node>> args;

    double eval(double x, double y, double r) const {
      auto a = [&](std::size_t i) { return args[i]->eval(x, y, r); };
      switch (op) {
        case Op::number: return value;
        case Op::x: return x;
        case Op::y: return y;
        case Op::r: return r;
        case Op::add: return a(0) + a(1);
        case Op::sub: return a(0) - a(1);
        case Op::mul: return a(0) * a(1);
        case Op::div: return a(0) / a(1);
        case Op::pow: return std::pow(a(0), a(1));
        case Op::neg: return -a(0);
        case Op::call: return fn1 ? fn1(a(0)) : fn2(a(0), a(1));
      }
      return 0.0;
    }
  };
  using NodePtr = std::shared_ptr<const Node>;

  static NodePtr make(Node::Op op, std::vector<NodePtr> args = {}) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->args = std::move(args);
    return n;
  }

  struct Parser {
    std::string_view s;
    std::size_t pos;

    [[noreturn]] void fail(const std::string& what) const {
      throw ConfigError("expression '" + std::string(s) + "': " + what + " at column " + std::to_string(pos + 1));
    }
    void skip() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
      skip();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }

    NodePtr expr() {
      NodePtr lhs = term();
      for (;;) {
        if (eat('+')) lhs = make(Node::Op::add, {lhs, term()});
        else if (eat('-')) lhs = make(Node::Op::sub, {lhs, term()});
        else return lhs;
      }
    }
    NodePtr term() {
      NodePtr lhs = unary();
      for (;;) {
        if (eat('*')) lhs = make(Node::Op::mul, {lhs, unary()});
        else if (eat('/')) lhs = make(Node::Op::div, {lhs, unary()});
        else return lhs;
      }
    }
    NodePtr unary() {
      if (eat('-')) return make(Node::Op::neg, {unary()});
      if (eat('+')) return unary();
      return power();
    }
    NodePtr power() {
      NodePtr base = primary();
      if (eat('^')) return make(Node::Op::pow, {base, unary()});
      return base;
    }
    NodePtr primary() {
      skip();
      if (pos >= s.size()) fail("unexpected end");
      const char c = s[pos];
      if (eat('(')) {
        NodePtr e = expr();
        if (!eat(')')) fail("expected ')'");
        return e;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return name();
      fail("unexpected '" + std::string(1, c) + "'");
    }
    NodePtr number() {
      const std::string rest(s.substr(pos));
      char* end = nullptr;
      const double v = std::strtod(rest.c_str(), &end);
      if (end == rest.c_str()) fail("bad number");
      pos += static_cast<std::size_t>(end - rest.c_str());
      auto n = std::make_shared<Node>();
      n->value = v;
      return n;
    }
    NodePtr name() {
      const std::size_t start = pos;
      while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
      const std::string id(s.substr(start, pos - start));
      if (!eat('(')) {
        if (id == "x") return make(Node::Op::x);
        if (id == "y") return make(Node::Op::y);
        if (id == "r") return make(Node::Op::r);
        auto n = std::make_shared<Node>();
        if (id == "pi") n->value = kPi;
        else if (id == "e") n->value = std::exp(1.0);
        else fail("unknown name '" + id + "'");
        return n;
      }
      std::vector<NodePtr> args{expr()};
      while (eat(',')) args.push_back(expr());
      if (!eat(')')) fail("expected ')'");
      auto n = std::make_shared<Node>();
      n->op = Node::Op::call;
      n->args = std::move(args);
      if (auto f = unary_function(id)) {
        if (n->args.size() != 1) fail(id + " takes one argument");
        n->fn1 = f;
      } else if (auto g = binary_function(id)) {
        if (n->args.size() != 2) fail(id + " takes two arguments");
        n->fn2 = g;
      } else {
        fail("unknown function '" + id + "'");
      }
      return n;
    }

    static double (*unary_function(const std::string& id))(double) {
      struct Entry {
        const char* name;
        double (*fn)(double);
      };
      static const Entry table[] = {
          {"sin", [](double v) { return std::sin(v); }},     {"cos", [](double v) { return std::cos(v); }},
          {"tan", [](double v) { return std::tan(v); }},     {"asin", [](double v) { return std::asin(v); }},
          {"acos", [](double v) { return std::acos(v); }},   {"atan", [](double v) { return std::atan(v); }},
          {"sinh", [](double v) { return std::sinh(v); }},   {"cosh", [](double v) { return std::cosh(v); }},
          {"tanh", [](double v) { return std::tanh(v); }},   {"exp", [](double v) { return std::exp(v); }},
          {"log", [](double v) { return std::log(v); }},     {"log10", [](double v) { return std::log10(v); }},
          {"sqrt", [](double v) { return std::sqrt(v); }},   {"abs", [](double v) { return std::abs(v); }},
          {"floor", [](double v) { return std::floor(v); }}, {"ceil", [](double v) { return std::ceil(v); }},
      };
      for (const auto& e : table) {
        if (id == e.name) return e.fn;
      }
      return nullptr;
    }
    static double (*binary_function(const std::string& id))(double, double) {
      if (id == "pow") return [](double a, double b) { return std::pow(a, b); };
      if (id == "atan2") return [](double a, double b) { return std::atan2(a, b); };
      if (id == "min") return [](double a, double b) { return std::min(a, b); };
      if (id == "max") return [](double a, double b) { return std::max(a, b); };
      return nullptr;
    }
  };

  NodePtr root_;
  std::string text_;
};

}  // namespace abreu
