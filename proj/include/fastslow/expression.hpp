#pragma once

// Closed expression language for initial profiles, in one variable x:
//
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := ('+' | '-') unary | power
//   power  := atom ('^' unary)?
//   atom   := number | 'x' | 'pi' | func '(' expr ')' | '(' expr ')'
//   func   := 'cos' | 'sin' | 'exp'
//
// The unicode forms "π", "×" and "−" are accepted for pi, '*' and '-'.
// Nothing outside this grammar is evaluated.

#include "fastslow/error.hpp"
#include "fastslow/numeric.hpp"

#include <cctype>
#include <cmath>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace fastslow {

class Expression {
 public:
  static Expression parse(std::string_view text) {
    Parser p{normalize(text), 0};
    Expression e;
    e.text_ = std::string(text);
    p.skip();
    if (p.pos == p.s.size()) throw p.fail("empty expression");
    e.root_ = p.expr();
    p.skip();
    if (p.pos != p.s.size()) throw p.fail("unexpected trailing input");
    return e;
  }

  double operator()(double x) const { return eval(*root_, x); }
  const std::string& text() const { return text_; }

 private:
  enum class Op { num, var, add, sub, mul, div, pow, neg, cos, sin, exp };
  struct Node {
    Op op;
    double value = 0.0;
    std::unique_ptr<Node> a, b;
  };
  using Ptr = std::shared_ptr<const Node>;

  static std::unique_ptr<Node> leaf(Op op, double v = 0.0) {
    auto n = std::make_unique<Node>();
    n->op = op;
    n->value = v;
    return n;
  }
  static std::unique_ptr<Node> make(Op op, std::unique_ptr<Node> a, std::unique_ptr<Node> b = {}) {
    auto n = std::make_unique<Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
  }

  static double eval(const Node& n, double x) {
    switch (n.op) {
      case Op::num: return n.value;
      case Op::var: return x;
      case Op::add: return eval(*n.a, x) + eval(*n.b, x);
      case Op::sub: return eval(*n.a, x) - eval(*n.b, x);
      case Op::mul: return eval(*n.a, x) * eval(*n.b, x);
      case Op::div: return eval(*n.a, x) / eval(*n.b, x);
      case Op::pow: return std::pow(eval(*n.a, x), eval(*n.b, x));
      case Op::neg: return -eval(*n.a, x);
      case Op::cos: return std::cos(eval(*n.a, x));
      case Op::sin: return std::sin(eval(*n.a, x));
      case Op::exp: return std::exp(eval(*n.a, x));
    }
    return 0.0;
  }

  // Maps the accepted unicode spellings to ASCII.
  static std::string normalize(std::string_view in) {
    std::string out;
    for (std::size_t i = 0; i < in.size();) {
      const std::string_view rest = in.substr(i);
      if (rest.starts_with("\xCF\x80")) {  // π
        out += "pi";
        i += 2;
      } else if (rest.starts_with("\xC3\x97")) {  // ×
        out += '*';
        i += 2;
      } else if (rest.starts_with("\xE2\x88\x92")) {  // −
        out += '-';
        i += 3;
      } else {
        out += in[i++];
      }
    }
    return out;
  }

  struct Parser {
    std::string s;
    std::size_t pos;

    Error fail(const std::string& what) const {
      return Error(ErrorKind::ParseError, what + " at column " + std::to_string(pos + 1) + " of '" + s + "'");
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

    std::unique_ptr<Node> expr() {
      auto lhs = term();
      for (;;) {
        if (eat('+')) lhs = make(Op::add, std::move(lhs), term());
        else if (eat('-')) lhs = make(Op::sub, std::move(lhs), term());
        else return lhs;
      }
    }
    std::unique_ptr<Node> term() {
      auto lhs = unary();
      for (;;) {
        if (eat('*')) lhs = make(Op::mul, std::move(lhs), unary());
        else if (eat('/')) lhs = make(Op::div, std::move(lhs), unary());
        else return lhs;
      }
    }
    std::unique_ptr<Node> unary() {
      if (eat('-')) return make(Op::neg, unary());
      if (eat('+')) return unary();
      return power();
    }
    std::unique_ptr<Node> power() {
      auto base = atom();
      if (eat('^')) return make(Op::pow, std::move(base), unary());
      return base;
    }
    std::unique_ptr<Node> atom() {
      skip();
      if (pos >= s.size()) throw fail("unexpected end of expression");
      if (eat('(')) {
        auto e = expr();
        if (!eat(')')) throw fail("expected ')'");
        return e;
      }
      const char c = s[pos];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        std::size_t used = 0;
        double v = 0.0;
        try {
          v = std::stod(s.substr(pos), &used);
        } catch (const std::exception&) {
          throw fail("malformed number");
        }
        pos += used;
        return leaf(Op::num, v);
      }
      if (std::isalpha(static_cast<unsigned char>(c))) {
        const std::size_t start = pos;
        while (pos < s.size() && std::isalpha(static_cast<unsigned char>(s[pos]))) ++pos;
        const std::string word = s.substr(start, pos - start);
        if (word == "x") return leaf(Op::var);
        if (word == "pi") return leaf(Op::num, kPi);
        Op f;
        if (word == "cos") f = Op::cos;
        else if (word == "sin") f = Op::sin;
        else if (word == "exp") f = Op::exp;
        else {
          pos = start;
          throw fail("unknown identifier '" + word + "'");
        }
        if (!eat('(')) throw fail("expected '(' after " + word);
        auto arg = expr();
        if (!eat(')')) throw fail("expected ')'");
        return make(f, std::move(arg));
      }
      throw fail(std::string("unexpected character '") + c + "'");
    }
  };

  std::string text_;
  Ptr root_;
};

}  // namespace fastslow
