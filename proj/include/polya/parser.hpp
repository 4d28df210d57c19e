#pragma once

#include <cctype>
#include <string>
#include <variant>
#include <vector>

#include "polya/term.hpp"

namespace polya {

namespace detail {

struct Token {
  enum Type { Ident, Number, Plus, Star, Caret, LParen, RParen, LBracket, RBracket,
              LBrace, RBrace, Comma, Equals, At, End };
  Type type = End;
  std::string text;
  Rat value;  // Number only
  int line = 1, col = 1;
};

inline std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto push = [&](Token::Type t, std::string text, Rat v = Rat(0)) {
    out.push_back(Token{t, std::move(text), std::move(v), line, col});
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == '\n') { ++line; col = 1; ++i; continue; }
    if (std::isspace(static_cast<unsigned char>(c))) { ++col; ++i; continue; }
    int tok_col = col;
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      std::string text = src.substr(i, j - i);
      Rat v;
      if (j < src.size() && src[j] == '/' && j + 1 < src.size() &&
          std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
        size_t k = j + 1;
        while (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) ++k;
        std::string den = src.substr(j + 1, k - j - 1);
        v = Rat(text + "/" + den, 10);
        v.canonicalize();
        text = src.substr(i, k - i);
        j = k;
      } else if (j < src.size() && src[j] == '.' && j + 1 < src.size() &&
                 std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
        size_t k = j + 1;
        while (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) ++k;
        std::string frac = src.substr(j + 1, k - j - 1);
        Rat num(text + frac, 10);
        Rat den(Int(int_pow(Int(10), static_cast<unsigned long>(frac.size()))));
        v = num / den;
        text = src.substr(i, k - i);
        j = k;
      } else {
        v = Rat(text, 10);
      }
      col += static_cast<int>(j - i);
      i = j;
      out.push_back(Token{Token::Number, text, v, line, tok_col});
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        ++j;
      std::string text = src.substr(i, j - i);
      col += static_cast<int>(j - i);
      i = j;
      out.push_back(Token{Token::Ident, text, Rat(0), line, tok_col});
      continue;
    }
    Token::Type t;
    switch (c) {
      case '+': t = Token::Plus; break;
      case '*': t = Token::Star; break;
      case '^': t = Token::Caret; break;
      case '(': t = Token::LParen; break;
      case ')': t = Token::RParen; break;
      case '[': t = Token::LBracket; break;
      case ']': t = Token::RBracket; break;
      case '{': t = Token::LBrace; break;
      case '}': t = Token::RBrace; break;
      case ',': t = Token::Comma; break;
      case '=': t = Token::Equals; break;
      case '@': t = Token::At; break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", line, tok_col);
    }
    push(t, std::string(1, c));
    ++col;
    ++i;
  }
  push(Token::End, "");
  return out;
}

// Intermediate parse value: a pure scalar folds into an adjacent factor; a
// scalar-only equation is rejected (constant terms must be 0).
using PValue = std::variant<Rat, TermPtr>;

class Parser {
 public:
  explicit Parser(std::string src) : src_(std::move(src)), toks_(lex(src_)) {}

  TermPtr parse_equation() {
    // optional "w =" prefix
    if (toks_.size() >= 2 && peek().type == Token::Ident && peek().text == "w" &&
        toks_[pos_ + 1].type == Token::Equals) {
      pos_ += 2;
    }
    PValue v = parse_expr();
    expect(Token::End, "end of input");
    if (std::holds_alternative<Rat>(v))
      throw ParseError("a bare scalar is not a series (constant term must be 0)", 1, 1);
    return std::get<TermPtr>(v);
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& advance() { return toks_[pos_++]; }
  bool accept(Token::Type t) {
    if (peek().type == t) { ++pos_; return true; }
    return false;
  }
  const Token& expect(Token::Type t, const std::string& what) {
    if (peek().type != t)
      throw ParseError("expected " + what + ", got '" + peek().text + "'", peek().line, peek().col);
    return advance();
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, peek().line, peek().col);
  }
  [[noreturn]] void fail_at(const Token& tok, const std::string& msg) const {
    throw ParseError(msg, tok.line, tok.col);
  }

  PValue parse_expr() {
    const Token& first = peek();
    PValue acc = parse_term();
    while (accept(Token::Plus)) {
      PValue rhs = parse_term();
      if (std::holds_alternative<Rat>(acc) != std::holds_alternative<Rat>(rhs))
        fail_at(first, "sum mixes a scalar with a series (constant term must be 0)");
      if (std::holds_alternative<Rat>(acc))
        acc = std::get<Rat>(acc) + std::get<Rat>(rhs);
      else
        acc = t_add(std::get<TermPtr>(acc), std::get<TermPtr>(rhs));
    }
    return acc;
  }

  PValue parse_term() {
    const Token& first = peek();
    Rat scalar(1);
    std::vector<TermPtr> factors;
    auto absorb = [&](PValue v) {
      if (std::holds_alternative<Rat>(v))
        scalar *= std::get<Rat>(v);
      else
        factors.push_back(std::get<TermPtr>(v));
    };
    absorb(parse_cfactor());
    while (accept(Token::Star)) absorb(parse_cfactor());
    if (factors.empty()) return scalar;
    if (is_zero(scalar)) fail_at(first, "zero scalar");
    TermPtr acc = factors.front();
    for (size_t i = 1; i < factors.size(); ++i) acc = t_mul(acc, factors[i]);
    return scalar == 1 ? PValue{acc} : PValue{t_scale(scalar, acc)};
  }

  PValue parse_cfactor() {
    PValue acc = parse_factor();
    while (peek().type == Token::At) {
      const Token& at = advance();
      PValue rhs = parse_factor();
      if (std::holds_alternative<Rat>(acc) || std::holds_alternative<Rat>(rhs))
        fail_at(at, "composition needs operator operands");
      acc = t_compose_w(std::get<TermPtr>(acc), std::get<TermPtr>(rhs));
    }
    return acc;
  }

  PValue parse_factor() {
    PValue base = parse_base();
    if (peek().type != Token::Caret) return base;
    const Token& caret = advance();
    const Token& num = expect(Token::Number, "exponent");
    if (!is_integer(num.value) || num.value < 1 || num.value > 256)
      fail_at(caret, "exponent must be an integer in [1, 256]");
    long k = num.value.get_num().get_si();
    if (std::holds_alternative<Rat>(base))
      return rat_pow(std::get<Rat>(base), static_cast<unsigned long>(k));
    TermPtr b = std::get<TermPtr>(base);
    TermPtr acc = b;
    for (long i = 1; i < k; ++i) acc = t_mul(acc, b);  // w^k sugar -> repeated Mul
    return acc;
  }

  bool starts_base() const {
    switch (peek().type) {
      case Token::Ident:
      case Token::Number:
      case Token::LParen:
        return true;
      default:
        return false;
    }
  }

  PValue parse_base() {
    const Token& tok = peek();
    if (accept(Token::LParen)) {
      PValue v = parse_expr();
      expect(Token::RParen, "')'");
      return v;
    }
    if (tok.type == Token::Number) {
      advance();
      if (sgn(tok.value) <= 0) fail_at(tok, "zero or negative scalar");
      bool star = accept(Token::Star);
      if (starts_base()) {
        PValue operand = parse_factor();
        if (std::holds_alternative<Rat>(operand)) return tok.value * std::get<Rat>(operand);
        return t_scale(tok.value, std::get<TermPtr>(operand));
      }
      if (star) fail("expected a factor after '*'");
      return tok.value;
    }
    if (tok.type == Token::Ident) {
      advance();
      const std::string& name = tok.text;
      if (name == "z") return t_z();
      if (name == "w") return t_w();
      if (name == "powsum") {
        expect(Token::LParen, "'('");
        const Token& num = expect(Token::Number, "scalar");
        if (sgn(num.value) <= 0) fail_at(num, "zero or negative scalar");
        expect(Token::Comma, "','");
        SpecSet m = parse_mset();
        expect(Token::Comma, "','");
        TermPtr arg = parse_operator_arg();
        expect(Token::RParen, "')'");
        return t_powsum(num.value, std::move(m), std::move(arg));
      }
      if (name == "expm1") {
        expect(Token::LParen, "'('");
        TermPtr arg = parse_operator_arg();
        expect(Token::RParen, "')'");
        return t_expm1(std::move(arg));
      }
      if (name == "poly") {
        expect(Token::LParen, "'('");
        std::vector<Rat> coeffs;
        do {
          const Token& num = expect(Token::Number, "coefficient");
          if (sgn(num.value) <= 0) fail_at(num, "zero or negative scalar");
          coeffs.push_back(num.value);
        } while (accept(Token::Comma));
        expect(Token::RParen, "')'");
        return t_const(Generator::poly(std::move(coeffs)));
      }
      if (name == "geom") {
        expect(Token::LParen, "'('");
        const Token& num = expect(Token::Number, "ratio");
        if (sgn(num.value) <= 0) fail_at(num, "zero or negative scalar");
        expect(Token::RParen, "')'");
        return t_const(Generator::geometric(num.value));
      }
      // standard operator, possibly with restriction: MSet, MSet[{2,3}], MSet_2
      std::string op = name;
      std::optional<long> subscript;
      if (auto us = name.find('_'); us != std::string::npos) {
        op = name.substr(0, us);
        std::string suffix = name.substr(us + 1);
        if (suffix.empty() || suffix.find_first_not_of("0123456789") != std::string::npos)
          fail_at(tok, "unknown builtin '" + name + "'");
        subscript = std::stol(suffix);
      }
      StdKind kind;
      if (op == "MSet") kind = StdKind::MSet;
      else if (op == "Cycle") kind = StdKind::Cycle;
      else if (op == "DCycle") kind = StdKind::DCycle;
      else if (op == "Seq") kind = StdKind::Seq;
      else fail_at(tok, "unknown builtin '" + name + "'");

      SpecSet m = SpecSet::all();
      if (subscript) {
        if (*subscript < 1) fail_at(tok, "restriction elements must be >= 1");
        m = SpecSet::explicit_set({*subscript});
      } else if (accept(Token::LBracket)) {
        m = parse_mset();
        expect(Token::RBracket, "']'");
      }
      expect(Token::LParen, "'('");
      TermPtr arg = parse_operator_arg();
      expect(Token::RParen, "')'");
      return t_std(kind, std::move(m), std::move(arg));
    }
    fail("expected a factor");
  }

  TermPtr parse_operator_arg() {
    const Token& first = peek();
    PValue v = parse_expr();
    if (std::holds_alternative<Rat>(v))
      fail_at(first, "operator argument must be a series, not a scalar");
    return std::get<TermPtr>(v);
  }

  SpecSet parse_mset() {
    const Token& tok = peek();
    try {
      if (tok.type == Token::Ident) {
        advance();
        if (tok.text == "all") return SpecSet::all();
        if (tok.text == "odd") return SpecSet::odd();
        if (tok.text == "even") return SpecSet::even_ge2();
        if (tok.text == "primes") return SpecSet::primes();
        if (tok.text == "ap") {
          expect(Token::LParen, "'('");
          long first = parse_positive_int();
          expect(Token::Comma, "','");
          long step = parse_positive_int();
          expect(Token::RParen, "')'");
          return SpecSet::arith_prog(first, step);
        }
        fail_at(tok, "unknown restriction set '" + tok.text + "'");
      }
      if (accept(Token::LBrace)) {
        std::vector<long> elems;
        if (peek().type == Token::RBrace) fail("empty restriction set");
        do {
          elems.push_back(parse_positive_int());
        } while (accept(Token::Comma));
        expect(Token::RBrace, "'}'");
        return SpecSet::explicit_set(std::move(elems));
      }
    } catch (const Error& e) {
      throw ParseError(e.what(), tok.line, tok.col);
    }
    fail("expected a restriction set");
  }

  long parse_positive_int() {
    const Token& num = expect(Token::Number, "integer");
    if (!is_integer(num.value) || num.value < 1)
      fail_at(num, "restriction elements must be >= 1");
    return num.value.get_num().get_si();
  }

  std::string src_;
  std::vector<Token> toks_;
  size_t pos_ = 0;
};

}  // namespace detail

// Parses an equation "w = <expr>" (the prefix is optional) into the operator
// AST. Throws ParseError with line/column on malformed input.
inline TermPtr parse(const std::string& text) {
  return detail::Parser(text).parse_equation();
}

}  // namespace polya
