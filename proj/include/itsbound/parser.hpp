#pragma once

#include <cctype>
#include <cstring>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "itsbound/program.hpp"

namespace itsbound {

struct ParseError : std::runtime_error {
  int line;
  ParseError(const std::string& msg, int l)
      : std::runtime_error("line " + std::to_string(l) + ": " + msg), line(l) {}
};

namespace detail {

struct Token {
  enum class Kind { Ident, Nat, Punct, End };
  Kind kind = Kind::End;
  std::string text;
  int line = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : s_(text) { advance(); }

  const Token& peek() const { return tok_; }

  Token next() {
    Token t = tok_;
    advance();
    return t;
  }

  bool eat(const std::string& punct) {
    if (tok_.kind == Token::Kind::Punct && tok_.text == punct) {
      advance();
      return true;
    }
    return false;
  }

  void expect(const std::string& punct) {
    if (!eat(punct)) throw ParseError("expected '" + punct + "'", tok_.line);
  }

  std::string expect_ident() {
    if (tok_.kind != Token::Kind::Ident) throw ParseError("expected identifier", tok_.line);
    return next().text;
  }

  std::size_t pos() const { return save_; }
  void rewind(std::size_t p) {
    i_ = p;
    // recompute the line counter from scratch; files are small
    line_ = 1;
    for (std::size_t k = 0; k < p; ++k)
      if (s_[k] == '\n') ++line_;
    advance();
  }

 private:
  void advance() {
    while (i_ < s_.size()) {
      char c = s_[i_];
      if (c == '\n') {
        ++line_;
        ++i_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++i_;
      } else if (c == '#') {  // comment to end of line
        while (i_ < s_.size() && s_[i_] != '\n') ++i_;
      } else {
        break;
      }
    }
    save_ = i_;
    tok_.line = line_;
    if (i_ >= s_.size()) {
      tok_ = {Token::Kind::End, "", line_};
      return;
    }
    char c = s_[i_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i_;
      while (j < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '_' || s_[j] == '\''))
        ++j;
      tok_ = {Token::Kind::Ident, s_.substr(i_, j - i_), line_};
      i_ = j;
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i_;
      while (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) ++j;
      tok_ = {Token::Kind::Nat, s_.substr(i_, j - i_), line_};
      i_ = j;
      return;
    }
    for (const char* p : {"->", ":|:", "&&", "||", ">=", "<=", "=="}) {
      std::size_t n = std::strlen(p);
      if (s_.compare(i_, n, p) == 0) {
        tok_ = {Token::Kind::Punct, p, line_};
        i_ += n;
        return;
      }
    }
    tok_ = {Token::Kind::Punct, std::string(1, c), line_};
    ++i_;
  }

  std::string s_;
  std::size_t i_ = 0, save_ = 0;
  int line_ = 1;
  Token tok_;
};

class ProgramParser {
 public:
  explicit ProgramParser(const std::string& text) : lx_(text) {}

  Program parse() {
    std::string start_symbol;
    bool saw_rules = false;
    while (lx_.peek().kind != Token::Kind::End) {
      lx_.expect("(");
      std::string section = lx_.expect_ident();
      if (section == "GOAL") {
        lx_.expect_ident();
        lx_.expect(")");
      } else if (section == "STARTTERM") {
        lx_.expect("(");
        std::string kw = lx_.expect_ident();
        if (kw != "FUNCTIONSYMBOLS") throw ParseError("expected FUNCTIONSYMBOLS", lx_.peek().line);
        start_symbol = lx_.expect_ident();
        lx_.expect(")");
        lx_.expect(")");
      } else if (section == "VAR") {
        while (lx_.peek().kind == Token::Kind::Ident) {
          std::string v = lx_.next().text;
          if (varid_.count(v)) throw ParseError("duplicate variable " + v, lx_.peek().line);
          varid_[v] = static_cast<VarId>(prog_.vars.size());
          prog_.vars.push_back(v);
        }
        lx_.expect(")");
      } else if (section == "RULES") {
        saw_rules = true;
        while (!lx_.eat(")")) parse_rule();
      } else {
        throw ParseError("unknown section " + section, lx_.peek().line);
      }
    }
    if (!saw_rules || prog_.transitions.empty())
      throw ParseError("no transitions", lx_.peek().line);
    if (!start_symbol.empty()) {
      auto it = locid_.find(start_symbol);
      if (it == locid_.end()) throw ParseError("start location " + start_symbol + " has no rule", 1);
      prog_.initial = it->second;
    } else {
      prog_.initial = prog_.transitions.front().source;
    }
    for (auto& t : prog_.transitions)
      if (t.target == prog_.initial)
        throw ParseError("initial location has an incoming transition", 1);
    return prog_;
  }

 private:
  std::uint32_t location(const std::string& name) {
    auto it = locid_.find(name);
    if (it != locid_.end()) return it->second;
    std::uint32_t id = static_cast<std::uint32_t>(prog_.locations.size());
    locid_[name] = id;
    prog_.locations.push_back(name);
    return id;
  }

  void parse_rule() {
    int line = lx_.peek().line;
    std::string src = lx_.expect_ident();
    lx_.expect("(");
    for (std::size_t i = 0; i < prog_.vars.size(); ++i) {
      if (i) lx_.expect(",");
      std::string v = lx_.expect_ident();
      if (v != prog_.vars[i])
        throw ParseError("left-hand side must list the declared variables in order", line);
    }
    lx_.expect(")");
    lx_.expect("->");
    std::string dst = lx_.expect_ident();
    lx_.expect("(");
    Transition t;
    t.id = static_cast<std::uint32_t>(prog_.transitions.size());
    t.source = location(src);
    t.target = location(dst);
    for (std::size_t i = 0; i < prog_.vars.size(); ++i) {
      if (i) lx_.expect(",");
      t.update.push_back(parse_poly());
    }
    lx_.expect(")");
    if (lx_.eat(":|:")) t.guard = parse_disj();
    for (auto& u : t.update)
      for (auto& [m, c] : u.terms)
        if (!is_integer(c)) throw ParseError("non-integer coefficient in an update", line);
    prog_.transitions.push_back(std::move(t));
  }

  Guard parse_disj() {
    std::vector<Guard> kids{parse_conj()};
    while (lx_.eat("||")) kids.push_back(parse_conj());
    return g_or(std::move(kids));
  }

  Guard parse_conj() {
    std::vector<Guard> kids{parse_cmp()};
    while (lx_.eat("&&")) kids.push_back(parse_cmp());
    return g_and(std::move(kids));
  }

  Guard parse_cmp() {
    // '(' may open a nested guard or a parenthesized polynomial; try the
    // polynomial reading first and fall back
    std::size_t mark = lx_.pos();
    if (lx_.peek().kind == Token::Kind::Punct && lx_.peek().text == "(") {
      try {
        return parse_atom();
      } catch (const ParseError&) {
        lx_.rewind(mark);
        lx_.expect("(");
        Guard g = parse_disj();
        lx_.expect(")");
        return g;
      }
    }
    return parse_atom();
  }

  Guard parse_atom() {
    Polynomial lhs = parse_poly();
    Token op = lx_.next();
    if (op.kind != Token::Kind::Punct) throw ParseError("expected comparison operator", op.line);
    Polynomial rhs = parse_poly();
    Polynomial one = Polynomial::constant(1);
    // integer semantics: p >= q  <=>  p - q + 1 > 0
    if (op.text == ">") return g_atom(lhs - rhs);
    if (op.text == ">=") return g_atom(lhs - rhs + one);
    if (op.text == "<") return g_atom(rhs - lhs);
    if (op.text == "<=") return g_atom(rhs - lhs + one);
    if (op.text == "=" || op.text == "==")
      return g_and({g_atom(lhs - rhs + one), g_atom(rhs - lhs + one)});
    throw ParseError("unknown comparison '" + op.text + "'", op.line);
  }

  Polynomial parse_poly() {
    Polynomial p = parse_term();
    while (true) {
      if (lx_.eat("+"))
        p = p + parse_term();
      else if (lx_.eat("-"))
        p = p - parse_term();
      else
        return p;
    }
  }

  Polynomial parse_term() {
    Polynomial p = parse_factor();
    while (lx_.eat("*")) p = p * parse_factor();
    return p;
  }

  Polynomial parse_factor() {
    Polynomial b = parse_base();
    if (lx_.eat("^")) {
      Token e = lx_.next();
      if (e.kind != Token::Kind::Nat) throw ParseError("expected natural exponent", e.line);
      return b.pow(static_cast<std::uint32_t>(std::stoul(e.text)));
    }
    return b;
  }

  Polynomial parse_base() {
    Token t = lx_.peek();
    if (t.kind == Token::Kind::Nat) {
      lx_.next();
      return Polynomial::constant(Rational(Int(t.text)));
    }
    if (t.kind == Token::Kind::Ident) {
      lx_.next();
      auto it = varid_.find(t.text);
      if (it == varid_.end()) throw ParseError("unknown variable " + t.text, t.line);
      return Polynomial::var(it->second);
    }
    if (lx_.eat("-")) return -parse_factor();
    if (lx_.eat("(")) {
      Polynomial p = parse_poly();
      lx_.expect(")");
      return p;
    }
    throw ParseError("expected polynomial", t.line);
  }

  Lexer lx_;
  Program prog_;
  std::map<std::string, VarId> varid_;
  std::map<std::string, std::uint32_t> locid_;
};

}  // namespace detail

inline Program parse_program(const std::string& text) {
  return detail::ProgramParser(text).parse();
}

inline std::string pretty_print(const Program& p) {
  std::string out = "(GOAL COMPLEXITY)\n(STARTTERM (FUNCTIONSYMBOLS " +
                    p.locations[p.initial] + "))\n(VAR";
  for (auto& v : p.vars) out += " " + v;
  out += ")\n(RULES\n";
  std::string head;
  for (std::size_t i = 0; i < p.vars.size(); ++i) head += (i ? "," : "") + p.vars[i];
  for (auto& t : p.transitions) {
    out += "  " + p.locations[t.source] + "(" + head + ") -> " + p.locations[t.target] + "(";
    for (std::size_t i = 0; i < t.update.size(); ++i)
      out += (i ? "," : "") + poly_str(t.update[i], p.vars);
    out += ")";
    if (t.guard.kind != Guard::Kind::True) out += " :|: " + guard_str(t.guard, p.vars);
    out += "\n";
  }
  out += ")\n";
  return out;
}

}  // namespace itsbound
