#pragma once

// Recursive systems y = G(x, y) in a small text language:
//
//   let A = solve { y = x*(1 + 9*y^2); };
//   y1 = A*(1 + y2 + y1^2);
//   y2 = A*(1 + y1 + y2^2);
//
// Let-bound series are 1-equation systems. They are stored in one flat table
// in definition order, so aux k may refer to any aux j < k.

#include <cctype>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "charpoint/expr.hpp"

namespace charpoint {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int line, int column)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_, column_;
};

struct SourceSpan {
  int line = 0;
  int column = 0;
};

struct AuxDef {
  std::string name;
  ExprPtr equation;  // over x, its own y (index 0) and earlier aux entries
  SourceSpan span;
};

struct SystemSpec {
  std::vector<ExprPtr> equations;
  std::vector<AuxDef> aux;
  std::vector<SourceSpan> spans;

  std::size_t arity() const { return equations.size(); }

  /// The 1-equation system defining aux k, together with the aux it may use.
  SystemSpec aux_system(std::size_t k) const {
    if (k >= aux.size()) throw std::out_of_range("aux_system: index out of range");
    SystemSpec s;
    s.equations = {aux[k].equation};
    s.aux.assign(aux.begin(), aux.begin() + static_cast<std::ptrdiff_t>(k));
    s.spans = {aux[k].span};
    return s;
  }

  PrintOptions print_options() const { return {arity() == 1}; }
};

// ---------------------------------------------------------------- lexer

namespace detail {

enum class Tok { ident, number, sym, end };

struct Token {
  Tok kind = Tok::end;
  std::string text;
  int line = 1;
  int column = 1;
};

inline std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto digits = [&](std::size_t j) {
    while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
    return j;
  };
  while (i < src.size()) {
    const char c = src[i];
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.column = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      t.kind = Tok::ident;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t j = digits(i);
      if (j < src.size() && src[j] == '.') {
        std::size_t k = digits(j + 1);
        if (k == j + 1) throw ParseError("malformed decimal literal", line, col);
        j = k;
      } else if (j + 1 < src.size() && src[j] == '/' && std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
        j = digits(j + 1);
      }
      if (j == i) throw ParseError("malformed number", line, col);
      t.kind = Tok::number;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (c == '-') {
      throw ParseError("subtraction and negative literals are not allowed (coefficients must be nonnegative)", line,
                       col);
    } else if (std::string_view("=;{}()+*^,").find(c) != std::string_view::npos) {
      t.kind = Tok::sym;
      t.text = std::string(1, c);
      advance(1);
    } else if (c == '/') {
      throw ParseError("division is only allowed inside a rational literal such as 1/6", line, col);
    } else {
      throw ParseError(std::string("unexpected character '") + c + "'", line, col);
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.kind = Tok::end;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

// ---------------------------------------------------------------- parser

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(lex(src)) {}

  SystemSpec parse_top() {
    SystemSpec spec;
    Scope scope;
    auto eqs = parse_file(spec, scope);
    expect_end();
    spec.equations = std::move(eqs.first);
    spec.spans = std::move(eqs.second);
    return spec;
  }

 private:
  using Scope = std::map<std::string, std::size_t>;  // visible let names -> aux index

  // Equations of one file, with y references checked against its arity.
  struct PendingY {
    std::size_t index;
    bool plain;
    Token where;
  };

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<PendingY>* ys_ = nullptr;

  const Token& peek() const { return toks_[pos_]; }
  Token next() { return toks_[pos_++]; }

  bool at_sym(char c) const { return peek().kind == Tok::sym && peek().text[0] == c; }
  bool at_ident(std::string_view s) const { return peek().kind == Tok::ident && peek().text == s; }

  [[noreturn]] void fail(const std::string& msg, const Token& t) const { throw ParseError(msg, t.line, t.column); }

  void expect_sym(char c) {
    if (!at_sym(c)) {
      const Token& t = peek();
      fail(std::string("expected '") + c + "' but found " + describe(t), t);
    }
    ++pos_;
  }

  void expect_end() {
    if (peek().kind != Tok::end) fail("unexpected " + describe(peek()), peek());
  }

  static std::string describe(const Token& t) {
    if (t.kind == Tok::end) return "end of input";
    return "'" + t.text + "'";
  }

  static std::optional<std::size_t> y_index(const std::string& s, bool& plain) {
    if (s == "y") {
      plain = true;
      return 0;
    }
    if (s.size() < 2 || s[0] != 'y' || s[1] < '1' || s[1] > '9') return std::nullopt;
    for (std::size_t i = 2; i < s.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
    plain = false;
    return std::stoul(s.substr(1)) - 1;
  }

  static bool reserved(const std::string& s) {
    return s == "x" || s == "let" || s == "solve" || s == "exp" || s == "polylog";
  }

  std::pair<std::vector<ExprPtr>, std::vector<SourceSpan>> parse_file(SystemSpec& spec, Scope scope) {
    while (at_ident("let")) parse_let(spec, scope);
    std::vector<PendingY> ys;
    std::vector<PendingY>* saved = ys_;
    ys_ = &ys;
    std::map<std::size_t, std::pair<ExprPtr, SourceSpan>> eqs;
    std::vector<PendingY> lhs;
    do {
      const Token t = next();
      bool plain = false;
      auto idx = t.kind == Tok::ident ? y_index(t.text, plain) : std::nullopt;
      if (!idx) {
        if (t.kind == Tok::ident && t.text == "let") fail("let definitions must precede the equations", t);
        fail("expected an equation 'y<i> = ...;' but found " + describe(t), t);
      }
      expect_sym('=');
      ExprPtr rhs = parse_expr(scope);
      expect_sym(';');
      if (eqs.count(*idx)) fail("duplicate equation for " + t.text, t);
      eqs[*idx] = {rhs, SourceSpan{t.line, t.column}};
      lhs.push_back({*idx, plain, t});
    } while (peek().kind == Tok::ident);
    ys_ = saved;

    const std::size_t m = eqs.size();
    for (std::size_t i = 0; i < m; ++i)
      if (!eqs.count(i)) fail("missing equation for y" + std::to_string(i + 1), lhs.front().where);
    std::vector<PendingY> all = lhs;
    all.insert(all.end(), ys.begin(), ys.end());
    for (const auto& y : all) {
      if (y.index >= m) fail("unknown variable '" + y.where.text + "' (system has " + std::to_string(m) +
                                 " equation" + (m == 1 ? "" : "s") + ")",
                             y.where);
      if (y.plain && m != 1) fail("plain 'y' is only allowed in 1-equation systems", y.where);
    }
    std::pair<std::vector<ExprPtr>, std::vector<SourceSpan>> out;
    for (auto& [i, e] : eqs) {
      out.first.push_back(e.first);
      out.second.push_back(e.second);
    }
    return out;
  }

  void parse_let(SystemSpec& spec, Scope& scope) {
    const Token let_tok = next();
    const Token name = next();
    if (name.kind != Tok::ident) fail("expected a name after 'let'", name);
    bool plain = false;
    if (reserved(name.text) || y_index(name.text, plain)) fail("'" + name.text + "' cannot be used as a let name", name);
    expect_sym('=');
    if (!at_ident("solve")) fail("expected 'solve' after 'let " + name.text + " ='", peek());
    ++pos_;
    expect_sym('{');
    auto inner = parse_file(spec, scope);
    expect_sym('}');
    expect_sym(';');
    if (inner.first.size() != 1)
      fail("a let-bound series must be defined by exactly one equation", name);
    std::string display = name.text;
    for (const auto& a : spec.aux)
      if (a.name == display) display = name.text + "_" + std::to_string(spec.aux.size());
    spec.aux.push_back({display, inner.first.front(), SourceSpan{let_tok.line, let_tok.column}});
    scope[name.text] = spec.aux.size() - 1;
  }

  ExprPtr parse_expr(const Scope& scope) {
    std::vector<ExprPtr> terms{parse_term(scope)};
    while (at_sym('+')) {
      ++pos_;
      terms.push_back(parse_term(scope));
    }
    return terms.size() == 1 ? terms.front() : make_add(std::move(terms));
  }

  ExprPtr parse_term(const Scope& scope) {
    std::vector<ExprPtr> factors{parse_factor(scope)};
    while (at_sym('*')) {
      ++pos_;
      factors.push_back(parse_factor(scope));
    }
    return factors.size() == 1 ? factors.front() : make_mul(std::move(factors));
  }

  unsigned parse_positive_int(const char* what) {
    const Token t = next();
    if (t.kind != Tok::number || t.text.find_first_not_of("0123456789") != std::string::npos)
      fail(std::string("expected a positive integer ") + what + " but found " + describe(t), t);
    unsigned long v = 0;
    try {
      v = std::stoul(t.text);
    } catch (const std::exception&) {
      fail("integer out of range", t);
    }
    if (v == 0 || v > 100000) fail(std::string(what) + " must be between 1 and 100000", t);
    return static_cast<unsigned>(v);
  }

  ExprPtr parse_factor(const Scope& scope) {
    ExprPtr base = parse_atom(scope);
    if (at_sym('^')) {
      ++pos_;
      base = make_pow(base, parse_positive_int("exponent"));
    }
    return base;
  }

  ExprPtr parse_atom(const Scope& scope) {
    const Token t = next();
    if (t.kind == Tok::number) {
      try {
        return make_const(parse_rational(t.text));
      } catch (const std::invalid_argument& e) {
        fail(e.what(), t);
      }
    }
    if (t.kind == Tok::sym && t.text == "(") {
      ExprPtr e = parse_expr(scope);
      expect_sym(')');
      return e;
    }
    if (t.kind != Tok::ident) fail("expected an expression but found " + describe(t), t);
    if (t.text == "x") return make_x();
    if (t.text == "exp") {
      expect_sym('(');
      ExprPtr e = parse_expr(scope);
      expect_sym(')');
      return make_exp(e);
    }
    if (t.text == "polylog") {
      expect_sym('(');
      const unsigned s = parse_positive_int("polylog order");
      expect_sym(',');
      ExprPtr e = parse_expr(scope);
      expect_sym(')');
      return make_polylog(static_cast<int>(s), e);
    }
    bool plain = false;
    if (auto idx = y_index(t.text, plain)) {
      ys_->push_back({*idx, plain, t});
      return make_y(*idx);
    }
    if (auto it = scope.find(t.text); it != scope.end()) return make_aux(it->second, "");
    fail("unknown identifier '" + t.text + "'", t);
  }
};

inline ExprPtr attach_aux_names(const ExprPtr& e, const std::vector<AuxDef>& aux) {
  return map_leaves(e, [&](const ExprPtr& leaf) -> ExprPtr {
    if (leaf->kind != NodeKind::aux) return nullptr;
    return make_aux(leaf->index, aux[leaf->index].name);
  });
}

}  // namespace detail

inline SystemSpec parse(std::string_view text) {
  detail::Parser p(text);
  SystemSpec spec = p.parse_top();
  for (auto& a : spec.aux) a.equation = detail::attach_aux_names(a.equation, spec.aux);
  for (auto& e : spec.equations) e = detail::attach_aux_names(e, spec.aux);
  return spec;
}

/// Source text that parses back to the same system. Nested lets are printed
/// flattened at top level, in table order.
inline std::string print(const SystemSpec& spec) {
  std::string out;
  for (const auto& a : spec.aux)
    out += "let " + a.name + " = solve { y = " + to_string(a.equation, {true}) + "; };\n";
  const PrintOptions opt = spec.print_options();
  for (std::size_t i = 0; i < spec.arity(); ++i) {
    out += opt.plain_y ? std::string("y") : "y" + std::to_string(i + 1);
    out += " = " + to_string(spec.equations[i], opt) + ";\n";
  }
  return out;
}

/// Symbolic m x m matrix of dG_i/dy_j.
inline std::vector<std::vector<ExprPtr>> jacobian(const SystemSpec& spec) {
  const std::size_t m = spec.arity();
  std::vector<std::vector<ExprPtr>> j(m, std::vector<ExprPtr>(m));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < m; ++k) j[i][k] = derivative(spec.equations[i], Var::y(k));
  return j;
}

}  // namespace charpoint
