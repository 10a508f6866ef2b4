#include "polyteam/syntax.hpp"

#include <cctype>
#include <sstream>

namespace polyteam {

std::vector<std::string> VarTuple::names() const {
  std::vector<std::string> out;
  out.reserve(vars.size());
  for (const auto &v : vars) out.push_back(v.name);
  return out;
}

VarTuple tuple_of(std::string_view sort, std::initializer_list<std::string_view> names) {
  VarTuple t{Sort{std::string(sort)}, {}};
  for (auto n : names) t.vars.push_back(var(sort, n));
  return t;
}

VarTuple concat(const VarTuple &a, const VarTuple &b) {
  if (!a.vars.empty() && !b.vars.empty() && a.sort != b.sort) {
    throw SortedDomainError("cannot concatenate tuples of sorts " + a.sort.name +
                            " and " + b.sort.name);
  }
  VarTuple out = a;
  if (a.vars.empty()) out.sort = b.vars.empty() ? a.sort : b.sort;
  out.vars.insert(out.vars.end(), b.vars.begin(), b.vars.end());
  return out;
}

std::vector<const VarTuple *> atom_tuples(const AtomInstance &atom) {
  return std::visit(
      [](const auto &a) -> std::vector<const VarTuple *> {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, PolyDep>) {
          return {&a.x, &a.y, &a.u, &a.v};
        } else if constexpr (std::is_same_v<T, PolyInc> ||
                             std::is_same_v<T, PolyExc>) {
          return {&a.lhs, &a.rhs};
        } else if constexpr (std::is_same_v<T, PolyInd>) {
          return {&a.x, &a.a, &a.u, &a.y, &a.v, &a.b, &a.w};
        } else {
          std::vector<const VarTuple *> out;
          for (const auto &t : a.args) out.push_back(&t);
          return out;
        }
      },
      atom);
}

// ---------------------------------------------------------------------------
// Builders

namespace {

std::shared_ptr<Formula> node(NodeKind k) {
  auto f = std::make_shared<Formula>();
  f->kind = k;
  return f;
}

} // namespace

FormulaPtr make_top() { return node(NodeKind::top); }

FormulaPtr make_eq(Variable x, Variable y) {
  auto f = node(NodeKind::eq);
  f->x = std::move(x);
  f->y = std::move(y);
  return f;
}

FormulaPtr make_neq(Variable x, Variable y) {
  auto f = node(NodeKind::neq);
  f->x = std::move(x);
  f->y = std::move(y);
  return f;
}

FormulaPtr make_rel(std::string name, VarTuple args) {
  auto f = node(NodeKind::rel);
  f->relation = std::move(name);
  f->args = std::move(args);
  return f;
}

FormulaPtr make_neg_rel(std::string name, VarTuple args) {
  auto f = node(NodeKind::neg_rel);
  f->relation = std::move(name);
  f->args = std::move(args);
  return f;
}

FormulaPtr make_and(FormulaPtr a, FormulaPtr b) {
  auto f = node(NodeKind::conj);
  f->left = std::move(a);
  f->right = std::move(b);
  return f;
}

FormulaPtr make_or(FormulaPtr a, FormulaPtr b) {
  auto f = node(NodeKind::or_global);
  f->left = std::move(a);
  f->right = std::move(b);
  return f;
}

FormulaPtr make_or_local(std::set<Sort> sorts, FormulaPtr a, FormulaPtr b) {
  if (sorts.empty()) {
    throw Error("local disjunction needs a nonempty sort set");
  }
  auto f = node(NodeKind::or_local);
  f->sorts = std::move(sorts);
  f->left = std::move(a);
  f->right = std::move(b);
  return f;
}

FormulaPtr make_or_local(Sort sort, FormulaPtr a, FormulaPtr b) {
  return make_or_local(std::set<Sort>{std::move(sort)}, std::move(a), std::move(b));
}

FormulaPtr make_exists(Variable x, FormulaPtr body) {
  auto f = node(NodeKind::exists);
  f->x = std::move(x);
  f->left = std::move(body);
  return f;
}

FormulaPtr make_forall(Variable x, FormulaPtr body) {
  auto f = node(NodeKind::forall);
  f->x = std::move(x);
  f->left = std::move(body);
  return f;
}

FormulaPtr make_atom(AtomInstance atom) {
  auto f = node(NodeKind::atom);
  f->atom = std::move(atom);
  return f;
}

bool structurally_equal(const Formula &a, const Formula &b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
  case NodeKind::top:
    return true;
  case NodeKind::eq:
  case NodeKind::neq:
    return a.x == b.x && a.y == b.y;
  case NodeKind::rel:
  case NodeKind::neg_rel:
    return a.relation == b.relation && a.args == b.args;
  case NodeKind::or_local:
    if (a.sorts != b.sorts) return false;
    [[fallthrough]];
  case NodeKind::conj:
  case NodeKind::or_global:
    return structurally_equal(*a.left, *b.left) &&
           structurally_equal(*a.right, *b.right);
  case NodeKind::exists:
  case NodeKind::forall:
    return a.x == b.x && structurally_equal(*a.left, *b.left);
  case NodeKind::atom:
    return *a.atom == *b.atom;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok {
  ident,
  variable,
  empty_tuple,
  lparen,
  rparen,
  semicolon,
  bar,
  slash,
  comma,
  dot,
  equal,
  not_equal,
  tilde,
  and_op,
  or_op,
  or_local_open,
  rbrace,
  end
};

struct Token {
  Tok kind;
  std::string text;  // identifier, or the name part of a variable
  std::string sort;  // variables and empty tuples
  std::size_t line, column;
};

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

class Lexer {
public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      Token t{Tok::end, {}, {}, line_, col_};
      if (pos_ >= text_.size()) {
        out.push_back(t);
        return out;
      }
      char c = text_[pos_];
      auto two = [&](char a, char b) {
        return c == a && pos_ + 1 < text_.size() && text_[pos_ + 1] == b;
      };
      if (ident_char(c)) {
        std::string id = read_ident();
        if (pos_ + 1 < text_.size() && text_[pos_] == '.' &&
            ident_char(text_[pos_ + 1])) {
          advance(1);
          t.kind = Tok::variable;
          t.sort = id;
          t.text = read_ident();
        } else {
          t.kind = Tok::ident;
          t.text = id;
        }
      } else if (c == '@') {
        advance(1);
        if (pos_ >= text_.size() || !ident_char(text_[pos_])) {
          throw ParseError("expected a sort name after '@'", t.line, t.column);
        }
        t.kind = Tok::empty_tuple;
        t.sort = read_ident();
      } else if (two('/', '\\')) {
        advance(2);
        t.kind = Tok::and_op;
      } else if (two('\\', '/')) {
        advance(2);
        if (pos_ + 1 < text_.size() && text_[pos_] == '_' && text_[pos_ + 1] == '{') {
          advance(2);
          t.kind = Tok::or_local_open;
        } else {
          t.kind = Tok::or_op;
        }
      } else if (two('!', '=')) {
        advance(2);
        t.kind = Tok::not_equal;
      } else {
        switch (c) {
        case '(': t.kind = Tok::lparen; break;
        case ')': t.kind = Tok::rparen; break;
        case ';': t.kind = Tok::semicolon; break;
        case '|': t.kind = Tok::bar; break;
        case '/': t.kind = Tok::slash; break;
        case ',': t.kind = Tok::comma; break;
        case '.': t.kind = Tok::dot; break;
        case '=': t.kind = Tok::equal; break;
        case '~': t.kind = Tok::tilde; break;
        case '}': t.kind = Tok::rbrace; break;
        default:
          throw ParseError(std::string("unexpected character '") + c + "'",
                           t.line, t.column);
        }
        advance(1);
      }
      out.push_back(std::move(t));
    }
  }

private:
  void advance(std::size_t n) {
    for (std::size_t i = 0; i < n && pos_ < text_.size(); ++i) {
      if (text_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance(1);
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance(1);
      } else {
        break;
      }
    }
  }

  std::string read_ident() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && ident_char(text_[pos_])) advance(1);
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string_view text_;
  std::size_t pos_ = 0, line_ = 1, col_ = 1;
};

const char *tok_name(Tok t) {
  switch (t) {
  case Tok::ident: return "identifier";
  case Tok::variable: return "variable";
  case Tok::empty_tuple: return "empty tuple";
  case Tok::lparen: return "'('";
  case Tok::rparen: return "')'";
  case Tok::semicolon: return "';'";
  case Tok::bar: return "'|'";
  case Tok::slash: return "'/'";
  case Tok::comma: return "','";
  case Tok::dot: return "'.'";
  case Tok::equal: return "'='";
  case Tok::not_equal: return "'!='";
  case Tok::tilde: return "'~'";
  case Tok::and_op: return "'/\\'";
  case Tok::or_op: return "'\\/'";
  case Tok::or_local_open: return "'\\/_{'";
  case Tok::rbrace: return "'}'";
  case Tok::end: return "end of input";
  }
  return "token";
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
public:
  Parser(std::string_view text, const ParseOptions &opts)
      : toks_(Lexer(text).run()), opts_(opts) {}

  FormulaPtr formula_eof() {
    FormulaPtr f = formula();
    expect(Tok::end);
    return f;
  }

  PolyDep polydep_eof() {
    const Token &t = peek();
    if (t.kind != Tok::ident || (t.text != "pdep" && t.text != "dep")) {
      fail("expected a pdep(...) atom", t);
    }
    FormulaPtr f = primary();
    expect(Tok::end);
    return std::get<PolyDep>(*f->atom);
  }

private:
  const Token &peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token &take() {
    const Token &t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    take();
    return true;
  }
  const Token &expect(Tok k) {
    if (peek().kind != k) {
      fail(std::string("expected ") + tok_name(k) + ", found " +
               tok_name(peek().kind),
           peek());
    }
    return take();
  }
  [[noreturn]] void fail(const std::string &msg, const Token &at) const {
    throw ParseError(msg, at.line, at.column);
  }

  Sort sort_named(const std::string &name, const Token &at) {
    Sort s{name};
    if (opts_.known_sorts && !opts_.known_sorts->count(s)) {
      fail("unknown sort '" + name + "'", at);
    }
    return s;
  }

  Variable variable_tok(const Token &t) {
    if (!opts_.allow_reserved && t.text.rfind(reserved_prefix, 0) == 0) {
      fail("variable names starting with '" + std::string(reserved_prefix) +
               "' are reserved for generated variables",
           t);
    }
    return Variable{sort_named(t.sort, t), t.text};
  }

  Variable expect_variable() { return variable_tok(expect(Tok::variable)); }

  VarTuple tuple() {
    const Token &start = peek();
    if (start.kind == Tok::empty_tuple) {
      take();
      return VarTuple{sort_named(start.sort, start), {}};
    }
    if (start.kind != Tok::variable) {
      fail(std::string("expected a variable tuple, found ") + tok_name(start.kind),
           start);
    }
    VarTuple t;
    t.sort = sort_named(start.sort, start);
    while (peek().kind == Tok::variable) {
      const Token &v = take();
      Variable x = variable_tok(v);
      if (x.sort != t.sort) {
        fail("tuple mixes sorts " + t.sort.name + " and " + x.sort.name, v);
      }
      t.vars.push_back(std::move(x));
    }
    return t;
  }

  FormulaPtr formula() {
    FormulaPtr lhs = conjunction();
    while (true) {
      if (accept(Tok::or_op)) {
        lhs = make_or(lhs, conjunction());
      } else if (peek().kind == Tok::or_local_open) {
        take();
        std::set<Sort> sorts;
        do {
          const Token &s = expect(Tok::ident);
          sorts.insert(sort_named(s.text, s));
        } while (accept(Tok::comma));
        expect(Tok::rbrace);
        lhs = make_or_local(std::move(sorts), lhs, conjunction());
      } else {
        return lhs;
      }
    }
  }

  FormulaPtr conjunction() {
    FormulaPtr lhs = primary();
    while (accept(Tok::and_op)) lhs = make_and(lhs, primary());
    return lhs;
  }

  FormulaPtr primary() {
    const Token &t = peek();
    switch (t.kind) {
    case Tok::lparen: {
      take();
      FormulaPtr f = formula();
      expect(Tok::rparen);
      return f;
    }
    case Tok::tilde: {
      take();
      const Token &name = expect(Tok::ident);
      expect(Tok::lparen);
      VarTuple args = tuple();
      expect(Tok::rparen);
      return make_neg_rel(name.text, std::move(args));
    }
    case Tok::variable: {
      Variable x = expect_variable();
      const Token &op = take();
      if (op.kind != Tok::equal && op.kind != Tok::not_equal) {
        fail("expected '=' or '!=' after variable", op);
      }
      const Token &yt = peek();
      Variable y = expect_variable();
      if (x.sort != y.sort) {
        fail("equality between different sorts " + x.sort.name + " and " +
                 y.sort.name,
             yt);
      }
      return op.kind == Tok::equal ? make_eq(x, y) : make_neq(x, y);
    }
    case Tok::ident:
      return ident_led();
    default:
      fail(std::string("unexpected ") + tok_name(t.kind), t);
    }
  }

  FormulaPtr ident_led() {
    const Token &t = take();
    const std::string &w = t.text;
    if ((w == "E" || w == "A") && peek().kind == Tok::variable) {
      Variable x = expect_variable();
      expect(Tok::dot);
      FormulaPtr body = formula();
      return w == "E" ? make_exists(x, body) : make_forall(x, body);
    }
    if (w == "true") return make_top();
    if (w == "atom" && peek().kind == Tok::ident) return generalized(t);
    if (peek().kind != Tok::lparen) {
      fail("expected '(' after '" + w + "'", peek());
    }
    if (w == "pdep") return pdep(t);
    if (w == "dep") {
      take();
      VarTuple x = tuple();
      VarTuple y;
      if (accept(Tok::rparen)) {
        // dep(y) is constancy: dep( ; y).
        y = std::move(x);
        x = VarTuple{y.sort, {}};
      } else {
        expect(Tok::semicolon);
        y = tuple();
        expect(Tok::rparen);
      }
      check_pdep(x, y, x, y, t);
      return make_atom(PolyDep{x, y, x, y});
    }
    if (w == "pinc" || w == "pexc") {
      take();
      VarTuple l = tuple();
      expect(Tok::bar);
      VarTuple r = tuple();
      expect(Tok::rparen);
      if (l.size() != r.size()) {
        fail(w + " sides have lengths " + std::to_string(l.size()) + " and " +
                 std::to_string(r.size()),
             t);
      }
      if (w == "pinc") return make_atom(PolyInc{l, r});
      return make_atom(PolyExc{l, r});
    }
    if (w == "pind") return pind(t);
    take();
    VarTuple args = tuple();
    expect(Tok::rparen);
    return make_rel(w, std::move(args));
  }

  void check_pdep(const VarTuple &x, const VarTuple &y, const VarTuple &u,
                  const VarTuple &v, const Token &at) {
    if (x.sort != y.sort) fail("pdep left side mixes sorts", at);
    if (u.sort != v.sort) fail("pdep right side mixes sorts", at);
    if (x.size() != u.size()) fail("pdep antecedents differ in length", at);
    if (y.size() != v.size()) fail("pdep consequents differ in length", at);
    if (x.sort == u.sort && (x != u || y != v)) {
      fail("same-sort poly-dependence with differing sides is a shorthand, "
           "not a primitive",
           at);
    }
  }

  FormulaPtr pdep(const Token &at) {
    take();
    VarTuple x = tuple();
    expect(Tok::semicolon);
    VarTuple y = tuple();
    expect(Tok::bar);
    VarTuple u = tuple();
    expect(Tok::semicolon);
    VarTuple v = tuple();
    expect(Tok::rparen);
    check_pdep(x, y, u, v, at);
    return make_atom(PolyDep{x, y, u, v});
  }

  FormulaPtr pind(const Token &at) {
    take();
    PolyInd p;
    p.x = tuple();
    expect(Tok::comma);
    p.a = tuple();
    expect(Tok::slash);
    p.u = tuple();
    expect(Tok::semicolon);
    p.y = tuple();
    expect(Tok::slash);
    p.v = tuple();
    expect(Tok::semicolon);
    p.b = tuple();
    expect(Tok::slash);
    p.w = tuple();
    expect(Tok::rparen);
    auto problems = check_atom_well_sorted(p);
    if (!problems.empty()) fail(problems.front(), at);
    return make_atom(std::move(p));
  }

  FormulaPtr generalized(const Token &at) {
    const Token &name = expect(Tok::ident);
    expect(Tok::lparen);
    GeneralizedAtom g{name.text, {}};
    while (accept(Tok::lparen)) {
      g.args.push_back(tuple());
      expect(Tok::rparen);
    }
    expect(Tok::rparen);
    if (g.args.empty()) fail("generalized atom needs at least one tuple", at);
    if (opts_.signatures) {
      auto problems = check_atom_well_sorted(g, &*opts_.signatures);
      if (!problems.empty()) fail(problems.front(), name);
    }
    return make_atom(std::move(g));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const ParseOptions &opts_;
};

} // namespace

FormulaPtr parse_formula(std::string_view text, const ParseOptions &opts) {
  return Parser(text, opts).formula_eof();
}

PolyDep parse_polydep(std::string_view text, const ParseOptions &opts) {
  return Parser(text, opts).polydep_eof();
}

std::vector<PolyDep> parse_polydep_list(std::string_view text,
                                        const ParseOptions &opts) {
  std::vector<PolyDep> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first != std::string_view::npos && line[first] != '#') {
      try {
        out.push_back(parse_polydep(line, opts));
      } catch (const ParseError &e) {
        throw ParseError(e.message(), line_no, e.column());
      }
    }
    start = end + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Printer

std::string to_string(const VarTuple &t) {
  if (t.vars.empty()) return "@" + t.sort.name;
  std::string out;
  for (std::size_t i = 0; i < t.vars.size(); ++i) {
    if (i) out += ' ';
    out += t.vars[i].str();
  }
  return out;
}

std::string to_string(const PolyDep &d) {
  return "pdep(" + to_string(d.x) + " ; " + to_string(d.y) + " | " +
         to_string(d.u) + " ; " + to_string(d.v) + ")";
}

std::string atom_to_string(const AtomInstance &atom) {
  return std::visit(
      [](const auto &a) -> std::string {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, PolyDep>) {
          return to_string(a);
        } else if constexpr (std::is_same_v<T, PolyInc>) {
          return "pinc(" + to_string(a.lhs) + " | " + to_string(a.rhs) + ")";
        } else if constexpr (std::is_same_v<T, PolyExc>) {
          return "pexc(" + to_string(a.lhs) + " | " + to_string(a.rhs) + ")";
        } else if constexpr (std::is_same_v<T, PolyInd>) {
          return "pind(" + to_string(a.x) + " , " + to_string(a.a) + " / " +
                 to_string(a.u) + " ; " + to_string(a.y) + " / " +
                 to_string(a.v) + " ; " + to_string(a.b) + " / " +
                 to_string(a.w) + ")";
        } else {
          std::string out = "atom " + a.name + "(";
          for (const auto &t : a.args) out += "(" + to_string(t) + ")";
          return out + ")";
        }
      },
      atom);
}

namespace {

void print(const Formula &f, std::string &out);

void print_operand(const Formula &f, std::string &out) {
  bool wrap = f.kind == NodeKind::exists || f.kind == NodeKind::forall;
  if (wrap) out += '(';
  print(f, out);
  if (wrap) out += ')';
}

void print(const Formula &f, std::string &out) {
  switch (f.kind) {
  case NodeKind::top:
    out += "true";
    return;
  case NodeKind::eq:
    out += f.x.str() + " = " + f.y.str();
    return;
  case NodeKind::neq:
    out += f.x.str() + " != " + f.y.str();
    return;
  case NodeKind::rel:
    out += f.relation + "(" + to_string(f.args) + ")";
    return;
  case NodeKind::neg_rel:
    out += "~" + f.relation + "(" + to_string(f.args) + ")";
    return;
  case NodeKind::conj:
  case NodeKind::or_global:
  case NodeKind::or_local: {
    out += '(';
    print_operand(*f.left, out);
    if (f.kind == NodeKind::conj) {
      out += " /\\ ";
    } else if (f.kind == NodeKind::or_global) {
      out += " \\/ ";
    } else {
      out += " \\/_{";
      bool first = true;
      for (const auto &s : f.sorts) {
        if (!first) out += ',';
        out += s.name;
        first = false;
      }
      out += "} ";
    }
    print(*f.right, out);
    out += ')';
    return;
  }
  case NodeKind::exists:
  case NodeKind::forall:
    out += f.kind == NodeKind::exists ? "E " : "A ";
    out += f.x.str() + " . ";
    print(*f.left, out);
    return;
  case NodeKind::atom:
    out += atom_to_string(*f.atom);
    return;
  }
}

} // namespace

std::string to_string(const Formula &f) {
  std::string out;
  print(f, out);
  return out;
}

std::string to_string(const FormulaPtr &f) { return to_string(*f); }

// ---------------------------------------------------------------------------
// Structural queries

namespace {

void collect_free(const Formula &f, FreeVariableReport &out) {
  switch (f.kind) {
  case NodeKind::top:
    return;
  case NodeKind::eq:
  case NodeKind::neq:
    out[f.x.sort].insert(f.x.name);
    out[f.y.sort].insert(f.y.name);
    return;
  case NodeKind::rel:
  case NodeKind::neg_rel:
    for (const auto &v : f.args.vars) out[v.sort].insert(v.name);
    return;
  case NodeKind::conj:
  case NodeKind::or_global:
  case NodeKind::or_local:
    collect_free(*f.left, out);
    collect_free(*f.right, out);
    return;
  case NodeKind::exists:
  case NodeKind::forall: {
    FreeVariableReport inner;
    collect_free(*f.left, inner);
    auto it = inner.find(f.x.sort);
    if (it != inner.end()) it->second.erase(f.x.name);
    for (auto &[s, names] : inner) out[s].insert(names.begin(), names.end());
    return;
  }
  case NodeKind::atom:
    for (const VarTuple *t : atom_tuples(*f.atom)) {
      for (const auto &v : t->vars) out[v.sort].insert(v.name);
    }
    return;
  }
}

void collect_sorts(const Formula &f, std::set<Sort> &out) {
  switch (f.kind) {
  case NodeKind::top:
    return;
  case NodeKind::eq:
  case NodeKind::neq:
    out.insert(f.x.sort);
    out.insert(f.y.sort);
    return;
  case NodeKind::rel:
  case NodeKind::neg_rel:
    out.insert(f.args.sort);
    for (const auto &v : f.args.vars) out.insert(v.sort);
    return;
  case NodeKind::or_local:
    out.insert(f.sorts.begin(), f.sorts.end());
    [[fallthrough]];
  case NodeKind::conj:
  case NodeKind::or_global:
    collect_sorts(*f.left, out);
    collect_sorts(*f.right, out);
    return;
  case NodeKind::exists:
  case NodeKind::forall:
    out.insert(f.x.sort);
    collect_sorts(*f.left, out);
    return;
  case NodeKind::atom:
    for (const VarTuple *t : atom_tuples(*f.atom)) {
      out.insert(t->sort);
      for (const auto &v : t->vars) out.insert(v.sort);
    }
    return;
  }
}

void collect_vars(const Formula &f, std::set<Variable> &out) {
  switch (f.kind) {
  case NodeKind::top:
    return;
  case NodeKind::eq:
  case NodeKind::neq:
    out.insert(f.x);
    out.insert(f.y);
    return;
  case NodeKind::rel:
  case NodeKind::neg_rel:
    out.insert(f.args.vars.begin(), f.args.vars.end());
    return;
  case NodeKind::conj:
  case NodeKind::or_global:
  case NodeKind::or_local:
    collect_vars(*f.left, out);
    collect_vars(*f.right, out);
    return;
  case NodeKind::exists:
  case NodeKind::forall:
    out.insert(f.x);
    collect_vars(*f.left, out);
    return;
  case NodeKind::atom:
    for (const VarTuple *t : atom_tuples(*f.atom)) {
      out.insert(t->vars.begin(), t->vars.end());
    }
    return;
  }
}

void collect_relations(const Formula &f, std::map<std::string, std::size_t> &out) {
  switch (f.kind) {
  case NodeKind::rel:
  case NodeKind::neg_rel: {
    auto [it, fresh] = out.emplace(f.relation, f.args.size());
    if (!fresh && it->second != f.args.size()) {
      throw Error("relation " + f.relation + " used with arities " +
                  std::to_string(it->second) + " and " +
                  std::to_string(f.args.size()));
    }
    return;
  }
  case NodeKind::conj:
  case NodeKind::or_global:
  case NodeKind::or_local:
    collect_relations(*f.left, out);
    collect_relations(*f.right, out);
    return;
  case NodeKind::exists:
  case NodeKind::forall:
    collect_relations(*f.left, out);
    return;
  default:
    return;
  }
}

void tuple_sort_check(const VarTuple &t, const std::string &what,
                      std::vector<std::string> &out) {
  for (const auto &v : t.vars) {
    if (v.sort != t.sort) {
      out.push_back(what + ": variable " + v.str() + " is not of sort " +
                    t.sort.name);
    }
  }
}

void same_sort(const VarTuple &a, const VarTuple &b, const std::string &what,
               std::vector<std::string> &out) {
  if (a.sort != b.sort) {
    out.push_back(what + ": tuples of sorts " + a.sort.name + " and " +
                  b.sort.name + " must share a sort");
  }
}

void same_len(const VarTuple &a, const VarTuple &b, const std::string &what,
              std::vector<std::string> &out) {
  if (a.size() != b.size()) {
    out.push_back(what + ": tuple lengths " + std::to_string(a.size()) + " and " +
                  std::to_string(b.size()) + " differ");
  }
}

void check(const Formula &f, const SignatureTable *sig,
           std::vector<std::string> &out) {
  switch (f.kind) {
  case NodeKind::top:
    return;
  case NodeKind::eq:
  case NodeKind::neq:
    if (f.x.sort != f.y.sort) {
      out.push_back("literal " + f.x.str() + (f.kind == NodeKind::eq ? " = " : " != ") +
                    f.y.str() + " mixes sorts");
    }
    return;
  case NodeKind::rel:
  case NodeKind::neg_rel:
    tuple_sort_check(f.args, "relation " + f.relation, out);
    return;
  case NodeKind::or_local:
    if (f.sorts.empty()) out.push_back("local disjunction with empty sort set");
    [[fallthrough]];
  case NodeKind::conj:
  case NodeKind::or_global:
    check(*f.left, sig, out);
    check(*f.right, sig, out);
    return;
  case NodeKind::exists:
  case NodeKind::forall:
    check(*f.left, sig, out);
    return;
  case NodeKind::atom: {
    auto more = check_atom_well_sorted(*f.atom, sig);
    out.insert(out.end(), more.begin(), more.end());
    return;
  }
  }
}

} // namespace

FreeVariableReport free_variables(const Formula &f) {
  FreeVariableReport out;
  collect_free(f, out);
  for (auto it = out.begin(); it != out.end();) {
    it = it->second.empty() ? out.erase(it) : std::next(it);
  }
  return out;
}

std::set<Sort> mentioned_sorts(const Formula &f) {
  std::set<Sort> out;
  collect_sorts(f, out);
  return out;
}

std::set<Variable> all_variables(const Formula &f) {
  std::set<Variable> out;
  collect_vars(f, out);
  return out;
}

std::map<std::string, std::size_t> relation_symbols(const Formula &f) {
  std::map<std::string, std::size_t> out;
  collect_relations(f, out);
  return out;
}

std::vector<std::string> check_atom_well_sorted(const AtomInstance &atom,
                                                const SignatureTable *sig) {
  std::vector<std::string> out;
  for (const VarTuple *t : atom_tuples(atom)) {
    tuple_sort_check(*t, "atom " + atom_to_string(atom), out);
  }
  std::visit(
      [&](const auto &a) {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, PolyDep>) {
          same_sort(a.x, a.y, "pdep left side", out);
          same_sort(a.u, a.v, "pdep right side", out);
          same_len(a.x, a.u, "pdep antecedents", out);
          same_len(a.y, a.v, "pdep consequents", out);
          if (a.x.sort == a.u.sort && (a.x != a.u || a.y != a.v)) {
            out.push_back("same-sort poly-dependence with differing sides is a "
                          "shorthand, not a primitive");
          }
        } else if constexpr (std::is_same_v<T, PolyInc>) {
          same_len(a.lhs, a.rhs, "pinc", out);
        } else if constexpr (std::is_same_v<T, PolyExc>) {
          same_len(a.lhs, a.rhs, "pexc", out);
        } else if constexpr (std::is_same_v<T, PolyInd>) {
          same_sort(a.x, a.y, "pind first sort", out);
          same_sort(a.a, a.b, "pind second sort", out);
          same_sort(a.u, a.v, "pind third sort", out);
          same_sort(a.u, a.w, "pind third sort", out);
          same_len(a.x, a.a, "pind conditioning", out);
          same_len(a.x, a.u, "pind conditioning", out);
          same_len(a.y, a.v, "pind second block", out);
          same_len(a.b, a.w, "pind third block", out);
        } else {
          if (sig) {
            auto it = sig->find(a.name);
            if (it == sig->end()) {
              out.push_back("unknown generalized atom '" + a.name + "'");
            } else if (it->second.size() != a.args.size()) {
              out.push_back("generalized atom '" + a.name + "' expects " +
                            std::to_string(it->second.size()) + " tuples, got " +
                            std::to_string(a.args.size()));
            } else {
              for (std::size_t i = 0; i < a.args.size(); ++i) {
                if (a.args[i].size() != it->second[i]) {
                  out.push_back("generalized atom '" + a.name + "' argument " +
                                std::to_string(i + 1) + " has length " +
                                std::to_string(a.args[i].size()) + ", expected " +
                                std::to_string(it->second[i]));
                }
              }
            }
          }
        }
      },
      atom);
  return out;
}

std::vector<std::string> check_well_sorted(const Formula &f,
                                           const SignatureTable *sig) {
  std::vector<std::string> out;
  check(f, sig, out);
  return out;
}

} // namespace polyteam
