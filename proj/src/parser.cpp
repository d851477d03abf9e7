#include "crwl/parser.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <functional>
#include <sstream>

namespace crwl {

namespace {

// ------------------------------------------------------------------ lexer

enum class Tok {
  Ident,     // lowercase-initial symbol name (also keywords)
  UpperName, // uppercase-initial: variable or module name
  Labeled,   // label.name (internal files only)
  Nat,
  Bottom,    // _|_
  Underscore,
  Op,        // munched operator text (also <, >, +, |, -> as text)
  Arrow,     // ->
  Join,      // ><
  Cond,      // <=
  Equals,    // =
  LParen, RParen, LBrace, RBrace, LBracket, RBracket,
  Comma, Dot, Slash, Backslash,
  End
};

struct Token {
  Tok t = Tok::End;
  std::string text;
  std::string label;
  int line = 1, col = 1;
};

bool ident_start(char c) { return std::islower((unsigned char)c); }
bool upper_start(char c) { return std::isupper((unsigned char)c); }
bool ident_char(char c) {
  return std::isalnum((unsigned char)c) || c == '_';
}
bool op_char(char c) {
  return std::strchr("+-*=<>~^&?@!%:|", c) != nullptr;
}

class Lexer {
 public:
  Lexer(std::string_view src, bool allow_internal)
      : src_(src), internal_(allow_internal) {
    advance();
  }

  const Token& peek() const { return cur_; }
  Token take() {
    Token t = cur_;
    advance();
    return t;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, cur_.line, cur_.col);
  }

 private:
  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '\n') {
        ++line_;
        colbase_ = pos_ + 1;
        ++pos_;
      } else if (std::isspace((unsigned char)c)) {
        ++pos_;
      } else if (c == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '-') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string scan_ident() {
    size_t start = pos_;
    while (pos_ < src_.size() && ident_char(src_[pos_])) ++pos_;
    return std::string(src_.substr(start, pos_ - start));
  }

  void advance() {
    skip_space();
    cur_ = Token{};
    cur_.line = line_;
    cur_.col = (int)(pos_ - colbase_) + 1;
    if (pos_ >= src_.size()) {
      cur_.t = Tok::End;
      return;
    }
    char c = src_[pos_];

    if (c == '_') {
      if (src_.substr(pos_, 3) == "_|_") {
        pos_ += 3;
        cur_.t = Tok::Bottom;
        return;
      }
      ++pos_;
      cur_.t = Tok::Underscore;
      return;
    }
    if (ident_start(c) || upper_start(c)) {
      bool upper = upper_start(c);
      std::string name = scan_ident();
      // label-qualified name: ident '.' ident with no whitespace
      if (pos_ + 1 < src_.size() && src_[pos_] == '.' &&
          ident_start(src_[pos_ + 1])) {
        ++pos_;
        cur_.t = Tok::Labeled;
        cur_.label = std::move(name);
        cur_.text = scan_ident();
        return;
      }
      cur_.t = upper ? Tok::UpperName : Tok::Ident;
      cur_.text = std::move(name);
      return;
    }
    if (c == '"') {  // quoted label: "...".name
      size_t end = src_.find('"', pos_ + 1);
      if (end == std::string_view::npos) fail("unterminated label quote");
      std::string label(src_.substr(pos_ + 1, end - pos_ - 1));
      pos_ = end + 1;
      if (pos_ + 1 >= src_.size() || src_[pos_] != '.' ||
          !ident_start(src_[pos_ + 1]))
        fail("quoted label must qualify a symbol name");
      ++pos_;
      cur_.t = Tok::Labeled;
      cur_.label = std::move(label);
      cur_.text = scan_ident();
      return;
    }
    if (std::isdigit((unsigned char)c)) {
      size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit((unsigned char)src_[pos_]))
        ++pos_;
      cur_.t = Tok::Nat;
      cur_.text = std::string(src_.substr(start, pos_ - start));
      return;
    }
    if (op_char(c)) {
      size_t start = pos_;
      while (pos_ < src_.size() && op_char(src_[pos_])) ++pos_;
      std::string text(src_.substr(start, pos_ - start));
      if (text == "->")
        cur_.t = Tok::Arrow;
      else if (text == "><")
        cur_.t = Tok::Join;
      else if (text == "<=")
        cur_.t = Tok::Cond;
      else if (text == "=")
        cur_.t = Tok::Equals;
      else {
        cur_.t = Tok::Op;
        cur_.text = std::move(text);
      }
      return;
    }
    ++pos_;
    switch (c) {
      case '(': cur_.t = Tok::LParen; return;
      case ')': cur_.t = Tok::RParen; return;
      case '{': cur_.t = Tok::LBrace; return;
      case '}': cur_.t = Tok::RBrace; return;
      case '[': cur_.t = Tok::LBracket; return;
      case ']': cur_.t = Tok::RBracket; return;
      case ',': cur_.t = Tok::Comma; return;
      case '.': cur_.t = Tok::Dot; return;
      case '/': cur_.t = Tok::Slash; return;
      case '\\': cur_.t = Tok::Backslash; return;
      default:
        fail(std::string("unexpected character '") + c + "'");
    }
  }

  std::string_view src_;
  bool internal_;
  size_t pos_ = 0;
  size_t colbase_ = 0;
  int line_ = 1;
  Token cur_;
};

// ------------------------------------------------------------- proto terms

// Terms are scanned name-first; symbol kinds are resolved per module (heads
// and declared parameters are functions, everything else a constructor).
struct Proto {
  enum class K { Var, Bottom, App } k = K::Var;
  std::string name;   // var name or symbol name
  std::string label;  // labeled symbols (internal files)
  std::vector<Proto> args;
  int line = 1, col = 1;
};

struct ProtoRule {
  Proto lhs, rhs;
  std::vector<std::pair<Proto, Proto>> conds;
  int line = 1, col = 1;
};

class Parser {
 public:
  Parser(std::string_view text, ParseOptions opts)
      : lex_(text, opts.allow_internal), opts_(opts) {}

  // ---- tokens
  const Token& peek() const { return lex_.peek(); }
  Token expect(Tok t, const char* what) {
    if (lex_.peek().t != t) lex_.fail(std::string("expected ") + what);
    return lex_.take();
  }
  bool accept(Tok t) {
    if (lex_.peek().t != t) return false;
    lex_.take();
    return true;
  }
  [[noreturn]] void fail(const std::string& msg) { lex_.fail(msg); }

  // ---- terms
  Proto parse_term_proto() {
    Proto lhs = parse_primary();
    // one infix level, left-associative, binding tighter than -> and ><
    while (peek().t == Tok::Op && peek().text != "|") {
      Token op = lex_.take();
      Proto rhs = parse_primary();
      Proto app;
      app.k = Proto::K::App;
      app.name = "_" + op.text + "_";
      app.line = op.line;
      app.col = op.col;
      app.args.push_back(std::move(lhs));
      app.args.push_back(std::move(rhs));
      lhs = std::move(app);
    }
    return lhs;
  }

  Proto parse_primary() {
    const Token& t = peek();
    Proto p;
    p.line = t.line;
    p.col = t.col;
    switch (t.t) {
      case Tok::UpperName: {
        Token v = lex_.take();
        p.k = Proto::K::Var;
        p.name = v.text;
        return p;
      }
      case Tok::Bottom: {
        if (!opts_.allow_internal)
          fail("bottom may not be written in source rules");
        lex_.take();
        p.k = Proto::K::Bottom;
        return p;
      }
      case Tok::Nat:
      case Tok::Ident:
      case Tok::Labeled: {
        Token s = lex_.take();
        if (s.t == Tok::Labeled && !opts_.allow_internal)
          fail("labeled symbols are not allowed in user sources");
        p.k = Proto::K::App;
        p.name = s.text;
        p.label = s.label;
        if (accept(Tok::LParen)) {
          if (!accept(Tok::RParen)) {
            p.args.push_back(parse_term_proto());
            while (accept(Tok::Comma)) p.args.push_back(parse_term_proto());
            expect(Tok::RParen, "')'");
          }
        }
        return p;
      }
      case Tok::LBracket: {
        lex_.take();
        return parse_list(p);
      }
      case Tok::LParen: {
        lex_.take();
        Proto inner = parse_term_proto();
        expect(Tok::RParen, "')'");
        return inner;
      }
      default:
        fail("expected a term");
    }
  }

  Proto parse_list(Proto at) {
    // at carries position of '['
    std::vector<Proto> items;
    Proto tail;
    tail.k = Proto::K::App;
    tail.name = "[]";
    tail.line = at.line;
    tail.col = at.col;
    if (!accept(Tok::RBracket)) {
      items.push_back(parse_term_proto());
      while (accept(Tok::Comma)) items.push_back(parse_term_proto());
      if (peek().t == Tok::Op && peek().text == "|") {
        lex_.take();
        tail = parse_term_proto();
      }
      expect(Tok::RBracket, "']'");
    }
    Proto out = std::move(tail);
    for (auto it = items.rbegin(); it != items.rend(); ++it) {
      Proto cons;
      cons.k = Proto::K::App;
      cons.name = "|";
      cons.line = it->line;
      cons.col = it->col;
      cons.args.push_back(std::move(*it));
      cons.args.push_back(std::move(out));
      out = std::move(cons);
    }
    return out;
  }

  // ---- signatures and renamings
  std::pair<std::string, int> parse_sig_entry() {
    std::string name;
    if (peek().t == Tok::Underscore) {
      lex_.take();
      Token op = expect(Tok::Op, "operator name");
      expect(Tok::Underscore, "'_'");
      name = "_" + op.text + "_";
    } else if (peek().t == Tok::Ident) {
      name = lex_.take().text;
    } else if (peek().t == Tok::Nat) {
      name = lex_.take().text;
    } else {
      fail("expected a symbol name");
    }
    expect(Tok::Slash, "'/'");
    Token n = expect(Tok::Nat, "arity");
    return {name, std::stoi(n.text)};
  }

  FnSig parse_fnsig_body() {
    FnSig out;
    expect(Tok::LBrace, "'{'");
    if (!accept(Tok::RBrace)) {
      do {
        auto [name, arity] = parse_sig_entry();
        out.insert(func(name, arity));
      } while (accept(Tok::Comma));
      expect(Tok::RBrace, "'}'");
    }
    return out;
  }

  // Braced list that is either a function signature or a renaming,
  // distinguished by `->` after the first entry.
  struct BracedSig {
    bool is_renaming = false;
    FnSig sig;
    Renaming rho;
  };
  BracedSig parse_braced() {
    BracedSig out;
    expect(Tok::LBrace, "'{'");
    if (accept(Tok::RBrace)) return out;
    auto [name, arity] = parse_sig_entry();
    if (peek().t == Tok::Arrow) {
      out.is_renaming = true;
      lex_.take();
      auto [toname, toarity] = parse_sig_entry();
      if (arity != toarity) fail("renaming entry changes arity");
      out.rho.add(func(name, arity), func(toname, toarity));
      while (accept(Tok::Comma)) {
        auto [n2, a2] = parse_sig_entry();
        expect(Tok::Arrow, "'->'");
        auto [n3, a3] = parse_sig_entry();
        if (a2 != a3) fail("renaming entry changes arity");
        out.rho.add(func(n2, a2), func(n3, a3));
      }
    } else {
      out.sig.insert(func(name, arity));
      while (accept(Tok::Comma)) {
        auto [n2, a2] = parse_sig_entry();
        out.sig.insert(func(n2, a2));
      }
    }
    expect(Tok::RBrace, "'}'");
    return out;
  }

  // ---- rules
  ProtoRule parse_rule() {
    ProtoRule r;
    r.line = peek().line;
    r.col = peek().col;
    r.lhs = parse_term_proto();
    expect(Tok::Arrow, "'->'");
    r.rhs = parse_term_proto();
    if (accept(Tok::Cond)) {
      do {
        Proto a = parse_term_proto();
        expect(Tok::Join, "'><'");
        Proto b = parse_term_proto();
        r.conds.emplace_back(std::move(a), std::move(b));
      } while (accept(Tok::Comma));
    }
    expect(Tok::Dot, "'.'");
    return r;
  }

  // ---- module definitions
  SourceModule parse_definition() {
    Token name = expect(Tok::UpperName, "module name");
    expect(Tok::Equals, "'='");
    SourceModule sm;
    sm.name = name.text;
    if (peek().t == Tok::Op && peek().text == "<") {
      lex_.take();
      sm.declared_params = parse_fnsig_body();
      expect(Tok::Comma, "','");
      sm.declared_exports = parse_fnsig_body();
      expect(Tok::Comma, "','");
      expect(Tok::LBrace, "'{'");
      std::vector<ProtoRule> rules;
      while (!accept(Tok::RBrace)) rules.push_back(parse_rule());
      if (!(peek().t == Tok::Op && peek().text == ">"))
        fail("expected '>' closing the module");
      lex_.take();
      sm.module = assemble_module(sm, std::move(rules));
    } else {
      sm.binding = parse_expr_tree();
    }
    return sm;
  }

  // ---- expressions
  ExprPtr parse_expr_tree() { return parse_isa(); }

  ExprPtr parse_isa() {
    ExprPtr a = parse_union();
    if (peek().t == Tok::Ident && peek().text == "isa") {
      lex_.take();
      ExprPtr b = parse_union();
      return Expr::isa(std::move(a), std::move(b));
    }
    return a;
  }

  ExprPtr parse_union() {
    ExprPtr a = parse_postfix();
    while (peek().t == Tok::Op && peek().text == "+") {
      lex_.take();
      a = Expr::union_(std::move(a), parse_postfix());
    }
    return a;
  }

  ExprPtr parse_postfix() {
    ExprPtr a = parse_expr_primary();
    while (accept(Tok::Backslash)) a = Expr::del(std::move(a), parse_fnsig_body());
    return a;
  }

  std::set<SymbolRef> parse_ctor_set() {
    std::set<SymbolRef> out;
    expect(Tok::LBrace, "'{'");
    if (!accept(Tok::RBrace)) {
      do {
        auto [name, arity] = parse_sig_entry();
        out.insert(ctor(name, arity));
      } while (accept(Tok::Comma));
      expect(Tok::RBrace, "'}'");
    }
    return out;
  }

  ExprPtr parse_expr_primary() {
    const Token& t = peek();
    switch (t.t) {
      case Tok::UpperName:
        return Expr::ref(lex_.take().text);
      case Tok::LParen: {
        lex_.take();
        ExprPtr e = parse_expr_tree();
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::LBrace: {  // renaming applied prefix: {f/1 -> g/1}(E)
        BracedSig b = parse_braced();
        if (!b.is_renaming && !b.sig.empty())
          fail("expected a renaming before '('");
        expect(Tok::LParen, "'('");
        ExprPtr e = parse_expr_tree();
        expect(Tok::RParen, "')'");
        return Expr::rename(std::move(b.rho), std::move(e));
      }
      case Tok::Ident: {
        std::string kw = lex_.take().text;
        if (kw == "close") {
          expect(Tok::LParen, "'('");
          ExprPtr e = parse_expr_tree();
          std::optional<FnSig> sig;
          if (accept(Tok::Comma)) sig = parse_fnsig_body();
          expect(Tok::RParen, "')'");
          return Expr::close(std::move(e), std::move(sig));
        }
        if (kw == "closeH") {
          expect(Tok::LParen, "'('");
          ExprPtr e = parse_expr_tree();
          expect(Tok::Comma, "','");
          std::set<SymbolRef> ctors = parse_ctor_set();
          expect(Tok::RParen, "')'");
          return Expr::close_hiding(std::move(e), std::move(ctors));
        }
        if (kw == "export") {
          expect(Tok::LParen, "'('");
          FnSig sig = parse_fnsig_body();
          expect(Tok::Comma, "','");
          ExprPtr e = parse_expr_tree();
          expect(Tok::RParen, "')'");
          return Expr::export_(std::move(sig), std::move(e));
        }
        if (kw == "import") {
          expect(Tok::LParen, "'('");
          ExprPtr a = parse_expr_tree();
          expect(Tok::Comma, "','");
          if (peek().t == Tok::LBrace) {
            BracedSig b = parse_braced();
            if (b.is_renaming) {
              expect(Tok::Comma, "','");
              FnSig sig = parse_fnsig_body();
              expect(Tok::Comma, "','");
              ExprPtr n = parse_expr_tree();
              expect(Tok::RParen, "')'");
              return Expr::import_ren(std::move(a), std::move(b.rho),
                                      std::move(sig), std::move(n));
            }
            expect(Tok::Comma, "','");
            ExprPtr n = parse_expr_tree();
            expect(Tok::RParen, "')'");
            return Expr::import_sel(std::move(a), std::move(b.sig),
                                    std::move(n));
          }
          ExprPtr n = parse_expr_tree();
          expect(Tok::RParen, "')'");
          return Expr::import_(std::move(a), std::move(n));
        }
        if (kw == "inst") {
          expect(Tok::LParen, "'('");
          ExprPtr a = parse_expr_tree();
          expect(Tok::Comma, "','");
          ExprPtr b = parse_expr_tree();
          expect(Tok::Comma, "','");
          BracedSig r = parse_braced();
          if (!r.is_renaming && !r.rho.entries().empty())
            fail("expected a renaming");
          expect(Tok::RParen, "')'");
          return Expr::instantiate(std::move(a), std::move(b),
                                   std::move(r.rho));
        }
        if (kw == "abstract") {
          expect(Tok::LParen, "'('");
          ExprPtr a = parse_expr_tree();
          expect(Tok::Comma, "','");
          FnSig sig = parse_fnsig_body();
          expect(Tok::RParen, "')'");
          return Expr::abstract_(std::move(a), std::move(sig));
        }
        fail("unknown module operation: " + kw);
      }
      default:
        fail("expected a module expression");
    }
  }

  // ---- assembly of a literal module
  Module assemble_module(SourceModule& sm, std::vector<ProtoRule> rules);
  Term resolve(const Proto& p, const Signature& env) const;

  Lexer lex_;
  ParseOptions opts_;
};

// arity/kind registry while assembling a module
struct SymbolInfo {
  int arity;
  int line, col;
};

void note_symbol(std::map<std::pair<std::string, std::string>, SymbolInfo>& reg,
                 const Proto& p) {
  if (p.k != Proto::K::App) return;
  auto key = std::make_pair(p.label, p.name);
  auto it = reg.find(key);
  if (it == reg.end())
    reg.emplace(key, SymbolInfo{(int)p.args.size(), p.line, p.col});
  else if (it->second.arity != (int)p.args.size())
    throw ParseError("arity conflict for symbol " + p.name + ": used at /" +
                         std::to_string(it->second.arity) + " and /" +
                         std::to_string(p.args.size()),
                     p.line, p.col);
  for (const Proto& a : p.args) note_symbol(reg, a);
}

Term build_term(const Proto& p,
                const std::function<SymbolRef(const Proto&)>& classify) {
  switch (p.k) {
    case Proto::K::Var:
      return Term::var(p.name);
    case Proto::K::Bottom:
      return Term::bottom();
    case Proto::K::App: {
      std::vector<Term> args;
      args.reserve(p.args.size());
      for (const Proto& a : p.args) args.push_back(build_term(a, classify));
      return Term::app(classify(p), std::move(args));
    }
  }
  throw Error("internal: unreachable proto kind");
}

Module Parser::assemble_module(SourceModule& sm,
                               std::vector<ProtoRule> rules) {
  std::map<std::pair<std::string, std::string>, SymbolInfo> reg;
  for (const SymbolRef& f : sm.declared_params)
    reg.emplace(std::make_pair(std::string(), f.name),
                SymbolInfo{f.arity, 0, 0});
  for (const SymbolRef& f : sm.declared_exports) {
    auto key = std::make_pair(std::string(), f.name);
    auto it = reg.find(key);
    if (it != reg.end() && it->second.arity != f.arity)
      throw ParseError("arity conflict for declared symbol " + f.name, 1, 1);
    reg.emplace(key, SymbolInfo{f.arity, 0, 0});
  }
  for (const ProtoRule& r : rules) {
    if (r.lhs.k != Proto::K::App)
      throw ParseError("variable-headed left-hand side", r.line, r.col);
    note_symbol(reg, r.lhs);
    note_symbol(reg, r.rhs);
    for (const auto& [a, b] : r.conds) {
      note_symbol(reg, a);
      note_symbol(reg, b);
    }
  }

  // heads and declared parameters are functions; the rest are constructors
  std::set<std::pair<std::string, std::string>> fn_names;
  for (const SymbolRef& f : sm.declared_params) fn_names.insert({"", f.name});
  for (const ProtoRule& r : rules) fn_names.insert({r.lhs.label, r.lhs.name});

  auto classify = [&](const Proto& p) -> SymbolRef {
    const SymbolInfo& info = reg.at({p.label, p.name});
    Kind k = fn_names.count({p.label, p.name}) ? Kind::Function
                                               : Kind::Constructor;
    return SymbolRef{p.name, info.arity, k, p.label};
  };

  std::vector<Rule> built;
  FnSig heads;
  for (const ProtoRule& pr : rules) {
    Rule r;
    Term lhs = build_term(pr.lhs, classify);
    r.head = lhs.symbol();
    heads.insert(r.head);
    r.patterns.assign(lhs.args().begin(), lhs.args().end());
    r.rhs = build_term(pr.rhs, classify);
    for (const auto& [a, b] : pr.conds)
      r.conditions.push_back(Statement::joinability(build_term(a, classify),
                                                    build_term(b, classify)));
    try {
      r.validate();
    } catch (const Error& e) {
      throw ParseError(e.what(), pr.line, pr.col);
    }
    built.push_back(std::move(r));
  }

  for (const SymbolRef& f : sm.declared_exports)
    if (!heads.count(f))
      throw ParseError(
          "declared exported symbol " + f.display() + " has no defining rule",
          1, 1);
  for (const SymbolRef& f : heads)
    if (!sm.declared_exports.count(f))
      throw ParseError("rule defines " + f.display() +
                           " which is not in the export signature",
                       1, 1);

  Module m = Module::from_rules(std::move(built));
  // A declared parameter that is never invoked still classifies the name as
  // a function symbol, but the module interface is derived from the body.
  for (const SymbolRef& f : sm.declared_params)
    if (!m.params().count(f))
      sm.warnings.push_back("declared parameter " + f.display() +
                            " is never invoked");
  return m;
}

Term Parser::resolve(const Proto& p, const Signature& env) const {
  switch (p.k) {
    case Proto::K::Var:
      return Term::var(p.name);
    case Proto::K::Bottom:
      return Term::bottom();
    case Proto::K::App: {
      auto sym = env.lookup(p.name, p.label);
      if (!sym)
        throw ParseError("unknown symbol: " + p.name, p.line, p.col);
      if (sym->arity != (int)p.args.size())
        throw ParseError("arity mismatch for " + sym->display() + ": got " +
                             std::to_string(p.args.size()) + " arguments",
                         p.line, p.col);
      std::vector<Term> args;
      args.reserve(p.args.size());
      for (const Proto& a : p.args) args.push_back(resolve(a, env));
      return Term::app(*sym, std::move(args));
    }
  }
  throw Error("internal: unreachable proto kind");
}

}  // namespace

// ------------------------------------------------------------- public API

ParsedFile parse_file(std::string_view text, ParseOptions opts) {
  Parser p(text, opts);
  ParsedFile out;
  while (p.peek().t != Tok::End) out.modules.push_back(p.parse_definition());
  return out;
}

SourceModule parse_module(std::string_view text, ParseOptions opts) {
  Parser p(text, opts);
  SourceModule sm = p.parse_definition();
  if (p.peek().t != Tok::End) p.fail("trailing input after module definition");
  return sm;
}

ExprPtr parse_expr(std::string_view text) {
  Parser p(text, ParseOptions{});
  ExprPtr e = p.parse_expr_tree();
  if (p.peek().t != Tok::End) p.fail("trailing input after expression");
  return e;
}

Statement parse_goal(std::string_view text, const Signature& env) {
  Parser p(text, ParseOptions{});
  Proto a = p.parse_term_proto();
  bool reduction;
  if (p.peek().t == Tok::Arrow)
    reduction = true;
  else if (p.peek().t == Tok::Join)
    reduction = false;
  else
    p.fail("expected '->' or '><' in goal");
  (void)p.peek();
  // consume the operator
  if (reduction)
    p.expect(Tok::Arrow, "'->'");
  else
    p.expect(Tok::Join, "'><'");
  Proto b = p.parse_term_proto();
  if (p.peek().t != Tok::End) p.fail("trailing input after goal");
  Term lhs = p.resolve(a, env);
  Term rhs = p.resolve(b, env);
  return reduction ? Statement::reduction(lhs, rhs)
                   : Statement::joinability(lhs, rhs);
}

Term parse_term(std::string_view text, const Signature& env,
                ParseOptions opts) {
  Parser p(text, opts);
  Proto a = p.parse_term_proto();
  if (p.peek().t != Tok::End) p.fail("trailing input after term");
  return p.resolve(a, env);
}

FnSig parse_fnsig(std::string_view text) {
  Parser p(text, ParseOptions{});
  FnSig out = p.parse_fnsig_body();
  if (p.peek().t != Tok::End) p.fail("trailing input after signature");
  return out;
}

void add_to_env(FlattenEnv& env, const ParsedFile& file) {
  for (const SourceModule& sm : file.modules) {
    if (sm.module)
      env.define(sm.name, *sm.module);
    else
      env.define(sm.name, sm.binding);
  }
}

}  // namespace crwl
