#include <cctype>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "spi/surface.hpp"

namespace spi {

ParseError::ParseError(int line, int column, const std::string& message)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column),
      message_(message) {}

namespace {

enum class Tok {
  Ident, Int, String, End,
  Bar, Dot, LParen, RParen, Lt, Gt, LBrace, RBrace, LBracket, RBracket,
  Bang, Query, Star, Colon, Comma, Semi, Amp, Plus, Minus, Le, Eq, Shl, Shr, AndAnd,
};

struct Token {
  Tok kind;
  std::string text;
  int line;
  int column;
};

const char* describe(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Int: return "integer";
    case Tok::String: return "string";
    case Tok::End: return "end of input";
    case Tok::Bar: return "'|'";
    case Tok::Dot: return "'.'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Lt: return "'<'";
    case Tok::Gt: return "'>'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Bang: return "'!'";
    case Tok::Query: return "'?'";
    case Tok::Star: return "'*'";
    case Tok::Colon: return "':'";
    case Tok::Comma: return "','";
    case Tok::Semi: return "';'";
    case Tok::Amp: return "'&'";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Le: return "'<='";
    case Tok::Eq: return "'='";
    case Tok::Shl: return "'<<'";
    case Tok::Shr: return "'>>'";
    case Tok::AndAnd: return "'&&'";
  }
  return "token";
}

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == '\n' || c == ' ' || c == '\t' || c == '\r') {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    const int tl = line;
    const int tc = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' || src[j] == '\''))
        ++j;
      out.push_back({Tok::Ident, std::string(src.substr(i, j - i)), tl, tc});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      out.push_back({Tok::Int, std::string(src.substr(i, j - i)), tl, tc});
      advance(j - i);
      continue;
    }
    if (c == '"') {
      std::string s;
      advance(1);
      for (;;) {
        if (i >= src.size() || src[i] == '\n') throw ParseError(tl, tc, "unterminated string literal");
        char d = src[i];
        if (d == '"') {
          advance(1);
          break;
        }
        if (d == '\\') {
          if (i + 1 >= src.size()) throw ParseError(line, col, "unterminated escape");
          char e = src[i + 1];
          switch (e) {
            case 'n': s += '\n'; break;
            case 't': s += '\t'; break;
            case '\\': s += '\\'; break;
            case '"': s += '"'; break;
            default: throw ParseError(line, col, std::string("unknown escape '\\") + e + "'");
          }
          advance(2);
          continue;
        }
        s += d;
        advance(1);
      }
      out.push_back({Tok::String, std::move(s), tl, tc});
      continue;
    }
    auto two = [&](char a, char b) { return c == a && i + 1 < src.size() && src[i + 1] == b; };
    Tok kind;
    std::size_t len = 1;
    if (two('<', '=')) { kind = Tok::Le; len = 2; }
    else if (two('<', '<')) { kind = Tok::Shl; len = 2; }
    else if (two('>', '>')) { kind = Tok::Shr; len = 2; }
    else if (two('&', '&')) { kind = Tok::AndAnd; len = 2; }
    else {
      switch (c) {
        case '|': kind = Tok::Bar; break;
        case '.': kind = Tok::Dot; break;
        case '(': kind = Tok::LParen; break;
        case ')': kind = Tok::RParen; break;
        case '<': kind = Tok::Lt; break;
        case '>': kind = Tok::Gt; break;
        case '{': kind = Tok::LBrace; break;
        case '}': kind = Tok::RBrace; break;
        case '[': kind = Tok::LBracket; break;
        case ']': kind = Tok::RBracket; break;
        case '!': kind = Tok::Bang; break;
        case '?': kind = Tok::Query; break;
        case '*': kind = Tok::Star; break;
        case ':': kind = Tok::Colon; break;
        case ',': kind = Tok::Comma; break;
        case ';': kind = Tok::Semi; break;
        case '&': kind = Tok::Amp; break;
        case '+': kind = Tok::Plus; break;
        case '-': kind = Tok::Minus; break;
        case '=': kind = Tok::Eq; break;
        default:
          throw ParseError(tl, tc, std::string("unexpected character '") + c + "'");
      }
    }
    out.push_back({kind, std::string(src.substr(i, len)), tl, tc});
    advance(len);
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

const std::unordered_set<std::string>& keywords() {
  static const std::unordered_set<std::string> k = {"new", "if", "then", "else", "end", "int", "bool",
                                                    "string", "true", "false", "not", "sessions", "env"};
  return k;
}

struct Binding {
  Name name;
  bool session;
  bool service_sort;  // free env entry of service sort
};

class Parser {
public:
  explicit Parser(std::string_view src) : toks_(lex(src)) {}

  SourceFile source() {
    SourceFile f;
    if (is_keyword("sessions")) {
      next();
      for (;;) {
        auto t = ident("session channel");
        declare_free(t, Binding{Name::free(t.text), true, false});
        f.sessions.push_back(Name::free(t.text));
        if (!accept(Tok::Comma)) break;
      }
      expect(Tok::Semi);
    }
    while (is_keyword("env")) {
      next();
      for (;;) {
        auto t = ident("service name");
        expect(Tok::Colon);
        Sort s = sort();
        auto n = Name::free(t.text);
        declare_free(t, Binding{n, false, s.is_service});
        f.env.emplace(n, std::move(s));
        if (!accept(Tok::Comma)) break;
      }
      expect(Tok::Semi);
    }
    f.body = par();
    expect(Tok::End);
    return f;
  }

  SessionType whole_type() {
    auto t = type();
    expect(Tok::End);
    return t;
  }

  Sort whole_sort() {
    auto s = sort();
    expect(Tok::End);
    return s;
  }

private:
  // --- token helpers -------------------------------------------------------

  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool at(Tok k, std::size_t ahead = 0) const { return peek(ahead).kind == k; }
  bool accept(Tok k) {
    if (!at(k)) return false;
    next();
    return true;
  }
  [[noreturn]] void fail(const Token& t, const std::string& msg) const { throw ParseError(t.line, t.column, msg); }
  const Token& expect(Tok k) {
    if (!at(k)) fail(peek(), std::string("expected ") + describe(k) + ", found " + found(peek()));
    return next();
  }
  static std::string found(const Token& t) {
    if (t.kind == Tok::End) return "end of input";
    return "'" + t.text + "'";
  }
  bool is_keyword(const char* kw, std::size_t ahead = 0) const {
    return at(Tok::Ident, ahead) && peek(ahead).text == kw;
  }
  void expect_keyword(const char* kw) {
    if (!is_keyword(kw)) fail(peek(), std::string("expected '") + kw + "', found " + found(peek()));
    next();
  }
  Token ident(const char* what) {
    if (!at(Tok::Ident)) fail(peek(), std::string("expected ") + what + ", found " + found(peek()));
    Token t = next();
    if (keywords().count(t.text)) fail(t, std::string("keyword '") + t.text + "' cannot be used as " + what);
    return t;
  }
  static SourceLoc loc(const Token& t) { return {t.line, t.column}; }

  // --- scopes --------------------------------------------------------------

  void declare_free(const Token& t, Binding b) {
    auto [it, inserted] = free_.emplace(t.text, b);
    if (!inserted) {
      if (it->second.session != b.session)
        fail(t, "sort error: '" + t.text + "' declared both as session channel and as service name");
      fail(t, "'" + t.text + "' declared twice");
    }
  }

  const Binding* lookup(const std::string& text) const {
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
      if (it->first == text) return &it->second;
    auto f = free_.find(text);
    return f == free_.end() ? nullptr : &f->second;
  }

  Name use_session(const Token& t) {
    const Binding* b = lookup(t.text);
    if (!b) fail(t, "undeclared session channel '" + t.text + "' (add it to the 'sessions' header)");
    if (!b->session) fail(t, "sort error: '" + t.text + "' is not a session channel");
    return b->name;
  }

  Name use_service(const Token& t) {
    const Binding* b = lookup(t.text);
    if (!b) fail(t, "undeclared service name '" + t.text + "' (add it to the 'env' block)");
    if (b->session) fail(t, "sort error: session channel '" + t.text + "' used as a service name");
    return b->name;
  }

  bool is_session_in_scope(const std::string& text) const {
    const Binding* b = lookup(text);
    return b && b->session;
  }

  struct ScopeGuard {
    Parser& p;
    ~ScopeGuard() { p.scope_.pop_back(); }
  };

  Name bind(const Token& t, bool session) {
    Name n = Name::fresh(t.text);
    scope_.emplace_back(t.text, Binding{n, session, false});
    return n;
  }

  // --- processes -----------------------------------------------------------

  Process par() {
    const Token& first = peek();
    std::vector<Process> parts;
    parts.push_back(prefix());
    while (accept(Tok::Bar)) parts.push_back(prefix());
    if (parts.size() == 1) return parts.front();
    return proc::par(std::move(parts), loc(first));
  }

  Process continuation() {
    if (accept(Tok::Dot)) return prefix();
    return proc::inact();
  }

  Process prefix() {
    const Token& t = peek();
    if (t.kind == Tok::Int) {
      if (t.text != "0") fail(t, "expected a process, found '" + t.text + "'");
      next();
      return proc::inact();
    }
    if (t.kind == Tok::LParen) {
      next();
      auto p = par();
      expect(Tok::RParen);
      return p;
    }
    if (t.kind == Tok::Star) {
      Token star = next();
      auto a = ident("service name");
      Name service = use_service(a);
      expect(Tok::LParen);
      auto k = ident("session binder");
      expect(Tok::RParen);
      Name bound = bind(k, true);
      ScopeGuard g{*this};
      return proc::replicated_service(service, bound, continuation(), loc(star));
    }
    if (is_keyword("new")) {
      Token kw = next();
      auto k = ident("session channel");
      expect(Tok::Dot);
      Name bound = bind(k, true);
      ScopeGuard g{*this};
      return proc::restrict(bound, prefix(), loc(kw));
    }
    if (is_keyword("if")) {
      Token kw = next();
      auto guard = expression();
      expect_keyword("then");
      auto p = prefix();
      expect_keyword("else");
      auto q = prefix();
      return proc::cond(std::move(guard), std::move(p), std::move(q), loc(kw));
    }
    if (t.kind != Tok::Ident) fail(t, "expected a process, found " + found(t));
    Token head = ident("channel or service name");
    switch (peek().kind) {
      case Tok::LParen: {  // a(k).P
        Name service = use_service(head);
        next();
        auto k = ident("session binder");
        expect(Tok::RParen);
        Name bound = bind(k, true);
        ScopeGuard g{*this};
        return proc::service(service, bound, continuation(), loc(head));
      }
      case Tok::Lt: {  // a<k>.P
        Name service = use_service(head);
        next();
        auto k = ident("session binder");
        expect(Tok::Gt);
        Name bound = bind(k, true);
        ScopeGuard g{*this};
        return proc::request(service, bound, continuation(), loc(head));
      }
      case Tok::Query: {
        Name chan = use_session(head);
        next();
        expect(Tok::LParen);
        if (accept(Tok::LParen)) {  // k?((k')).P
          auto k = ident("session binder");
          expect(Tok::RParen);
          expect(Tok::RParen);
          Name bound = bind(k, true);
          ScopeGuard g{*this};
          return proc::input_session(chan, bound, continuation(), loc(head));
        }
        auto x = ident("variable");
        expect(Tok::RParen);
        Name bound = bind(x, false);
        ScopeGuard g{*this};
        return proc::input(chan, bound, continuation(), loc(head));
      }
      case Tok::Bang: {
        Name chan = use_session(head);
        next();
        expect(Tok::LParen);
        if (at(Tok::LParen) && at(Tok::Ident, 1) && at(Tok::RParen, 2) && at(Tok::RParen, 3) &&
            is_session_in_scope(peek(1).text)) {  // k!((k')).P
          next();
          Name sent = use_session(next());
          next();
          next();
          return proc::delegate(chan, sent, continuation(), loc(head));
        }
        auto e = expression();
        expect(Tok::RParen);
        return proc::output(chan, std::move(e), continuation(), loc(head));
      }
      case Tok::Shr: {  // k >> { l: P, ... }
        Name chan = use_session(head);
        next();
        expect(Tok::LBrace);
        std::vector<Arm> arms;
        std::set<std::string> seen;
        do {
          auto l = ident("label");
          if (!seen.insert(l.text).second) fail(l, "duplicate label '" + l.text + "' in branch");
          expect(Tok::Colon);
          arms.push_back({l.text, par()});
        } while (accept(Tok::Comma));
        expect(Tok::RBrace);
        return proc::branch(chan, std::move(arms), loc(head));
      }
      case Tok::Shl: {  // k << l . P
        Name chan = use_session(head);
        next();
        auto l = ident("label");
        return proc::select(chan, l.text, continuation(), loc(head));
      }
      default:
        fail(peek(), "expected one of '(' '<' '?' '!' '>>' '<<' after '" + head.text + "', found " + found(peek()));
    }
  }

  // --- expressions ---------------------------------------------------------

  Expr expression() {
    auto lhs = comparison();
    while (accept(Tok::AndAnd)) lhs = expr::binary(BinOp::And, std::move(lhs), comparison());
    return lhs;
  }

  Expr comparison() {
    auto lhs = additive();
    if (accept(Tok::Le)) return expr::binary(BinOp::Le, std::move(lhs), additive());
    if (accept(Tok::Eq)) return expr::binary(BinOp::Eq, std::move(lhs), additive());
    return lhs;
  }

  Expr additive() {
    auto lhs = multiplicative();
    for (;;) {
      if (accept(Tok::Plus)) lhs = expr::binary(BinOp::Add, std::move(lhs), multiplicative());
      else if (accept(Tok::Minus)) lhs = expr::binary(BinOp::Sub, std::move(lhs), multiplicative());
      else return lhs;
    }
  }

  Expr multiplicative() {
    auto lhs = unary();
    while (accept(Tok::Star)) lhs = expr::binary(BinOp::Mul, std::move(lhs), unary());
    return lhs;
  }

  Expr unary() {
    if (is_keyword("not")) {
      next();
      return expr::negate(unary());
    }
    if (at(Tok::Minus) && at(Tok::Int, 1)) {
      next();
      return expr::integer(-integer(next()));
    }
    return primary();
  }

  std::int64_t integer(const Token& t) {
    try {
      return std::stoll(t.text);
    } catch (const std::exception&) {
      fail(t, "integer literal out of range");
    }
  }

  Expr primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Int: return expr::integer(integer(next()));
      case Tok::String: return expr::string(next().text);
      case Tok::LParen: {
        next();
        auto e = expression();
        expect(Tok::RParen);
        return e;
      }
      case Tok::Ident: {
        if (t.text == "true") { next(); return expr::boolean(true); }
        if (t.text == "false") { next(); return expr::boolean(false); }
        auto id = ident("expression");
        const Binding* b = lookup(id.text);
        if (!b) fail(id, "undeclared name '" + id.text + "' (bind it or add it to the 'env' block)");
        if (b->session) fail(id, "sort error: session channel '" + id.text + "' used in an expression");
        if (b->service_sort) return expr::service(b->name);
        return expr::var(b->name);
      }
      default:
        fail(t, "expected an expression, found " + found(t));
    }
  }

  // --- types ---------------------------------------------------------------

  SessionType type() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Query:
      case Tok::Bang: {
        next();
        expect(Tok::LBracket);
        Payload p = payload();
        expect(Tok::RBracket);
        SessionType cont = accept(Tok::Dot) ? type() : ty::end();
        return t.kind == Tok::Query ? ty::in(std::move(p), cont) : ty::out(std::move(p), cont);
      }
      case Tok::Amp:
      case Tok::Plus: {
        next();
        expect(Tok::LBrace);
        std::vector<TypeArm> arms;
        std::set<std::string> seen;
        do {
          auto l = ident("label");
          if (!seen.insert(l.text).second) fail(l, "duplicate label '" + l.text + "' in choice type");
          expect(Tok::Colon);
          arms.push_back({l.text, type()});
        } while (accept(Tok::Comma));
        expect(Tok::RBrace);
        return t.kind == Tok::Amp ? ty::branch(std::move(arms)) : ty::select(std::move(arms));
      }
      case Tok::LParen: {
        next();
        auto inner = type();
        expect(Tok::RParen);
        return inner;
      }
      default:
        if (is_keyword("end")) {
          next();
          return ty::end();
        }
        fail(t, "expected a session type, found " + found(t));
    }
  }

  std::optional<BasicSort> basic() {
    if (is_keyword("int")) { next(); return BasicSort::Int; }
    if (is_keyword("bool")) { next(); return BasicSort::Bool; }
    if (is_keyword("string")) { next(); return BasicSort::String; }
    return std::nullopt;
  }

  Payload payload() {
    if (auto b = basic()) return Payload::of_basic(*b);
    if (accept(Tok::Lt)) {
      auto t = type();
      expect(Tok::Gt);
      return Payload::of_service(std::move(t));
    }
    return Payload::of_session(type());
  }

  Sort sort() {
    if (auto b = basic()) return Sort::of_basic(*b);
    if (accept(Tok::Lt)) {
      auto t = type();
      expect(Tok::Gt);
      return Sort::of_service(std::move(t));
    }
    fail(peek(), "expected a sort (int, bool, string or <type>), found " + found(peek()));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<std::pair<std::string, Binding>> scope_;
  std::unordered_map<std::string, Binding> free_;
};

} // namespace

SourceFile parse_source(std::string_view text) { return Parser(text).source(); }

Process parse_process(std::string_view text) { return parse_source(text).body; }

SessionType parse_type(std::string_view text) { return Parser(text).whole_type(); }

Sort parse_sort(std::string_view text) { return Parser(text).whole_sort(); }

} // namespace spi
