#ifndef SPI_SYNTAX_HPP_
#define SPI_SYNTAX_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "spi/name.hpp"

namespace spi {

// ---------------------------------------------------------------------------
// Expressions and values
// ---------------------------------------------------------------------------

enum class BasicSort { Int, Bool, String };

const char* to_string(BasicSort s);

/// A first-order value: integer, boolean, string, or a service name.
class Value {
public:
  Value() : v_(std::int64_t{0}) {}
  static Value integer(std::int64_t i) { return Value(i); }
  static Value boolean(bool b) { return Value(b); }
  static Value string(std::string s) { return Value(std::move(s)); }
  static Value service(Name a) { return Value(a); }

  bool is_int() const { return std::holds_alternative<std::int64_t>(v_); }
  bool is_bool() const { return std::holds_alternative<bool>(v_); }
  bool is_string() const { return std::holds_alternative<std::string>(v_); }
  bool is_service() const { return std::holds_alternative<Name>(v_); }

  std::int64_t as_int() const { return std::get<std::int64_t>(v_); }
  bool as_bool() const { return std::get<bool>(v_); }
  const std::string& as_string() const { return std::get<std::string>(v_); }
  Name as_service() const { return std::get<Name>(v_); }

  friend bool operator==(const Value&, const Value&) = default;

private:
  template <class T>
  explicit Value(T v) : v_(std::move(v)) {}
  std::variant<std::int64_t, bool, std::string, Name> v_;
};

enum class ExprKind { Literal, Var, Binary, Not };
enum class BinOp { Add, Sub, Mul, Le, Eq, And };

const char* to_string(BinOp op);

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  ExprKind kind = ExprKind::Literal;
  Value value;      // Literal
  Name var;         // Var: a bound variable or a free name of basic sort
  BinOp op = BinOp::Add;
  Expr lhs, rhs;    // Binary uses both, Not uses lhs
};

namespace expr {
Expr literal(Value v);
Expr integer(std::int64_t i);
Expr boolean(bool b);
Expr string(std::string s);
Expr service(Name a);
Expr var(Name x);
Expr binary(BinOp op, Expr lhs, Expr rhs);
Expr negate(Expr e);
} // namespace expr

// ---------------------------------------------------------------------------
// Session types
// ---------------------------------------------------------------------------

enum class TypeKind { In, Out, Branch, Select, End };
enum class PayloadKind { Basic, Service, Session };

struct TypeNode;
using SessionType = std::shared_ptr<const TypeNode>;

/// What an in-session input or output carries: a basic value, a service
/// channel of sort <alpha>, or a session channel of type alpha.
struct Payload {
  PayloadKind kind = PayloadKind::Basic;
  BasicSort basic = BasicSort::Int;
  SessionType type;  // Service and Session

  static Payload of_basic(BasicSort b) { return {PayloadKind::Basic, b, nullptr}; }
  static Payload of_service(SessionType t) { return {PayloadKind::Service, BasicSort::Int, std::move(t)}; }
  static Payload of_session(SessionType t) { return {PayloadKind::Session, BasicSort::Int, std::move(t)}; }
};

struct TypeArm {
  std::string label;
  SessionType type;
};

struct TypeNode {
  TypeKind kind = TypeKind::End;
  Payload payload;             // In / Out
  SessionType cont;            // In / Out
  std::vector<TypeArm> arms;   // Branch / Select, in source order
};

namespace ty {
SessionType end();
SessionType in(Payload p, SessionType cont);
SessionType out(Payload p, SessionType cont);
/// Throws std::invalid_argument on empty or duplicate labels.
SessionType branch(std::vector<TypeArm> arms);
SessionType select(std::vector<TypeArm> arms);
} // namespace ty

/// Structural equality; choice arms are compared as maps.
bool type_equal(const SessionType& a, const SessionType& b);
bool payload_equal(const Payload& a, const Payload& b);

/// Sort of a service-environment entry: `basic` or `<alpha>`.
struct Sort {
  bool is_service = false;
  BasicSort basic = BasicSort::Int;
  SessionType type;

  static Sort of_basic(BasicSort b) { return {false, b, nullptr}; }
  static Sort of_service(SessionType t) { return {true, BasicSort::Int, std::move(t)}; }

  friend bool operator==(const Sort& a, const Sort& b);
};

/// A session-environment entry: a session type, or bottom once both
/// endpoints of the session have been found.
class SessionEntry {
public:
  static SessionEntry bottom() { return SessionEntry(nullptr); }
  static SessionEntry of(SessionType t) { return SessionEntry(std::move(t)); }

  bool is_bottom() const { return type_ == nullptr; }
  const SessionType& type() const { return type_; }

  friend bool operator==(const SessionEntry& a, const SessionEntry& b);

private:
  explicit SessionEntry(SessionType t) : type_(std::move(t)) {}
  SessionType type_;
};

using ServiceEnv = std::map<Name, Sort>;
using SessionEnv = std::map<Name, SessionEntry>;

// ---------------------------------------------------------------------------
// Processes
// ---------------------------------------------------------------------------

enum class ProcKind {
  Inact,
  Par,
  Restrict,      // new k . P
  Service,       // a(k).P, or *a(k).P when replicated
  Request,       // a<k>.P
  Input,         // k?(x).P
  Output,        // k!(e).P
  InputSession,  // k?((k')).P
  Delegate,      // k!((k')).P
  Branch,        // k >> { l: P, ... }
  Select,        // k << l . P
  Cond,          // if e then P else Q
};

const char* to_string(ProcKind k);

struct SourceLoc {
  int line = 0;
  int column = 0;
  bool known() const { return line > 0; }
};

struct ProcessNode;
using Process = std::shared_ptr<const ProcessNode>;

/// One node of the process syntax tree. Nodes are immutable and built only
/// through the factories in `spi::proc`, which validate the invariants and
/// cache the free session channels.
struct ProcessNode {
  ProcKind kind = ProcKind::Inact;
  /// Session channel of a session prefix, or the service name of
  /// Service/Request.
  Name subject;
  /// The bound name: Restrict/Service/Request/InputSession bind a session
  /// channel, Input binds a variable.
  Name binder;
  /// Delegate: the channel being sent (not a binder).
  Name object;
  bool replicated = false;
  Expr expr;                        // Output payload, Cond guard
  std::string label;                // Select
  std::vector<std::string> labels;  // Branch arm labels, parallel to children
  std::vector<Process> children;    // Par parts, continuation, branch arms, then/else
  SourceLoc loc;

  std::vector<Name> fsc;  // free session channels, sorted by identity
  std::size_t size = 1;   // number of syntax-tree nodes

  const Process& body() const { return children.front(); }
  bool is_prefix() const {
    return kind != ProcKind::Inact && kind != ProcKind::Par && kind != ProcKind::Restrict;
  }
};

struct Arm {
  std::string label;
  Process body;
};

namespace proc {
Process inact();
/// n-ary parallel composition; at least two parts.
Process par(std::vector<Process> parts, SourceLoc loc = {});
/// Builds `parts[0] | parts[1] | ...`, returning the single part or 0 for
/// fewer than two.
Process par_or_single(std::vector<Process> parts);
Process restrict(Name k, Process body, SourceLoc loc = {});
Process service(Name a, Name k, Process body, SourceLoc loc = {});
Process replicated_service(Name a, Name k, Process body, SourceLoc loc = {});
Process request(Name a, Name k, Process body, SourceLoc loc = {});
Process input(Name k, Name x, Process body, SourceLoc loc = {});
Process output(Name k, Expr e, Process body, SourceLoc loc = {});
Process input_session(Name k, Name bound, Process body, SourceLoc loc = {});
Process delegate(Name k, Name sent, Process body, SourceLoc loc = {});
/// Throws std::invalid_argument on empty or duplicate labels.
Process branch(Name k, std::vector<Arm> arms, SourceLoc loc = {});
Process select(Name k, std::string label, Process body, SourceLoc loc = {});
Process cond(Expr guard, Process then_branch, Process else_branch, SourceLoc loc = {});

/// Same node with different children; used by rewriting passes.
Process with_children(const ProcessNode& n, std::vector<Process> children);
/// Same node with a different binder and children.
Process with_binder(const ProcessNode& n, Name binder, std::vector<Process> children);
} // namespace proc

// ---------------------------------------------------------------------------
// Name hygiene
// ---------------------------------------------------------------------------

/// Free session channels, sorted by identity.
const std::vector<Name>& free_session_channels(const Process& p);
bool has_free_session(const Process& p, Name k);

/// Free service names and free variables (everything that is not a session
/// channel), sorted by identity.
std::vector<Name> free_value_names(const Process& p);

/// Capture-avoiding substitution of value `v` for the variable `x`.
/// Throws std::invalid_argument when a non-service value would land in a
/// service position.
Process substitute(const Process& p, Name x, const Value& v);
Expr substitute(const Expr& e, Name x, const Value& v);

/// Capture-avoiding renaming of the free session channel `from` to `to`.
Process rename_session(const Process& p, Name from, Name to);

/// Gives every binder in `p` a new identity.
Process freshen_binders(const Process& p);

bool alpha_equivalent(const Process& p, const Process& q);

} // namespace spi

#endif // SPI_SYNTAX_HPP_
