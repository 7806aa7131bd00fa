#include "spi/syntax.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace spi {

const char* to_string(BasicSort s) {
  switch (s) {
    case BasicSort::Int: return "int";
    case BasicSort::Bool: return "bool";
    case BasicSort::String: return "string";
  }
  return "?";
}

const char* to_string(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Le: return "<=";
    case BinOp::Eq: return "=";
    case BinOp::And: return "&&";
  }
  return "?";
}

const char* to_string(ProcKind k) {
  switch (k) {
    case ProcKind::Inact: return "inact";
    case ProcKind::Par: return "par";
    case ProcKind::Restrict: return "resSess";
    case ProcKind::Service: return "serv";
    case ProcKind::Request: return "request";
    case ProcKind::Input: return "input";
    case ProcKind::Output: return "output";
    case ProcKind::InputSession: return "inputS";
    case ProcKind::Delegate: return "delegation";
    case ProcKind::Branch: return "branch";
    case ProcKind::Select: return "select";
    case ProcKind::Cond: return "cond";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

namespace expr {

Expr literal(Value v) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::Literal;
  n->value = std::move(v);
  return n;
}

Expr integer(std::int64_t i) { return literal(Value::integer(i)); }
Expr boolean(bool b) { return literal(Value::boolean(b)); }
Expr string(std::string s) { return literal(Value::string(std::move(s))); }
Expr service(Name a) { return literal(Value::service(a)); }

Expr var(Name x) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::Var;
  n->var = x;
  return n;
}

Expr binary(BinOp op, Expr lhs, Expr rhs) {
  if (!lhs || !rhs) throw std::invalid_argument("binary expression needs two operands");
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::Binary;
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

Expr negate(Expr e) {
  if (!e) throw std::invalid_argument("negation needs an operand");
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::Not;
  n->lhs = std::move(e);
  return n;
}

} // namespace expr

// ---------------------------------------------------------------------------
// Session types
// ---------------------------------------------------------------------------

namespace ty {
namespace {

void check_arms(const std::vector<TypeArm>& arms) {
  if (arms.empty()) throw std::invalid_argument("choice type needs at least one label");
  std::set<std::string> seen;
  for (const auto& a : arms) {
    if (!a.type) throw std::invalid_argument("choice arm without a type");
    if (!seen.insert(a.label).second) throw std::invalid_argument("duplicate label '" + a.label + "'");
  }
}

SessionType prefixed(TypeKind kind, Payload p, SessionType cont) {
  if (!cont) throw std::invalid_argument("session type prefix without continuation");
  if (p.kind != PayloadKind::Basic && !p.type) throw std::invalid_argument("payload without a type");
  auto n = std::make_shared<TypeNode>();
  n->kind = kind;
  n->payload = std::move(p);
  n->cont = std::move(cont);
  return n;
}

SessionType choice(TypeKind kind, std::vector<TypeArm> arms) {
  check_arms(arms);
  auto n = std::make_shared<TypeNode>();
  n->kind = kind;
  n->arms = std::move(arms);
  return n;
}

} // namespace

SessionType end() {
  static const SessionType e = std::make_shared<TypeNode>();
  return e;
}

SessionType in(Payload p, SessionType cont) { return prefixed(TypeKind::In, std::move(p), std::move(cont)); }
SessionType out(Payload p, SessionType cont) { return prefixed(TypeKind::Out, std::move(p), std::move(cont)); }
SessionType branch(std::vector<TypeArm> arms) { return choice(TypeKind::Branch, std::move(arms)); }
SessionType select(std::vector<TypeArm> arms) { return choice(TypeKind::Select, std::move(arms)); }

} // namespace ty

bool payload_equal(const Payload& a, const Payload& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == PayloadKind::Basic) return a.basic == b.basic;
  return type_equal(a.type, b.type);
}

bool type_equal(const SessionType& a, const SessionType& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case TypeKind::End:
      return true;
    case TypeKind::In:
    case TypeKind::Out:
      return payload_equal(a->payload, b->payload) && type_equal(a->cont, b->cont);
    case TypeKind::Branch:
    case TypeKind::Select: {
      if (a->arms.size() != b->arms.size()) return false;
      for (const auto& arm : a->arms) {
        auto it = std::find_if(b->arms.begin(), b->arms.end(),
                               [&](const TypeArm& o) { return o.label == arm.label; });
        if (it == b->arms.end() || !type_equal(arm.type, it->type)) return false;
      }
      return true;
    }
  }
  return false;
}

bool operator==(const Sort& a, const Sort& b) {
  if (a.is_service != b.is_service) return false;
  return a.is_service ? type_equal(a.type, b.type) : a.basic == b.basic;
}

bool operator==(const SessionEntry& a, const SessionEntry& b) {
  if (a.is_bottom() || b.is_bottom()) return a.is_bottom() == b.is_bottom();
  return type_equal(a.type(), b.type());
}

// ---------------------------------------------------------------------------
// Process factories
// ---------------------------------------------------------------------------

namespace {

void insert_sorted(std::vector<Name>& v, Name n) {
  auto it = std::lower_bound(v.begin(), v.end(), n);
  if (it == v.end() || *it != n) v.insert(it, n);
}

void erase_sorted(std::vector<Name>& v, Name n) {
  auto it = std::lower_bound(v.begin(), v.end(), n);
  if (it != v.end() && *it == n) v.erase(it);
}

std::vector<Name> union_of(const std::vector<Process>& parts) {
  if (parts.size() == 1) return parts.front()->fsc;
  std::vector<Name> out;
  for (const auto& p : parts) out.insert(out.end(), p->fsc.begin(), p->fsc.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Fills the cached fields from kind, names and children.
Process finish(std::shared_ptr<ProcessNode> n) {
  std::size_t size = 1;
  for (const auto& c : n->children) {
    if (!c) throw std::invalid_argument(std::string("null child in ") + to_string(n->kind));
    size += c->size;
  }
  n->size = size;
  switch (n->kind) {
    case ProcKind::Inact:
      break;
    case ProcKind::Par:
    case ProcKind::Cond:
      n->fsc = union_of(n->children);
      break;
    case ProcKind::Restrict:
    case ProcKind::Service:
    case ProcKind::Request:
      n->fsc = n->body()->fsc;
      erase_sorted(n->fsc, n->binder);
      break;
    case ProcKind::Input:
    case ProcKind::Output:
    case ProcKind::Select:
      n->fsc = n->body()->fsc;
      insert_sorted(n->fsc, n->subject);
      break;
    case ProcKind::InputSession:
      n->fsc = n->body()->fsc;
      erase_sorted(n->fsc, n->binder);
      insert_sorted(n->fsc, n->subject);
      break;
    case ProcKind::Delegate:
      n->fsc = n->body()->fsc;
      insert_sorted(n->fsc, n->subject);
      insert_sorted(n->fsc, n->object);
      break;
    case ProcKind::Branch:
      n->fsc = union_of(n->children);
      insert_sorted(n->fsc, n->subject);
      break;
  }
  return n;
}

std::shared_ptr<ProcessNode> node(ProcKind kind, SourceLoc loc) {
  auto n = std::make_shared<ProcessNode>();
  n->kind = kind;
  n->loc = loc;
  return n;
}

void require(Name n, const char* what) {
  if (!n.valid()) throw std::invalid_argument(std::string("missing name: ") + what);
}

} // namespace

namespace proc {

Process inact() {
  static const Process zero = finish(node(ProcKind::Inact, {}));
  return zero;
}

Process par(std::vector<Process> parts, SourceLoc loc) {
  if (parts.size() < 2) throw std::invalid_argument("parallel composition needs at least two parts");
  auto n = node(ProcKind::Par, loc);
  n->children = std::move(parts);
  return finish(std::move(n));
}

Process par_or_single(std::vector<Process> parts) {
  if (parts.empty()) return inact();
  if (parts.size() == 1) return parts.front();
  return par(std::move(parts));
}

Process restrict(Name k, Process body, SourceLoc loc) {
  require(k, "restricted channel");
  auto n = node(ProcKind::Restrict, loc);
  n->binder = k;
  n->children = {std::move(body)};
  return finish(std::move(n));
}

namespace {
Process service_node(Name a, Name k, Process body, bool replicated, SourceLoc loc) {
  require(a, "service name");
  require(k, "session binder");
  auto n = node(ProcKind::Service, loc);
  n->subject = a;
  n->binder = k;
  n->replicated = replicated;
  n->children = {std::move(body)};
  return finish(std::move(n));
}
} // namespace

Process service(Name a, Name k, Process body, SourceLoc loc) {
  return service_node(a, k, std::move(body), false, loc);
}

Process replicated_service(Name a, Name k, Process body, SourceLoc loc) {
  return service_node(a, k, std::move(body), true, loc);
}

Process request(Name a, Name k, Process body, SourceLoc loc) {
  require(a, "service name");
  require(k, "session binder");
  auto n = node(ProcKind::Request, loc);
  n->subject = a;
  n->binder = k;
  n->children = {std::move(body)};
  return finish(std::move(n));
}

Process input(Name k, Name x, Process body, SourceLoc loc) {
  require(k, "session channel");
  require(x, "variable");
  auto n = node(ProcKind::Input, loc);
  n->subject = k;
  n->binder = x;
  n->children = {std::move(body)};
  return finish(std::move(n));
}

Process output(Name k, Expr e, Process body, SourceLoc loc) {
  require(k, "session channel");
  if (!e) throw std::invalid_argument("output without expression");
  auto n = node(ProcKind::Output, loc);
  n->subject = k;
  n->expr = std::move(e);
  n->children = {std::move(body)};
  return finish(std::move(n));
}

Process input_session(Name k, Name bound, Process body, SourceLoc loc) {
  require(k, "session channel");
  require(bound, "session binder");
  auto n = node(ProcKind::InputSession, loc);
  n->subject = k;
  n->binder = bound;
  n->children = {std::move(body)};
  return finish(std::move(n));
}

Process delegate(Name k, Name sent, Process body, SourceLoc loc) {
  require(k, "session channel");
  require(sent, "delegated channel");
  auto n = node(ProcKind::Delegate, loc);
  n->subject = k;
  n->object = sent;
  n->children = {std::move(body)};
  return finish(std::move(n));
}

Process branch(Name k, std::vector<Arm> arms, SourceLoc loc) {
  require(k, "session channel");
  if (arms.empty()) throw std::invalid_argument("branch needs at least one label");
  auto n = node(ProcKind::Branch, loc);
  n->subject = k;
  std::set<std::string> seen;
  for (auto& a : arms) {
    if (!seen.insert(a.label).second) throw std::invalid_argument("duplicate label '" + a.label + "'");
    n->labels.push_back(a.label);
    n->children.push_back(std::move(a.body));
  }
  return finish(std::move(n));
}

Process select(Name k, std::string label, Process body, SourceLoc loc) {
  require(k, "session channel");
  auto n = node(ProcKind::Select, loc);
  n->subject = k;
  n->label = std::move(label);
  n->children = {std::move(body)};
  return finish(std::move(n));
}

Process cond(Expr guard, Process then_branch, Process else_branch, SourceLoc loc) {
  if (!guard) throw std::invalid_argument("conditional without guard");
  auto n = node(ProcKind::Cond, loc);
  n->expr = std::move(guard);
  n->children = {std::move(then_branch), std::move(else_branch)};
  return finish(std::move(n));
}

Process with_children(const ProcessNode& n, std::vector<Process> children) {
  auto copy = std::make_shared<ProcessNode>(n);
  copy->children = std::move(children);
  return finish(std::move(copy));
}

Process with_binder(const ProcessNode& n, Name binder, std::vector<Process> children) {
  auto copy = std::make_shared<ProcessNode>(n);
  copy->binder = binder;
  copy->children = std::move(children);
  return finish(std::move(copy));
}

} // namespace proc

// ---------------------------------------------------------------------------
// Free names
// ---------------------------------------------------------------------------

const std::vector<Name>& free_session_channels(const Process& p) { return p->fsc; }

bool has_free_session(const Process& p, Name k) {
  return std::binary_search(p->fsc.begin(), p->fsc.end(), k);
}

namespace {

void collect_expr_names(const Expr& e, const std::unordered_multiset<Name>& bound, std::set<Name>& out) {
  switch (e->kind) {
    case ExprKind::Literal:
      if (e->value.is_service()) out.insert(e->value.as_service());
      break;
    case ExprKind::Var:
      if (!bound.count(e->var)) out.insert(e->var);
      break;
    case ExprKind::Binary:
      collect_expr_names(e->lhs, bound, out);
      collect_expr_names(e->rhs, bound, out);
      break;
    case ExprKind::Not:
      collect_expr_names(e->lhs, bound, out);
      break;
  }
}

void collect_value_names(const Process& p, std::unordered_multiset<Name>& bound, std::set<Name>& out) {
  const auto& n = *p;
  if ((n.kind == ProcKind::Service || n.kind == ProcKind::Request) && !bound.count(n.subject))
    out.insert(n.subject);
  if (n.expr) collect_expr_names(n.expr, bound, out);
  if (n.kind == ProcKind::Input) {
    auto it = bound.insert(n.binder);
    collect_value_names(n.body(), bound, out);
    bound.erase(it);
    return;
  }
  for (const auto& c : n.children) collect_value_names(c, bound, out);
}

bool expr_mentions(const Expr& e, Name x) {
  switch (e->kind) {
    case ExprKind::Literal: return e->value.is_service() && e->value.as_service() == x;
    case ExprKind::Var: return e->var == x;
    case ExprKind::Binary: return expr_mentions(e->lhs, x) || expr_mentions(e->rhs, x);
    case ExprKind::Not: return expr_mentions(e->lhs, x);
  }
  return false;
}

bool value_name_free(const Process& p, Name x) {
  const auto& n = *p;
  if ((n.kind == ProcKind::Service || n.kind == ProcKind::Request) && n.subject == x) return true;
  if (n.expr && expr_mentions(n.expr, x)) return true;
  if (n.kind == ProcKind::Input && n.binder == x) return false;
  for (const auto& c : n.children)
    if (value_name_free(c, x)) return true;
  return false;
}

} // namespace

std::vector<Name> free_value_names(const Process& p) {
  std::unordered_multiset<Name> bound;
  std::set<Name> out;
  collect_value_names(p, bound, out);
  return {out.begin(), out.end()};
}

// ---------------------------------------------------------------------------
// Substitution and renaming
// ---------------------------------------------------------------------------

Expr substitute(const Expr& e, Name x, const Value& v) {
  switch (e->kind) {
    case ExprKind::Literal:
      return e;
    case ExprKind::Var:
      return e->var == x ? expr::literal(v) : e;
    case ExprKind::Binary: {
      auto l = substitute(e->lhs, x, v);
      auto r = substitute(e->rhs, x, v);
      if (l == e->lhs && r == e->rhs) return e;
      return expr::binary(e->op, std::move(l), std::move(r));
    }
    case ExprKind::Not: {
      auto l = substitute(e->lhs, x, v);
      return l == e->lhs ? e : expr::negate(std::move(l));
    }
  }
  return e;
}

namespace {

Process rename_value_binder(const Process& p, Name from, Name to);

Process subst(const Process& p, Name x, const Value& v) {
  const auto& n = *p;
  auto copy = std::make_shared<ProcessNode>(n);
  bool changed = false;

  if ((n.kind == ProcKind::Service || n.kind == ProcKind::Request) && n.subject == x) {
    if (!v.is_service())
      throw std::invalid_argument("cannot substitute a non-service value into service position of " +
                                  x.text());
    copy->subject = v.as_service();
    changed = true;
  }
  if (n.expr) {
    auto e = substitute(n.expr, x, v);
    if (e != n.expr) {
      copy->expr = std::move(e);
      changed = true;
    }
  }
  if (n.kind == ProcKind::Input && n.binder == x) {
    // x is shadowed in the continuation.
    if (!changed) return p;
    return proc::with_children(*copy, copy->children);
  }
  Process body_override;
  if (n.kind == ProcKind::Input && v.is_service() && n.binder == v.as_service() &&
      value_name_free(n.body(), x)) {
    auto b = n.binder.freshen();
    copy->binder = b;
    body_override = rename_value_binder(n.body(), n.binder, b);
    changed = true;
  }
  std::vector<Process> kids;
  kids.reserve(n.children.size());
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    const auto& c = (i == 0 && body_override) ? body_override : n.children[i];
    auto s = subst(c, x, v);
    if (s != n.children[i]) changed = true;
    kids.push_back(std::move(s));
  }
  if (!changed) return p;
  return proc::with_children(*copy, std::move(kids));
}

// Renames a free variable; the target is fresh so no capture can occur.
Process rename_value_binder(const Process& p, Name from, Name to) {
  return subst(p, from, Value::service(to));
}

} // namespace

Process substitute(const Process& p, Name x, const Value& v) { return subst(p, x, v); }

Process rename_session(const Process& p, Name from, Name to) {
  if (from == to || !has_free_session(p, from)) return p;
  const auto& n = *p;
  auto copy = std::make_shared<ProcessNode>(n);
  if (copy->subject == from && n.kind != ProcKind::Service && n.kind != ProcKind::Request) copy->subject = to;
  if (n.kind == ProcKind::Delegate && copy->object == from) copy->object = to;

  const bool binds_session = n.kind == ProcKind::Restrict || n.kind == ProcKind::Service ||
                             n.kind == ProcKind::Request || n.kind == ProcKind::InputSession;
  std::vector<Process> kids = n.children;
  if (binds_session) {
    if (n.binder == from) return proc::with_children(*copy, std::move(kids));
    if (n.binder == to && has_free_session(n.body(), from)) {
      auto b = n.binder.freshen();
      copy->binder = b;
      kids[0] = rename_session(kids[0], n.binder, b);
    }
  }
  for (auto& c : kids) c = rename_session(c, from, to);
  return proc::with_children(*copy, std::move(kids));
}

namespace {

using Renaming = std::unordered_map<Name, Name>;

Name lookup(const Renaming& r, Name n) {
  auto it = r.find(n);
  return it == r.end() ? n : it->second;
}

Expr rename_expr(const Expr& e, const Renaming& r) {
  switch (e->kind) {
    case ExprKind::Literal: return e;
    case ExprKind::Var: {
      auto to = lookup(r, e->var);
      return to == e->var ? e : expr::var(to);
    }
    case ExprKind::Binary:
      return expr::binary(e->op, rename_expr(e->lhs, r), rename_expr(e->rhs, r));
    case ExprKind::Not:
      return expr::negate(rename_expr(e->lhs, r));
  }
  return e;
}

Process freshen(const Process& p, Renaming& r) {
  const auto& n = *p;
  if (n.kind == ProcKind::Inact) return p;
  auto copy = std::make_shared<ProcessNode>(n);
  copy->subject = lookup(r, n.subject);
  if (n.object.valid()) copy->object = lookup(r, n.object);
  if (n.expr) copy->expr = rename_expr(n.expr, r);

  std::optional<std::pair<Name, std::optional<Name>>> saved;
  if (n.binder.valid()) {
    auto it = r.find(n.binder);
    saved.emplace(n.binder, it == r.end() ? std::nullopt : std::optional<Name>(it->second));
    copy->binder = n.binder.freshen();
    r[n.binder] = copy->binder;
  }
  std::vector<Process> kids;
  kids.reserve(n.children.size());
  for (const auto& c : n.children) kids.push_back(freshen(c, r));
  if (saved) {
    if (saved->second) r[saved->first] = *saved->second;
    else r.erase(saved->first);
  }
  return proc::with_children(*copy, std::move(kids));
}

} // namespace

Process freshen_binders(const Process& p) {
  Renaming r;
  return freshen(p, r);
}

// ---------------------------------------------------------------------------
// Alpha-equivalence
// ---------------------------------------------------------------------------

namespace {

class AlphaEq {
public:
  bool process(const Process& p, const Process& q) {
    const auto& a = *p;
    const auto& b = *q;
    if (a.kind != b.kind || a.replicated != b.replicated) return false;
    if (a.children.size() != b.children.size()) return false;
    switch (a.kind) {
      case ProcKind::Inact:
        return true;
      case ProcKind::Par:
        for (std::size_t i = 0; i < a.children.size(); ++i)
          if (!process(a.children[i], b.children[i])) return false;
        return true;
      case ProcKind::Restrict:
        return bound(a.binder, b.binder, a.body(), b.body());
      case ProcKind::Service:
      case ProcKind::Request:
        return name(a.subject, b.subject) && bound(a.binder, b.binder, a.body(), b.body());
      case ProcKind::Input:
      case ProcKind::InputSession:
        return name(a.subject, b.subject) && bound(a.binder, b.binder, a.body(), b.body());
      case ProcKind::Output:
        return name(a.subject, b.subject) && expression(a.expr, b.expr) && process(a.body(), b.body());
      case ProcKind::Delegate:
        return name(a.subject, b.subject) && name(a.object, b.object) && process(a.body(), b.body());
      case ProcKind::Select:
        return name(a.subject, b.subject) && a.label == b.label && process(a.body(), b.body());
      case ProcKind::Branch: {
        if (!name(a.subject, b.subject)) return false;
        for (std::size_t i = 0; i < a.labels.size(); ++i) {
          auto it = std::find(b.labels.begin(), b.labels.end(), a.labels[i]);
          if (it == b.labels.end()) return false;
          if (!process(a.children[i], b.children[static_cast<std::size_t>(it - b.labels.begin())]))
            return false;
        }
        return true;
      }
      case ProcKind::Cond:
        return expression(a.expr, b.expr) && process(a.children[0], b.children[0]) &&
               process(a.children[1], b.children[1]);
    }
    return false;
  }

private:
  bool bound(Name x, Name y, const Process& p, const Process& q) {
    auto save_l = left_.find(x);
    auto save_r = right_.find(y);
    std::optional<Name> old_l = save_l == left_.end() ? std::nullopt : std::optional<Name>(save_l->second);
    std::optional<Name> old_r = save_r == right_.end() ? std::nullopt : std::optional<Name>(save_r->second);
    left_[x] = y;
    right_[y] = x;
    bool ok = process(p, q);
    if (old_l) left_[x] = *old_l; else left_.erase(x);
    if (old_r) right_[y] = *old_r; else right_.erase(y);
    return ok;
  }

  bool name(Name x, Name y) const {
    auto l = left_.find(x);
    auto r = right_.find(y);
    if (l == left_.end() && r == right_.end()) return x == y;
    return l != left_.end() && r != right_.end() && l->second == y && r->second == x;
  }

  bool expression(const Expr& a, const Expr& b) const {
    if (a->kind != b->kind) return false;
    switch (a->kind) {
      case ExprKind::Literal: return a->value == b->value;
      case ExprKind::Var: return name(a->var, b->var);
      case ExprKind::Binary: return a->op == b->op && expression(a->lhs, b->lhs) && expression(a->rhs, b->rhs);
      case ExprKind::Not: return expression(a->lhs, b->lhs);
    }
    return false;
  }

  std::unordered_map<Name, Name> left_, right_;
};

} // namespace

bool alpha_equivalent(const Process& p, const Process& q) { return AlphaEq{}.process(p, q); }

} // namespace spi
