#include "spi/typing.hpp"

#include <algorithm>
#include <unordered_map>

#include "spi/congruence.hpp"
#include "spi/surface.hpp"
#include "unifier.hpp"

namespace spi {

TypeError::TypeError(std::string rule, std::string message, SourceLoc loc, Process subterm)
    : std::runtime_error(rule + ": " + message +
                         (loc.known() ? " (at " + std::to_string(loc.line) + ":" + std::to_string(loc.column) + ")"
                                      : std::string())),
      rule_(std::move(rule)),
      message_(std::move(message)),
      loc_(loc),
      subterm_(std::move(subterm)) {}

namespace {

using detail::PayloadRef;
using detail::Term;
using detail::Unifier;
using detail::UnifyError;

struct Entry {
  bool bottom = false;
  Term type;
};

using Env = std::map<Name, Entry>;

class Checker {
public:
  Checker(const ServiceEnv& g, const CheckOptions& opts) : opts_(opts) {
    for (const auto& [n, s] : g) ctx_[n] = u_.from_sort(s);
  }

  Env infer(const Process& p) {
    const ProcessNode& n = *p;
    switch (n.kind) {
      case ProcKind::Inact: return {};
      case ProcKind::Par: {
        Env acc = infer(n.children.front());
        for (std::size_t i = 1; i < n.children.size(); ++i) {
          Env next = infer(n.children[i]);
          compose_into(acc, std::move(next), p);
        }
        return acc;
      }
      case ProcKind::Restrict: {
        Env d = infer(n.body());
        auto it = d.find(n.binder);
        if (it != d.end()) {
          if (!it->second.bottom) {
            unify_or_fail(it->second.type, u_.end(), "T-Res", p, [&] {
              return "session " + n.binder.text() + " is restricted but only one endpoint is present (type " +
                     u_.show(it->second.type) + ")";
            });
          }
          d.erase(it);
        }
        return d;
      }
      case ProcKind::Service: {
        const char* rule = n.replicated ? "T-RServ" : "T-Serv";
        Env d = infer(n.body());
        Term alpha = take(d, n.binder, rule, p);
        if (!d.empty() && !opts_.relaxed_service_rule) {
          throw TypeError(rule, "body uses open session " + d.begin()->first.text(), n.loc, p);
        }
        int s = service_sort(n.subject, rule, p);
        unify_sort_or_fail(s, u_.sort_service(alpha), rule, p, [&] {
          return "service " + n.subject.text() + " has sort " + u_.show_sort(s) + " but its body implements " +
                 u_.show(alpha);
        });
        return d;
      }
      case ProcKind::Request: {
        Env d = infer(n.body());
        Term alpha = take(d, n.binder, "T-Req", p);
        int s = service_sort(n.subject, "T-Req", p);
        unify_sort_or_fail(s, u_.sort_service(detail::dual(alpha)), "T-Req", p, [&] {
          return "service " + n.subject.text() + " has sort " + u_.show_sort(s) + " but the invoker uses " +
                 u_.show(alpha);
        });
        return d;
      }
      case ProcKind::Input: {
        int s = u_.sort_var();
        auto saved = bind(n.binder, s);
        Env d = infer(n.body());
        restore(n.binder, saved);
        Term cont = take(d, n.subject, "T-In", p);
        d[n.subject] = Entry{false, u_.io(true, PayloadRef{false, s, {}}, cont)};
        return d;
      }
      case ProcKind::Output: {
        int s = expr_sort(n.expr, "T-Out", p);
        Env d = infer(n.body());
        Term cont = take(d, n.subject, "T-Out", p);
        d[n.subject] = Entry{false, u_.io(false, PayloadRef{false, s, {}}, cont)};
        return d;
      }
      case ProcKind::InputSession: {
        Env d = infer(n.body());
        Term beta = take(d, n.binder, "T-InS", p);
        Term cont = take(d, n.subject, "T-InS", p);
        d[n.subject] = Entry{false, u_.io(true, PayloadRef{true, -1, beta}, cont)};
        return d;
      }
      case ProcKind::Delegate: {
        if (n.subject == n.object)
          throw TypeError("T-Del", "session " + n.subject.text() + " is sent over itself", n.loc, p);
        Env d = infer(n.body());
        if (d.count(n.object))
          throw TypeError("T-Del", "delegated session " + n.object.text() + " is used in the continuation", n.loc, p);
        Term cont = take(d, n.subject, "T-Del", p);
        Term beta = u_.var();
        d[n.subject] = Entry{false, u_.io(false, PayloadRef{true, -1, beta}, cont)};
        d[n.object] = Entry{false, beta};
        return d;
      }
      case ProcKind::Branch: {
        std::vector<Env> arms;
        std::vector<std::pair<std::string, Term>> row;
        for (std::size_t i = 0; i < n.children.size(); ++i) {
          Env d = infer(n.children[i]);
          row.emplace_back(n.labels[i], take(d, n.subject, "T-Bra", p));
          arms.push_back(std::move(d));
        }
        Env d = join(std::move(arms), "T-Bra", p);
        d[n.subject] = Entry{false, u_.choice(true, std::move(row), false)};
        return d;
      }
      case ProcKind::Select: {
        Env d = infer(n.body());
        Term cont = take(d, n.subject, "T-Sel", p);
        d[n.subject] = Entry{false, u_.choice(false, {{n.label, cont}}, true)};
        return d;
      }
      case ProcKind::Cond: {
        int s = expr_sort(n.expr, "T-Cond", p);
        unify_sort_or_fail(s, u_.sort_basic(BasicSort::Bool), "T-Cond", p,
                           [&] { return "guard has sort " + u_.show_sort(s) + ", expected bool"; });
        std::vector<Env> arms;
        arms.push_back(infer(n.children[0]));
        arms.push_back(infer(n.children[1]));
        return join(std::move(arms), "T-Cond", p);
      }
    }
    return {};
  }

  int expr_sort(const Expr& e, const char* rule, const Process& at) {
    switch (e->kind) {
      case ExprKind::Literal: {
        const Value& v = e->value;
        if (v.is_int()) return u_.sort_basic(BasicSort::Int);
        if (v.is_bool()) return u_.sort_basic(BasicSort::Bool);
        if (v.is_string()) return u_.sort_basic(BasicSort::String);
        return lookup(v.as_service(), rule, at);
      }
      case ExprKind::Var: return lookup(e->var, rule, at);
      case ExprKind::Not: {
        int s = expr_sort(e->lhs, rule, at);
        unify_sort_or_fail(s, u_.sort_basic(BasicSort::Bool), rule, at,
                           [&] { return "operand of 'not' has sort " + u_.show_sort(s) + ", expected bool"; });
        return u_.sort_basic(BasicSort::Bool);
      }
      case ExprKind::Binary: {
        const BasicSort operand = e->op == BinOp::And ? BasicSort::Bool : BasicSort::Int;
        const BasicSort result =
            (e->op == BinOp::Add || e->op == BinOp::Sub || e->op == BinOp::Mul) ? BasicSort::Int : BasicSort::Bool;
        for (const Expr* side : {&e->lhs, &e->rhs}) {
          int s = expr_sort(*side, rule, at);
          unify_sort_or_fail(s, u_.sort_basic(operand), rule, at, [&] {
            return std::string("operand of '") + to_string(e->op) + "' has sort " + u_.show_sort(s) + ", expected " +
                   to_string(operand);
          });
        }
        return u_.sort_basic(result);
      }
    }
    return u_.sort_basic(BasicSort::Int);
  }

  /// Unifies the synthesized environment with an expected one.
  void expect(Env& d, const SessionEnv& expected, const Process& p) {
    for (const auto& [k, e] : expected) {
      auto it = d.find(k);
      if (e.is_bottom()) {
        if (it != d.end() && it->second.bottom) continue;
        Term t = it == d.end() ? u_.end() : it->second.type;
        unify_or_fail(t, u_.end(), "T-Bot", p, [&] { return "session " + k.text() + " is not closed"; });
        continue;
      }
      if (it != d.end() && it->second.bottom)
        throw TypeError("T-Bot", "session " + k.text() + " is closed but " + print_type(e.type()) + " was expected", {},
                        p);
      Term t = it == d.end() ? u_.end() : it->second.type;
      Term want = u_.from_type(e.type());
      unify_or_fail(t, want, "check", p, [&] {
        return "session " + k.text() + " has type " + u_.show(t) + ", expected " + print_type(e.type());
      });
    }
    for (auto& [k, e] : d) {
      if (expected.count(k)) continue;
      if (e.bottom) throw TypeError("check", "unexpected closed session " + k.text(), {}, p);
      unify_or_fail(e.type, u_.end(), "check", p,
                    [&] { return "unexpected session " + k.text() + " of type " + u_.show(e.type); });
    }
  }

  Typing finish(const Env& d, const Process& p) {
    Typing out;
    try {
      for (const auto& [k, e] : d)
        out.delta.emplace(k, e.bottom ? SessionEntry::bottom() : SessionEntry::of(u_.zonk(e.type)));
      for (const auto& [n, s] : inferred_) out.inferred.emplace(n, u_.zonk_sort(s));
    } catch (const UnifyError& err) {
      throw TypeError("occurs", err.what(), p->loc, p);
    }
    return out;
  }

  Unifier& unifier() { return u_; }

private:
  template <class F>
  void unify_or_fail(Term a, Term b, const char* rule, const Process& at, F describe) {
    try {
      u_.unify(a, b);
    } catch (const UnifyError& err) {
      throw TypeError(rule, describe() + ": " + err.what(), at ? at->loc : SourceLoc{}, at);
    }
  }

  template <class F>
  void unify_sort_or_fail(int a, int b, const char* rule, const Process& at, F describe) {
    try {
      u_.unify_sort(a, b);
    } catch (const UnifyError& err) {
      throw TypeError(rule, describe() + ": " + err.what(), at ? at->loc : SourceLoc{}, at);
    }
  }

  /// Removes and returns the entry of `k`; an absent entry reads as `end`.
  Term take(Env& d, Name k, const char* rule, const Process& at) {
    auto it = d.find(k);
    if (it == d.end()) return u_.end();
    if (it->second.bottom)
      throw TypeError(rule, "session " + k.text() + " is already closed in the continuation", at->loc, at);
    Term t = it->second.type;
    d.erase(it);
    return t;
  }

  void compose_into(Env& acc, Env next, const Process& at) {
    for (auto& [k, e] : next) {
      auto it = acc.find(k);
      if (it == acc.end()) {
        acc.emplace(k, e);
        continue;
      }
      if (it->second.bottom || e.bottom)
        throw TypeError("T-Par", "session " + k.text() + " is used after both of its endpoints were found", at->loc,
                        at);
      Term a = it->second.type;
      unify_or_fail(a, detail::dual(e.type), "T-Par", at, [&] {
        return "the endpoints of session " + k.text() + " are not dual (" + u_.show(a) + " and " + u_.show(e.type) +
               ")";
      });
      it->second = Entry{true, {}};
    }
  }

  /// Agreement of branch environments, aligning `end` with bottom.
  Env join(std::vector<Env> arms, const char* rule, const Process& at) {
    std::map<Name, std::vector<const Entry*>> by_channel;
    for (const auto& d : arms)
      for (const auto& [k, e] : d) by_channel[k].push_back(&e);
    Env out;
    for (const auto& [k, entries] : by_channel) {
      const bool any_bottom =
          std::any_of(entries.begin(), entries.end(), [](const Entry* e) { return e->bottom; });
      const bool absent_somewhere = entries.size() < arms.size();
      const Entry* first_type = nullptr;
      for (const Entry* e : entries) {
        if (e->bottom) continue;
        if (!first_type) {
          first_type = e;
          continue;
        }
        unify_or_fail(first_type->type, e->type, rule, at, [&] {
          return "branches disagree on session " + k.text() + " (" + u_.show(first_type->type) + " and " +
                 u_.show(e->type) + ")";
        });
      }
      if (first_type && (any_bottom || absent_somewhere)) {
        unify_or_fail(first_type->type, u_.end(), rule, at, [&] {
          return "branches disagree on session " + k.text() + " (" + u_.show(first_type->type) + " in one branch, " +
                 (any_bottom ? "closed" : "unused") + " in another)";
        });
      }
      if (any_bottom) out.emplace(k, Entry{true, {}});
      else out.emplace(k, *first_type);
    }
    return out;
  }

  int lookup(Name x, const char* rule, const Process& at) {
    auto it = ctx_.find(x);
    if (it != ctx_.end()) return it->second;
    if (!opts_.infer_free_names)
      throw TypeError(rule, "unbound name " + x.text(), at ? at->loc : SourceLoc{}, at);
    int s = u_.sort_var();
    ctx_[x] = s;
    inferred_[x] = s;
    return s;
  }

  int service_sort(Name a, const char* rule, const Process& at) {
    int s = lookup(a, rule, at);
    return s;
  }

  std::optional<int> bind(Name x, int s) {
    std::optional<int> saved;
    if (auto it = ctx_.find(x); it != ctx_.end()) saved = it->second;
    ctx_[x] = s;
    return saved;
  }

  void restore(Name x, std::optional<int> saved) {
    if (saved) ctx_[x] = *saved;
    else ctx_.erase(x);
  }

  CheckOptions opts_;
  Unifier u_;
  std::unordered_map<Name, int> ctx_;
  std::map<Name, int> inferred_;
};

} // namespace

SessionType dual(const SessionType& a) {
  switch (a->kind) {
    case TypeKind::End: return a;
    case TypeKind::In: return ty::out(a->payload, dual(a->cont));
    case TypeKind::Out: return ty::in(a->payload, dual(a->cont));
    case TypeKind::Branch:
    case TypeKind::Select: {
      std::vector<TypeArm> arms;
      for (const auto& arm : a->arms) arms.push_back({arm.label, dual(arm.type)});
      return a->kind == TypeKind::Branch ? ty::select(std::move(arms)) : ty::branch(std::move(arms));
    }
  }
  return a;
}

Sort type_expr(const ServiceEnv& g, const Expr& e) {
  Checker c(g, CheckOptions{});
  int s = c.expr_sort(e, "T-Expr", nullptr);
  return c.unifier().zonk_sort(s);
}

SessionEnv compose(const SessionEnv& d1, const SessionEnv& d2) {
  SessionEnv out = d1;
  for (const auto& [k, e] : d2) {
    auto it = out.find(k);
    if (it == out.end()) {
      out.emplace(k, e);
      continue;
    }
    if (it->second.is_bottom() || e.is_bottom())
      throw TypeError("T-Par", "session " + k.text() + " is used after both of its endpoints were found");
    if (!type_equal(it->second.type(), dual(e.type())))
      throw TypeError("T-Par", "the endpoints of session " + k.text() + " are not dual (" +
                                   print_type(it->second.type()) + " and " + print_type(e.type()) + ")");
    it->second = SessionEntry::bottom();
  }
  return out;
}

Typing check(const ServiceEnv& g, const Process& p, const CheckOptions& opts) {
  Checker c(g, opts);
  Env d = c.infer(p);
  return c.finish(d, p);
}

Typing check_against(const ServiceEnv& g, const Process& p, const SessionEnv& expected, const CheckOptions& opts) {
  Checker c(g, opts);
  Env d = c.infer(p);
  c.expect(d, expected, p);
  return c.finish(d, p);
}

bool well_typed(const ServiceEnv& g, const Process& p, const CheckOptions& opts) {
  try {
    check(g, p, opts);
    return true;
  } catch (const TypeError&) {
    return false;
  }
}

bool env_equal_mod_end(const SessionEnv& a, const SessionEnv& b) {
  auto is_end = [](const SessionEntry& e) { return !e.is_bottom() && e.type()->kind == TypeKind::End; };
  for (const auto& [k, e] : a) {
    auto it = b.find(k);
    if (it == b.end()) {
      if (!is_end(e)) return false;
    } else if (!(e == it->second)) {
      return false;
    }
  }
  for (const auto& [k, e] : b)
    if (!a.count(k) && !is_end(e)) return false;
  return true;
}

namespace {

bool binds_used_restriction(const Process& p) {
  const ProcessNode& n = *p;
  if (n.kind == ProcKind::Restrict && has_free_session(n.body(), n.binder)) return true;
  for (const auto& c : n.children)
    if (binds_used_restriction(c)) return true;
  return false;
}

} // namespace

bool is_program(const Process& p) {
  return free_session_channels(p).empty() && !binds_used_restriction(p);
}

} // namespace spi
