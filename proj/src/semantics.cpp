#include "spi/semantics.hpp"

#include <algorithm>
#include <deque>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "spi/surface.hpp"

namespace spi {

const char* to_string(Rule r) {
  switch (r) {
    case Rule::RInit: return "RInit";
    case Rule::Init: return "Init";
    case Rule::Com: return "Com";
    case Rule::Del: return "Del";
    case Rule::Sel: return "Sel";
    case Rule::IfT: return "IfT";
    case Rule::IfF: return "IfF";
  }
  return "?";
}

Value eval_expr(const Expr& e) {
  switch (e->kind) {
    case ExprKind::Literal: return e->value;
    case ExprKind::Var: throw EvalError("free variable " + e->var.text());
    case ExprKind::Not: {
      Value v = eval_expr(e->lhs);
      if (!v.is_bool()) throw EvalError("'not' applied to a non-boolean");
      return Value::boolean(!v.as_bool());
    }
    case ExprKind::Binary: {
      Value l = eval_expr(e->lhs);
      Value r = eval_expr(e->rhs);
      if (e->op == BinOp::And) {
        if (!l.is_bool() || !r.is_bool()) throw EvalError("'&&' applied to non-booleans");
        return Value::boolean(l.as_bool() && r.as_bool());
      }
      if (!l.is_int() || !r.is_int()) throw EvalError(std::string("'") + to_string(e->op) + "' applied to non-integers");
      const std::int64_t a = l.as_int();
      const std::int64_t b = r.as_int();
      switch (e->op) {
        case BinOp::Add: return Value::integer(static_cast<std::int64_t>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b)));
        case BinOp::Sub: return Value::integer(static_cast<std::int64_t>(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b)));
        case BinOp::Mul: return Value::integer(static_cast<std::int64_t>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b)));
        case BinOp::Le: return Value::boolean(a <= b);
        case BinOp::Eq: return Value::boolean(a == b);
        default: break;
      }
    }
  }
  throw EvalError("malformed expression");
}

namespace {

bool try_eval(const Expr& e, Value& out) {
  try {
    out = eval_expr(e);
    return true;
  } catch (const EvalError&) {
    return false;
  }
}

bool has_label(const ProcessNode& branch, const std::string& l) {
  return std::find(branch.labels.begin(), branch.labels.end(), l) != branch.labels.end();
}

/// Del fires when the receiver's bound name can be renamed to the delegated
/// one, i.e. the delegated name is not already free in its continuation.
bool delegation_enabled(const ProcessNode& receiver, Name delegated) {
  return receiver.binder == delegated || !has_free_session(receiver.body(), delegated);
}

std::vector<Redex> enumerate(const NormalForm& nf) {
  std::vector<Redex> out;
  std::unordered_map<Name, std::vector<int>> senders;  // by subject
  for (int j = 0; j < static_cast<int>(nf.threads.size()); ++j) {
    const ProcKind k = nf.threads[j]->kind;
    if (k == ProcKind::Request || k == ProcKind::Output || k == ProcKind::Delegate || k == ProcKind::Select)
      senders[nf.threads[j]->subject].push_back(j);
  }
  for (int i = 0; i < static_cast<int>(nf.threads.size()); ++i) {
    const ProcessNode& t = *nf.threads[i];
    if (t.kind == ProcKind::Cond) {
      Value v;
      if (try_eval(t.expr, v) && v.is_bool()) {
        Redex r;
        r.rule = v.as_bool() ? Rule::IfT : Rule::IfF;
        r.first = i;
        out.push_back(r);
      }
      continue;
    }
    ProcKind partner;
    switch (t.kind) {
      case ProcKind::Service: partner = ProcKind::Request; break;
      case ProcKind::Input: partner = ProcKind::Output; break;
      case ProcKind::InputSession: partner = ProcKind::Delegate; break;
      case ProcKind::Branch: partner = ProcKind::Select; break;
      default: continue;
    }
    auto it = senders.find(t.subject);
    if (it == senders.end()) continue;
    for (int j : it->second) {
      const ProcessNode& s = *nf.threads[j];
      if (s.kind != partner) continue;
      Redex r;
      r.first = i;
      r.second = j;
      switch (t.kind) {
        case ProcKind::Service: r.rule = t.replicated ? Rule::RInit : Rule::Init; break;
        case ProcKind::Input:
          if (!try_eval(s.expr, r.value)) continue;
          r.rule = Rule::Com;
          break;
        case ProcKind::InputSession:
          if (!delegation_enabled(t, s.object)) continue;
          r.rule = Rule::Del;
          r.delegated = s.object;
          break;
        case ProcKind::Branch:
          if (!has_label(t, s.label)) continue;
          r.rule = Rule::Sel;
          r.label = s.label;
          break;
        default: continue;
      }
      out.push_back(std::move(r));
    }
  }
  return out;
}

bool same_redex(const Redex& a, const Redex& b) {
  return a.rule == b.rule && a.first == b.first && a.second == b.second && a.value == b.value &&
         a.label == b.label && a.delegated == b.delegated;
}

} // namespace

std::vector<Redex> redexes(const NormalForm& nf) { return enumerate(nf); }

std::vector<Redex> redexes(const Process& p) { return enumerate(flatten(p)); }

Process step(const NormalForm& nf, const Redex& r) {
  const auto n = static_cast<int>(nf.threads.size());
  auto valid_index = [n](int i) { return i >= 0 && i < n; };
  if (!valid_index(r.first) || (r.second >= 0 && !valid_index(r.second)) ||
      ((r.rule == Rule::IfT || r.rule == Rule::IfF) != (r.second < 0)))
    throw StaleRedex("redex positions do not match the process");
  {
    bool found = false;
    for (const auto& e : enumerate(nf)) {
      if (same_redex(e, r)) {
        found = true;
        break;
      }
    }
    if (!found) throw StaleRedex(std::string(to_string(r.rule)) + " redex is not enabled in this process");
  }

  const ProcessNode& a = *nf.threads[r.first];
  std::vector<Process> threads = nf.threads;
  Process contractum;
  int keep = r.first;  // where the contractum goes
  switch (r.rule) {
    case Rule::IfT:
    case Rule::IfF:
      contractum = a.children[r.rule == Rule::IfT ? 0 : 1];
      break;
    case Rule::Init:
    case Rule::RInit: {
      const ProcessNode& req = *nf.threads[r.second];
      Name k = req.binder.freshen();
      Process body = rename_session(a.body(), a.binder, k);
      if (r.rule == Rule::RInit) body = freshen_binders(body);
      Process client = rename_session(req.body(), req.binder, k);
      contractum = proc::restrict(k, proc::par({body, client}));
      break;
    }
    case Rule::Com: {
      const ProcessNode& out = *nf.threads[r.second];
      contractum = proc::par({substitute(a.body(), a.binder, r.value), out.body()});
      break;
    }
    case Rule::Del: {
      const ProcessNode& out = *nf.threads[r.second];
      Process received = a.binder == r.delegated ? a.body() : rename_session(a.body(), a.binder, r.delegated);
      contractum = proc::par({received, out.body()});
      break;
    }
    case Rule::Sel: {
      const ProcessNode& sel = *nf.threads[r.second];
      std::size_t arm = std::find(a.labels.begin(), a.labels.end(), r.label) - a.labels.begin();
      contractum = proc::par({a.children[arm], sel.body()});
      break;
    }
  }
  if (r.rule == Rule::RInit) {
    threads[r.second] = contractum;
  } else if (r.second >= 0) {
    keep = std::min(r.first, r.second);
    int drop = std::max(r.first, r.second);
    threads[keep] = contractum;
    threads.erase(threads.begin() + drop);
  } else {
    threads[keep] = contractum;
  }
  return normal_form(assemble(NormalForm{nf.restricted, std::move(threads)}));
}

Process step(const Process& p, const Redex& r) { return step(flatten(p), r); }

namespace {

std::string free_display(Name n) {
  if (n.interned()) return n.text();
  return n.text() + "#" + std::to_string(n.id());
}

} // namespace

std::string canonical_key(const Process& p) {
  NormalForm nf = flatten(p);
  std::unordered_set<Name> restricted(nf.restricted.begin(), nf.restricted.end());
  PrintOptions shape;
  shape.canonical_binders = true;
  shape.free_name = [&](Name n) -> std::optional<std::string> {
    if (restricted.count(n)) return std::string("#r");
    return free_display(n);
  };
  std::vector<std::pair<std::string, const Process*>> keyed;
  keyed.reserve(nf.threads.size());
  for (const auto& t : nf.threads) keyed.emplace_back(print_process(t, shape), &t);
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& x, const auto& y) { return x.first < y.first; });
  std::unordered_map<Name, int> number;
  for (const auto& [text, t] : keyed)
    for (Name k : free_session_channels(*t))
      if (restricted.count(k) && !number.count(k)) number.emplace(k, static_cast<int>(number.size()));
  // Channels within a thread are numbered by identity, which is not canonical
  // when a thread mentions several restricted channels; such states may get
  // distinct keys, which only costs deduplication.
  PrintOptions exact;
  exact.canonical_binders = true;
  exact.free_name = [&](Name n) -> std::optional<std::string> {
    if (auto it = number.find(n); it != number.end()) return "#r" + std::to_string(it->second);
    return free_display(n);
  };
  std::vector<std::string> parts;
  parts.reserve(keyed.size());
  for (const auto& [text, t] : keyed) parts.push_back(print_process(*t, exact));
  std::sort(parts.begin(), parts.end());
  std::string key = "new " + std::to_string(number.size()) + ":";
  for (const auto& s : parts) key += " | " + s;
  return key;
}

Exploration explore_all(const Process& p, int depth, std::size_t max_states) {
  Exploration ex;
  std::unordered_set<std::string> seen;
  std::deque<std::size_t> queue;
  Process start = normal_form(p);
  seen.insert(canonical_key(start));
  ex.states.push_back(start);
  ex.depth.push_back(0);
  queue.push_back(0);
  while (!queue.empty()) {
    std::size_t i = queue.front();
    queue.pop_front();
    NormalForm nf = flatten(ex.states[i]);
    std::vector<Redex> rs = enumerate(nf);
    if (rs.empty()) continue;
    if (ex.depth[i] >= depth) {
      ex.complete = false;
      continue;
    }
    for (const auto& r : rs) {
      Process next = step(nf, r);
      if (!seen.insert(canonical_key(next)).second) continue;
      if (ex.states.size() >= max_states) {
        ex.complete = false;
        ex.state_limit_hit = true;
        return ex;
      }
      ex.states.push_back(next);
      ex.depth.push_back(ex.depth[i] + 1);
      queue.push_back(ex.states.size() - 1);
    }
  }
  return ex;
}

Trace explore_seeded(const Process& p, int depth, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Trace t;
  Process cur = normal_form(p);
  for (int i = 0; i < depth; ++i) {
    NormalForm nf = flatten(cur);
    std::vector<Redex> rs = enumerate(nf);
    if (rs.empty()) break;
    std::uniform_int_distribution<std::size_t> pick(0, rs.size() - 1);
    const Redex& r = rs[pick(rng)];
    Process next = step(nf, r);
    t.steps.push_back({cur, r});
    cur = next;
  }
  t.final = cur;
  return t;
}

std::string describe(const Redex& r, const NormalForm& nf) {
  std::string out = to_string(r.rule);
  out += " [" + std::to_string(r.first);
  if (r.second >= 0) out += ", " + std::to_string(r.second);
  out += "]";
  switch (r.rule) {
    case Rule::Com: out += " value " + print_value(r.value); break;
    case Rule::Sel: out += " label " + r.label; break;
    case Rule::Del: out += " channel " + r.delegated.text(); break;
    case Rule::Init:
    case Rule::RInit:
      if (r.first >= 0 && r.first < static_cast<int>(nf.threads.size()))
        out += " service " + nf.threads[r.first]->subject.text();
      break;
    default: break;
  }
  return out;
}

std::string trace_to_text(const Trace& t) {
  std::string out;
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    out += std::to_string(i) + ": " + print_process(t.steps[i].before) + "\n";
    out += "   --" + describe(t.steps[i].redex, flatten(t.steps[i].before)) + "-->\n";
  }
  out += std::to_string(t.steps.size()) + ": " + print_process(t.final) + "\n";
  return out;
}

} // namespace spi
