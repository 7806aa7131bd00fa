#include "unifier.hpp"

#include <algorithm>

namespace spi::detail {

Unifier::Unifier() {
  Node e;
  e.kind = Kind::End;
  nodes_.push_back(e);
}

Term Unifier::var() {
  nodes_.push_back(Node{});
  return {static_cast<int>(nodes_.size() - 1), false};
}

Term Unifier::io(bool input, PayloadRef payload, Term cont) {
  Node n;
  n.kind = input ? Kind::In : Kind::Out;
  n.payload = payload;
  n.cont = cont;
  nodes_.push_back(std::move(n));
  return {static_cast<int>(nodes_.size() - 1), false};
}

Term Unifier::choice(bool branch, std::vector<std::pair<std::string, Term>> arms, bool open) {
  Node n;
  n.kind = branch ? Kind::Branch : Kind::Select;
  n.arms = std::move(arms);
  n.open = open;
  nodes_.push_back(std::move(n));
  return {static_cast<int>(nodes_.size() - 1), false};
}

int Unifier::sort_var() {
  sorts_.push_back(SortNode{});
  return static_cast<int>(sorts_.size() - 1);
}

int Unifier::sort_basic(BasicSort b) {
  SortNode s;
  s.kind = SortKind::Basic;
  s.basic = b;
  sorts_.push_back(s);
  return static_cast<int>(sorts_.size() - 1);
}

int Unifier::sort_service(Term t) {
  SortNode s;
  s.kind = SortKind::Service;
  s.type = t;
  sorts_.push_back(s);
  return static_cast<int>(sorts_.size() - 1);
}

Term Unifier::from_type(const SessionType& t) {
  switch (t->kind) {
    case TypeKind::End: return end();
    case TypeKind::In:
    case TypeKind::Out: {
      PayloadRef p;
      if (t->payload.kind == PayloadKind::Session) {
        p.session = true;
        p.type = from_type(t->payload.type);
      } else if (t->payload.kind == PayloadKind::Service) {
        p.sort = sort_service(from_type(t->payload.type));
      } else {
        p.sort = sort_basic(t->payload.basic);
      }
      Term cont = from_type(t->cont);
      return io(t->kind == TypeKind::In, p, cont);
    }
    case TypeKind::Branch:
    case TypeKind::Select: {
      std::vector<std::pair<std::string, Term>> arms;
      for (const auto& a : t->arms) arms.emplace_back(a.label, from_type(a.type));
      return choice(t->kind == TypeKind::Branch, std::move(arms), false);
    }
  }
  return end();
}

int Unifier::from_sort(const Sort& s) {
  if (s.is_service) return sort_service(from_type(s.type));
  return sort_basic(s.basic);
}

Unifier::Kind Unifier::flip_kind(Kind k, bool flip) {
  if (!flip) return k;
  switch (k) {
    case Kind::In: return Kind::Out;
    case Kind::Out: return Kind::In;
    case Kind::Branch: return Kind::Select;
    case Kind::Select: return Kind::Branch;
    default: return k;
  }
}

std::pair<int, bool> Unifier::find(int n) {
  // Two passes: locate the root and the parity of `n`, then compress.
  int root = n;
  bool parity = false;
  while (nodes_[root].parent >= 0) {
    parity ^= nodes_[root].parity;
    root = nodes_[root].parent;
  }
  bool rest = parity;
  int cur = n;
  while (nodes_[cur].parent >= 0) {
    int next = nodes_[cur].parent;
    bool own = nodes_[cur].parity;
    nodes_[cur].parent = root;
    nodes_[cur].parity = rest;
    rest ^= own;
    cur = next;
  }
  return {root, parity};
}

int Unifier::find_sort(int s) {
  int root = s;
  while (sorts_[root].parent >= 0) root = sorts_[root].parent;
  while (sorts_[s].parent >= 0) {
    int next = sorts_[s].parent;
    sorts_[s].parent = root;
    s = next;
  }
  return root;
}

void Unifier::unify(Term a, Term b) {
  memo_.clear();
  std::vector<Task> work{{false, a, b, 0, 0}};
  while (!work.empty()) {
    Task t = work.back();
    work.pop_back();
    if (t.sort) step_sort(t.sa, t.sb, work);
    else step(t.a, t.b, work);
  }
}

void Unifier::unify_sort(int a, int b) {
  memo_.clear();
  std::vector<Task> work{{true, {}, {}, a, b}};
  while (!work.empty()) {
    Task t = work.back();
    work.pop_back();
    if (t.sort) step_sort(t.sa, t.sb, work);
    else step(t.a, t.b, work);
  }
}

void Unifier::check_rows(const Node& a, const Node& b, Term ta, Term tb) {
  auto has = [](const Node& n, const std::string& l) {
    return std::any_of(n.arms.begin(), n.arms.end(), [&](const auto& p) { return p.first == l; });
  };
  auto missing = [&](const Node& from, const Node& in) -> const std::string* {
    for (const auto& [l, t] : from.arms)
      if (!has(in, l)) return &l;
    return nullptr;
  };
  if (!a.open) {
    if (auto l = missing(b, a)) throw UnifyError("label '" + *l + "' is not offered by " + show(ta));
  }
  if (!b.open) {
    if (auto l = missing(a, b)) throw UnifyError("label '" + *l + "' is not offered by " + show(tb));
  }
}

void Unifier::step(Term x, Term y, std::vector<Task>& work) {
  auto [ra, pa] = find(x.node);
  pa ^= x.flip;
  auto [rb, pb] = find(y.node);
  pb ^= y.flip;
  if (ra == rb) {
    if (pa == pb) return;
    Node& n = nodes_[ra];
    if (n.kind == Kind::Var) n.kind = Kind::End;
    else if (n.kind != Kind::End) throw UnifyError(show(x) + " would have to be its own dual");
    return;
  }
  if (nodes_[ra].kind == Kind::Var) {
    std::swap(ra, rb);
    std::swap(pa, pb);
    std::swap(x, y);
  }
  const bool q = pa != pb;
  if (nodes_[rb].kind != Kind::Var) {
    const Node& A = nodes_[ra];
    const Node& B = nodes_[rb];
    if (A.kind != flip_kind(B.kind, q)) throw UnifyError(show(x) + " does not match " + show(y));
    if ((A.kind == Kind::In || A.kind == Kind::Out) && A.payload.session != B.payload.session)
      throw UnifyError(show(x) + " does not match " + show(y) + " (session vs value payload)");
    if (A.kind == Kind::Branch || A.kind == Kind::Select) check_rows(A, B, x, y);
  }
  nodes_[rb].parent = ra;
  nodes_[rb].parity = q;
  Node B = std::move(nodes_[rb]);
  nodes_[rb].arms.clear();
  if (B.kind == Kind::Var || B.kind == Kind::End) return;
  Node& A = nodes_[ra];
  switch (A.kind) {
    case Kind::In:
    case Kind::Out:
      if (A.payload.session) work.push_back({false, A.payload.type, B.payload.type, 0, 0});
      else work.push_back({true, {}, {}, A.payload.sort, B.payload.sort});
      work.push_back({false, A.cont, Term{B.cont.node, B.cont.flip != q}, 0, 0});
      break;
    case Kind::Branch:
    case Kind::Select: {
      for (const auto& [l, tb] : B.arms) {
        Term flipped{tb.node, tb.flip != q};
        auto it = std::find_if(A.arms.begin(), A.arms.end(), [&](const auto& p) { return p.first == l; });
        if (it == A.arms.end()) A.arms.emplace_back(l, flipped);
        else work.push_back({false, it->second, flipped, 0, 0});
      }
      A.open = A.open && B.open;
      break;
    }
    default: break;
  }
}

void Unifier::step_sort(int a, int b, std::vector<Task>& work) {
  int ra = find_sort(a);
  int rb = find_sort(b);
  if (ra == rb) return;
  if (sorts_[ra].kind == SortKind::Var) std::swap(ra, rb);
  const SortNode& A = sorts_[ra];
  const SortNode& B = sorts_[rb];
  if (B.kind != SortKind::Var) {
    if (A.kind != B.kind || (A.kind == SortKind::Basic && A.basic != B.basic))
      throw UnifyError("sort " + show_sort(a) + " does not match " + show_sort(b));
  }
  sorts_[rb].parent = ra;
  if (B.kind == SortKind::Service) work.push_back({false, A.type, B.type, 0, 0});
}

SessionType Unifier::zonk(Term t) {
  std::vector<char> on_stack(nodes_.size(), 0);
  return zonk_rec(t, on_stack);
}

Sort Unifier::zonk_sort(int s) {
  std::vector<char> on_stack(nodes_.size(), 0);
  return zonk_sort_rec(s, on_stack);
}

SessionType Unifier::zonk_rec(Term t, std::vector<char>& on_stack) {
  auto [r, p] = find(t.node);
  p ^= t.flip;
  auto key = std::make_pair(r, p);
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  const Kind kind = flip_kind(nodes_[r].kind, p);
  if (kind == Kind::Var || kind == Kind::End) return ty::end();
  if (on_stack[r]) throw UnifyError("the constraints require an infinite session type");
  on_stack[r] = 1;
  SessionType out;
  const Node n = nodes_[r];
  switch (kind) {
    case Kind::In:
    case Kind::Out: {
      Payload payload;
      if (n.payload.session) {
        payload = Payload::of_session(zonk_rec(n.payload.type, on_stack));
      } else {
        Sort s = zonk_sort_rec(n.payload.sort, on_stack);
        payload = s.is_service ? Payload::of_service(s.type) : Payload::of_basic(s.basic);
      }
      SessionType cont = zonk_rec(Term{n.cont.node, n.cont.flip != p}, on_stack);
      out = kind == Kind::In ? ty::in(std::move(payload), cont) : ty::out(std::move(payload), cont);
      break;
    }
    case Kind::Branch:
    case Kind::Select: {
      std::vector<TypeArm> arms;
      for (const auto& [l, a] : n.arms) arms.push_back({l, zonk_rec(Term{a.node, a.flip != p}, on_stack)});
      out = kind == Kind::Branch ? ty::branch(std::move(arms)) : ty::select(std::move(arms));
      break;
    }
    default: break;
  }
  on_stack[r] = 0;
  memo_.emplace(key, out);
  return out;
}

Sort Unifier::zonk_sort_rec(int s, std::vector<char>& on_stack) {
  const SortNode& n = sorts_[find_sort(s)];
  switch (n.kind) {
    case SortKind::Var: return Sort::of_basic(BasicSort::Int);
    case SortKind::Basic: return Sort::of_basic(n.basic);
    case SortKind::Service: {
      Term t = n.type;
      return Sort::of_service(zonk_rec(t, on_stack));
    }
  }
  return Sort::of_basic(BasicSort::Int);
}

std::string Unifier::show(Term t) {
  std::string out;
  show_rec(out, t, 0);
  return out;
}

std::string Unifier::show_sort(int s) {
  std::string out;
  show_sort_rec(out, s, 0);
  return out;
}

void Unifier::show_rec(std::string& out, Term t, int depth) {
  if (depth > 32) {
    out += "...";
    return;
  }
  auto [r, p] = find(t.node);
  p ^= t.flip;
  const Node& n = nodes_[r];
  switch (flip_kind(n.kind, p)) {
    case Kind::Var: out += "_"; return;
    case Kind::End: out += "end"; return;
    case Kind::In:
    case Kind::Out:
      out += flip_kind(n.kind, p) == Kind::In ? "?[" : "![";
      if (n.payload.session) show_rec(out, n.payload.type, depth + 1);
      else show_sort_rec(out, n.payload.sort, depth + 1);
      out += "].";
      show_rec(out, Term{n.cont.node, n.cont.flip != p}, depth + 1);
      return;
    case Kind::Branch:
    case Kind::Select: {
      out += flip_kind(n.kind, p) == Kind::Branch ? "&{" : "+{";
      bool first = true;
      for (const auto& [l, a] : n.arms) {
        if (!first) out += ", ";
        first = false;
        out += l + ": ";
        show_rec(out, Term{a.node, a.flip != p}, depth + 1);
      }
      if (n.open) out += first ? "..." : ", ...";
      out += "}";
      return;
    }
  }
}

void Unifier::show_sort_rec(std::string& out, int s, int depth) {
  const SortNode& n = sorts_[find_sort(s)];
  switch (n.kind) {
    case SortKind::Var: out += "_"; return;
    case SortKind::Basic: out += to_string(n.basic); return;
    case SortKind::Service:
      out += "<";
      show_rec(out, n.type, depth + 1);
      out += ">";
      return;
  }
}

} // namespace spi::detail
