#include "spi/congruence.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace spi {
namespace {

void flatten_into(const Process& p, NormalForm& out);

NormalForm flatten_restrict(const ProcessNode& n) {
  NormalForm body;
  flatten_into(n.body(), body);
  // An inner restriction of the same identity already binds every occurrence.
  if (std::find(body.restricted.begin(), body.restricted.end(), n.binder) != body.restricted.end()) return body;
  bool used = false;
  for (const auto& t : body.threads) {
    if (has_free_session(t, n.binder)) {
      used = true;
      break;
    }
  }
  if (used) body.restricted.insert(body.restricted.begin(), n.binder);
  return body;
}

void flatten_par(const ProcessNode& n, NormalForm& out) {
  std::vector<NormalForm> parts;
  parts.reserve(n.children.size());
  for (const auto& c : n.children) {
    NormalForm part;
    flatten_into(c, part);
    parts.push_back(std::move(part));
  }
  // How many parts mention each channel free; a restriction of part i that
  // another part mentions free (or also restricts) must be renamed apart.
  std::unordered_map<Name, int> free_in;
  std::unordered_map<Name, int> restricted_in;
  for (const auto& part : parts) {
    std::unordered_set<Name> seen;
    for (const auto& t : part.threads)
      for (Name k : free_session_channels(t)) seen.insert(k);
    for (Name k : seen) ++free_in[k];
    for (Name k : part.restricted) ++restricted_in[k];
  }
  for (Name k : out.restricted) ++restricted_in[k];
  for (const auto& t : out.threads)
    for (Name k : free_session_channels(t)) ++free_in[k];
  for (auto& part : parts) {
    std::unordered_set<Name> own_free;
    for (const auto& t : part.threads)
      for (Name k : free_session_channels(t)) own_free.insert(k);
    for (Name& k : part.restricted) {
      int foreign_free = free_in[k] - (own_free.count(k) ? 1 : 0);
      if (foreign_free == 0 && restricted_in[k] == 1) continue;
      --restricted_in[k];
      Name fresh = k.freshen();
      for (auto& t : part.threads) t = rename_session(t, k, fresh);
      k = fresh;
      ++restricted_in[k];
    }
    out.restricted.insert(out.restricted.end(), part.restricted.begin(), part.restricted.end());
    for (auto& t : part.threads) out.threads.push_back(std::move(t));
  }
}

void flatten_into(const Process& p, NormalForm& out) {
  const ProcessNode& n = *p;
  switch (n.kind) {
    case ProcKind::Inact: return;
    case ProcKind::Par: flatten_par(n, out); return;
    case ProcKind::Restrict: out = flatten_restrict(n); return;  // `out` is always empty here
    default: out.threads.push_back(p); return;
  }
}

void collect_subterms(const Process& p, std::vector<Process>& out) {
  for (const auto& t : flatten(p).threads) {
    for (const auto& c : t->children) {
      NormalForm nf = flatten(c);
      if (nf.threads.size() >= 2) out.push_back(assemble(nf));
      collect_subterms(c, out);
    }
  }
}

} // namespace

NormalForm flatten(const Process& p) {
  NormalForm out;
  flatten_into(p, out);
  return out;
}

Process assemble(const NormalForm& nf) {
  Process body = proc::par_or_single(nf.threads);
  for (auto it = nf.restricted.rbegin(); it != nf.restricted.rend(); ++it) body = proc::restrict(*it, body);
  return body;
}

Process normal_form(const Process& p) { return assemble(flatten(p)); }

std::vector<Process> maximal_parallel_subterms(const Process& p) {
  std::vector<Process> out{normal_form(p)};
  collect_subterms(p, out);
  return out;
}

bool has_live_channels(const Process& p) {
  const ProcessNode& n = *p;
  switch (n.kind) {
    case ProcKind::Inact: return false;
    case ProcKind::Service: return false;
    case ProcKind::Par:
    case ProcKind::Restrict:
    case ProcKind::Cond:
      for (const auto& c : n.children)
        if (has_live_channels(c)) return true;
      return false;
    default: return true;
  }
}

} // namespace spi
