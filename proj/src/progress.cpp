#include "spi/progress.hpp"

#include <algorithm>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "spi/congruence.hpp"
#include "spi/surface.hpp"
#include "spi/union_find.hpp"

namespace spi {

const char* to_string(ProgressKind k) {
  switch (k) {
    case ProgressKind::Certificate: return "Certificate";
    case ProgressKind::Counterexample: return "Counterexample";
    case ProgressKind::Inconclusive: return "Inconclusive";
    case ProgressKind::IllTyped: return "IllTyped";
  }
  return "?";
}

namespace {

class Inhabiter {
public:
  explicit Inhabiter(const ServiceEnv& avoid) : avoid_(avoid) {}

  Process build(const SessionType& a, Name k) {
    switch (a->kind) {
      case TypeKind::End: return proc::inact();
      case TypeKind::In: {
        if (a->payload.kind == PayloadKind::Session) {
          Name bound = Name::fresh(k.text() + "'");
          return proc::input_session(k, bound,
                                     proc::par_or_single({build(a->cont, k), build(a->payload.type, bound)}));
        }
        return proc::input(k, Name::fresh("x"), build(a->cont, k));
      }
      case TypeKind::Out: {
        switch (a->payload.kind) {
          case PayloadKind::Basic: return proc::output(k, canonical(a->payload.basic), build(a->cont, k));
          case PayloadKind::Service: {
            Name s = fresh_service();
            extension_.emplace(s, Sort::of_service(a->payload.type));
            return proc::output(k, expr::service(s), build(a->cont, k));
          }
          case PayloadKind::Session: {
            Name sent = Name::fresh(k.text() + "'");
            Process partner = build(dual(a->payload.type), sent);
            return proc::restrict(sent, proc::par_or_single({proc::delegate(k, sent, build(a->cont, k)), partner}));
          }
        }
        break;
      }
      case TypeKind::Branch: {
        std::vector<Arm> arms;
        for (const auto& arm : a->arms) arms.push_back({arm.label, build(arm.type, k)});
        return proc::branch(k, std::move(arms));
      }
      case TypeKind::Select: return proc::select(k, a->arms.front().label, build(a->arms.front().type, k));
    }
    return proc::inact();
  }

  ServiceEnv take_extension() { return std::move(extension_); }

private:
  static Expr canonical(BasicSort b) {
    switch (b) {
      case BasicSort::Int: return expr::integer(1);
      case BasicSort::Bool: return expr::boolean(true);
      case BasicSort::String: return expr::string("1");
    }
    return expr::integer(1);
  }

  Name fresh_service() {
    for (;;) {
      Name n = Name::free("#inh" + std::to_string(next_++));
      if (!avoid_.count(n) && !extension_.count(n)) return n;
    }
  }

  const ServiceEnv& avoid_;
  ServiceEnv extension_;
  int next_ = 0;
};

bool is_session_prefix(ProcKind k) {
  switch (k) {
    case ProcKind::Input:
    case ProcKind::Output:
    case ProcKind::InputSession:
    case ProcKind::Delegate:
    case ProcKind::Branch:
    case ProcKind::Select: return true;
    default: return false;
  }
}

ServiceEnv merged(const ServiceEnv& g, const ServiceEnv& ext) {
  ServiceEnv out = g;
  for (const auto& [n, s] : ext) out.emplace(n, s);
  return out;
}

/// Calls `visit` on every subset of {0..m-1} of the given size that avoids
/// `banned` elements and conflicting pairs, in lexicographic order. Stops and
/// returns false as soon as `visit` does.
template <class Visit>
bool independent_subsets(int m, int size, const std::vector<std::vector<char>>& conflict,
                         const std::vector<char>& banned, std::vector<int>& cur, Visit&& visit) {
  if (static_cast<int>(cur.size()) == size) return visit(cur);
  const int start = cur.empty() ? 0 : cur.back() + 1;
  for (int i = start; i <= m - (size - static_cast<int>(cur.size())); ++i) {
    if (banned[i]) continue;
    bool clash = false;
    for (int j : cur) clash = clash || conflict[i][j];
    if (clash) continue;
    cur.push_back(i);
    const bool go_on = independent_subsets(m, size, conflict, banned, cur, visit);
    cur.pop_back();
    if (!go_on) return false;
  }
  return true;
}

/// Restrictions of `nf` that move inside the sub-process of the chosen
/// threads: those no other thread mentions.
std::vector<Name> inside_restrictions(const NormalForm& nf, const std::vector<int>& subset) {
  std::vector<char> chosen(nf.threads.size(), 0);
  for (int i : subset) chosen[i] = 1;
  std::vector<Name> out;
  for (Name r : nf.restricted) {
    bool inside = false;
    bool outside = false;
    for (std::size_t i = 0; i < nf.threads.size(); ++i) {
      if (!has_free_session(nf.threads[i], r)) continue;
      (chosen[i] ? inside : outside) = true;
    }
    if (inside && !outside) out.push_back(r);
  }
  return out;
}

/// The sub-process made of the chosen threads; restricted channels that are
/// also used outside it stay in the context and are free in the result.
Process sub_process(const NormalForm& nf, const std::vector<int>& subset) {
  NormalForm sub;
  sub.restricted = inside_restrictions(nf, subset);
  for (int i : subset) sub.threads.push_back(nf.threads[i]);
  return assemble(sub);
}

/// Identity of a sub-process: its thread objects and inner restrictions.
using SubKey = std::vector<std::uintptr_t>;

SubKey sub_key(const NormalForm& nf, const std::vector<int>& subset) {
  SubKey key;
  for (int i : subset) key.push_back(reinterpret_cast<std::uintptr_t>(nf.threads[i].get()));
  std::sort(key.begin(), key.end());
  key.push_back(0);
  for (Name r : inside_restrictions(nf, subset)) key.push_back(r.id());
  return key;
}

/// Groups of `subset` connected by shared session channels.
std::vector<std::vector<int>> channel_components(const NormalForm& nf, const std::vector<int>& subset) {
  UnionFind uf(subset.size());
  std::unordered_map<Name, std::size_t> holder;
  for (std::size_t x = 0; x < subset.size(); ++x)
    for (Name c : free_session_channels(nf.threads[subset[x]])) {
      auto [it, fresh] = holder.emplace(c, x);
      if (!fresh) uf.unite(it->second, x);
    }
  std::unordered_map<std::size_t, std::size_t> index;
  std::vector<std::vector<int>> out;
  for (std::size_t x = 0; x < subset.size(); ++x) {
    auto [it, fresh] = index.emplace(uf.find(x), out.size());
    if (fresh) out.emplace_back();
    out[it->second].push_back(subset[x]);
  }
  return out;
}

} // namespace

Inhabitant inhabit(const SessionType& a, Name k, const ServiceEnv& avoid) {
  Inhabiter h(avoid);
  Process p = h.build(a, k);
  return {p, h.take_extension()};
}

std::optional<Partner> construct_partner(const ServiceEnv& g, const Process& p) {
  Typing t;
  try {
    t = check(g, p);
  } catch (const TypeError& e) {
    throw std::invalid_argument(std::string("partner construction needs a well-typed process: ") + e.what());
  }
  NormalForm nf = flatten(p);
  if (!redexes(nf).empty()) throw std::invalid_argument("partner construction needs an irreducible process");
  if (!has_live_channels(p)) throw std::invalid_argument("partner construction needs live channels");

  for (const auto& th : nf.threads) {
    if (th->kind != ProcKind::Request) continue;
    auto it = g.find(th->subject);
    if (it == g.end() || !it->second.is_service) continue;
    Name k = th->binder.freshen();
    Inhabitant in = inhabit(it->second.type, k, g);
    return Partner{proc::service(th->subject, k, in.process), std::move(in.extension), 1, th->subject};
  }

  // A partner on a channel some thread is blocked on is what unblocks it;
  // other open sessions come after, then closed ones.
  std::unordered_set<Name> heads;
  for (const auto& th : nf.threads)
    if (is_session_prefix(th->kind)) heads.insert(th->subject);
  std::vector<std::pair<Name, SessionType>> open;
  for (const auto& [k, e] : t.delta)
    if (!e.is_bottom()) open.emplace_back(k, e.type());
  auto rank = [&](const std::pair<Name, SessionType>& x) {
    if (heads.count(x.first)) return 0;
    return x.second->kind == TypeKind::End ? 2 : 1;
  };
  std::stable_sort(open.begin(), open.end(), [&](const auto& x, const auto& y) {
    if (rank(x) != rank(y)) return rank(x) < rank(y);
    return NameTextLess{}(x.first, y.first);
  });
  if (open.empty()) return std::nullopt;
  Inhabitant in = inhabit(dual(open.front().second), open.front().first, g);
  return Partner{in.process, std::move(in.extension), 2, open.front().first};
}

ProgressResult check_progress(const ServiceEnv& g, const Process& p, const ProgressOptions& opts) {
  ProgressResult res;
  try {
    check(g, p);
  } catch (const TypeError& e) {
    res.kind = ProgressKind::IllTyped;
    res.error = e;
    return res;
  }
  res.transparent = transparency_of_typed(p).kind == TransparencyKind::Transparent;

  Exploration ex = explore_all(p, opts.depth, opts.max_states);
  res.states = ex.states.size();
  res.exploration_complete = ex.complete;

  // Certified sub-processes, by canonical text and by identity, with the
  // service their partner offers (invalid when the partner is an inhabitant).
  std::unordered_map<std::string, Name> passed;
  std::map<SubKey, Name> passed_threads;
  std::map<SubKey, bool> transparent_parts;
  bool capped = false;
  auto fail = [&](const Process& state, const std::vector<int>& subset, const Process& sub, std::string cond,
                  std::string msg, std::optional<Partner> partner) {
    res.kind = ProgressKind::Counterexample;
    res.state = state;
    res.subset = subset;
    res.sub = sub;
    res.condition = std::move(cond);
    res.message = std::move(msg);
    res.partner = std::move(partner);
    return res;
  };

  std::unordered_map<const void*, bool> service_ok;
  for (const auto& state : ex.states) {
    NormalForm nf = flatten(state);
    const int m = static_cast<int>(nf.threads.size());
    // A sub-process holding both threads of a redex, or a conditional,
    // reduces by itself and passes; the enumeration skips it.
    std::vector<std::vector<char>> conflict(m, std::vector<char>(m, 0));
    std::vector<char> banned(m, 0);
    for (const auto& r : redexes(nf)) {
      if (r.second < 0) {
        banned[r.first] = 1;
      } else {
        conflict[r.first][r.second] = conflict[r.second][r.first] = 1;
      }
    }
    std::vector<char> live(m, 0);
    for (int i = 0; i < m; ++i) live[i] = has_live_channels(nf.threads[i]);
    // A service thread types to the empty environment and, in a stuck
    // sub-process, has no partner there or in any inhabitant. Adding it to a
    // sub-process changes the verdict only through its own transparency, so
    // when every service thread is transparent on its own they are left out.
    bool services_transparent = true;
    for (int i = 0; i < m; ++i) {
      if (nf.threads[i]->kind != ProcKind::Service) continue;
      auto [it, fresh] = service_ok.try_emplace(nf.threads[i].get(), false);
      if (fresh) it->second = transparency_of_typed(nf.threads[i]).kind == TransparencyKind::Transparent;
      services_transparent = services_transparent && it->second;
    }
    if (services_transparent)
      for (int i = 0; i < m; ++i)
        if (nf.threads[i]->kind == ProcKind::Service) banned[i] = 1;

    std::size_t examined = 0;
    std::optional<ProgressResult> failure;
    auto visit = [&](const std::vector<int>& subset) {
      if (examined == opts.subset_budget) {
        if (!capped) {
          res.state = state;
          res.message = "subset budget of " + std::to_string(opts.subset_budget) + " reached on a state with " +
                        std::to_string(nf.threads.size()) + " threads";
        }
        capped = true;
        return false;
      }
      ++examined;
      ++res.decompositions;
      bool any_live = false;
      for (int i : subset) any_live = any_live || live[i];
      if (!any_live) return true;
      SubKey id = sub_key(nf, subset);
      if (passed_threads.count(id)) return true;

      // A sub-process made of parts that share no session channel passes
      // with the partner of any certified live part A, provided the other
      // parts are transparent and do not request the service that partner
      // offers: every reduct is then a reduct of A and its partner beside
      // the untouched, channel-disjoint rest.
      std::vector<std::vector<int>> parts = channel_components(nf, subset);
      if (parts.size() > 1) {
        std::vector<SubKey> keys;
        for (const auto& part : parts) keys.push_back(sub_key(nf, part));
        auto part_transparent = [&](std::size_t i) {
          auto [it, fresh] = transparent_parts.try_emplace(keys[i], false);
          if (fresh)
            it->second = transparency_of_typed(sub_process(nf, parts[i])).kind == TransparencyKind::Transparent;
          return it->second;
        };
        for (std::size_t a = 0; a < parts.size(); ++a) {
          auto hit = passed_threads.find(keys[a]);
          if (hit == passed_threads.end()) continue;
          const Name offered = hit->second;
          bool fits = true;
          for (std::size_t b = 0; b < parts.size() && fits; ++b) {
            if (b == a) continue;
            for (int i : parts[b])
              if (offered.valid() && nf.threads[i]->kind == ProcKind::Request && nf.threads[i]->subject == offered)
                fits = false;
            fits = fits && part_transparent(b);
          }
          if (fits) {
            passed_threads.emplace(std::move(id), offered);
            return true;
          }
        }
      }

      Process sub = sub_process(nf, subset);
      std::string key = canonical_key(sub);
      if (auto hit = passed.find(key); hit != passed.end()) {
        passed_threads.emplace(std::move(id), hit->second);
        return true;
      }

      std::optional<Partner> partner;
      try {
        partner = construct_partner(g, sub);
      } catch (const std::invalid_argument& e) {
        failure = fail(state, subset, sub, "b", e.what(), std::nullopt);
        return false;
      }
      if (!partner) {
        failure = fail(state, subset, sub, "partner",
                       "every session of the sub-process is closed and no request is pending, yet it is stuck",
                       std::nullopt);
        return false;
      }
      if (!redexes(partner->process).empty()) {
        failure = fail(state, subset, sub, "a", "the partner can reduce on its own", partner);
        return false;
      }
      ServiceEnv g2 = merged(g, partner->extension);
      Process composed = proc::par({sub, partner->process});
      try {
        check(g2, composed);
      } catch (const TypeError& e) {
        failure = fail(state, subset, sub, "b", std::string("composition is ill-typed: ") + e.what(), partner);
        return false;
      }
      NormalForm cnf = flatten(composed);
      std::vector<Redex> rs = redexes(cnf);
      if (rs.empty()) {
        failure = fail(state, subset, sub, "c", "the composition does not reduce", partner);
        return false;
      }
      for (const auto& r : rs) {
        Process reduct = step(cnf, r);
        TransparencyVerdict v = is_transparent(g2, reduct);
        if (v.kind != TransparencyKind::Transparent) {
          std::string why = v.kind == TransparencyKind::NotWellTyped
                                ? std::string("reduct is ill-typed: ") + v.error->what()
                                : "reduct is not transparent: " + print_process(v.subterm);
          failure = fail(state, subset, sub, "d", why, partner);
          return false;
        }
      }
      const Name offered = partner->construction == 1 ? partner->channel : Name{};
      passed.emplace(std::move(key), offered);
      passed_threads.emplace(std::move(id), offered);
      return true;
    };
    std::vector<int> cur;
    for (int size = 1; size <= m; ++size) {
      if (!independent_subsets(m, size, conflict, banned, cur, visit)) break;
    }
    if (failure) return *failure;
  }
  if (capped) {
    res.kind = ProgressKind::Inconclusive;
    return res;
  }
  res.kind = ProgressKind::Certificate;
  res.state = nullptr;
  res.message.clear();
  return res;
}

} // namespace spi
