#include "spi/depgraph.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>

#include "spi/congruence.hpp"
#include "spi/surface.hpp"
#include "spi/union_find.hpp"

namespace spi {
namespace {

struct Range {
  std::size_t lo, hi;
};

Range build(const Process& p, DepGraph& g) {
  const ProcessNode& n = *p;
  const std::size_t lo = g.nodes.size();
  switch (n.kind) {
    case ProcKind::Inact: return {lo, lo};
    case ProcKind::Restrict: {
      Range r = build(n.body(), g);
      for (std::size_t i = r.lo; i < r.hi; ++i) {
        auto& labels = g.nodes[i].labels;
        labels.erase(std::remove(labels.begin(), labels.end(), n.binder), labels.end());
      }
      return r;
    }
    case ProcKind::Par: {
      std::vector<Range> parts;
      for (const auto& c : n.children) parts.push_back(build(c, g));
      const std::size_t hi = g.nodes.size();
      std::unordered_map<Name, std::vector<std::pair<std::size_t, std::size_t>>> holders;  // (part, node)
      for (std::size_t part = 0; part < parts.size(); ++part)
        for (std::size_t i = parts[part].lo; i < parts[part].hi; ++i)
          for (Name k : g.nodes[i].labels) holders[k].emplace_back(part, i);
      for (const auto& [k, hs] : holders) {
        for (std::size_t x = 0; x < hs.size(); ++x)
          for (std::size_t y = x + 1; y < hs.size(); ++y)
            if (hs[x].first != hs[y].first)
              g.edges.push_back({static_cast<int>(hs[x].second), static_cast<int>(hs[y].second), k});
      }
      return {lo, hi};
    }
    default: {
      GraphNode node;
      node.id = static_cast<int>(lo);
      node.thread = p;
      node.labels = free_session_channels(p);
      g.nodes.push_back(std::move(node));
      return {lo, lo + 1};
    }
  }
}

bool edge_less(const GraphEdge& x, const GraphEdge& y) {
  if (x.a != y.a) return x.a < y.a;
  if (x.b != y.b) return x.b < y.b;
  return NameTextLess{}(x.channel, y.channel);
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out;
}

} // namespace

DepGraph build_graph(const Process& p) {
  DepGraph g;
  build(p, g);
  std::sort(g.edges.begin(), g.edges.end(), edge_less);
  return g;
}

Acyclicity check_acyclic(const DepGraph& g) {
  UnionFind uf(g.nodes.size());
  std::vector<std::vector<std::pair<int, std::size_t>>> forest(g.nodes.size());  // (neighbour, edge index)
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto& edge = g.edges[e];
    if (uf.unite(edge.a, edge.b)) {
      forest[edge.a].emplace_back(edge.b, e);
      forest[edge.b].emplace_back(edge.a, e);
      continue;
    }
    // The forest already connects a and b: that path plus this edge is a cycle.
    std::vector<std::pair<int, std::size_t>> via(g.nodes.size(), {-1, 0});
    std::deque<int> queue{edge.a};
    via[edge.a] = {edge.a, 0};
    while (!queue.empty() && via[edge.b].first < 0) {
      int u = queue.front();
      queue.pop_front();
      for (auto [v, idx] : forest[u]) {
        if (via[v].first >= 0) continue;
        via[v] = {u, idx};
        queue.push_back(v);
      }
    }
    Acyclicity out;
    out.acyclic = false;
    for (int v = edge.b; v != edge.a; v = via[v].first) out.cycle.push_back(g.edges[via[v].second]);
    std::reverse(out.cycle.begin(), out.cycle.end());
    out.cycle.push_back(edge);
    return out;
  }
  return {};
}

TransparencyVerdict transparency_of_typed(const Process& p) {
  for (const auto& sub : maximal_parallel_subterms(p)) {
    DepGraph g = build_graph(sub);
    Acyclicity a = check_acyclic(g);
    if (!a.acyclic) {
      TransparencyVerdict v;
      v.kind = TransparencyKind::NotTransparent;
      v.subterm = sub;
      v.graph = std::move(g);
      v.cycle = std::move(a.cycle);
      return v;
    }
  }
  return {};
}

TransparencyVerdict is_transparent(const ServiceEnv& g, const Process& p, const CheckOptions& opts) {
  try {
    check(g, p, opts);
  } catch (const TypeError& e) {
    TransparencyVerdict v;
    v.kind = TransparencyKind::NotWellTyped;
    v.error = e;
    return v;
  }
  return transparency_of_typed(p);
}

LeadsTo leads_to(const DepGraph& g, Name k, Name k2) {
  auto labelled = [&](const GraphNode& n, Name c) {
    return std::find(n.labels.begin(), n.labels.end(), c) != n.labels.end();
  };
  std::vector<char> seen(g.nodes.size(), 0);
  std::deque<std::size_t> queue;
  bool k2_free = false;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    if (labelled(g.nodes[i], k)) {
      seen[i] = 1;
      queue.push_back(i);
    }
    if (labelled(g.nodes[i], k2)) k2_free = true;
  }
  if (queue.empty() || !k2_free) return LeadsTo::NotFree;
  std::vector<std::vector<std::size_t>> adj(g.nodes.size());
  for (const auto& e : g.edges) {
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }
  while (!queue.empty()) {
    std::size_t u = queue.front();
    queue.pop_front();
    if (labelled(g.nodes[u], k2)) return LeadsTo::Yes;
    for (std::size_t v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        queue.push_back(v);
      }
    }
  }
  return LeadsTo::No;
}

std::string to_dot(const DepGraph& g, const std::string& name) {
  std::string out = "graph " + name + " {\n";
  for (const auto& n : g.nodes) {
    std::vector<Name> labels = n.labels;
    std::sort(labels.begin(), labels.end(), NameTextLess{});
    std::string set = "{";
    for (std::size_t i = 0; i < labels.size(); ++i) set += (i ? ", " : "") + labels[i].text();
    set += "}";
    out += "  n" + std::to_string(n.id) + " [label=\"" + escape(print_process(n.thread) + "\n" + set) + "\"];\n";
  }
  std::vector<GraphEdge> edges = g.edges;
  std::sort(edges.begin(), edges.end(), edge_less);
  for (const auto& e : edges)
    out += "  n" + std::to_string(e.a) + " -- n" + std::to_string(e.b) + " [label=\"" + escape(e.channel.text()) +
           "\"];\n";
  out += "}\n";
  return out;
}

const char* to_string(TransparencyKind k) {
  switch (k) {
    case TransparencyKind::NotWellTyped: return "NotWellTyped";
    case TransparencyKind::Transparent: return "Transparent";
    case TransparencyKind::NotTransparent: return "NotTransparent";
  }
  return "?";
}

const char* to_string(LeadsTo l) {
  switch (l) {
    case LeadsTo::Yes: return "yes";
    case LeadsTo::No: return "no";
    case LeadsTo::NotFree: return "not-free";
  }
  return "?";
}

} // namespace spi
