#ifndef SPI_TESTS_HELPERS_HPP_
#define SPI_TESTS_HELPERS_HPP_

#include <algorithm>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "spi/depgraph.hpp"
#include "spi/golden.hpp"
#include "spi/surface.hpp"

namespace spi::testing {

inline SourceFile golden(std::string_view name) { return parse_source(golden_source(name)); }

/// Cycle test by depth-first search over the edge multiset, independent of
/// the union-find check: an edge back to a visited node other than through
/// the edge just used closes a cycle.
inline bool has_cycle_dfs(const DepGraph& g) {
  const std::size_t n = g.nodes.size();
  std::vector<std::vector<std::pair<int, std::size_t>>> adj(n);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    adj[g.edges[e].a].emplace_back(g.edges[e].b, e);
    adj[g.edges[e].b].emplace_back(g.edges[e].a, e);
  }
  std::vector<char> seen(n, 0);
  std::function<bool(int, std::size_t)> dfs = [&](int u, std::size_t via) {
    seen[u] = 1;
    for (auto [v, e] : adj[u]) {
      if (e == via) continue;
      if (seen[v] || dfs(v, e)) return true;
    }
    return false;
  };
  for (std::size_t u = 0; u < n; ++u)
    if (!seen[u] && dfs(static_cast<int>(u), g.edges.size())) return true;
  return false;
}

/// Reachability by transitive closure over node adjacency.
inline bool leads_to_closure(const DepGraph& g, Name k, Name k2) {
  const std::size_t n = g.nodes.size();
  std::vector<std::vector<char>> r(n, std::vector<char>(n, 0));
  for (std::size_t i = 0; i < n; ++i) r[i][i] = 1;
  for (const auto& e : g.edges) r[e.a][e.b] = r[e.b][e.a] = 1;
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (r[i][m] && r[m][j]) r[i][j] = 1;
  auto has = [](const GraphNode& node, Name c) {
    return std::find(node.labels.begin(), node.labels.end(), c) != node.labels.end();
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (has(g.nodes[i], k) && has(g.nodes[j], k2) && r[i][j]) return true;
  return false;
}

/// Degree sequence and label-set sizes, sorted; equal for isomorphic graphs.
inline std::multiset<std::pair<std::size_t, std::size_t>> graph_profile(const DepGraph& g) {
  std::vector<std::size_t> degree(g.nodes.size(), 0);
  for (const auto& e : g.edges) {
    ++degree[e.a];
    ++degree[e.b];
  }
  std::multiset<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) out.insert({degree[i], g.nodes[i].labels.size()});
  return out;
}

} // namespace spi::testing

#endif // SPI_TESTS_HELPERS_HPP_
