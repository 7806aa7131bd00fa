#ifndef SPI_DEPGRAPH_HPP_
#define SPI_DEPGRAPH_HPP_

#include <optional>
#include <string>
#include <vector>

#include "spi/typing.hpp"

namespace spi {

struct GraphNode {
  int id = 0;                // left-to-right position of the thread
  Process thread;
  std::vector<Name> labels;  // sorted by identity
};

/// One edge per shared channel; `a < b`.
struct GraphEdge {
  int a = 0;
  int b = 0;
  Name channel;
};

/// Session dependency graph: one node per thread, labelled by its free
/// session channels minus enclosing restrictions; an edge for every channel
/// two threads on opposite sides of a parallel composition share.
struct DepGraph {
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;
};

DepGraph build_graph(const Process& p);

struct Acyclicity {
  bool acyclic = true;
  std::vector<GraphEdge> cycle;  // a cycle when not acyclic
};

/// Forest test over the edge multiset; parallel edges form a 2-cycle.
Acyclicity check_acyclic(const DepGraph& g);
inline bool is_acyclic(const DepGraph& g) { return check_acyclic(g).acyclic; }

enum class TransparencyKind { NotWellTyped, Transparent, NotTransparent };

struct TransparencyVerdict {
  TransparencyKind kind = TransparencyKind::Transparent;
  std::optional<TypeError> error;  // NotWellTyped
  Process subterm;                 // NotTransparent: the offending maximal product
  DepGraph graph;                  // its graph
  std::vector<GraphEdge> cycle;
};

/// Well-typedness, then acyclicity of the graph of every maximal parallel
/// sub-term of the normal form.
TransparencyVerdict is_transparent(const ServiceEnv& g, const Process& p, const CheckOptions& opts = {});

/// The graph check alone, for callers that already know `p` is well typed.
TransparencyVerdict transparency_of_typed(const Process& p);

enum class LeadsTo { Yes, No, NotFree };

/// Whether some node labelled `k` reaches some node labelled `k2`; NotFree
/// when either channel labels no node.
LeadsTo leads_to(const DepGraph& g, Name k, Name k2);

/// Graphviz text; nodes by id, edges by endpoints then channel name.
std::string to_dot(const DepGraph& g, const std::string& name = "G0");

const char* to_string(TransparencyKind k);
const char* to_string(LeadsTo l);

} // namespace spi

#endif // SPI_DEPGRAPH_HPP_
