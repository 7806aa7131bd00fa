#include "spi/golden.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

#include "spi/congruence.hpp"
#include "spi/depgraph.hpp"
#include "spi/progress.hpp"
#include "spi/semantics.hpp"
#include "spi/surface.hpp"
#include "spi/typing.hpp"

namespace spi {

const std::vector<GoldenExample>& golden_examples() {
  static const std::vector<GoldenExample> examples = {
      {"path", R"spi(// Three threads sharing sessions k and k' in a path.
sessions k, k';
k?(x).k'!(x) | k!(5) | k'?(y)
)spi"},
      {"circular_wait", R"spi(// Two threads waiting on each other over two sessions.
sessions k', k'';
k'?(x).k''!(x) | k''?(x).k'!(x)
)spi"},
      {"restricted_wait", R"spi(// The same circular wait with both sessions restricted.
new k' . new k'' . (k'?(x).k''!(x) | k''?(x).k'!(x))
)spi"},
      {"guarded_wait", R"spi(// The circular wait hidden under a service prefix.
env a : <end>;
a(k).new k' . new k'' . (k'?(x).k''!(x) | k''?(x).k'!(x))
)spi"},
      {"buyer_seller", R"spi(// A buyer asks a seller for a quote; on acceptance the seller delegates the
// session to a shipper, which confirms directly to the buyer.
env buy : <![int].&{ok: ![string].end, stop: end}>,
    ship : <?[![string].end].end>;

buy<k>.k?(x_quote).if x_quote <= 100 then k << ok . k?(x_conf).0 else k << stop . 0
| *buy(k).k!(95).k >> { ok: ship<k'>.k'!((k)).0, stop: 0 }
| *ship(k').k'?((k)).k!("confirmed").0
)spi"},
      {"branching_service", R"spi(// A service whose two branches use k and k' in opposite orders, with an
// invoker and a shipping service.
env buy : <&{ok: ?[string].end, abort: ?[string].end}>, ship : <?[string].end>;

buy(k).ship<k'>.k >> { ok: k?(x_addr).k'!(x_addr), abort: k'!("null").k?(x_reason) }
| buy<k>.k << ok . k!("addr")
| *ship(k').k'?(x)
)spi"},
      {"pay_after_service", R"spi(// The client pays only after using serv, which the buy service offers
// only after payment: stuck alone, but it progresses given a serv provider.
env buy : <?[string].end>, serv : <![int].end>;

buy(k).k?(x_card).serv(k').k'!(5) | buy<k>.serv<k'>.k'?(y).k!("card")
)spi"},
      {"looping", R"spi(// A circular wait next to a service that keeps invoking itself.
sessions k', k'';
env a : <end>;
k'?(x).k''!(x) | k''?(x).k'!(x) | *a(k).a<k> | a<k>
)spi"},
      {"delegation", R"spi(// Session k moves from the second thread to the third.
sessions k, k';
k!(5) | k'!((k)).k'?(x) | k'?((k)).k?(x).k'!(7)
)spi"},
      {"blocked_delegation", R"spi(// The receiver already holds k', so it cannot take k' under its bound name.
sessions k, k';
k?((k'')).k'!(1).k''?(x).0 | k!((k')).0
)spi"},  };
  return examples;
}

const std::string& golden_source(std::string_view name) {
  for (const auto& e : golden_examples())
    if (e.name == name) return e.source;
  throw std::out_of_range("no golden example named " + std::string(name));
}

namespace {

std::size_t labelled_nodes(const DepGraph& g) {
  return std::count_if(g.nodes.begin(), g.nodes.end(), [](const GraphNode& n) { return !n.labels.empty(); });
}

std::string shape(const DepGraph& g) {
  return std::to_string(g.nodes.size()) + " nodes, " + std::to_string(g.edges.size()) + " edges, " +
         (is_acyclic(g) ? "acyclic" : "cyclic");
}

} // namespace

std::vector<SelfCheck> run_selftest() {
  std::vector<SelfCheck> out;
  auto run = [&](const std::string& name, const std::function<std::string()>& body) {
    SelfCheck c;
    c.name = name;
    try {
      c.detail = body();
      c.pass = c.detail.empty();
      if (c.pass) c.detail = "ok";
    } catch (const std::exception& e) {
      c.detail = std::string("exception: ") + e.what();
    }
    out.push_back(std::move(c));
  };
  auto load = [](const char* name) { return parse_source(golden_source(name)); };

  run("circular_wait: two nodes, two parallel edges, cyclic", [&]() -> std::string {
    DepGraph g = build_graph(load("circular_wait").body);
    if (g.nodes.size() != 2 || g.edges.size() != 2 || is_acyclic(g) || labelled_nodes(g) != 2) return shape(g);
    return "";
  });
  run("restricted_wait: same shape with empty labels", [&]() -> std::string {
    DepGraph g = build_graph(load("restricted_wait").body);
    if (g.nodes.size() != 2 || g.edges.size() != 2 || is_acyclic(g) || labelled_nodes(g) != 0) return shape(g);
    return "";
  });
  run("guarded_wait: one unlabelled node, not transparent", [&]() -> std::string {
    SourceFile f = load("guarded_wait");
    DepGraph g = build_graph(f.body);
    if (g.nodes.size() != 1 || !g.edges.empty() || labelled_nodes(g) != 0) return shape(g);
    TransparencyVerdict v = is_transparent(f.env, f.body);
    if (v.kind != TransparencyKind::NotTransparent) return std::string("verdict ") + to_string(v.kind);
    if (flatten(v.subterm).threads.size() != 2) return "witness is not the inner product";
    return "";
  });
  run("path: three nodes, k leads to k'", [&]() -> std::string {
    DepGraph g = build_graph(load("path").body);
    if (g.nodes.size() != 3 || g.edges.size() != 2 || !is_acyclic(g)) return shape(g);
    if (leads_to(g, Name::free("k"), Name::free("k'")) != LeadsTo::Yes) return "k does not lead to k'";
    return "";
  });
  run("buyer-seller: typed, program, transparent, progress", [&]() -> std::string {
    SourceFile f = load("buyer_seller");
    Typing t = check(f.env, f.body);
    if (!t.delta.empty()) return "delta is " + print_session_env(t.delta);
    if (!is_program(f.body)) return "not a program";
    if (is_transparent(f.env, f.body).kind != TransparencyKind::Transparent) return "not transparent";
    auto rs = redexes(f.body);
    if (rs.size() != 1 || rs[0].rule != Rule::RInit) return "expected a single RInit redex";
    ProgressResult pr = check_progress(f.env, f.body, ProgressOptions{10, 4096, 20000});
    if (pr.kind != ProgressKind::Certificate) return std::string("progress: ") + to_string(pr.kind);
    return "";
  });
  run("blocked delegation: no redex, not transparent", [&]() -> std::string {
    SourceFile f = load("blocked_delegation");
    if (!redexes(f.body).empty()) return "delegation fired";
    TransparencyVerdict v = is_transparent(f.env, f.body);
    if (v.kind != TransparencyKind::NotTransparent) return std::string("verdict ") + to_string(v.kind);
    return "";
  });
  for (const char* name : {"branching_service", "pay_after_service"}) {
    run(std::string(name) + ": transparent with progress", [&]() -> std::string {
      SourceFile f = load(name);
      TransparencyVerdict v = is_transparent(f.env, f.body);
      if (v.kind != TransparencyKind::Transparent) return std::string("verdict ") + to_string(v.kind);
      ProgressResult pr = check_progress(f.env, f.body);
      if (pr.kind != ProgressKind::Certificate) return std::string("progress: ") + to_string(pr.kind);
      return "";
    });
  }
  run("looping: counterexample at the circular pair", [&]() -> std::string {
    SourceFile f = load("looping");
    ProgressResult pr = check_progress(f.env, f.body);
    if (pr.kind != ProgressKind::Counterexample) return std::string("progress: ") + to_string(pr.kind);
    NormalForm sub = flatten(pr.sub);
    if (sub.threads.size() != 2 || sub.threads[0]->kind != ProcKind::Input ||
        sub.threads[1]->kind != ProcKind::Input)
      return "counterexample at " + print_process(pr.sub);
    return "";
  });
  run("delegation: session k moves to the third thread", [&]() -> std::string {
    SourceFile f = load("delegation");
    auto rs = redexes(f.body);
    if (rs.size() != 1 || rs[0].rule != Rule::Del) return "expected a single Del redex";
    DepGraph g = build_graph(step(f.body, rs[0]));
    if (g.nodes.size() != 3 || g.edges.size() != 2 || !is_acyclic(g)) return shape(g);
    return "";
  });
  run("inhabit end is 0", [&]() -> std::string {
    Inhabitant in = inhabit(ty::end(), Name::free("k"));
    return print_process(in.process) == "0" ? "" : print_process(in.process);
  });
  return out;
}

} // namespace spi
