#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "spi/congruence.hpp"
#include "spi/depgraph.hpp"
#include "spi/golden.hpp"
#include "spi/progress.hpp"
#include "spi/semantics.hpp"
#include "spi/surface.hpp"
#include "spi/typing.hpp"

using nlohmann::json;
using namespace spi;

namespace {

constexpr int kPositive = 0;
constexpr int kNegative = 1;
constexpr int kUsage = 2;

/// The result of one subcommand: a verdict, its human rendering and its
/// structured record.
struct Outcome {
  int code = kPositive;
  std::string verdict;
  std::string text;
  json data = json::object();
};

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

SourceFile load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_source(buf.str());
}

json labels_json(std::vector<Name> labels) {
  std::sort(labels.begin(), labels.end(), NameTextLess{});
  json out = json::array();
  for (Name k : labels) out.push_back(k.text());
  return out;
}

json edge_json(const GraphEdge& e) { return {{"a", e.a}, {"b", e.b}, {"channel", e.channel.text()}}; }

json graph_json(const DepGraph& g) {
  json nodes = json::array();
  for (const auto& n : g.nodes)
    nodes.push_back({{"id", n.id}, {"thread", print_process(n.thread)}, {"labels", labels_json(n.labels)}});
  json edges = json::array();
  for (const auto& e : g.edges) edges.push_back(edge_json(e));
  return {{"nodes", nodes}, {"edges", edges}, {"acyclic", is_acyclic(g)}};
}

json error_json(const TypeError& e) {
  json out = {{"rule", e.rule()}, {"message", e.message()}};
  if (e.loc().known()) out["location"] = {{"line", e.loc().line}, {"column", e.loc().column}};
  if (e.subterm()) out["subterm"] = print_process(e.subterm());
  return out;
}

std::string error_text(const TypeError& e) {
  std::string out = e.rule() + ": " + e.message();
  if (e.loc().known()) out += " (line " + std::to_string(e.loc().line) + ", column " + std::to_string(e.loc().column) + ")";
  return out;
}

json env_json(const SessionEnv& d) {
  json out = json::object();
  for (const auto& [k, e] : d) out[k.text()] = e.is_bottom() ? std::string("bot") : print_type(e.type());
  return out;
}

json service_env_json(const ServiceEnv& g) {
  json out = json::object();
  for (const auto& [a, s] : g) out[a.text()] = print_sort(s);
  return out;
}

std::string cycle_text(const std::vector<GraphEdge>& cycle) {
  std::string out;
  for (const auto& e : cycle)
    out += "  n" + std::to_string(e.a) + " -- n" + std::to_string(e.b) + " on " + e.channel.text() + "\n";
  return out;
}

Outcome ill_typed(const TypeError& e) {
  Outcome o;
  o.code = kNegative;
  o.verdict = "IllTyped";
  o.text = "ill-typed: " + error_text(e) + "\n";
  o.data["error"] = error_json(e);
  return o;
}

Outcome cmd_check(const std::string& file, bool relaxed) {
  SourceFile f = load(file);
  CheckOptions opts;
  opts.relaxed_service_rule = relaxed;
  try {
    Typing t = check(f.env, f.body, opts);
    Outcome o;
    o.verdict = "WellTyped";
    o.text = "well-typed\ndelta: " + print_session_env(t.delta) + "\n";
    o.data["delta"] = env_json(t.delta);
    return o;
  } catch (const TypeError& e) {
    return ill_typed(e);
  }
}

Outcome cmd_graph(const std::string& file, const std::string& dot_out, bool all_subterms) {
  SourceFile f = load(file);
  try {
    check(f.env, f.body);
  } catch (const TypeError& e) {
    return ill_typed(e);
  }
  std::vector<Process> terms;
  if (all_subterms)
    terms = maximal_parallel_subterms(f.body);
  else
    terms.push_back(normal_form(f.body));

  Outcome o;
  o.verdict = "Acyclic";
  std::string dot;
  json graphs = json::array();
  for (std::size_t i = 0; i < terms.size(); ++i) {
    DepGraph g = build_graph(terms[i]);
    Acyclicity a = check_acyclic(g);
    if (!a.acyclic) {
      o.verdict = "Cyclic";
      o.code = kNegative;
    }
    json gj = graph_json(g);
    gj["term"] = print_process(terms[i]);
    graphs.push_back(std::move(gj));
    dot += to_dot(g, "G" + std::to_string(i));
    o.text += "graph G" + std::to_string(i) + ": " + std::to_string(g.nodes.size()) + " nodes, " +
              std::to_string(g.edges.size()) + " edges, " + (a.acyclic ? "acyclic" : "cyclic") + "\n";
    for (const auto& n : g.nodes) {
      std::string set;
      std::vector<Name> labels = n.labels;
      std::sort(labels.begin(), labels.end(), NameTextLess{});
      for (std::size_t j = 0; j < labels.size(); ++j) set += (j ? ", " : "") + labels[j].text();
      o.text += "  n" + std::to_string(n.id) + " {" + set + "}  " + print_process(n.thread) + "\n";
    }
    for (const auto& e : g.edges)
      o.text += "  n" + std::to_string(e.a) + " -- n" + std::to_string(e.b) + " on " + e.channel.text() + "\n";
  }
  o.data["graphs"] = graphs;
  if (dot_out == "-") {
    o.text = dot;
  } else if (!dot_out.empty()) {
    std::ofstream out(dot_out, std::ios::binary);
    if (!out) throw UsageError("cannot write " + dot_out);
    out << dot;
  }
  return o;
}

Outcome cmd_transparent(const std::string& file) {
  SourceFile f = load(file);
  TransparencyVerdict v = is_transparent(f.env, f.body);
  if (v.kind == TransparencyKind::NotWellTyped) return ill_typed(*v.error);
  Outcome o;
  o.verdict = to_string(v.kind);
  if (v.kind == TransparencyKind::Transparent) {
    o.text = "Transparent\n";
    return o;
  }
  o.code = kNegative;
  o.text = "NotTransparent\nsub-term: " + print_process(v.subterm) + "\n";
  o.data["subterm"] = print_process(v.subterm);
  o.data["graph"] = graph_json(v.graph);
  json cycle = json::array();
  for (const auto& e : v.cycle) cycle.push_back(edge_json(e));
  o.data["cycle"] = cycle;
  if (v.cycle.empty()) {
    o.text += "no cycle in the whole term; the sub-term above has one\n";
  } else {
    o.text += "cycle:\n" + cycle_text(v.cycle);
  }
  return o;
}

json redex_json(const Redex& r, const NormalForm& nf) {
  json out = {{"rule", to_string(r.rule)}, {"first", r.first}, {"second", r.second},
              {"description", describe(r, nf)}};
  return out;
}

Outcome cmd_run(const std::string& file, int steps, std::uint64_t seed, bool all) {
  SourceFile f = load(file);
  Outcome o;
  if (all) {
    Exploration ex = explore_all(f.body, steps);
    o.verdict = ex.complete ? "Explored" : "Truncated";
    json states = json::array();
    for (std::size_t i = 0; i < ex.states.size(); ++i) {
      const bool stuck = redexes(ex.states[i]).empty();
      states.push_back({{"depth", ex.depth[i]}, {"process", print_process(ex.states[i])}, {"stuck", stuck}});
      o.text += "[" + std::to_string(ex.depth[i]) + "] " + print_process(ex.states[i]) + (stuck ? "  (stuck)" : "") + "\n";
    }
    o.text += std::to_string(ex.states.size()) + " states" + (ex.complete ? "" : ", exploration truncated") + "\n";
    o.data = {{"states", states}, {"complete", ex.complete}, {"state_limit_hit", ex.state_limit_hit}};
    return o;
  }
  Trace t = explore_seeded(f.body, steps, seed);
  o.verdict = redexes(t.final).empty() ? "Stuck" : "StepLimit";
  o.text = trace_to_text(t);
  o.text += o.verdict == "Stuck" ? "stuck after " : "step limit reached after ";
  o.text += std::to_string(t.steps.size()) + " steps\n";
  json records = json::array();
  for (const auto& s : t.steps) {
    NormalForm nf = flatten(s.before);
    json r = redex_json(s.redex, nf);
    r["before"] = print_process(s.before);
    records.push_back(std::move(r));
  }
  o.data = {{"seed", seed}, {"steps", records}, {"final", print_process(t.final)}};
  return o;
}

Outcome cmd_inhabit(const std::string& type_text, const std::string& chan) {
  SessionType a = parse_type(type_text);
  Inhabitant in = inhabit(a, Name::free(chan));
  Outcome o;
  o.verdict = "Inhabitant";
  o.text = print_process(in.process) + "\n";
  if (!in.extension.empty()) o.text += "env: " + print_service_env(in.extension) + "\n";
  o.data = {{"process", print_process(in.process)}, {"extension", service_env_json(in.extension)}};
  return o;
}

Outcome cmd_progress(const std::string& file, int depth, std::size_t budget) {
  SourceFile f = load(file);
  ProgressOptions opts;
  opts.depth = depth;
  opts.subset_budget = budget;
  ProgressResult r = check_progress(f.env, f.body, opts);
  if (r.kind == ProgressKind::IllTyped) return ill_typed(*r.error);
  Outcome o;
  o.verdict = to_string(r.kind);
  o.data = {{"states", r.states},
            {"decompositions", r.decompositions},
            {"exploration_complete", r.exploration_complete},
            {"transparent", r.transparent}};
  o.text = o.verdict + "\n" + std::to_string(r.states) + " states, " + std::to_string(r.decompositions) +
           " decompositions" + (r.exploration_complete ? "" : ", exploration cut at the depth bound") + "\n";
  if (r.kind == ProgressKind::Certificate) return o;
  o.code = kNegative;
  if (r.state) {
    o.data["state"] = print_process(r.state);
    o.text += "state: " + print_process(r.state) + "\n";
  }
  o.data["message"] = r.message;
  if (r.kind == ProgressKind::Counterexample) {
    o.data["subset"] = r.subset;
    o.data["sub"] = print_process(r.sub);
    o.data["condition"] = r.condition;
    o.text += "sub-process: " + print_process(r.sub) + "\ncondition: " + r.condition + "\n";
    if (r.partner) {
      o.data["partner"] = {{"process", print_process(r.partner->process)},
                           {"construction", r.partner->construction},
                           {"extension", service_env_json(r.partner->extension)}};
      o.text += "partner: " + print_process(r.partner->process) + "\n";
    }
  }
  o.text += r.message + "\n";
  return o;
}

Outcome cmd_selftest() {
  Outcome o;
  o.verdict = "Pass";
  json checks = json::array();
  for (const auto& c : run_selftest()) {
    if (!c.pass) {
      o.verdict = "Fail";
      o.code = kNegative;
    }
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    o.text += std::string(c.pass ? "PASS " : "FAIL ") + c.name + (c.pass ? "" : ": " + c.detail) + "\n";
  }
  o.data["checks"] = checks;
  return o;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Static analyzer and interpreter for session-typed pi-calculus processes"};
  app.require_subcommand(1);
  bool as_json = false;
  app.add_flag("--json", as_json, "Emit one JSON record per line");

  std::string file;
  bool relaxed = false;
  auto* check_cmd = app.add_subcommand("check", "Type-check a process and print its session environment");
  check_cmd->add_option("file", file, "Source file")->required();
  check_cmd->add_flag("--relaxed", relaxed, "Let service bodies use other open sessions");

  std::string dot_out;
  bool all_subterms = false;
  auto* graph_cmd = app.add_subcommand("graph", "Print session dependency graphs");
  graph_cmd->add_option("file", file, "Source file")->required();
  graph_cmd->add_option("--dot", dot_out, "Write Graphviz output to a file, or - for stdout");
  graph_cmd->add_flag("--all-subterms", all_subterms, "One graph per maximal parallel sub-term");

  auto* transparent_cmd = app.add_subcommand("transparent", "Decide transparency");
  transparent_cmd->add_option("file", file, "Source file")->required();

  int steps = 20;
  std::uint64_t seed = 0;
  auto* run_cmd = app.add_subcommand("run", "Reduce a process");
  run_cmd->add_option("file", file, "Source file")->required();
  run_cmd->add_option("--steps", steps, "Maximum number of steps")->check(CLI::NonNegativeNumber);
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Seed for the redex choice");
  auto* all_flag = run_cmd->add_flag("--all", "Explore every reachable state breadth-first");
  seed_opt->excludes(all_flag);

  std::string type_text;
  std::string chan;
  auto* inhabit_cmd = app.add_subcommand("inhabit", "Build the canonical inhabitant of a session type");
  inhabit_cmd->add_option("type", type_text, "Session type")->required();
  inhabit_cmd->add_option("--chan", chan, "Session channel")->required();

  int depth = 10;
  std::size_t budget = 4096;
  auto* progress_cmd = app.add_subcommand("progress", "Certify progress up to a depth bound");
  progress_cmd->add_option("file", file, "Source file")->required();
  progress_cmd->add_option("--depth", depth, "Exploration depth")->check(CLI::NonNegativeNumber);
  progress_cmd->add_option("--subset-budget", budget, "Sub-process decompositions per state")
      ->check(CLI::PositiveNumber);

  auto* selftest_cmd = app.add_subcommand("selftest", "Run the built-in worked examples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  Outcome o;
  std::string command;
  try {
    if (*check_cmd) {
      command = "check";
      o = cmd_check(file, relaxed);
    } else if (*graph_cmd) {
      command = "graph";
      o = cmd_graph(file, dot_out, all_subterms);
    } else if (*transparent_cmd) {
      command = "transparent";
      o = cmd_transparent(file);
    } else if (*run_cmd) {
      command = "run";
      o = cmd_run(file, steps, seed, all_flag->count() > 0);
    } else if (*inhabit_cmd) {
      command = "inhabit";
      o = cmd_inhabit(type_text, chan);
    } else if (*progress_cmd) {
      command = "progress";
      o = cmd_progress(file, depth, budget);
    } else if (*selftest_cmd) {
      command = "selftest";
      o = cmd_selftest();
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error at line " << e.line() << ", column " << e.column() << ": " << e.message() << "\n";
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  }

  if (as_json) {
    json record = {{"command", command}, {"verdict", o.verdict}, {"data", o.data}};
    std::cout << record.dump() << "\n";
  } else {
    std::cout << o.text;
  }
  return o.code;
}
