#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "generator.hpp"
#include "helpers.hpp"
#include "spi/congruence.hpp"
#include "spi/depgraph.hpp"
#include "spi/typing.hpp"

using namespace spi;

TEST_CASE("normal form drops inaction") {
  Process p = parse_process("sessions k; 0 | k!(1)");
  CHECK(alpha_equivalent(normal_form(p), parse_process("sessions k; k!(1)")));
  CHECK(normal_form(parse_process("0 | 0"))->kind == ProcKind::Inact);
  CHECK(normal_form(parse_process("new k . 0"))->kind == ProcKind::Inact);
}

TEST_CASE("normal form extrudes a restriction past a process that does not use it") {
  Process p = parse_process("sessions t; t!(1) | new k . (k!(2) | k?(x))");
  NormalForm nf = flatten(p);
  REQUIRE(nf.restricted.size() == 1);
  CHECK(nf.threads.size() == 3);
  CHECK(alpha_equivalent(normal_form(p), parse_process("sessions t; new k . (t!(1) | k!(2) | k?(x))")));
}

TEST_CASE("normal form renames a restriction that would capture a free channel") {
  Process p = parse_process("sessions k; k!(1) | new k . (k!(2) | k?(x))");
  NormalForm nf = flatten(p);
  REQUIRE(nf.restricted.size() == 1);
  CHECK(nf.restricted[0] != Name::free("k"));
  CHECK(free_session_channels(normal_form(p)) == free_session_channels(p));
  // The free k still belongs to the first thread only.
  CHECK(has_free_session(nf.threads[0], Name::free("k")));
  CHECK_FALSE(has_free_session(nf.threads[1], Name::free("k")));
}

TEST_CASE("maximal parallel sub-terms") {
  SUBCASE("a service guarding a product") {
    auto subs = maximal_parallel_subterms(testing::golden("guarded_wait").body);
    REQUIRE(subs.size() == 2);
    CHECK(flatten(subs[0]).threads.size() == 1);
    CHECK(flatten(subs[1]).threads.size() == 2);
    CHECK(flatten(subs[1]).restricted.size() == 2);
  }
  SUBCASE("a single prefix") {
    Process p = parse_process("sessions k; k!(1).k?(x)");
    auto subs = maximal_parallel_subterms(p);
    REQUIRE(subs.size() == 1);
    CHECK(alpha_equivalent(subs[0], p));
  }
  SUBCASE("nested products flatten into one") {
    Process p = parse_process("sessions k, t, u; k!(1) | (t!(2) | u!(3))");
    auto subs = maximal_parallel_subterms(p);
    REQUIRE(subs.size() == 1);
    CHECK(flatten(subs[0]).threads.size() == 3);
  }
}

TEST_CASE("live channels") {
  CHECK_FALSE(has_live_channels(parse_process("env a : <![int].end>; a(k).k!(1)")));
  CHECK(has_live_channels(parse_process("env a : <![int].end>; a<k>.k?(x)")));
  CHECK(has_live_channels(testing::golden("restricted_wait").body));
  CHECK_FALSE(has_live_channels(proc::inact()));
  CHECK_FALSE(has_live_channels(parse_process("env a : <![int].end>; *a(k).k!(1)")));
}

TEST_CASE("normal form preserves typing, graphs and free channels on generated processes") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    testing::Generator gen(seed, testing::GenConfig{3, 8, 0.3});
    testing::Generated g = gen.process();
    Process n = normal_form(g.process);
    CAPTURE(print_process(g.process));
    CHECK(free_session_channels(n) == free_session_channels(g.process));
    CHECK(alpha_equivalent(normal_form(n), n));

    Typing a = check(g.gamma, g.process);
    Typing b = check(g.gamma, n);
    CHECK(env_equal_mod_end(a.delta, b.delta));

    DepGraph ga = build_graph(g.process);
    DepGraph gb = build_graph(n);
    CHECK(ga.nodes.size() == gb.nodes.size());
    CHECK(ga.edges.size() == gb.edges.size());
    CHECK(testing::graph_profile(ga) == testing::graph_profile(gb));
  }
}
