#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "generator.hpp"
#include "helpers.hpp"
#include "spi/congruence.hpp"
#include "spi/typing.hpp"

using namespace spi;

namespace {

SessionEnv env1(const char* k, const char* type) { return {{Name::free(k), SessionEntry::of(parse_type(type))}}; }

bool entry_is(const SessionEnv& d, const char* k, const char* type) {
  auto it = d.find(Name::free(k));
  return it != d.end() && !it->second.is_bottom() && type_equal(it->second.type(), parse_type(type));
}

bool entry_is_bottom(const SessionEnv& d, const char* k) {
  auto it = d.find(Name::free(k));
  return it != d.end() && it->second.is_bottom();
}

std::string rule_of(const ServiceEnv& g, const Process& p, const CheckOptions& opts = {}) {
  try {
    check(g, p, opts);
  } catch (const TypeError& e) {
    return e.rule();
  }
  return "";
}

} // namespace

TEST_CASE("duality") {
  CHECK(type_equal(dual(ty::end()), ty::end()));
  CHECK(type_equal(dual(parse_type("![int].&{ok: ![string].end, stop: end}")),
                   parse_type("?[int].+{ok: ?[string].end, stop: end}")));
  // Payloads are not dualized.
  CHECK(type_equal(dual(parse_type("?[![int].end].end")), parse_type("![![int].end].end")));
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    testing::Generator gen(seed);
    SessionType t = gen.type();
    CHECK(type_equal(dual(dual(t)), t));
  }
}

TEST_CASE("expression sorts") {
  ServiceEnv g;
  CHECK(type_expr(g, expr::integer(5)) == Sort::of_basic(BasicSort::Int));
  Name xq = Name::free("x_quote");
  g[xq] = Sort::of_basic(BasicSort::Int);
  CHECK(type_expr(g, expr::binary(BinOp::Le, expr::var(xq), expr::integer(100))) == Sort::of_basic(BasicSort::Bool));
  CHECK_THROWS_AS(type_expr({}, expr::var(Name::free("y"))), TypeError);
  CHECK_THROWS_AS(type_expr({}, expr::binary(BinOp::Add, expr::integer(1), expr::boolean(true))), TypeError);
  CHECK_THROWS_AS(type_expr({}, expr::binary(BinOp::And, expr::integer(1), expr::boolean(true))), TypeError);
  CHECK(type_expr({}, expr::negate(expr::boolean(false))) == Sort::of_basic(BasicSort::Bool));
}

TEST_CASE("environment composition") {
  SessionEnv out = compose(env1("k", "![int].end"), env1("k", "?[int].end"));
  CHECK(entry_is_bottom(out, "k"));
  CHECK_THROWS_AS(compose(env1("k", "![int].end"), env1("k", "![int].end")), TypeError);
  SessionEnv closed{{Name::free("k"), SessionEntry::bottom()}};
  CHECK_THROWS_AS(compose(closed, env1("k", "?[int].end")), TypeError);
  SessionEnv both = compose(env1("k", "![int].end"), env1("t", "?[int].end"));
  CHECK(entry_is(both, "k", "![int].end"));
  CHECK(entry_is(both, "t", "?[int].end"));
}

TEST_CASE("composition is commutative") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    testing::Generator gen(seed);
    SessionType a = gen.type();
    SessionType b = gen.type();
    SessionEnv d1{{Name::free("k"), SessionEntry::of(a)}, {Name::free("t"), SessionEntry::of(b)}};
    SessionEnv d2{{Name::free("k"), SessionEntry::of(dual(a))}};
    CHECK(compose(d1, d2) == compose(d2, d1));
    SessionEnv d3{{Name::free("u"), SessionEntry::of(b)}};
    CHECK(compose(compose(d1, d2), d3) == compose(d1, compose(d2, d3)));
  }
}

TEST_CASE("checking the worked examples") {
  SUBCASE("buyer-seller types to the empty environment") {
    SourceFile f = testing::golden("buyer_seller");
    CHECK(check(f.env, f.body).delta.empty());
  }
  SUBCASE("inaction") { CHECK(check({}, proc::inact()).delta.empty()); }
  SUBCASE("a single output") {
    SessionEnv d = check({}, parse_process("sessions k; k!(5).0")).delta;
    CHECK(d.size() == 1);
    CHECK(entry_is(d, "k", "![int].end"));
  }
  SUBCASE("a service body may not use another open session") {
    Process p = parse_process("sessions k'; env a : <end>; a(k).k'!(5).0");
    CHECK(rule_of(parse_source("sessions k'; env a : <end>; 0").env, p) == "T-Serv");
  }
  SUBCASE("the relaxed service rule passes the session through") {
    SourceFile f = parse_source("sessions k'; env a : <end>; a(k).k'!(5).0");
    SessionEnv d = check(f.env, f.body, CheckOptions{true, false}).delta;
    CHECK(entry_is(d, "k'", "![int].end"));
  }
  SUBCASE("the three-thread path") {
    SessionEnv d = check({}, testing::golden("path").body).delta;
    CHECK(entry_is_bottom(d, "k"));
    CHECK(entry_is_bottom(d, "k'"));
  }
  SUBCASE("branching_service and pay_after_service are well typed and closed") {
    for (const char* name : {"branching_service", "pay_after_service"}) {
      SourceFile f = testing::golden(name);
      CHECK(check(f.env, f.body).delta.empty());
    }
  }
}

TEST_CASE("typing errors name the violated rule") {
  SourceFile f = parse_source("sessions k; env a : <![int].end>; 0");
  CHECK(rule_of(f.env, parse_process("sessions k; k!(1) | k!(2)")) != "");
  CHECK(rule_of(f.env, parse_process("sessions k; k?(x).k!(x) | k!(1).k!(2)")) != "");
  CHECK(rule_of(f.env, parse_process("sessions k; k!((k))")) != "");
  CHECK(rule_of(f.env, parse_process("sessions k; env a : <![int].end>; a(t).t?(x)")) != "");
  CHECK(rule_of(f.env, parse_process("sessions k; k!(1) | k?(x) | k?(y)")) != "");
  CHECK(rule_of(f.env, parse_process("sessions k; if 1 then k!(1) else k!(2)")) != "");
  CHECK(rule_of(f.env, parse_process("sessions k; if true then k!(1) else k?(x)")) != "");
  CHECK(rule_of(f.env, parse_process("sessions k; k?(x).k!(x + 1) | k!(true).k?(y)")) != "");
  CHECK(rule_of(f.env, parse_process("sessions k; new k . k!(1)")) != "");
}

TEST_CASE("branches agree up to closing channels") {
  CHECK(well_typed({}, parse_process("sessions k, t; k >> { a: t!(1), b: t!(2) }")));
  CHECK_FALSE(well_typed({}, parse_process("sessions k, t; k >> { a: t!(1), b: t?(x) }")));
  CHECK(well_typed({}, parse_process("sessions k, t; if true then (k!(1) | k?(x)) else 0")));
}

TEST_CASE("delegation") {
  SessionEnv d = check({}, testing::golden("delegation").body).delta;
  for (const auto& [k, e] : d) CHECK(e.is_bottom());
  SessionEnv out = check({}, parse_process("sessions k, t; k!((t)).0")).delta;
  CHECK(entry_is(out, "k", "![end].end"));
}

TEST_CASE("programs") {
  CHECK(is_program(testing::golden("buyer_seller").body));
  CHECK_FALSE(is_program(testing::golden("restricted_wait").body));
  CHECK_FALSE(is_program(testing::golden("path").body));
  CHECK(is_program(testing::golden("branching_service").body));
}

TEST_CASE("generated processes are well typed, also under the relaxed rule and in normal form") {
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    testing::Generator gen(seed, testing::GenConfig{3, 8, 0.3});
    testing::Generated g = seed % 2 ? gen.process() : gen.program();
    CAPTURE(print_process(g.process));
    Typing strict = check(g.gamma, g.process);
    Typing relaxed = check(g.gamma, g.process, CheckOptions{true, false});
    CHECK(env_equal_mod_end(strict.delta, relaxed.delta));
    CHECK(env_equal_mod_end(check(g.gamma, normal_form(g.process)).delta, strict.delta));
    if (seed % 2 == 0) {
      CHECK(is_program(g.process));
      CHECK(strict.delta.empty());
    }
  }
}
