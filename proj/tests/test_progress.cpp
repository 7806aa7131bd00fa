#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "generator.hpp"
#include "helpers.hpp"
#include "spi/congruence.hpp"
#include "spi/depgraph.hpp"
#include "spi/progress.hpp"
#include "spi/semantics.hpp"
#include "spi/typing.hpp"

using namespace spi;

namespace {

ServiceEnv merged(ServiceEnv g, const ServiceEnv& ext) {
  for (const auto& [a, s] : ext) g[a] = s;
  return g;
}

ProgressResult progress_of(const char* name, int depth = 10) {
  SourceFile f = testing::golden(name);
  return check_progress(f.env, f.body, ProgressOptions{depth});
}

} // namespace

TEST_CASE("inhabitants of the worked types") {
  Name k = Name::free("k");
  SUBCASE("end") { CHECK(inhabit(ty::end(), k).process->kind == ProcKind::Inact); }
  SUBCASE("session input whose payload is itself used") {
    Inhabitant i = inhabit(parse_type("?[?[int].![int].end].![int].end"), k);
    CHECK(print_process(i.process) == "k?((k')).(k!(1).0 | k'?(x).k'!(1).0)");
    CHECK(i.extension.empty());
  }
  SUBCASE("the buy type") {
    Inhabitant i = inhabit(parse_type("![int].&{ok: ![string].end, stop: end}"), k);
    CHECK(print_process(i.process) == "k!(1).k >> { ok: k!(\"1\").0, stop: 0 }");
  }
  SUBCASE("selection takes the first label") {
    Inhabitant i = inhabit(parse_type("+{b: end, a: ![bool].end}"), k);
    CHECK(print_process(i.process) == "k << b.0");
  }
  SUBCASE("a service payload gets a fresh service") {
    Inhabitant i = inhabit(parse_type("![<![int].end>].end"), k);
    REQUIRE(i.extension.size() == 1);
    CHECK(i.extension.begin()->first.text().rfind("#inh", 0) == 0);
    Typing t = check(i.extension, i.process);
    REQUIRE(t.delta.size() == 1);
    CHECK(type_equal(t.delta.at(k).type(), parse_type("![<![int].end>].end")));
  }
  SUBCASE("a session payload is delegated before the continuation") {
    SessionType a = parse_type("![?[int].end].?[bool].end");
    Inhabitant i = inhabit(a, k);
    Typing t = check_against(i.extension, i.process, {{k, SessionEntry::of(a)}});
    CHECK(type_equal(t.delta.at(k).type(), a));
    CHECK(redexes(i.process).empty());
  }
}

TEST_CASE("partners") {
  SUBCASE("an open request is answered by the service") {
    SourceFile f = parse_source("env a : <![int].end>; a<k>.k?(x).0");
    auto q = construct_partner(f.env, f.body);
    REQUIRE(q.has_value());
    CHECK(q->construction == 1);
    CHECK(alpha_equivalent(q->process, parse_process("env a : <![int].end>; a(k).k!(1).0")));
    Process both = proc::par({f.body, q->process});
    auto rs = redexes(both);
    REQUIRE(rs.size() == 1);
    Process after = step(both, rs[0]);
    auto rs2 = redexes(after);
    REQUIRE(rs2.size() == 1);
    CHECK(step(after, rs2[0])->kind == ProcKind::Inact);
  }
  SUBCASE("an open session is answered by the dual inhabitant") {
    SourceFile f = parse_source("sessions k; k!(5).0");
    auto q = construct_partner(f.env, f.body);
    REQUIRE(q.has_value());
    CHECK(q->construction == 2);
    CHECK(print_process(q->process) == "k?(x).0");
  }
  SUBCASE("a reducible process is rejected") {
    SourceFile f = parse_source("new k . (k?(x).0 | k!(1).0)");
    CHECK_THROWS(construct_partner(f.env, f.body));
  }
}

TEST_CASE("progress of the worked examples") {
  CHECK(progress_of("buyer_seller").kind == ProgressKind::Certificate);
  CHECK(progress_of("branching_service").kind == ProgressKind::Certificate);
  CHECK(progress_of("pay_after_service").kind == ProgressKind::Certificate);
  CHECK(progress_of("path").kind == ProgressKind::Certificate);
  CHECK(progress_of("delegation").kind == ProgressKind::Certificate);

  ProgressResult cyc = progress_of("circular_wait");
  CHECK(cyc.kind == ProgressKind::Counterexample);
  CHECK_FALSE(cyc.transparent);

  ProgressResult loop = progress_of("looping", 4);
  REQUIRE(loop.kind == ProgressKind::Counterexample);
  NormalForm sub = flatten(loop.sub);
  REQUIRE(sub.threads.size() == 2);
  for (const Process& t : sub.threads) CHECK(t->kind == ProcKind::Input);

  CHECK(progress_of("blocked_delegation").kind == ProgressKind::Counterexample);

  SourceFile bad = parse_source("sessions k; k!(1) | k!(2)");
  CHECK(check_progress(bad.env, bad.body).kind == ProgressKind::IllTyped);
}

TEST_CASE("a tiny subset budget is reported as inconclusive, never as a certificate") {
  SourceFile f = testing::golden("buyer_seller");
  ProgressResult r = check_progress(f.env, f.body, ProgressOptions{10, 1});
  CHECK(r.kind != ProgressKind::Certificate);
}

TEST_CASE("generated inhabitants type exactly, are transparent and irreducible") {
  Name k = Name::free("k");
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    testing::Generator gen(seed);
    SessionType a = gen.type();
    CAPTURE(print_type(a));
    Inhabitant i = inhabit(a, k);
    SessionEnv expected{{k, SessionEntry::of(a)}};
    CHECK(env_equal_mod_end(check_against(i.extension, i.process, expected).delta, expected));
    CHECK(is_transparent(i.extension, i.process).kind == TransparencyKind::Transparent);
    CHECK(redexes(i.process).empty());
  }
}

TEST_CASE("generated stuck processes have stuck partners that unblock them") {
  int tried = 0;
  for (std::uint64_t seed = 0; tried < 150 && seed < 5000; ++seed) {
    testing::Generator gen(seed, testing::GenConfig{3, 6});
    testing::Generated g = gen.process();
    Process p = normal_form(g.process);
    if (!redexes(p).empty() || !has_live_channels(p)) continue;
    if (is_transparent(g.gamma, p).kind != TransparencyKind::Transparent) continue;
    ++tried;
    CAPTURE(print_process(p));
    auto q = construct_partner(g.gamma, p);
    REQUIRE(q.has_value());
    CHECK(redexes(q->process).empty());
    ServiceEnv ext = merged(g.gamma, q->extension);
    Process both = proc::par({p, q->process});
    CHECK(well_typed(ext, both));
    CHECK_FALSE(redexes(both).empty());
  }
  CHECK(tried == 150);
}
