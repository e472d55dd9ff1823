#include <gtest/gtest.h>

#include "actordb/common/error.hpp"
#include "actordb/security/access.hpp"
#include "actordb/security/admin_dsl.hpp"
#include "actordb/security/audit.hpp"
#include "actordb/security/stats.hpp"
#include "actordb/security/verify.hpp"

using namespace actordb;
using namespace actordb::security;

namespace {

AccessRuleSet rules_of(const std::string& script) {
  AccessRuleSet rs;
  for (const auto& c : parse_admin_script(script)) {
    if (std::holds_alternative<RevokeAll>(c)) rs.revoke_all();
    if (auto* g = std::get_if<Grant>(&c)) rs.add({g->subject, g->objects});
  }
  return rs;
}

Decision check(const AccessRuleSet& rs, const char* ct, const char* cn, const char* cm, const char* tt,
               const char* tn, const char* tm) {
  return rs.check(CallerFrame{{ct, cn}, cm}, CallTarget{{tt, tn}, tm});
}

}  // namespace

TEST(AdminDsl, ParsesCreateDropAndKeywordsAnyCase) {
  auto cmds = parse_admin_script("create actors of type Cart with names in (1, 2);\n"
                                 "Drop Actors Of Type Cart With Names In ('two words');");
  ASSERT_EQ(cmds.size(), 2u);
  auto& c = std::get<CreateActors>(cmds[0]);
  EXPECT_EQ(c.type_name, "Cart");
  EXPECT_EQ(c.names, (std::vector<std::string>{"1", "2"}));
  EXPECT_EQ(std::get<DropActors>(cmds[1]).names, std::vector<std::string>{"two words"});
}

TEST(AdminDsl, PrettyPrintReparsesIdentically) {
  auto cmds = parse_admin_script(
      "REVOKE ACCESS TO ACTORS OF TYPE ALL FROM ACTORS OF TYPE ALL;"
      "GRANT ACTORS OF TYPE A WITH METHODS IN (m) WITH NAMES IN (x) ACCESS TO ACTORS OF TYPE B "
      "AND ACCESS TO ACTORS OF TYPE C WITH METHODS IN (p, q);"
      "CREATE ACTORS OF TYPE A WITH NAMES IN ('it''s');");
  EXPECT_EQ(parse_admin_script(pretty_print(cmds)), cmds);
}

TEST(AdminDsl, SyntaxErrorCarriesPosition) {
  try {
    parse_admin_script("GRANT ACTORS OF TYPE Cart\n  ACCESS ACTORS OF TYPE B;");
    FAIL();
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.code(), ErrorCode::SyntaxError);
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 10u);
    EXPECT_EQ(e.found(), "'ACTORS'");
  }
}

TEST(AdminDsl, MissingSemicolonIsSyntaxError) {
  EXPECT_THROW(parse_admin_script("CREATE ACTORS OF TYPE A WITH NAMES IN (1)"), SyntaxError);
  EXPECT_THROW(parse_admin_script("CREATE ACTORS OF TYPE A WITH NAMES IN ();"), SyntaxError);
}

TEST(Access, OpenUntilRevoke) {
  AccessRuleSet rs;
  EXPECT_EQ(check(rs, "A", "1", "m", "B", "1", "n"), Decision::Allow);
  rs.revoke_all();
  EXPECT_EQ(check(rs, "A", "1", "m", "B", "1", "n"), Decision::Deny);
  EXPECT_EQ(rs.check(std::nullopt, {{"B", "1"}, "n"}), Decision::Allow);
}

TEST(Access, MethodGrantAndNameNarrowing) {
  auto rs = rules_of(
      "REVOKE ACCESS TO ACTORS OF TYPE ALL FROM ACTORS OF TYPE ALL;"
      "GRANT ACTORS OF TYPE A WITH METHODS IN (m) ACCESS TO ACTORS OF TYPE B WITH METHODS IN (n);"
      "GRANT ACTORS OF TYPE A WITH NAMES IN (7) ACCESS TO ACTORS OF TYPE B WITH NAMES IN (1);");
  EXPECT_EQ(check(rs, "A", "3", "m", "B", "9", "n"), Decision::Allow);
  EXPECT_EQ(check(rs, "A", "3", "m", "B", "9", "other"), Decision::Deny);
  EXPECT_EQ(check(rs, "A", "3", "other", "B", "9", "n"), Decision::Deny);
  EXPECT_EQ(check(rs, "A", "7", "m", "B", "1", "n"), Decision::Allow);
  EXPECT_EQ(check(rs, "A", "7", "m", "B", "9", "n"), Decision::Deny);
  EXPECT_EQ(check(rs, "C", "7", "m", "B", "1", "n"), Decision::Deny);
}

TEST(Access, DuplicateGrantKeptOnce) {
  auto rs = rules_of("GRANT ACTORS OF TYPE A ACCESS TO ACTORS OF TYPE B;GRANT ACTORS OF TYPE A ACCESS TO ACTORS OF TYPE B;");
  EXPECT_EQ(rs.rules().size(), 1u);
}

TEST(Access, ValidateFlagsUnknownNamesAndUncoveredNameScope) {
  Catalog cat{[](const std::string& t) { return t == "A" || t == "B"; },
              [](const std::string&, const std::string& m) { return m == "m"; }};
  auto expect = [&](const std::string& script, ErrorCode code) {
    try {
      rules_of(script).validate(cat);
      FAIL() << script;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), code) << script;
    }
  };
  expect("GRANT ACTORS OF TYPE Z ACCESS TO ACTORS OF TYPE B;", ErrorCode::UnknownType);
  expect("GRANT ACTORS OF TYPE A WITH METHODS IN (zz) ACCESS TO ACTORS OF TYPE B;", ErrorCode::UnknownMethod);
  expect("REVOKE ACCESS TO ACTORS OF TYPE ALL FROM ACTORS OF TYPE ALL;"
         "GRANT ACTORS OF TYPE A WITH NAMES IN (1) ACCESS TO ACTORS OF TYPE B;",
         ErrorCode::RuleConflict);
  EXPECT_NO_THROW(rules_of("GRANT ACTORS OF TYPE A ACCESS TO ACTORS OF TYPE B WITH METHODS IN (m);").validate(cat));
}

TEST(Verify, ReportsDeniedAndNameRestrictedEdges) {
  auto rs = rules_of(
      "REVOKE ACCESS TO ACTORS OF TYPE ALL FROM ACTORS OF TYPE ALL;"
      "GRANT ACTORS OF TYPE A ACCESS TO ACTORS OF TYPE B;"
      "GRANT ACTORS OF TYPE A WITH NAMES IN (1) ACCESS TO ACTORS OF TYPE B WITH NAMES IN (2);");
  auto f = verify_call_graph(rs, {{"A", "m", "B", "n"}, {"A", "m", "C", "n"}});
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f[0].edge.callee_type, "B");
  EXPECT_EQ(f[0].kind, VerifyFinding::Kind::NameRestricted);
  EXPECT_EQ(f[1].edge.callee_type, "C");
  EXPECT_EQ(f[1].kind, VerifyFinding::Kind::Denied);
}

TEST(Audit, KeepsNewestAndRoundTripsJson) {
  AuditLog log(3);
  for (int i = 0; i < 5; ++i)
    log.append({0, i, i % 2 ? std::optional<CallerFrame>(CallerFrame{{"A", "1"}, "m"}) : std::nullopt,
                {{"B", std::to_string(i)}, "n"}, i % 2 ? Decision::Deny : Decision::Allow, 9});
  EXPECT_EQ(log.total(), 5u);
  auto tail = log.tail(10);
  ASSERT_EQ(tail.size(), 3u);
  EXPECT_EQ(tail.front().seq, 3u);
  for (const auto& r : tail) EXPECT_EQ(audit_from_json(to_json_line(r)), r);
}

TEST(Stats, CountsPerActor) {
  StatsRegistry s;
  ActorAddress a{"A", "1"};
  s.invoked(a, 100);
  s.invoked(a, 50);
  s.committed(a);
  s.aborted(a, txn::AbortReason::ScanValidation);
  s.denied(a);
  auto snap = s.snapshot().at(a);
  EXPECT_EQ(snap.invocations, 2u);
  EXPECT_EQ(snap.busy_ns, 150u);
  EXPECT_EQ(snap.total_aborts(), 1u);
  EXPECT_EQ(snap.denied, 1u);
  EXPECT_NE(stats_to_json(s.snapshot()).find("\"ScanValidation\": 1"), std::string::npos);
  s.forget(a);
  EXPECT_TRUE(s.snapshot().empty());
}
