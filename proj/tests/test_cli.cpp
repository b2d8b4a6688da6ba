#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "sovkit/cli.hpp"
#include "sovkit/diagram_json.hpp"

using namespace sovkit;

namespace {

std::string slurp(const std::string& p)
{
    std::ifstream f(p);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

void same_rows(const Report& a, const Report& b)
{
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        const auto &x = a.rows[i], &y = b.rows[i];
        CHECK(x.suite == y.suite);
        CHECK(x.name == y.name);
        CHECK(x.paper_anchor == y.paper_anchor);
        CHECK(x.lhs == y.lhs);
        CHECK(x.rhs == y.rhs);
        CHECK(x.abs_err == y.abs_err);
        CHECK(x.rel_err == y.rel_err);
        CHECK(x.tol == y.tol);
        CHECK(x.pass == y.pass);
        CHECK(x.evals == y.evals);
        CHECK(x.wall_time == y.wall_time);
        CHECK(x.detail == y.detail);
    }
}

}  // namespace

TEST_CASE("pass rule")
{
    CheckRecord r;
    r.lhs = 1.0 + 1e-7;
    r.rhs = 1.0;
    r.tol = 1e-6;
    finalize_record(r);
    CHECK(r.pass);
    r.tol = 1e-8;
    finalize_record(r);
    CHECK_FALSE(r.pass);
    // rhs = 0 falls back to the absolute error
    r.lhs = 2e-4;
    r.rhs = 0.0;
    r.tol = 1e-3;
    finalize_record(r);
    CHECK(r.pass);
    CHECK(r.rel_err == r.abs_err);
}

TEST_CASE("unknown suite and bad config")
{
    SuiteConfig c;
    c.suite = "bogus";
    CHECK_THROWS_AS(run_suite(c), ConfigError);
    c.suite = "gamma";
    c.tolerances["gamma"] = -1.0;
    CHECK_THROWS_AS(run_suite(c), ConfigError);
    c.tolerances.clear();
    c.chain_file = "/nonexistent/chain.json";
    CHECK_THROWS_AS(run_suite(c), ConfigError);
}

TEST_CASE("empty report is valid JSON with zero rows")
{
    Report r;
    r.suite = "gamma";
    auto j = nlohmann::json::parse(dump_json(report_to_json(r)));
    CHECK(j["rows"].empty());
    CHECK(j["summary"]["total"] == 0);
    Report back = report_from_json(j);
    CHECK(back.rows.empty());
    CHECK(back.all_pass());
}

TEST_CASE("gamma suite passes and round-trips")
{
    SuiteConfig c;
    c.suite = "gamma";
    Report r = run_suite(c);
    REQUIRE(r.rows.size() == 3);
    CHECK(r.all_pass());
    for (auto& row : r.rows) {
        CHECK(row.evals == 1000);
        CHECK(!row.paper_anchor.empty());
    }

    const std::string p = "test_cli_report.json";
    emit_report(r, p, "json");
    Report back = report_from_json(nlohmann::json::parse(slurp(p)));
    std::remove(p.c_str());
    CHECK(back.suite == r.suite);
    CHECK(back.seed == r.seed);
    same_rows(back, r);

    std::string txt = report_text(r);
    CHECK(txt.find("paper_anchor") != std::string::npos);
    CHECK(txt.find("Gamma recurrence") != std::string::npos);
    CHECK_THROWS_AS(emit_report(r, "/nonexistent/dir/r.json", "json"), IoError);
    CHECK_THROWS_AS(emit_report(r, p, "xml"), ConfigError);
}

TEST_CASE("failed and non-finite rows round-trip")
{
    Report r;
    r.suite = "eigen";
    r.seed = 9;
    CheckRecord c;
    c.suite = "eigen";
    c.name = "x";
    c.paper_anchor = "y";
    c.abs_err = c.rel_err = std::numeric_limits<double>::infinity();
    c.tol = 1e-3;
    c.detail = "NotConverged: z";
    r.rows.push_back(c);
    r.tables.push_back({"t", "a", {{4, 4.0, 1e-2, 1e-5}, {8, 8.0, 5e-3, 1e-8}}});
    Report b = report_from_json(report_to_json(r));
    same_rows(b, r);
    REQUIRE(b.tables.size() == 1);
    CHECK(b.tables[0].rows[1].accel_err == 1e-8);
    CHECK_FALSE(b.all_pass());
}

TEST_CASE("same seed gives identical reports modulo timing")
{
    SuiteConfig c;
    c.suite = "gamma";
    c.seed = 123;
    auto a = dump_json(report_to_json(run_suite(c), false));
    auto b = dump_json(report_to_json(run_suite(c), false));
    CHECK(a == b);
    c.seed = 124;
    CHECK(dump_json(report_to_json(run_suite(c), false)) != a);

    c.suite = "scalar-products";
    auto s1 = dump_json(report_to_json(run_suite(c), false));
    CHECK(s1 == dump_json(report_to_json(run_suite(c), false)));
}

TEST_CASE("tolerance override")
{
    SuiteConfig c;
    c.suite = "gamma";
    c.tolerances["gamma"] = 1e-30;
    Report r = run_suite(c);
    CHECK_FALSE(r.all_pass());
    for (auto& row : r.rows) CHECK(row.tol == 1e-30);
}

TEST_CASE("budget exhaustion yields a flagged partial report")
{
    SuiteConfig c;
    c.suite = "rules";
    c.budget = 1e-9;
    try {
        run_suite(c);
        FAIL("expected BudgetExceeded");
    } catch (const BudgetExceeded& e) {
        CHECK(e.partial.budget_exceeded);
        CHECK(e.partial.rows.size() < 80);
        CHECK(report_to_json(e.partial)["budget_exceeded"] == true);
    }
}

TEST_CASE("gustafson suite: N = 1 rows meet 1e-6")
{
    SuiteConfig c;
    c.suite = "gustafson";
    Report r = run_suite(c);
    int n1 = 0;
    for (auto& row : r.rows) {
        if (row.name.find("N=1/") == std::string::npos) continue;
        ++n1;
        CHECK_MESSAGE(row.rel_err <= 1e-6, row.name);
    }
    CHECK(n1 >= 8);
    CHECK(r.tables.size() == 4);
    CHECK(r.all_pass());
}
