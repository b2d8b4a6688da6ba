#include <chrono>
#include <cstdio>
#include <functional>
#include <map>

#include "sovkit/cli.hpp"

using namespace sovkit;

namespace {

struct Run {
    Report report;
    double seconds = 0.0;
    std::string error;
};

Run run(const std::string& suite)
{
    Run r;
    SuiteConfig c;
    c.suite = suite;
    auto t0 = std::chrono::steady_clock::now();
    try {
        r.report = run_suite(c);
    } catch (const BudgetExceeded& e) {
        r.report = e.partial;
        r.error = e.what();
    } catch (const std::exception& e) {
        r.error = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

bool starts(const std::string& s, const std::string& p) { return s.rfind(p, 0) == 0; }

struct Tally {
    int total = 0, passed = 0;
};

Tally tally(const Report& r, const std::vector<std::string>& prefixes)
{
    Tally t;
    for (auto& row : r.rows)
        for (auto& p : prefixes)
            if (starts(row.name, p)) {
                ++t.total;
                t.passed += row.pass;
                break;
            }
    return t;
}

int count(const Report& r, const std::string& prefix) { return tally(r, {prefix}).total; }

}  // namespace

int main()
{
    std::map<std::string, Run> runs;
    for (const char* s : {"gamma", "rules", "scalar-products", "eigen", "gustafson"}) {
        std::fprintf(stderr, "running %s...\n", s);
        runs[s] = run(s);
    }

    int failed = 0;
    auto report = [&](int k, const std::string& what, const Run& r, Tally t, bool extra, double limit) {
        bool ok = r.error.empty() && t.total > 0 && t.passed == t.total && extra && (limit <= 0 || r.seconds < limit);
        failed += !ok;
        std::printf("criterion %d: %s  %s  (%d/%d checks, suite time %.1f s%s)\n", k, ok ? "PASS" : "FAIL",
                    what.c_str(), t.passed, t.total, r.seconds,
                    limit > 0 ? (", limit " + std::to_string(int(limit)) + " s").c_str() : "");
        if (!r.error.empty()) std::printf("    %s\n", r.error.c_str());
    };

    const Run& g = runs["gamma"];
    bool draws = true;
    for (auto& row : g.report.rows) draws = draws && row.evals >= 1000;
    report(1, "Gamma recurrence and reflection over 1000 draws", g, tally(g.report, {""}), draws, 5);

    const Run& ru = runs["rules"];
    bool twenty = count(ru.report, "chain/") >= 20 && count(ru.report, "star-triangle/") >= 20 &&
                  count(ru.report, "fourier/") >= 20 && count(ru.report, "exchange/") >= 20;
    report(2, "chain, star-triangle, Fourier and exchange rules", ru, tally(ru.report, {""}), twenty, 600);

    const Run& sp = runs["scalar-products"];
    report(3, "B-B diagram reduction, confluence, sign and quadrature", sp, tally(sp.report, {"bb-n2/", "bb-n3/"}),
           count(sp.report, "bb-n3/confluence") == 1 && count(sp.report, "bb-n2/quadrature") == 1, 0);

    const Run& ei = runs["eigen"];
    report(4, "eigen relations at N = 2", ei, tally(ei.report, {""}), count(ei.report, "config/") >= 50, 0);

    report(5, "closed-form scalar products", sp, tally(sp.report, {"closed/"}), count(sp.report, "closed/") == 3, 0);

    const Run& gu = runs["gustafson"];
    bool tables = count(gu.report, "table/") >= 2 && !gu.report.tables.empty() &&
                  count(gu.report, "first/N=1/") > 0 && count(gu.report, "first/N=2/") > 0 &&
                  count(gu.report, "second/N=1/") > 0 && count(gu.report, "j-omega/N=2/") > 0;
    report(6, "Gustafson integrals, J_omega and convergence tables", gu, tally(gu.report, {""}), tables, 1200);

    report(7, "measure and normalization constants", sp, tally(sp.report, {"measure/", "constants/"}), true, 0);

    report(8, "eps -> 0 behaviour of the regularized pairing", sp, tally(sp.report, {"eps/"}),
           count(sp.report, "eps/cauchy-monotone") == 1, 0);

    std::printf("%s: %d of 8 criteria failed\n", failed ? "FAIL" : "PASS", failed);
    return failed ? 1 : 0;
}
