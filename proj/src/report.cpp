#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "sovkit/cli.hpp"
#include "sovkit/diagram_json.hpp"

namespace sovkit {

using json = nlohmann::json;

namespace {

// non-finite values are written as null and read back as +inf
json num(double v)
{
    if (std::isfinite(v)) return v;
    return nullptr;
}

double num_of(const json& j)
{
    if (j.is_null()) return std::numeric_limits<double>::infinity();
    return j.get<double>();
}

json cnum(cplx z) { return {{"re", num(z.real())}, {"im", num(z.imag())}}; }
cplx cnum_of(const json& j) { return {num_of(j.at("re")), num_of(j.at("im"))}; }

}  // namespace

int Report::passed() const
{
    int k = 0;
    for (auto& r : rows) k += r.pass;
    return k;
}

int Report::failed() const { return static_cast<int>(rows.size()) - passed(); }

void finalize_record(CheckRecord& r)
{
    r.abs_err = std::abs(r.lhs - r.rhs);
    const double s = std::abs(r.rhs);
    r.rel_err = s > 0 ? r.abs_err / s : r.abs_err;
    r.pass = std::isfinite(r.rel_err) && (s > 0 ? r.rel_err <= r.tol : r.abs_err <= r.tol);
}

json report_to_json(const Report& r, bool with_timing)
{
    json rows = json::array();
    for (auto& c : r.rows) {
        json o = {{"suite", c.suite},         {"name", c.name},       {"paper_anchor", c.paper_anchor},
                  {"lhs", cnum(c.lhs)},       {"rhs", cnum(c.rhs)},   {"abs_err", num(c.abs_err)},
                  {"rel_err", num(c.rel_err)}, {"tol", num(c.tol)},   {"pass", c.pass},
                  {"evals", c.evals},         {"detail", c.detail}};
        if (with_timing) o["wall_time"] = c.wall_time;
        rows.push_back(o);
    }
    json tables = json::array();
    for (auto& t : r.tables) {
        json tr = json::array();
        for (auto& x : t.rows)
            tr.push_back({{"n_max", x.n_max},
                          {"nu_cutoff", x.nu_cutoff},
                          {"raw_err", num(x.raw_err)},
                          {"accel_err", num(x.accel_err)}});
        tables.push_back({{"name", t.name}, {"paper_anchor", t.paper_anchor}, {"rows", tr}});
    }
    return {{"suite", r.suite},
            {"seed", r.seed},
            {"budget_exceeded", r.budget_exceeded},
            {"summary", {{"total", r.rows.size()}, {"passed", r.passed()}, {"failed", r.failed()}}},
            {"rows", rows},
            {"tables", tables}};
}

Report report_from_json(const json& j)
{
    try {
        Report r;
        r.suite = j.at("suite").get<std::string>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.budget_exceeded = j.value("budget_exceeded", false);
        for (auto& o : j.at("rows")) {
            CheckRecord c;
            c.suite = o.value("suite", "");
            c.name = o.at("name").get<std::string>();
            c.paper_anchor = o.at("paper_anchor").get<std::string>();
            c.lhs = cnum_of(o.at("lhs"));
            c.rhs = cnum_of(o.at("rhs"));
            c.abs_err = num_of(o.at("abs_err"));
            c.rel_err = num_of(o.at("rel_err"));
            c.tol = num_of(o.at("tol"));
            c.pass = o.at("pass").get<bool>();
            c.evals = o.value("evals", 0L);
            c.wall_time = o.value("wall_time", 0.0);
            c.detail = o.value("detail", "");
            r.rows.push_back(c);
        }
        if (j.contains("tables"))
            for (auto& t : j["tables"]) {
                ConvergenceTable ct;
                ct.name = t.at("name").get<std::string>();
                ct.paper_anchor = t.value("paper_anchor", "");
                for (auto& x : t.at("rows"))
                    ct.rows.push_back({x.at("n_max").get<int>(), x.at("nu_cutoff").get<double>(),
                                       num_of(x.at("raw_err")), num_of(x.at("accel_err"))});
                r.tables.push_back(ct);
            }
        return r;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("report: ") + e.what());
    }
}

std::string report_text(const Report& r)
{
    std::size_t wn = 4, wa = 12;
    for (auto& c : r.rows) {
        wn = std::max(wn, c.name.size());
        wa = std::max(wa, c.paper_anchor.size());
    }
    std::ostringstream o;
    char buf[512];
    auto line = [&](const std::string& a, const std::string& b, const std::string& rest) {
        o << a << std::string(wn - a.size() + 2, ' ') << b << std::string(wa - b.size() + 2, ' ') << rest << '\n';
    };
    o << "suite " << r.suite << "  seed " << r.seed << (r.budget_exceeded ? "  (budget exceeded, partial)" : "")
      << '\n';
    std::snprintf(buf, sizeof buf, "%-10s %-10s %-10s %-6s %8s", "rel_err", "abs_err", "tol", "pass", "time[s]");
    line("name", "paper_anchor", buf);
    for (auto& c : r.rows) {
        std::snprintf(buf, sizeof buf, "%-10.3g %-10.3g %-10.3g %-6s %8.2f", c.rel_err, c.abs_err, c.tol,
                      c.pass ? "PASS" : "FAIL", c.wall_time);
        line(c.name, c.paper_anchor, buf);
        if (!c.pass && !c.detail.empty()) o << "    " << c.detail << '\n';
    }
    for (auto& t : r.tables) {
        o << "\ntable " << t.name << " (" << t.paper_anchor << ")\n";
        std::snprintf(buf, sizeof buf, "  %6s %10s %12s %12s\n", "n_max", "nu_cutoff", "raw_err", "accel_err");
        o << buf;
        for (auto& x : t.rows) {
            std::snprintf(buf, sizeof buf, "  %6d %10.1f %12.3e %12.3e\n", x.n_max, x.nu_cutoff, x.raw_err,
                          x.accel_err);
            o << buf;
        }
    }
    o << "\n" << r.rows.size() << " checks, " << r.passed() << " passed, " << r.failed() << " failed\n";
    return o.str();
}

void emit_report(const Report& r, const std::string& path, const std::string& format)
{
    std::string body;
    if (format == "json")
        body = dump_json(report_to_json(r)) + "\n";
    else if (format == "text")
        body = report_text(r);
    else
        throw ConfigError("unknown report format '" + format + "'");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f << body;
    f.close();
    if (!f) throw IoError("write to " + path + " failed");
}

}  // namespace sovkit
