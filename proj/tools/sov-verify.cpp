#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "sovkit/cli.hpp"
#include "sovkit/diagram_json.hpp"
#include "sovkit/sov.hpp"

using namespace sovkit;
using json = nlohmann::json;

namespace {

json read_json(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read " + path);
    try {
        return json::parse(f);
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

void write_text(const std::string& path, const std::string& body)
{
    if (path.empty() || path == "-") {
        std::cout << body;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f << body;
    if (!f) throw IoError("write to " + path + " failed");
}

cplx cnum(const json& j) { return {j.value("re", 0.0), j.value("im", 0.0)}; }

// point file: {"x": [{"n2": 2, "nu": {"re": .., "im": ..}}, ...], "p" or "z": [{"re": .., "im": ..}, ...],
// optional "rel_tol"}
json eval_point(const std::string& what, const ChainSpec& c, const json& pt)
{
    try {
        std::vector<SeparatedPoint> xs;
        for (auto& x : pt.at("x")) xs.push_back({x.at("n2").get<int>(), cnum(x.value("nu", json::object()))});
        QuadratureSpec q;
        q.rel_tol = pt.value("rel_tol", 1e-6);
        q.abs_tol = pt.value("abs_tol", 1e-12);
        std::vector<cplx> v;
        IntegralEstimate r;
        if (what == "psi") {
            for (auto& p : pt.at("p")) v.push_back(cnum(p));
            r = psi_momentum_eval(c, xs, v, q);
        } else {
            for (auto& z : pt.at("z")) v.push_back(cnum(z));
            r = phi_position_eval(c, xs, v, q);
        }
        return {{"value", {{"re", r.value.real()}, {"im", r.value.imag()}}},
                {"err", r.err},
                {"evals", r.evals},
                {"converged", r.converged}};
    } catch (const json::exception& e) {
        throw ConfigError(std::string("point: ") + e.what());
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"sov-verify: numerical checks for the SoV toolkit"};
    app.require_subcommand(1);

    SuiteConfig cfg;
    std::optional<double> tol;
    std::string out, format = "json";
    std::string chain_file;
    auto* run = app.add_subcommand("run", "run a verification suite");
    run->add_option("--suite", cfg.suite, "gamma|rules|scalar-products|eigen|gustafson|all")->required();
    run->add_option("--chain", chain_file, "chain JSON file");
    run->add_option("--seed", cfg.seed, "seed for randomized draws");
    run->add_option("--tol", tol, "tolerance replacing the built-in ones");
    run->add_option("--budget", cfg.budget, "time budget in seconds (0 = none)");
    run->add_option("--out", out, "report path (default stdout)");
    run->add_option("--format", format, "json|text")->check(CLI::IsMember({"json", "text"}));

    std::string diagram_file, reduced_out;
    auto* red = app.add_subcommand("reduce", "reduce a diagram to a closed form");
    red->add_option("--diagram", diagram_file)->required();
    red->add_option("--out", reduced_out);

    std::string what, point_file, eval_chain, eval_out;
    auto* ev = app.add_subcommand("eval", "evaluate an eigenfunction numerically");
    ev->add_option("what", what, "psi|phi")->required()->check(CLI::IsMember({"psi", "phi"}));
    ev->add_option("--chain", eval_chain)->required();
    ev->add_option("--point", point_file)->required();
    ev->add_option("--out", eval_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run) {
            if (!chain_file.empty()) cfg.chain_file = chain_file;
            if (tol) cfg.tolerances[cfg.suite] = *tol;
            Report r;
            int code = 0;
            try {
                r = run_suite(cfg);
                code = r.all_pass() ? 0 : 1;
            } catch (const BudgetExceeded& b) {
                r = b.partial;
                code = 2;
                std::cerr << "sov-verify: time budget exceeded, report is partial\n";
            }
            if (out.empty())
                std::cout << (format == "json" ? dump_json(report_to_json(r)) + "\n" : report_text(r));
            else
                emit_report(r, out, format);
            if (!out.empty() || format == "json")
                std::cerr << r.rows.size() << " checks, " << r.passed() << " passed, " << r.failed() << " failed\n";
            return code;
        }
        if (*red) {
            Diagram d = diagram_from_json(read_json(diagram_file));
            Reduction R = reduce_traced(d);
            json steps = json::array();
            for (auto& s : R.steps) steps.push_back({{"rule", rule_name(s.kind)}, {"vertex", s.vertex}, {"detail", s.detail}});
            json o = {{"closed_form", closed_form_to_json(R.result)}, {"steps", steps}};
            write_text(reduced_out, dump_json(o) + "\n");
            return 0;
        }
        if (*ev) {
            ChainSpec c = chain_from_json(read_json(eval_chain));
            write_text(eval_out, dump_json(eval_point(what, c, read_json(point_file))) + "\n");
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "sov-verify: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
