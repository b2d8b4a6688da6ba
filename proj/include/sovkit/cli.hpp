#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sovkit/cfield.hpp"
#include "sovkit/errors.hpp"

namespace sovkit {

struct SuiteConfig {
    std::string suite = "all";
    std::optional<std::string> chain_file;
    // suite name -> tolerance replacing the built-in one for every row of that suite
    std::map<std::string, double> tolerances;
    std::uint64_t seed = 1;
    // seconds; 0 = unlimited
    double budget = 0.0;
};

struct CheckRecord {
    std::string suite;
    std::string name;
    std::string paper_anchor;
    cplx lhs{0.0};
    cplx rhs{0.0};
    double abs_err = 0.0;
    double rel_err = 0.0;
    double tol = 0.0;
    bool pass = false;
    long evals = 0;
    double wall_time = 0.0;
    // error kind and message when the check threw, or extra data
    std::string detail;
};

struct TableRow {
    int n_max = 0;
    double nu_cutoff = 0.0;
    double raw_err = 0.0;
    double accel_err = 0.0;
};

struct ConvergenceTable {
    std::string name;
    std::string paper_anchor;
    std::vector<TableRow> rows;
};

struct Report {
    std::string suite;
    std::uint64_t seed = 0;
    bool budget_exceeded = false;
    std::vector<CheckRecord> rows;
    std::vector<ConvergenceTable> tables;

    int passed() const;
    int failed() const;
    bool all_pass() const { return failed() == 0; }
};

// Fills abs_err, rel_err and pass from lhs, rhs and tol. rel_err = abs_err when rhs = 0.
void finalize_record(CheckRecord& r);

const std::vector<std::string>& suite_names();

// Throws ConfigError for unknown suites or bad config, BudgetExceeded with the
// partial report when the budget runs out.
Report run_suite(const SuiteConfig& cfg);

struct BudgetExceeded : Error {
    Report partial;
    explicit BudgetExceeded(Report r) : Error("BudgetExceeded", "time budget exhausted"), partial(std::move(r)) {}
};

nlohmann::json report_to_json(const Report& r, bool with_timing = true);
Report report_from_json(const nlohmann::json& j);
std::string report_text(const Report& r);

// format: "json" or "text"; throws IoError, ConfigError for unknown formats
void emit_report(const Report& r, const std::string& path, const std::string& format);

}  // namespace sovkit
