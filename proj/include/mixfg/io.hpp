#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace mixfg {

enum class OutputFormat { Csv, Json };

OutputFormat parse_format(const std::string& name); // "csv" or "json"

// Numeric results of one experiment run: a rectangular table plus named
// run-level totals and the configuration that produced it.
struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::pair<std::string, double>> totals;
    nlohmann::json config = nlohmann::json::object();
};

std::string format_double(double v); // %.12g, locale independent

// CSV layout: "# config <json>" line, header line, data rows, then one
// "# total <name> <value>" line per total. JSON layout: exactly the keys
// config (with the column names inside), rows, totals. Both are byte-stable
// for identical input.
void write_results(const ResultTable& table, const std::string& path, OutputFormat format);
std::string render_results(const ResultTable& table, OutputFormat format);

ResultTable read_results_csv(const std::string& path);

// One real number per line; blank lines and '#' comments are skipped.
std::vector<double> read_signal(const std::string& path);

} // namespace mixfg
