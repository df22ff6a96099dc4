#include "mixfg/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "mixfg/errors.hpp"

namespace mixfg {

OutputFormat parse_format(const std::string& name) {
    if (name == "csv") {
        return OutputFormat::Csv;
    }
    if (name == "json") {
        return OutputFormat::Json;
    }
    throw IoError("unknown output format '" + name + "' (expected csv or json)");
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

namespace {

std::string render_csv(const ResultTable& table) {
    std::string out;
    out += "# config ";
    out += table.config.dump();
    out += '\n';
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c > 0) {
            out += ',';
        }
        out += table.columns[c];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.columns.size()) {
            throw IoError("row width does not match the column count");
        }
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) {
                out += ',';
            }
            out += format_double(row[c]);
        }
        out += '\n';
    }
    for (const auto& [name, value] : table.totals) {
        out += "# total ";
        out += name;
        out += ' ';
        out += format_double(value);
        out += '\n';
    }
    return out;
}

std::string render_json(const ResultTable& table) {
    nlohmann::json config = table.config;
    config["columns"] = table.columns;
    nlohmann::json totals = nlohmann::json::object();
    for (const auto& [name, value] : table.totals) {
        totals[name] = value;
    }
    nlohmann::json doc;
    doc["config"] = config;
    doc["rows"] = table.rows;
    doc["totals"] = totals;
    return doc.dump(2) + "\n";
}

} // namespace

std::string render_results(const ResultTable& table, OutputFormat format) {
    return format == OutputFormat::Csv ? render_csv(table) : render_json(table);
}

void write_results(const ResultTable& table, const std::string& path, OutputFormat format) {
    const std::string body = render_results(table, format);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    out << body;
    out.flush();
    if (!out) {
        throw IoError("failed while writing '" + path + "'");
    }
}

ResultTable read_results_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "' for reading");
    }
    ResultTable table;
    std::string line;
    bool saw_header = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        if (line.rfind("# config ", 0) == 0) {
            try {
                table.config = nlohmann::json::parse(line.substr(9));
            } catch (const nlohmann::json::exception& e) {
                throw IoError(path + ":" + std::to_string(line_no) + ": bad config: " + e.what());
            }
            continue;
        }
        if (line.rfind("# total ", 0) == 0) {
            std::istringstream ss(line.substr(8));
            std::string name;
            double value = 0.0;
            if (!(ss >> name >> value)) {
                throw IoError(path + ":" + std::to_string(line_no) + ": bad total line");
            }
            table.totals.emplace_back(name, value);
            continue;
        }
        if (line[0] == '#') {
            continue;
        }
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ss(line);
        while (std::getline(ss, cell, ',')) {
            cells.push_back(cell);
        }
        if (!saw_header) {
            table.columns = std::move(cells);
            saw_header = true;
            continue;
        }
        if (cells.size() != table.columns.size()) {
            throw IoError(path + ":" + std::to_string(line_no) + ": row width mismatch");
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) {
            try {
                row.push_back(std::stod(c));
            } catch (const std::exception&) {
                throw IoError(path + ":" + std::to_string(line_no) + ": bad number '" + c + "'");
            }
        }
        table.rows.push_back(std::move(row));
    }
    if (!saw_header) {
        throw IoError(path + ": missing header line");
    }
    return table;
}

std::vector<double> read_signal(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "' for reading");
    }
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t begin = line.find_first_not_of(" \t\r");
        if (begin == std::string::npos || line[begin] == '#') {
            continue;
        }
        try {
            std::size_t used = 0;
            const double v = std::stod(line.substr(begin), &used);
            const std::size_t rest = line.find_first_not_of(" \t\r", begin + used);
            if (rest != std::string::npos) {
                throw std::invalid_argument("trailing characters");
            }
            values.push_back(v);
        } catch (const std::exception&) {
            throw IoError(path + ":" + std::to_string(line_no) + ": expected one number per line");
        }
    }
    return values;
}

} // namespace mixfg
