#include "qmem/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qmem::csv {

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write(const std::string& path, const std::vector<Column>& columns) {
    if (columns.empty()) throw std::invalid_argument("csv::write: no columns");
    const size_t rows = columns[0].values.size();
    for (const auto& c : columns)
        if (c.values.size() != rows)
            throw std::invalid_argument("csv::write: ragged columns");

    std::ofstream out(path);
    if (!out) throw std::runtime_error("csv::write: cannot open " + path);
    for (size_t j = 0; j < columns.size(); ++j)
        out << (j ? "," : "") << columns[j].name;
    out << "\n";
    for (size_t i = 0; i < rows; ++i) {
        for (size_t j = 0; j < columns.size(); ++j)
            out << (j ? "," : "") << format_value(columns[j].values[i]);
        out << "\n";
    }
    if (!out) throw std::runtime_error("csv::write: write failed for " + path);
}

int Table::column_index(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
}

bool parse_double(const std::string& s, double& out) {
    try {
        size_t used = 0;
        out = std::stod(s, &used);
        while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
        return used == s.size();
    } catch (const std::exception&) {
        return false;
    }
}

}  // namespace

Table read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("csv::read: cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("csv::read: empty file " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();

    Table table;
    table.header = split_fields(line);
    if (table.header.empty()) throw std::runtime_error("csv::read: missing header in " + path);

    // The header must not itself be numeric; that is the usual symptom of a
    // file written without one.
    double probe;
    if (parse_double(table.header[0], probe))
        throw std::runtime_error("csv::read: header line required in " + path);

    table.columns.assign(table.header.size(), {});
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != table.header.size())
            throw std::runtime_error("csv::read: wrong field count at line " +
                                     std::to_string(line_no) + " in " + path);
        for (size_t j = 0; j < fields.size(); ++j) {
            double v;
            if (!parse_double(fields[j], v))
                throw std::runtime_error("csv::read: bad number at line " +
                                         std::to_string(line_no) + " in " + path);
            table.columns[j].push_back(v);
        }
    }
    return table;
}

}  // namespace qmem::csv
