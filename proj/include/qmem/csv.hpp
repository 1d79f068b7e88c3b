#pragma once

#include <string>
#include <vector>

namespace qmem::csv {

// One table column: a name and its values.  Values are printed with 12
// significant digits so regenerated files are regression-stable.
struct Column {
    std::string name;
    std::vector<double> values;
};

std::string format_value(double v);

void write(const std::string& path, const std::vector<Column>& columns);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;  // column-major

    int n_rows() const { return columns.empty() ? 0 : static_cast<int>(columns[0].size()); }
    int n_cols() const { return static_cast<int>(columns.size()); }
    int column_index(const std::string& name) const;  // -1 when absent
};

// Reads a numeric CSV with a mandatory header line.
Table read(const std::string& path);

}  // namespace qmem::csv
