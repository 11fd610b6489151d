#ifndef HNRAD_CSV_HPP
#define HNRAD_CSV_HPP

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hnrad/errors.hpp"

namespace hnrad {

// Minimal CSV: UTF-8, header row, '.' decimal, comma separator, no quoting
// (field values in this pipeline never contain commas). Lines starting with
// '#' are metadata comments (config hash, seed) and are skipped on read.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const {
        for (size_t c = 0; c < header.size(); ++c)
            if (header[c] == name) return int(c);
        return -1;
    }

    int require_column(const std::string& name) const {
        const int c = column(name);
        if (c < 0) throw schema_error("missing CSV column '" + name + "'");
        return c;
    }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (const char ch : line) {
        if (ch == ',') {
            fields.push_back(field);
            field.clear();
        } else if (ch != '\r') {
            field.push_back(ch);
        }
    }
    fields.push_back(field);
    return fields;
}

} // namespace detail

inline CsvTable read_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw io_error("cannot open " + path);
    CsvTable table;
    std::string line;
    bool have_header = false;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto fields = detail::split_csv_line(line);
        if (!have_header) {
            table.header = std::move(fields);
            have_header = true;
        } else {
            if (fields.size() != table.header.size())
                throw schema_error(path + ": row has " + std::to_string(fields.size()) +
                                   " fields, header has " + std::to_string(table.header.size()));
            table.rows.push_back(std::move(fields));
        }
    }
    if (!have_header) throw schema_error(path + ": no header row");
    return table;
}

inline void write_csv(const std::string& path, const CsvTable& table,
                      const std::string& comment = "") {
    std::ofstream f(path);
    if (!f) throw io_error("cannot open " + path + " for writing");
    if (!comment.empty()) f << "# " << comment << "\n";
    for (size_t c = 0; c < table.header.size(); ++c)
        f << table.header[c] << (c + 1 < table.header.size() ? "," : "\n");
    for (const auto& row : table.rows)
        for (size_t c = 0; c < row.size(); ++c) f << row[c] << (c + 1 < row.size() ? "," : "\n");
    if (!f) throw io_error("write failed for " + path);
}

inline double parse_double(const std::string& s, const std::string& what) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw schema_error("cannot parse '" + s + "' as a number for " + what);
    }
}

inline std::string format_double(double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}

} // namespace hnrad

#endif
