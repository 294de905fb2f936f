#include "vmp/harness/csv.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <system_error>

#include "vmp/errors.hpp"

namespace vmp {

std::string format_number(double value) {
    char buffer[64];
    const auto res = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return {buffer, res.ptr};
}

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::string>& lines) {
    const std::filesystem::path target(path);
    std::error_code ec;
    if (target.has_parent_path())
        std::filesystem::create_directories(target.parent_path(), ec);
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("csv: cannot write '" + path + "'");
    out << header << "\n";
    for (const auto& line : lines) out << line << "\n";
    if (!out) throw IoError("csv: write failed for '" + path + "'");
}

std::vector<std::string> split_csv_record(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(current);
            current.clear();
        } else if (ch != '\r') {
            current += ch;
        }
    }
    fields.push_back(current);
    return fields;
}

IngestResult ingest_csv(const std::string& path, const std::vector<std::string>& columns,
                        int max_rows) {
    std::ifstream in(path);
    if (!in) throw FileNotFound("csv: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw NoUsableRows("csv: '" + path + "' is empty");
    const std::vector<std::string> header = split_csv_record(line);

    std::vector<int> indices;
    for (const auto& wanted : columns) {
        int found = -1;
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == wanted) {
                found = static_cast<int>(i);
                break;
            }
        if (found < 0)
            throw MissingColumn("csv: '" + path + "' has no column '" + wanted + "'");
        indices.push_back(found);
    }

    std::vector<double> values;
    int rows = 0;
    int seen = 0;
    int skipped = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        if (max_rows > 0 && seen >= max_rows) break;
        ++seen;
        const std::vector<std::string> fields = split_csv_record(line);
        std::vector<double> row;
        row.reserve(indices.size());
        bool usable = true;
        for (int idx : indices) {
            if (idx >= static_cast<int>(fields.size())) {
                usable = false;
                break;
            }
            const std::string& cell = fields[static_cast<std::size_t>(idx)];
            if (cell.empty()) {
                usable = false;
                break;
            }
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end != cell.c_str() + cell.size()) {
                usable = false;
                break;
            }
            row.push_back(v);
        }
        if (!usable) {
            ++skipped;
            continue;
        }
        values.insert(values.end(), row.begin(), row.end());
        ++rows;
    }
    if (rows == 0) throw NoUsableRows("csv: '" + path + "' has no usable data rows");

    IngestResult result;
    result.skipped_rows = skipped;
    result.data = Matrix(rows, static_cast<int>(columns.size()));
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < static_cast<int>(columns.size()); ++c)
            result.data(r, c) = values[static_cast<std::size_t>(r) * columns.size() +
                                       static_cast<std::size_t>(c)];
    return result;
}

}  // namespace vmp
