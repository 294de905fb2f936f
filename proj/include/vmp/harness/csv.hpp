#pragma once

#include <string>
#include <vector>

#include "vmp/linalg.hpp"

namespace vmp {

/// Shortest decimal representation that round-trips to the same double;
/// used everywhere numbers are written so outputs stay byte-reproducible.
[[nodiscard]] std::string format_number(double value);

/// Writes header plus data lines, creating parent directories as needed.
void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::string>& lines);

/// Splits one CSV record; double quotes wrap fields that contain commas and
/// doubled quotes inside a quoted field stand for one quote character.
[[nodiscard]] std::vector<std::string> split_csv_record(const std::string& line);

struct IngestResult {
    Matrix data;
    int skipped_rows = 0;
};

/// Reads the named numeric columns from a headered CSV. Rows with empty or
/// unparsable selected cells are skipped and counted. When `max_rows` is
/// positive only the first `max_rows` data rows are considered.
[[nodiscard]] IngestResult ingest_csv(const std::string& path,
                                      const std::vector<std::string>& columns,
                                      int max_rows = -1);

}  // namespace vmp
