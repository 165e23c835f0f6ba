#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "dhsic/dataset.hpp"
#include "dhsic/matrix.hpp"

namespace dhsic {

// Half-open column ranges, one per variable, parsed from "a:b,c:d,...".
struct ColumnGroups {
  struct Range {
    std::size_t begin;
    std::size_t end;
  };
  std::vector<Range> ranges;

  std::size_t d() const { return ranges.size(); }
};

ColumnGroups parse_column_groups(const std::string& text);

// One scalar variable per column.
ColumnGroups default_column_groups(std::size_t num_columns);

std::string column_groups_string(const ColumnGroups& groups);
ColumnGroups dataset_column_groups(const Dataset& data);

// Comma-separated numeric table. A first row with any non-numeric field is
// treated as a header and skipped; every other field must parse as a finite
// real. Blank lines are ignored.
Matrix read_numeric_csv(std::istream& in, const std::string& source_name = "<stream>");
Matrix read_numeric_csv_file(const std::string& path);

Dataset dataset_from_columns(const Matrix& table, const ColumnGroups& groups);
Dataset read_dataset_csv_file(const std::string& path, const ColumnGroups& groups);

// Header "v1_1,v1_2,...,v2_1,..." then %.17g values, so a write/read cycle
// reproduces every double bit for bit.
void write_dataset_csv(std::ostream& os, const Dataset& data);
void write_dataset_csv_file(const std::string& path, const Dataset& data);

// Square numeric table for a precomputed kernel matrix.
Matrix read_gram_csv_file(const std::string& path);

}  // namespace dhsic
