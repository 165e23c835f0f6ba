#include "dhsic/csv_io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <system_error>

#include "dhsic/errors.hpp"

namespace dhsic {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view field, double& out) {
  field = trim(field);
  if (field.empty()) return false;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

std::size_t parse_index(std::string_view field, const std::string& context) {
  field = trim(field);
  std::size_t out = 0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (field.empty() || ec != std::errc() || ptr != last)
    throw DomainError(context + ": '" + std::string(field) + "' is not a column index");
  return out;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == sep) {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace

ColumnGroups parse_column_groups(const std::string& text) {
  ColumnGroups groups;
  if (trim(text).empty()) throw DomainError("column groups: empty specification");
  for (std::string_view part : split(text, ',')) {
    part = trim(part);
    const std::size_t colon = part.find(':');
    if (colon == std::string_view::npos)
      throw DomainError("column groups: '" + std::string(part) + "' is not of the form a:b");
    const std::size_t begin = parse_index(part.substr(0, colon), "column groups");
    const std::size_t end = parse_index(part.substr(colon + 1), "column groups");
    if (end <= begin)
      throw DomainError("column groups: range " + std::to_string(begin) + ":" +
                        std::to_string(end) + " is empty");
    groups.ranges.push_back({begin, end});
  }
  return groups;
}

ColumnGroups default_column_groups(std::size_t num_columns) {
  ColumnGroups groups;
  groups.ranges.reserve(num_columns);
  for (std::size_t c = 0; c < num_columns; ++c) groups.ranges.push_back({c, c + 1});
  return groups;
}

std::string column_groups_string(const ColumnGroups& groups) {
  std::string out;
  for (std::size_t i = 0; i < groups.ranges.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(groups.ranges[i].begin) + ":" + std::to_string(groups.ranges[i].end);
  }
  return out;
}

ColumnGroups dataset_column_groups(const Dataset& data) {
  ColumnGroups groups;
  std::size_t at = 0;
  for (const Matrix& b : data.blocks) {
    groups.ranges.push_back({at, at + b.cols()});
    at += b.cols();
  }
  return groups;
}

Matrix read_numeric_csv(std::istream& in, const std::string& source_name) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool saw_data = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;

    const std::vector<std::string_view> fields = split(line, ',');
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t c = 0; c < fields.size(); ++c)
      if (!parse_double(fields[c], row[c])) {
        numeric = false;
        break;
      }

    if (!numeric) {
      // Only the first non-blank line may be non-numeric (a header).
      if (!saw_data && rows.empty() && width == 0) {
        width = fields.size();
        continue;
      }
      throw DomainError(source_name + ":" + std::to_string(line_no) +
                        ": field is not a finite real");
    }
    if (width == 0) width = fields.size();
    if (fields.size() != width)
      throw DomainError(source_name + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(width) + " fields, got " + std::to_string(fields.size()));
    saw_data = true;
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DomainError(source_name + ": no data rows");

  Matrix out(rows.size(), width);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < width; ++c) out(r, c) = rows[r][c];
  return out;
}

Matrix read_numeric_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open '" + path + "'");
  return read_numeric_csv(in, path);
}

Dataset dataset_from_columns(const Matrix& table, const ColumnGroups& groups) {
  if (groups.d() < 2) throw DimensionMismatch("need at least 2 variables");
  std::vector<Matrix> blocks;
  blocks.reserve(groups.d());
  for (const ColumnGroups::Range& r : groups.ranges) {
    if (r.end > table.cols())
      throw DomainError("column range " + std::to_string(r.begin) + ":" +
                        std::to_string(r.end) + " exceeds the " + std::to_string(table.cols()) +
                        " available columns");
    Matrix b(table.rows(), r.end - r.begin);
    for (std::size_t i = 0; i < table.rows(); ++i)
      for (std::size_t c = r.begin; c < r.end; ++c) b(i, c - r.begin) = table(i, c);
    blocks.push_back(std::move(b));
  }
  return make_dataset(std::move(blocks));
}

Dataset read_dataset_csv_file(const std::string& path, const ColumnGroups& groups) {
  return dataset_from_columns(read_numeric_csv_file(path), groups);
}

void write_dataset_csv(std::ostream& os, const Dataset& data) {
  for (std::size_t j = 0; j < data.d(); ++j)
    for (std::size_t c = 0; c < data.blocks[j].cols(); ++c)
      os << (j || c ? "," : "") << "v" << (j + 1) << "_" << (c + 1);
  os << "\n";
  char buf[64];
  for (std::size_t i = 0; i < data.n(); ++i) {
    bool first = true;
    for (const Matrix& b : data.blocks)
      for (std::size_t c = 0; c < b.cols(); ++c) {
        std::snprintf(buf, sizeof(buf), "%.17g", b(i, c));
        if (!first) os << ',';
        os << buf;
        first = false;
      }
    os << "\n";
  }
}

void write_dataset_csv_file(const std::string& path, const Dataset& data) {
  std::ofstream os(path);
  if (!os) throw DomainError("cannot write '" + path + "'");
  write_dataset_csv(os, data);
}

Matrix read_gram_csv_file(const std::string& path) {
  Matrix m = read_numeric_csv_file(path);
  if (m.rows() != m.cols())
    throw DimensionMismatch("'" + path + "' is " + std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()) + ", expected a square matrix");
  return m;
}

}  // namespace dhsic
