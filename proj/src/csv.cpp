#include "fgda/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "fgda/errors.hpp"

namespace fgda {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path) : out_(path), path_(path) {
  if (!out_) throw ValidationError("cannot open " + path + " for writing");
}

void CsvWriter::write_header(const std::vector<std::string>& names) {
  columns_ = names.size();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out_ << ',';
    out_ << names[i];
  }
  out_ << '\n';
}

void CsvWriter::write_row(const std::vector<double>& values) {
  if (columns_ && values.size() != columns_) {
    throw ValidationError("row width " + std::to_string(values.size()) +
                          " does not match header width " + std::to_string(columns_) +
                          " in " + path_);
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out_ << ',';
    out_ << format_double(values[i]);
  }
  out_ << '\n';
}

void CsvWriter::write_text_row(const std::vector<std::string>& cells) {
  if (columns_ && cells.size() != columns_) {
    throw ValidationError("row width does not match header width in " + path_);
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
}

void CsvWriter::close() {
  out_.close();
  if (!out_) throw NumericalError("write to " + path_ + " failed");
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path + " is empty");
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) table.header.push_back(cell);

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    row.reserve(table.header.size());
    const char* p = line.c_str();
    char* end = nullptr;
    while (*p) {
      row.push_back(std::strtod(p, &end));
      if (end == p) {
        throw ValidationError("unparseable numeric cell in " + path + ": " + line);
      }
      p = end;
      if (*p == ',') ++p;
    }
    if (row.size() != table.header.size()) {
      throw ValidationError("ragged row in " + path);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace fgda
