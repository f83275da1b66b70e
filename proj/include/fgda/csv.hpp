#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace fgda {

// Doubles are always printed with 17 significant digits so written values
// round-trip exactly and repeated runs produce byte-identical files.
std::string format_double(double v);

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path);

  void write_header(const std::vector<std::string>& names);
  void write_row(const std::vector<double>& values);
  void write_text_row(const std::vector<std::string>& cells);
  void close();

 private:
  std::ofstream out_;
  std::string path_;
  std::size_t columns_ = 0;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::string& path);

}  // namespace fgda
