#pragma once

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "grid.hpp"

namespace fv2d {

// Shortest round-trip decimal representation of a double (full precision).
template <typename Scalar>
std::string csv_number(Scalar v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// Minimal deterministic CSV emitter: a header row plus string rows.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size())
      throw std::invalid_argument("CsvTable: row width does not match header");
    rows_.push_back(std::move(cells));
  }

  std::string str() const {
    std::ostringstream os;
    write_line(os, header_);
    for (const auto& r : rows_) write_line(os, r);
    return os.str();
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("CsvTable: cannot open " + path);
    out << str();
    if (!out) throw std::runtime_error("CsvTable: write failed for " + path);
  }

 private:
  static void write_line(std::ostringstream& os, const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) os << ',';
      os << cells[c];
    }
    os << '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Interior of a cell-averaged field as x,y,value rows (x varies slowest),
// full precision.
template <typename Scalar>
CsvTable field_csv(const Field<Scalar>& f, const std::string& value_name = "value") {
  CsvTable t({"x", "y", value_name});
  for (Eigen::Index i = 0; i < f.grid.nx; ++i)
    for (Eigen::Index j = 0; j < f.grid.ny; ++j)
      t.add_row({csv_number(f.grid.xc(i)), csv_number(f.grid.yc(j)), csv_number(f.at(i, j))});
  return t;
}

}  // namespace fv2d
