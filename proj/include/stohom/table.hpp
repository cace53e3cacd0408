#pragma once

#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace stohom {

/// Decimal scientific form with 17 significant digits: round-trips doubles
/// and is byte-stable across runs and platforms.
inline std::string format_sig17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", v);
  return buf;
}

inline std::string format_index(std::int64_t v) { return std::to_string(v); }

/**
 * @brief Line-oriented result table: one header row naming the columns,
 *        then space-separated data rows. Plain text, diffable.
 */
class TextTable {
 public:
  explicit TextTable(std::vector<std::string> columns) : columns_(std::move(columns)) {
    if (columns_.empty()) throw std::invalid_argument("TextTable: no columns");
  }

  void add_row(std::vector<std::string> cells) {
    if (cells.size() != columns_.size())
      throw std::invalid_argument("TextTable: row arity does not match header");
    rows_.push_back(std::move(cells));
  }

  std::size_t row_count() const { return rows_.size(); }

  void write(std::ostream& os) const {
    write_line(os, columns_);
    for (const auto& r : rows_) write_line(os, r);
  }

 private:
  static void write_line(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os << ' ';
      os << cells[i];
    }
    os << '\n';
  }

  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace stohom
