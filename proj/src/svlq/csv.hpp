#pragma once

#include <string>
#include <vector>

namespace svlq::csv {

// Shortest round-trip representation, '.' decimal separator regardless of locale.
std::string format_double(double v);

// RFC-4180 field quoting.
std::string quote(const std::string& field);

class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> row) { rows_.push_back(std::move(row)); }
  std::size_t size() const { return rows_.size(); }
  std::string str() const;
  void write(const std::string& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Parses RFC-4180 text; the first record is returned as the header.
std::vector<std::vector<std::string>> parse(const std::string& text);
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace svlq::csv
