#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace hls::cli {

std::string format_number(double x);

/// A flat CSV table. Cells are stored as the text written to report.csv so the
/// summary can quote them verbatim.
class Table {
 public:
  explicit Table(std::vector<std::string> header = {}) : header_(std::move(header)) {}

  /// Appends a row; cells are matched to the header by position.
  std::size_t add(std::vector<std::string> cells);
  const std::string& at(std::size_t row, const std::string& column) const;
  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }
  std::string csv() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

struct Verdict {
  std::string name;
  bool pass = false;
  std::vector<std::pair<std::string, std::string>> quoted;  ///< (label, report cell)
};

struct Report {
  Table table;
  std::vector<Verdict> verdicts;
  std::vector<std::string> notes;  ///< free text without numbers

  void verdict(std::string name, bool pass, std::size_t row, const std::vector<std::string>& columns);
  bool all_pass() const;
  std::string summary(const std::string& command) const;
  void write(const std::filesystem::path& out_dir, const std::string& command) const;
};

}  // namespace hls::cli
