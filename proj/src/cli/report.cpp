#include "report.hpp"

#include <fstream>
#include <sstream>

#include "hls/errors.hpp"

namespace hls::cli {

std::string format_number(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

std::size_t Table::add(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw Error("report row does not match the header");
  rows_.push_back(std::move(cells));
  return rows_.size() - 1;
}

const std::string& Table::at(std::size_t row, const std::string& column) const {
  for (std::size_t c = 0; c < header_.size(); ++c)
    if (header_[c] == column) return rows_.at(row)[c];
  throw Error("report has no column " + column);
}

std::string Table::csv() const {
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) os << (c ? "," : "") << cells[c];
    os << '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return os.str();
}

void Report::verdict(std::string name, bool pass, std::size_t row, const std::vector<std::string>& columns) {
  Verdict v{std::move(name), pass, {}};
  for (const std::string& c : columns) v.quoted.emplace_back(c, table.at(row, c));
  verdicts.push_back(std::move(v));
}

bool Report::all_pass() const {
  for (const Verdict& v : verdicts)
    if (!v.pass) return false;
  return true;
}

std::string Report::summary(const std::string& command) const {
  std::ostringstream os;
  os << "command: " << command << '\n';
  for (const std::string& n : notes) os << "note: " << n << '\n';
  for (const Verdict& v : verdicts) {
    os << (v.pass ? "PASS " : "FAIL ") << v.name;
    for (std::size_t i = 0; i < v.quoted.size(); ++i)
      os << (i ? ", " : ": ") << v.quoted[i].first << '=' << v.quoted[i].second;
    os << '\n';
  }
  os << "overall: " << (all_pass() ? "PASS" : "FAIL") << '\n';
  return os.str();
}

void Report::write(const std::filesystem::path& out_dir, const std::string& command) const {
  std::filesystem::create_directories(out_dir);
  std::ofstream csv(out_dir / "report.csv");
  std::ofstream sum(out_dir / "summary.txt");
  if (!csv || !sum) throw InvalidArgument("cannot write reports to " + out_dir.string());
  csv << table.csv();
  sum << summary(command);
}

}  // namespace hls::cli
