#pragma once
// Result-file plumbing: CSV serialization with 17 significant digits (byte
// stability backs the reproducibility guarantee), SHA-256 content hashes, and
// the per-run manifest.

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace bpire {

using CsvCell = std::variant<std::uint64_t, double, std::string>;

std::string format_double(double x);  // %.17g
std::string format_cell(const CsvCell& cell);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void row(std::vector<CsvCell> cells);
  const std::string& text() const { return text_; }
  void save(const std::filesystem::path& path) const;

 private:
  std::size_t columns_;
  std::string text_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::filesystem::path& path);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace bpire
