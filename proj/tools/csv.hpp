#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace spiked::cli {

inline constexpr const char* kToolVersion = "spiked 0.1.0";

// FNV-1a over the canonical configuration text.
std::uint64_t config_hash(const std::string& canonical);
std::string hex(std::uint64_t v);

// RFC 4180 table with leading '#' provenance lines.
class CsvTable {
 public:
  CsvTable(std::vector<std::string> columns, std::string canonical_config, std::uint64_t seed);

  void add_row(std::vector<std::string> fields);
  std::string str() const;
  void write(const std::string& path) const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> columns_;
  std::string config_;
  std::uint64_t seed_;
  std::vector<std::vector<std::string>> rows_;
};

std::string csv_field(const std::string& raw);
void write_text(const std::string& path, const std::string& text);

}  // namespace spiked::cli
