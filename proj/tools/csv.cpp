#include "csv.hpp"

#include <fstream>
#include <sstream>

#include "spiked/errors.hpp"

namespace spiked::cli {

std::uint64_t config_hash(const std::string& canonical) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

std::string csv_field(const std::string& raw) {
  if (raw.find_first_of(",\"\r\n") == std::string::npos) return raw;
  std::string out = "\"";
  for (char c : raw) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

CsvTable::CsvTable(std::vector<std::string> columns, std::string canonical_config, std::uint64_t seed)
    : columns_(std::move(columns)), config_(std::move(canonical_config)), seed_(seed) {}

void CsvTable::add_row(std::vector<std::string> fields) {
  if (fields.size() != columns_.size()) throw Error("CSV row width does not match header");
  rows_.push_back(std::move(fields));
}

std::string CsvTable::str() const {
  std::string out;
  out += "# tool: " + std::string(kToolVersion) + "\r\n";
  out += "# config_hash: " + hex(config_hash(config_)) + "\r\n";
  out += "# seed: " + std::to_string(seed_) + "\r\n";
  auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += csv_field(fields[i]);
    }
    out += "\r\n";
  };
  line(columns_);
  for (const auto& r : rows_) line(r);
  return out;
}

void CsvTable::write(const std::string& path) const { write_text(path, str()); }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path);
  f << text;
}

}  // namespace spiked::cli
