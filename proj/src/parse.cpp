#include "spiked/parse.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "spiked/errors.hpp"

namespace spiked {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& text, const std::string& whole) {
  const std::string t = trim(text);
  if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty())
    throw ConfigError("bad number '" + t + "' in " + whole);
  return v;
}

}  // namespace

ParsedId parse_config_id(const std::string& id) {
  ParsedId out;
  const std::string s = trim(id);
  const auto open = s.find('{');
  if (open == std::string::npos) {
    out.name = s;
    return out;
  }
  if (s.back() != '}') throw ConfigError("unbalanced braces in " + id);
  out.name = trim(s.substr(0, open));
  const std::string body = s.substr(open + 1, s.size() - open - 2);
  if (trim(body).empty()) return out;
  std::stringstream groups(body);
  std::string group;
  while (std::getline(groups, group, ';')) {
    std::vector<double> nums;
    std::stringstream items(group);
    std::string item;
    while (std::getline(items, item, ',')) {
      // Allow "rho=0.3" style for readability.
      const auto eq = item.find('=');
      nums.push_back(to_double(eq == std::string::npos ? item : item.substr(eq + 1), id));
    }
    out.args.insert(out.args.end(), nums.begin(), nums.end());
    out.groups.push_back(std::move(nums));
  }
  return out;
}

std::string format_number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

}  // namespace spiked
