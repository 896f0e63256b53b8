#pragma once

#include <string>
#include <vector>

namespace spiked {

// "name{1,2;3,4}" -> name plus ';'-separated groups of ','-separated numbers.
struct ParsedId {
  std::string name;
  std::vector<std::vector<double>> groups;
  std::vector<double> args;  // all numbers in order
};

ParsedId parse_config_id(const std::string& id);

// Shortest decimal text that round-trips to the same double.
std::string format_number(double x);

}  // namespace spiked
