#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace reachplan {

/// printf("%.*g") with negative zero printed as 0.
std::string format_number(double v, int precision = 17);

std::vector<std::string> split(std::string_view s, char sep);

/// Parses a comma-separated list of numbers; throws ContractError on bad input.
std::vector<double> parse_number_list(std::string_view s);

double parse_number(std::string_view s);

} // namespace reachplan
