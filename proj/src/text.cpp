#include "reachplan/text.hpp"

#include "reachplan/error.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace reachplan {

std::string format_number(double v, int precision) {
    if (v == 0.0) {
        v = 0.0;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) {
            return out;
        }
        start = pos + 1;
    }
}

double parse_number(std::string_view s) {
    std::string text(s);
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) {
        text.erase(text.begin());
    }
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) {
        text.pop_back();
    }
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v)) {
        throw ContractError("not a number: '" + std::string(s) + "'");
    }
    return v;
}

std::vector<double> parse_number_list(std::string_view s) {
    std::vector<double> out;
    for (const auto& part : split(s, ',')) {
        out.push_back(parse_number(part));
    }
    return out;
}

} // namespace reachplan
