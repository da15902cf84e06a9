#include "pdmp/csv.hpp"

#include "pdmp/errors.hpp"

#include <cstdio>
#include <cstdlib>

namespace pdmp::csv {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_field(const std::string& field, const std::string& context) {
    if (field.empty()) {
        throw ParseError(context + ": empty numeric field");
    }
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (end == field.c_str() || *end != '\0') {
        throw ParseError(context + ": malformed numeric field '" + field + "'");
    }
    return v;
}

} // namespace pdmp::csv
