#ifndef PDMP_CSV_HPP
#define PDMP_CSV_HPP

#include <string>
#include <vector>

namespace pdmp::csv {

// Full-precision text form (17 significant digits) so parse -> print
// round-trips are bit-stable.
std::string fmt17(double v);

std::vector<std::string> split_line(const std::string& line);

// strtod over the full field; throws ParseError on trailing garbage.
double parse_field(const std::string& field, const std::string& context);

} // namespace pdmp::csv

#endif
