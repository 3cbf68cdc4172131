#pragma once

#include <iosfwd>
#include <string>

#include "pfwd/measure.hpp"

namespace pfwd {

// Plain-text measure files. Header line:
//   measure <kind> dim=<n> [side=<s>] [origin=<o1> ... <on>]
// followed by one record per line:
//   gridded:  cell k1 ... kn mass      (side/origin in the header)
//   squares:  square c1 ... cn mass    (side in the header)
//   atoms:    atom x1 ... xn mass
// Numbers are written with enough digits for an exact double round-trip.

void write_measure(std::ostream& os, const Measure& m);
void write_measure_file(const std::string& path, const Measure& m);
Measure read_measure(std::istream& is);
Measure read_measure_file(const std::string& path);

std::string format_double(double v);

}  // namespace pfwd
