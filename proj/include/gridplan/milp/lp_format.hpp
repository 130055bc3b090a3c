#pragma once

#include <iosfwd>
#include <string>

#include "gridplan/milp/instance.hpp"

namespace gridplan::milp {

// CPLEX-style LP text. Field ordering is bit-stable: objective terms in
// variable-index order, rows in index order with their stored term order,
// one Bounds line per variable in index order, kinds in Generals/Binaries.
// Numbers use %.17g so import reproduces the exact doubles.
void write_lp(const MilpInstance& mi, std::ostream& os);
void write_lp_file(const MilpInstance& mi, const std::string& path);

// Reads the dialect written above (plus common variations: optional row
// names, 'free'/'inf' bounds, comments). Variables registered in Bounds-
// section order when present, else first appearance.
MilpInstance read_lp(std::istream& is);
MilpInstance read_lp_file(const std::string& path);

}  // namespace gridplan::milp
