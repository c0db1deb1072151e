#pragma once

#include "advq/jsonio.hpp"

#include <string>
#include <vector>

namespace advq::report {

// One verified inequality sampled over a parameter grid. direction says
// which way the comparison runs: Upper means measured <= bound (+slack),
// Lower means measured >= bound (-slack).
struct GapRow {
  double parameter = 0.0;
  double measured = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct GapReport {
  std::string name;   // which statement was checked
  std::string input;  // x, or empty for input-independent checks
  enum class Direction { Upper, Lower } direction = Direction::Upper;
  double W = 0.0;
  std::vector<GapRow> rows;
  bool pass = false;

  void finalize();  // pass = conjunction of row passes
};

jsonio::Value toJson(const GapReport& r);

} // namespace advq::report
