#pragma once

#include <string>

namespace tde {

// 12 significant digits, %g style. Used by the Monte Carlo outputs.
std::string format_sig12(double x);

// Shortest decimal that parses back to exactly x.
std::string format_exact(double x);

// x rounded to 12 significant digits, for JSON emitters that print the
// shortest round-trip representation.
double round_sig12(double x);

} // namespace tde
