#pragma once

#include <string>
#include <vector>

#include "guessbound/bounds.hpp"

namespace guessbound {

// CSV schema: header "g,value,raw_value,kind,method,delta,target",
// optional trailing provenance column preserved on round-trip.
std::string curve_to_csv(const std::vector<GuessingCurve>& curves);
std::vector<GuessingCurve> curves_from_csv(const std::string& csv);

std::string curve_to_json(const std::vector<GuessingCurve>& curves);

}  // namespace guessbound
