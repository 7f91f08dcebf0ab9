#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "survmax/cure_model.hpp"

namespace survmax {

/// Model files are `key = value` lines; `#` starts a comment. Required keys:
///
///   family.F = exponential            # uniform | exponential | truncated_exponential | endpoint_power
///   params.F = 1                      # comma- or space-separated
///   family.G = uniform
///   params.G = 0, 1
///   p = 0.7
///
/// Parameters per family: uniform lo, hi; exponential rate;
/// truncated_exponential rate, tau; endpoint_power tau, beta.
CureModel parse_model(std::istream& in, const std::string& source);
CureModel load_model(const std::string& path);

/// Inverse of parse_model.
std::string format_model(const CureModel& model);

Distribution make_distribution(const std::string& family, const std::vector<double>& params);

}  // namespace survmax
