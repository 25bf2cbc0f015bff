#pragma once

#include "ncskit/sim.hpp"

#include <string>
#include <vector>

namespace ncskit::plot {

// Deterministic SVG line chart of state columns against time, with markers
// at mode changes and drop events. Byte-stable for identical input.
std::string trace_to_svg(const sim::SimTrace& trace, const std::vector<int>& columns = {});

}  // namespace ncskit::plot
