#pragma once

#include "mppac/learner.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace mppac {

/// CSV trace `time_s,episodes,lower,upper`, bounds in reward units.
void write_csv(std::ostream& out, const std::vector<TraceRow>& trace);
std::string trace_csv(const std::vector<TraceRow>& trace);

/// Self-contained SVG with the lower and upper bound curves over time.
std::string trace_svg(const std::vector<TraceRow>& trace, const std::string& title);

/// Writes text to path; throws std::runtime_error on failure.
void write_file(const std::string& path, const std::string& text);

}  // namespace mppac
