#pragma once

#include <iosfwd>
#include <string_view>
#include <vector>

#include "georeg/registration.hpp"
#include "georeg/timing.hpp"

namespace georeg {

inline constexpr std::string_view kMatchesCsvHeader = "x1,y1,x2,y2";
inline constexpr std::string_view kTimingsCsvHeader = "n_descriptors,t_load_s,t_match_s,t_threshold_s";

// Readers throw Error(MalformedInput) naming the 1-based line (header is line 1).
// Blank lines are skipped; CRLF line endings are accepted.
std::vector<DescriptorMatch> read_matches_csv(std::istream& in);
std::vector<TimingSample> read_timings_csv(std::istream& in);

void write_matches_csv(std::ostream& out, const std::vector<DescriptorMatch>& matches);
void write_timings_csv(std::ostream& out, const std::vector<TimingSample>& samples);

}  // namespace georeg
