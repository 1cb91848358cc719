#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fedchip/corpus.hpp"

namespace fedchip {

// Text of one synthesis / place-and-route summary.
struct ReportDoc {
  std::string raw_text;
  std::string source_name;
};

// Line grammar (case-insensitive key phrase, optional ':' or '='):
//
//   design area <number> u^2|um^2
//   total power <number> W|mW|uW
//   worst slack <number> ns|ps
//
// Anything after the unit is ignored, as are lines that do not begin with a
// key phrase. Each key must appear exactly once.
PpaMetrics parse_ppa(const ReportDoc& doc);

ReportDoc read_report(const std::filesystem::path& path);

struct BatchResult {
  std::string source;
  std::optional<PpaMetrics> metrics;  // set on success
  std::string error;                  // set on failure
};

// Never throws for per-file problems; each failure becomes an error entry.
std::vector<BatchResult> parse_batch(const std::vector<std::filesystem::path>& paths);

// {"source":..., "area_um2":..., "total_power_w":..., "slack_ns":...}
std::string batch_row_json(const std::string& source, const PpaMetrics& m);

}  // namespace fedchip
