#pragma once

#include <string>

namespace safempd {

/// Render a JSONL planning trace as a deterministic SVG: world frame,
/// obstacles, goal marker, subsampled body-disc footprints, the executed
/// path as a single stroke, and backup-policy segments in a distinct stroke
/// class. Throws ConfigError on malformed traces.
std::string render_trace_svg(const std::string& trace_text);

void emit_plot(const std::string& trace_path, const std::string& out_path);

} // namespace safempd
