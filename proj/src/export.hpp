#pragma once

#include <map>
#include <string>
#include <string_view>

#include "session.hpp"

namespace netcontrast {

enum class ExportFormat { csv, json };

ExportFormat export_format_from_string(std::string_view text);

/// File name -> contents for every artifact of a finished run. CSV files
/// start with a schema-version comment line.
std::map<std::string, std::string> render_exports(const Session& session, ExportFormat format);

/// Writes render_exports() into dir, creating it if needed.
void write_exports(const Session& session, const std::string& dir, ExportFormat format);

}  // namespace netcontrast
