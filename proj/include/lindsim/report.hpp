#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lindsim/linalg.hpp"

namespace lindsim {

/// 17 significant digits ("%.17g"): round-trips every double.
std::string format_double(double v);

/// {"rows": R, "cols": C, "data": [[re, im], ...]} in row-major order.
nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);

std::string read_text_file(const std::string& path);
/// Writes via a temporary file and rename; creates parent directories.
void write_text_file(const std::string& path, const std::string& content);

struct SvgSeries {
  std::string label;
  std::vector<double> x, y;
};

/// Self-contained SVG line plot; log axes take log10 of the data.
std::string svg_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                     const std::vector<SvgSeries>& series, bool log_x, bool log_y);

}  // namespace lindsim
