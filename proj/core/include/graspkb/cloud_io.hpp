#pragma once

// Point cloud files: ASCII `x y z [label]` lines, or binary little-endian
// PLY with float x, y, z and an optional uchar label.

#include "graspkb/patches.hpp"

#include <string>
#include <string_view>

namespace graspkb {

/// Detects the format from the content ("ply" magic selects PLY).
[[nodiscard]] PointCloud parse_cloud(std::string_view bytes);

[[nodiscard]] PointCloud parse_ascii_cloud(std::string_view text);
[[nodiscard]] PointCloud parse_ply_cloud(std::string_view bytes);

/// Coordinates with 17 significant digits, so the text round-trips exactly.
[[nodiscard]] std::string write_ascii_cloud(PointCloud const& cloud);
/// Coordinates are narrowed to float; labels must lie in 0..255.
[[nodiscard]] std::string write_ply_cloud(PointCloud const& cloud);

} // namespace graspkb
