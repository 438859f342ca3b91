#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace graspkb {

/// 64-bit FNV-1a over raw bytes.
[[nodiscard]] std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// FNV-1a digest rendered as 16 lowercase hex digits.
[[nodiscard]] std::string content_hash(std::string_view bytes);

} // namespace graspkb
