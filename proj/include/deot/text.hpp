#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Small string helpers shared by the output parsers.
namespace deot::text {

std::string_view trim(std::string_view s) noexcept;
std::string to_lower(std::string_view s);
std::string collapse_whitespace(std::string_view s);
std::vector<std::string_view> split_lines(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
bool is_blank(std::string_view s) noexcept;

/// Strict decimal integer: optional surrounding whitespace, digits only.
std::optional<int> parse_int(std::string_view s) noexcept;

/// Returns the body of the first ``` fenced block, or the input unchanged.
std::string_view strip_code_fences(std::string_view s) noexcept;

/// Finds the first `open` bracket ('{' or '[') and returns the balanced span
/// through its matching close, honouring JSON string escapes.
std::optional<std::string_view> extract_balanced(std::string_view s, char open) noexcept;

/// "key: value" lines. Returns the value if `line` starts with `key` + ':'.
std::optional<std::string_view> field_value(std::string_view line, std::string_view key) noexcept;

/// Bullet items ("- x") with continuation lines folded into the previous item.
/// A lone "None"/"N/A" style entry yields an empty list.
std::vector<std::string> parse_bullets(std::string_view block);

std::uint64_t fnv1a(std::string_view s) noexcept;

}  // namespace deot::text
