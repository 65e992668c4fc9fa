#include "deot/text.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>

namespace deot::text {

namespace {
bool is_space(char c) noexcept { return std::isspace(static_cast<unsigned char>(c)) != 0; }
}  // namespace

std::string_view trim(std::string_view s) noexcept {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : trim(s)) {
    if (is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::vector<std::string_view> split_lines(std::string_view s) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find('\n', start);
    if (end == std::string_view::npos) end = s.size();
    auto line = s.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

bool is_blank(std::string_view s) noexcept { return trim(s).empty(); }

std::optional<int> parse_int(std::string_view s) noexcept {
  s = trim(s);
  if (s.empty() || s.size() > 9) return std::nullopt;
  if (!std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    return std::nullopt;
  }
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::string_view strip_code_fences(std::string_view s) noexcept {
  auto open = s.find("```");
  if (open == std::string_view::npos) return s;
  auto body_start = s.find('\n', open);
  if (body_start == std::string_view::npos) return s;
  ++body_start;
  auto close = s.find("```", body_start);
  if (close == std::string_view::npos) return s.substr(body_start);
  return s.substr(body_start, close - body_start);
}

std::optional<std::string_view> extract_balanced(std::string_view s, char open) noexcept {
  const char close = open == '{' ? '}' : ']';
  auto start = s.find(open);
  if (start == std::string_view::npos) return std::nullopt;
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < s.size(); ++i) {
    char c = s[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{' || c == '[') {
      ++depth;
    } else if (c == '}' || c == ']') {
      --depth;
      if (depth == 0) {
        if (c != close) return std::nullopt;
        return s.substr(start, i - start + 1);
      }
    }
  }
  return std::nullopt;
}

std::optional<std::string_view> field_value(std::string_view line, std::string_view key) noexcept {
  line = trim(line);
  if (line.size() <= key.size() || line.substr(0, key.size()) != key || line[key.size()] != ':') {
    return std::nullopt;
  }
  return trim(line.substr(key.size() + 1));
}

std::vector<std::string> parse_bullets(std::string_view block) {
  std::vector<std::string> items;
  for (auto raw : split_lines(block)) {
    auto line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '-' || line.front() == '*') {
      items.emplace_back(trim(line.substr(1)));
    } else if (items.empty()) {
      items.emplace_back(line);
    } else {
      items.back() += ' ';
      items.back() += line;
    }
  }
  if (items.size() == 1) {
    auto lowered = to_lower(items.front());
    while (!lowered.empty() && (lowered.back() == '.' || lowered.back() == ')')) lowered.pop_back();
    if (lowered == "none" || lowered == "none found" || lowered == "n/a" ||
        lowered == "(skip if none found" || lowered == "no issues" || lowered == "no conflicts") {
      items.clear();
    }
  }
  return items;
}

std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace deot::text
