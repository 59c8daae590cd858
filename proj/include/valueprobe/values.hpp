#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace valueprobe {

// The ten basic value categories in their circular order. Adjacent entries
// are motivationally compatible; entries five steps apart are opposed. The
// short codes double as dictionary category names and matrix column labels.
inline constexpr std::size_t kValueCount = 10;

inline constexpr std::array<std::string_view, kValueCount> kCircleOrder = {
    "SE", "CO", "TR", "BE", "UN", "SD", "ST", "HE", "AC", "PO"};

inline constexpr std::array<std::string_view, kValueCount> kValueNames = {
    "Security",    "Conformity",  "Tradition", "Benevolence", "Universalism",
    "Self-Direction", "Stimulation", "Hedonism", "Achievement", "Power"};

inline std::vector<std::string> circle_order_vector() {
  return std::vector<std::string>(kCircleOrder.begin(), kCircleOrder.end());
}

inline std::optional<std::size_t> circle_position(std::string_view code,
                                                  std::span<const std::string> order) {
  for (std::size_t i = 0; i < order.size(); ++i)
    if (order[i] == code) return i;
  return std::nullopt;
}

// Steps around an n-position circle, in 0..n/2.
inline std::size_t circular_distance(std::size_t a, std::size_t b, std::size_t n) {
  const std::size_t diff = a > b ? a - b : b - a;
  return diff <= n - diff ? diff : n - diff;
}

namespace detail {

inline bool starts_with_dash_separator(std::string_view s, std::size_t& sep_len) {
  // Facet separators seen in row labels: em dash, en dash, or a spaced hyphen.
  if (s.starts_with("\xE2\x80\x94") || s.starts_with("\xE2\x80\x93")) {
    sep_len = 3;
    return true;
  }
  if (s.starts_with(" - ")) {
    sep_len = 3;
    return true;
  }
  return false;
}

}  // namespace detail

// Resolves a matrix row label to its congruent value code. Accepts the code
// itself ("SE"), the full value name ("Security"), or a faceted label whose
// prefix before an em/en dash names the value ("Security—Personal",
// "SE—Personal"). Returns nullopt for anything else.
inline std::optional<std::string> value_code_for_label(std::string_view label) {
  for (std::size_t i = 0; i < kValueCount; ++i) {
    if (label == kCircleOrder[i] || label == kValueNames[i])
      return std::string(kCircleOrder[i]);
  }
  for (std::size_t pos = 0; pos < label.size(); ++pos) {
    std::size_t sep_len = 0;
    if (!detail::starts_with_dash_separator(label.substr(pos), sep_len)) continue;
    const std::string_view head = label.substr(0, pos);
    for (std::size_t i = 0; i < kValueCount; ++i) {
      if (head == kCircleOrder[i] || head == kValueNames[i])
        return std::string(kCircleOrder[i]);
    }
  }
  return std::nullopt;
}

inline bool is_value_code(std::string_view code) {
  for (const auto c : kCircleOrder)
    if (c == code) return true;
  return false;
}

}  // namespace valueprobe
