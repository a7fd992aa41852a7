#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace rtlmend {

inline std::uint64_t width_mask(int width) {
  return width >= 64 ? ~0ull : ((1ull << width) - 1);
}

/// Three-state bit vector (0/1/X) of at most 64 bits. Bits flagged in
/// `xmask` are unknown and their `bits` entry is kept at zero.
struct Value {
  int width = 1;
  std::uint64_t bits = 0;
  std::uint64_t xmask = 0;

  static Value known(int width, std::uint64_t v) { return {width, v & width_mask(width), 0}; }
  static Value all_x(int width) { return {width, 0, width_mask(width)}; }

  bool is_known() const { return xmask == 0; }
  bool operator==(const Value&) const = default;

  /// MSB-first string of 0/1/x characters, exactly `width` long.
  std::string to_binstring() const;
  static std::optional<Value> from_binstring(std::string_view s);
};

/// Scoreboard comparison: every known golden bit must be matched by the same
/// known bit on the DUT side; X golden bits are don't-care.
bool scoreboard_match(const Value& expected, const Value& actual);

}  // namespace rtlmend
