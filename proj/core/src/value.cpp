#include "rtlmend/value.hpp"

namespace rtlmend {

std::string Value::to_binstring() const {
  std::string s(static_cast<std::size_t>(width), '0');
  for (int i = 0; i < width; ++i) {
    std::uint64_t bit = 1ull << i;
    char c = (xmask & bit) ? 'x' : ((bits & bit) ? '1' : '0');
    s[static_cast<std::size_t>(width - 1 - i)] = c;
  }
  return s;
}

std::optional<Value> Value::from_binstring(std::string_view s) {
  if (s.empty() || s.size() > 64) return std::nullopt;
  Value v;
  v.width = static_cast<int>(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::uint64_t bit = 1ull << (s.size() - 1 - i);
    switch (s[i]) {
      case '0': break;
      case '1': v.bits |= bit; break;
      case 'x': case 'X': case 'z': case 'Z': v.xmask |= bit; break;
      default: return std::nullopt;
    }
  }
  return v;
}

bool scoreboard_match(const Value& expected, const Value& actual) {
  std::uint64_t care = ~expected.xmask & width_mask(expected.width);
  if (actual.xmask & care) return false;
  return ((expected.bits ^ actual.bits) & care) == 0;
}

}  // namespace rtlmend
