#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rtlmend {

enum class StimulusMode { kDirected, kRandom, kExhaustive };

const char* to_string(StimulusMode m);

/// Per-cycle values for every driven top-level input (clock excluded, reset
/// included). Cycles flagged `in_reset` are driven but never scored.
struct Stimulus {
  StimulusMode mode = StimulusMode::kRandom;
  std::uint64_t seed = 0;
  int reset_cycles = 0;
  std::vector<std::string> inputs;
  std::vector<int> widths;
  std::vector<std::vector<std::uint64_t>> vectors;
  std::vector<std::uint8_t> in_reset;

  std::size_t cycles() const { return vectors.size(); }
  bool operator==(const Stimulus&) const = default;

  /// Appends another stimulus over the same inputs.
  void append(const Stimulus& other);
};

}  // namespace rtlmend
