#include "rtlmend/stimulus.hpp"

#include "rtlmend/error.hpp"

namespace rtlmend {

const char* to_string(StimulusMode m) {
  switch (m) {
    case StimulusMode::kDirected: return "directed";
    case StimulusMode::kRandom: return "random";
    case StimulusMode::kExhaustive: return "exhaustive";
  }
  return "?";
}

void Stimulus::append(const Stimulus& other) {
  if (other.inputs != inputs) throw StimulusMismatch("appended stimulus drives different inputs");
  vectors.insert(vectors.end(), other.vectors.begin(), other.vectors.end());
  in_reset.insert(in_reset.end(), other.in_reset.begin(), other.in_reset.end());
}

}  // namespace rtlmend
