#pragma once

#include <stdexcept>
#include <string>

namespace rtlmend {

/// Base of every recoverable failure raised by the library. `kind()` is the
/// stable error name ("CombLoopDetected", "NoMatch", ...).
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

#define RTLMEND_DEFINE_ERROR(Name)                                            \
  class Name : public Error {                                                 \
   public:                                                                    \
    explicit Name(const std::string& message) : Error(#Name, message) {}      \
  };

RTLMEND_DEFINE_ERROR(CombLoopDetected)
RTLMEND_DEFINE_ERROR(LoopLimitExceeded)
RTLMEND_DEFINE_ERROR(UnknownSignal)
RTLMEND_DEFINE_ERROR(TimeBeyondHorizon)
RTLMEND_DEFINE_ERROR(StimulusMismatch)
RTLMEND_DEFINE_ERROR(PortContractViolation)
RTLMEND_DEFINE_ERROR(ExhaustiveTooLarge)
RTLMEND_DEFINE_ERROR(MalformedLog)
RTLMEND_DEFINE_ERROR(NotFixable)
RTLMEND_DEFINE_ERROR(PreprocessFailed)
RTLMEND_DEFINE_ERROR(EquivalentMutant)
RTLMEND_DEFINE_ERROR(EmptyResultSet)
RTLMEND_DEFINE_ERROR(IoError)
RTLMEND_DEFINE_ERROR(ConfigError)

#undef RTLMEND_DEFINE_ERROR

}  // namespace rtlmend
