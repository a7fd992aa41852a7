#pragma once

#include <string>
#include <vector>

#include "rtlmend/ast.hpp"
#include "rtlmend/source.hpp"

namespace rtlmend {

enum class WarnCode {
  kW1,  // nonblocking assignment in always @(*)
  kW2,  // blocking assignment in an edge-triggered block
  kW3,  // asynchronous reset missing from the sensitivity list
  kW4,  // width mismatch in an assignment or port connection
  kW5,  // signal read but never driven
  kW6,  // case without default that leaves values uncovered
};

const char* to_string(WarnCode c);
bool is_templated(WarnCode c);

struct Warning {
  WarnCode code = WarnCode::kW1;
  Span span;
  std::string message;
  bool fixable = false;
  std::string module;
  // Template rewrite: replace [edit.begin, edit.end) with `replacement`.
  Span edit;
  std::string replacement;

  Diagnostic diagnostic(const SourceFile& src) const;
};

/// Runs W1..W6 over every module of a design that elaborates.
std::vector<Warning> lint(const Design& design);

/// Applies the templates of fixable warnings as text edits and reparses.
/// Throws NotFixable for report-only codes.
Design apply_templates(const Design& design, const std::vector<Warning>& warns);

/// Fixable subset of `warns`.
std::vector<Warning> fixable(const std::vector<Warning>& warns);

}  // namespace rtlmend
