#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rtlmend/agent.hpp"
#include "rtlmend/ast.hpp"
#include "rtlmend/lint.hpp"
#include "rtlmend/source.hpp"

namespace rtlmend {

/// Syntax errors and lint warnings of one source text.
struct CheckResult {
  std::optional<Design> design;          // set when parse and elaboration succeed
  std::vector<Diagnostic> errors;        // parse or elaboration errors
  std::vector<Warning> warnings;         // lint output (empty when errors exist)

  bool clean() const;                    // no errors and no fixable warnings
  std::string error_info() const;        // diagnostics rendered for the agent
};

CheckResult check_source(const SourceFile& src);

struct PreprocessRound {
  int round = 0;
  enum class Action { kClean, kAgent, kTemplates } action = Action::kClean;
  std::vector<Diagnostic> errors;
  std::vector<std::string> warnings;  // "W1@12" style tags
  std::vector<PatchError> patch_errors;
  std::string response_error;
  std::string transport_error;

  nlohmann::json to_json() const;
};

const char* to_string(PreprocessRound::Action a);

struct PreprocessLog {
  std::vector<PreprocessRound> rounds;
  std::size_t agent_calls = 0;
  double backend_latency_s = 0.0;

  nlohmann::json to_json() const;
};

struct PreprocessResult {
  Design design;
  std::string text;
  std::vector<Warning> report_only;  // W4..W6 left for the repair loop
  PreprocessLog log;
};

struct PreprocessOptions {
  int max_rounds = 5;
  std::string spec_text;
  RepairMode mode = RepairMode::kPair;
  std::vector<PatchSet> damage_repairs;
};

/// Alternates agent fixes for syntax errors and template fixes for warnings
/// until the source is clean. Throws PreprocessFailed when rounds run out.
/// `log_out`, when given, receives the log even on failure.
PreprocessResult preprocess(const SourceFile& src, RepairBackend& agent,
                            const PreprocessOptions& opts = {}, PreprocessLog* log_out = nullptr);

}  // namespace rtlmend
