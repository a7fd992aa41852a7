#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace rtlmend {

enum class RepairMode { kPair, kWholeFile };
enum class PromptProfile { kSyntaxFixer, kFunctionalFixer };

const char* to_string(RepairMode m);
std::optional<RepairMode> parse_repair_mode(const std::string& s);

struct PatchPair {
  std::string wrong;
  std::string right;
  bool operator==(const PatchPair&) const = default;
};

struct PatchSet {
  std::vector<PatchPair> pairs;
  std::string raw;  // backend response verbatim

  nlohmann::json to_json() const;
  static PatchSet from_json(const nlohmann::json& j);
  bool operator==(const PatchSet&) const = default;
};

struct RepairRequest {
  std::string spec_text;
  std::string dut_text;
  std::string err_info;  // serialized ErrInfo, or diagnostics while preprocessing
  std::vector<PatchSet> damage_repairs;
  RepairMode mode = RepairMode::kPair;
  PromptProfile profile = PromptProfile::kFunctionalFixer;
};

/// Deterministic prompt with sections in fixed order.
std::string build_prompt(const RepairRequest& req);
/// Appended to the prompt when a response had to be rejected.
std::string format_reminder(const std::string& reason);

struct ResponseError {
  enum class Kind { kNoJson, kSchemaViolation, kEmptyCorrect };
  Kind kind = Kind::kNoJson;
  std::string message;
};

const char* to_string(ResponseError::Kind k);

/// Extracts the first JSON object of `raw` and validates it for `mode`. In
/// whole-file mode the result is one pair (old_text, new file).
std::variant<PatchSet, ResponseError> parse_response(const std::string& raw, RepairMode mode,
                                                     const std::string& old_text = {});

struct PatchError {
  enum class Kind { kNoMatch, kAmbiguousMatch, kLexFailure };
  Kind kind = Kind::kNoMatch;
  std::size_t pair = 0;
  std::size_t count = 0;  // matches found

  std::string describe() const;
};

const char* to_string(PatchError::Kind k);

struct PatchOutcome {
  std::string text;
  std::vector<PatchError> errors;
  std::size_t applied = 0;
};

/// Applies pairs in order with whitespace-normalized, identifier-bounded,
/// unique matching. Failing pairs are skipped and reported.
PatchOutcome apply_patchset(const std::string& dut_text, const PatchSet& ps);

/// Pair mode: apply_patchset. Whole-file mode: the new text replaces the DUT.
PatchOutcome apply_repair(const std::string& dut_text, const PatchSet& ps, RepairMode mode);

/// Counts whitespace-normalized occurrences of `snippet` in `text`.
std::size_t count_matches(const std::string& text, const std::string& snippet);

// ---------------------------------------------------------------------------
// Backends

struct BackendReply {
  std::string text;
  double latency_s = 0.0;
  bool transport_error = false;
  std::string error;
};

class RepairBackend {
 public:
  virtual ~RepairBackend() = default;
  virtual std::string name() const = 0;
  virtual BackendReply send(const RepairRequest& req, const std::string& prompt) = 0;
  std::size_t calls() const { return calls_; }

 protected:
  std::size_t calls_ = 0;
};

/// Replays canned responses keyed by 1-based call index ({"1": "...", ...});
/// a "default" entry answers unlisted calls.
class ScriptedBackend : public RepairBackend {
 public:
  explicit ScriptedBackend(nlohmann::json script);
  static std::unique_ptr<ScriptedBackend> from_file(const std::string& path);
  std::string name() const override { return "scripted"; }
  BackendReply send(const RepairRequest& req, const std::string& prompt) override;
  const std::vector<std::string>& prompts() const { return prompts_; }

 private:
  std::vector<std::pair<std::string, std::string>> script_;
  std::vector<std::string> prompts_;
};

struct RemoteConfig {
  std::string url = "https://localhost";  // scheme://host[:port]
  std::string path = "/v1/chat/completions";
  std::string model = "default";
  double temperature = 0.0;
  int timeout_s = 120;
  std::string key_env = "REPAIR_BACKEND_KEY";
};

/// Minimal chat-completion client.
class RemoteBackend : public RepairBackend {
 public:
  explicit RemoteBackend(RemoteConfig cfg);
  std::string name() const override { return "remote"; }
  BackendReply send(const RepairRequest& req, const std::string& prompt) override;

 private:
  RemoteConfig cfg_;
};

/// Answers with the diff that turns the DUT back into the golden text.
class OracleBackend : public RepairBackend {
 public:
  explicit OracleBackend(std::string golden_text);
  std::string name() const override { return "oracle"; }
  BackendReply send(const RepairRequest& req, const std::string& prompt) override;

 private:
  std::string golden_;
};

class NullBackend : public RepairBackend {
 public:
  std::string name() const override { return "null"; }
  BackendReply send(const RepairRequest& req, const std::string& prompt) override;
};

/// Line-level pairs that rewrite `from` into `to`, widened with context until
/// each `wrong` snippet is unique in `from`.
std::vector<PatchPair> diff_pairs(const std::string& from, const std::string& to);

struct AgentExchange {
  std::optional<PatchSet> patch;
  std::optional<ResponseError> error;
  std::vector<std::string> prompts;
  std::vector<std::string> responses;
  double latency_s = 0.0;
  bool transport_error = false;
  std::string transport_message;
};

/// One agent query with a single format-reminder retry.
AgentExchange query_agent(RepairBackend& backend, const RepairRequest& req);

}  // namespace rtlmend
