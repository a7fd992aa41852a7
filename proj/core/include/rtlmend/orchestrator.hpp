#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtlmend/agent.hpp"
#include "rtlmend/localize.hpp"
#include "rtlmend/source.hpp"
#include "rtlmend/stimulus.hpp"

namespace rtlmend {

/// How the session stimulus is built from the golden design.
struct StimulusConfig {
  std::string suite = "default";  // default | random | exhaustive | directed
  std::uint64_t seed = 1;
  std::size_t cycles = 256;
  int reset_cycles = 2;
  std::string file;  // directed vectors

  nlohmann::json to_json() const;
  static StimulusConfig from_json(const nlohmann::json& j);
};

struct SessionConfig {
  int max_iter = 5;
  int th = kDefaultThreshold;
  RepairMode mode = RepairMode::kPair;
  int preprocess_rounds = 5;
  StimulusConfig stimulus;
  nlohmann::json backend = nlohmann::json::object();
  std::string session_dir;  // empty: nothing persisted

  nlohmann::json to_json() const;
  static SessionConfig from_json(const nlohmann::json& j);
  static SessionConfig load(const std::string& path);
};

/// Builds a backend from {"kind": "scripted|remote|oracle|null", ...}.
std::unique_ptr<RepairBackend> make_backend(const nlohmann::json& cfg, const std::string& golden_text);

Stimulus session_stimulus(const ElaboratedDesign& golden, const StimulusConfig& cfg);

struct Version {
  enum class Status { kAccepted, kRolledBack };
  int index = 0;
  std::string text;
  double score = 0.0;
  std::optional<PatchSet> patchset;
  Status status = Status::kAccepted;
  std::string note;  // why the score is 0 without a report, if so

  nlohmann::json to_json() const;
  static Version from_json(const nlohmann::json& j);
};

const char* to_string(Version::Status s);

enum class Outcome { kSuccess, kFailure };
enum class Stage { kNone, kPreprocess, kMS, kSL };

const char* to_string(Outcome o);
const char* to_string(Stage s);

/// Wall-clock seconds per stage; backend latency is kept apart.
struct Timings {
  double preprocess = 0.0;
  double verify = 0.0;
  double localize = 0.0;
  double repair = 0.0;
  double backend_latency = 0.0;

  double exec() const { return preprocess + verify + localize + repair; }
  nlohmann::json to_json() const;
  static Timings from_json(const nlohmann::json& j);
};

struct IterationRecord {
  int iter = 0;
  std::string mode;            // "MS" or "SL"
  int base_version = 0;
  int new_version = -1;        // -1 when no version was produced
  std::size_t agent_calls = 0;
  std::vector<std::string> prompts;
  std::string response_error;
  std::string transport_error;
  std::vector<std::string> patch_errors;
  std::string preprocess_error;
  bool rolled_back = false;

  nlohmann::json to_json() const;
  static IterationRecord from_json(const nlohmann::json& j);
};

struct SessionResult {
  Outcome outcome = Outcome::kFailure;
  Stage stage = Stage::kNone;
  std::string final_text;
  double final_score = 0.0;
  int iterations_used = 0;
  std::vector<Version> history;
  std::vector<PatchSet> damage_repairs;
  std::vector<IterationRecord> iterations;
  Timings timings;
  std::size_t agent_calls = 0;
  std::string failure;  // reason when the session aborted early

  nlohmann::json to_json() const;
  static SessionResult from_json(const nlohmann::json& j);
};

/// True iff `new_score` is below the best accepted score in `history`.
bool should_rollback(const std::vector<Version>& history, double new_score);

/// Preprocess, then verify/localize/repair up to max_iter times with rollback.
SessionResult run_session(const SourceFile& dut, const SourceFile& golden, const std::string& spec_text,
                          RepairBackend& backend, const SessionConfig& cfg);

class Verifier;

/// Same, scoring against a prebuilt verifier of the golden design and its
/// session stimulus (shared across sessions of one golden design).
SessionResult run_session(const SourceFile& dut, const SourceFile& golden, const std::string& spec_text,
                          RepairBackend& backend, const SessionConfig& cfg, const Verifier& verifier);

/// Reads session.json of a persisted session.
SessionResult load_session(const std::string& dir);

}  // namespace rtlmend
