#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtlmend/errgen.hpp"
#include "rtlmend/orchestrator.hpp"

namespace rtlmend {

/// Exact ratio; value() is num/den.
struct Ratio {
  std::size_t num = 0;
  std::size_t den = 0;

  double value() const { return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }
  bool operator==(const Ratio& o) const { return num * o.den == o.num * den; }
};

struct MutantResult {
  std::string id;
  std::string module;
  std::string family;
  MutationKind kind = MutationKind::kOperatorMisuse;
  MutantClass cls = MutantClass::kFunctional;
  Outcome outcome = Outcome::kFailure;
  Stage stage = Stage::kNone;
  int iterations = 0;
  double final_score = 0.0;
  bool hr_pass = false;                   // final text passes every session check
  std::optional<bool> fr_pass;            // final text passes the extended suite
  std::optional<bool> localization_hit;   // functional mutants only
  Timings timings;
  std::size_t agent_calls = 0;
  std::string error;
  std::string final_text;   // not serialized
  std::string golden_text;  // not serialized

  nlohmann::json to_json() const;
  static MutantResult from_json(const nlohmann::json& j);
};

/// Extended validation suite used by FR.
struct FrConfig {
  std::uint64_t seed_base = 1001;
  int seeds = 32;
  std::size_t cycles = 1024;
};

/// True when `text` compiles and matches `golden` on the extended suite.
bool passes_extended(const std::string& text, const std::string& golden, const FrConfig& cfg = {});

/// HR: sessions whose final text passes every session check, over all sessions.
/// Throws EmptyResultSet.
Ratio compute_hr(const std::vector<MutantResult>& results);
/// FR: HR-passing sessions that also pass the extended suite, over all
/// sessions. Uses cached fr_pass when present. Throws EmptyResultSet.
Ratio compute_fr(const std::vector<MutantResult>& results, const FrConfig& cfg = {});

struct StageSummary {
  std::size_t hits = 0;   // HR successes attributed to the stage
  std::size_t fixes = 0;  // FR successes attributed to the stage
  double t_exec = 0.0;    // summed over attributed sessions
};

struct CampaignConfig {
  SessionConfig session;
  nlohmann::json backend = {{"kind", "oracle"}};
  int workers = 1;
  FrConfig fr;
  bool localize = true;        // record localization hits for functional mutants
  std::string sessions_dir;    // per-mutant session directories when set
};

struct CampaignResult {
  std::vector<MutantResult> results;  // sorted by id
  Ratio hr;
  Ratio fr;
  std::map<Stage, StageSummary> stages;
  double mean_t_exec = 0.0;
  double mean_backend_latency = 0.0;
  std::optional<Ratio> localization;  // hits over functional mutants
  // family -> kind -> FR over its mutants; missing cells print as the cross.
  std::map<std::string, std::map<MutationKind, Ratio>> heatmap;
  std::map<std::string, std::map<MutationKind, int>> matrix;

  nlohmann::json to_json() const;
  static CampaignResult from_json(const nlohmann::json& j);
  /// Rows = families, columns = kinds plus Syntax/Function weighted means.
  std::string heatmap_csv() const;
  /// Writes campaign.json and heatmap.csv.
  void save(const std::string& dir) const;
};

/// Aggregates per-mutant results (canonical order by id).
CampaignResult summarize(std::vector<MutantResult> results,
                         const std::map<std::string, std::map<MutationKind, int>>& matrix = {});

/// Runs one repair session per mutant on a pool of `config.workers` threads.
/// Per-mutant failures are recorded, never thrown.
CampaignResult run_campaign(const BenchmarkSet& benchmark, const CampaignConfig& config);

}  // namespace rtlmend
