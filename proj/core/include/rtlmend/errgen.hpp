#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rtlmend/agent.hpp"
#include "rtlmend/ast.hpp"
#include "rtlmend/source.hpp"

namespace rtlmend {

enum class MutationKind {
  kTypeMisuse,
  kBitwidthMisuse,
  kOperatorMisuse,
  kVariableNameMisuse,
  kValueMisuse,
  kWrongJudgmentValue,
  kWrongSensitivity,
  kPortMismatch,
};

inline constexpr MutationKind kAllMutationKinds[] = {
    MutationKind::kTypeMisuse,         MutationKind::kBitwidthMisuse,   MutationKind::kOperatorMisuse,
    MutationKind::kVariableNameMisuse, MutationKind::kValueMisuse,      MutationKind::kWrongJudgmentValue,
    MutationKind::kWrongSensitivity,   MutationKind::kPortMismatch,
};

const char* to_string(MutationKind k);
std::optional<MutationKind> parse_mutation_kind(const std::string& s);

/// One text rewrite: [site.begin, site.end) holds `before` and becomes `after`.
struct MutationOp {
  MutationKind kind = MutationKind::kOperatorMisuse;
  Span site;
  std::string before;
  std::string after;
  std::string module;
};

enum class MutantClass { kSyntax, kFunctional };
const char* to_string(MutantClass c);

struct Mutant {
  std::string id;
  std::string module;  // corpus entry name
  std::string family;
  std::string base;
  std::string mutated;
  MutationOp op;
  MutantClass cls = MutantClass::kFunctional;
  std::uint32_t line = 0;  // ground-truth line in `mutated`
  double pass_rate = 0.0;  // under the default suite; 0 for syntax mutants
  PatchSet repair;         // line-level pairs that turn `mutated` back into `base`
};

/// Candidate rewrites of `kind` in every module of `design` (source order).
std::vector<MutationOp> enumerate_sites(const Design& design, MutationKind kind);

/// Applies `op` and classifies the result. Throws EquivalentMutant when the
/// mutant compiles cleanly and passes the default suite; simulation errors
/// (CombLoopDetected, LoopLimitExceeded) propagate.
Mutant inject(const Design& design, const MutationOp& op);

/// A golden design of the corpus.
struct CorpusEntry {
  std::string name;
  std::string family;
  std::string path;
  std::string text;
  std::string spec;
};

/// Loads every `<name>.v` with its `<name>.md` spec under `dir`; the family
/// is the parent directory name.
std::vector<CorpusEntry> load_corpus(const std::string& dir);

struct BenchmarkPlan {
  std::map<MutationKind, int> per_module;  // mutants per kind per module

  static BenchmarkPlan uniform(int n);
  nlohmann::json to_json() const;
  static BenchmarkPlan from_json(const nlohmann::json& j);
};

struct BenchmarkSet {
  std::uint64_t seed = 0;
  BenchmarkPlan plan;
  std::vector<CorpusEntry> corpus;
  std::vector<Mutant> mutants;
  // family -> kind -> shipped mutants; -1 marks an empty site list.
  std::map<std::string, std::map<MutationKind, int>> matrix;
  std::size_t discarded = 0;

  const CorpusEntry* golden(const std::string& module) const;
  /// Manifest rows: [{id, module, family, kind, class, line, before, after, repair, file, golden}].
  nlohmann::json manifest() const;
  /// Writes benchmark.json, matrix.json, mutants/ and golden/ under `dir`.
  void save(const std::string& dir) const;
  static BenchmarkSet load(const std::string& dir);
};

BenchmarkSet build_benchmark(const std::vector<CorpusEntry>& corpus, const BenchmarkPlan& plan,
                             std::uint64_t seed, int workers = 1);

}  // namespace rtlmend
