#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtlmend/bench.hpp"
#include "rtlmend/errgen.hpp"

namespace testsupport {

std::string read_file(const std::string& path);
std::string corpus_dir();
std::string fixtures_dir();

/// The bundled corpus, loaded once.
const std::vector<rtlmend::CorpusEntry>& corpus();
const rtlmend::CorpusEntry& corpus_entry(const std::string& name);

/// Sequential 4-bit ALU with a case-selected temporary.
std::string alu_golden();
/// The ALU with two operator faults (`&` -> `|`, `-` -> `^`).
std::string alu_two_faults();
/// Good patch first, corrupting patch second, unmatched patches afterwards.
nlohmann::json rollback_script();

/// Two modules sharing an `output Y;` line; the top lacks `input A;`.
struct MissingPort {
  std::string golden;
  std::string dut;
};
MissingPort missing_port();

/// 16-bit adder whose repair special-cases one value of `a[11:0]` that the
/// session stimulus never drives but the extended suite does.
struct Overfit {
  std::string golden;
  std::string dut;
  std::string repaired;
  std::uint64_t key = 0;
  nlohmann::json script;
};
Overfit overfit();

/// Small modules carrying W1, W2 and W3 warnings only.
struct WarnCase {
  std::string name;
  std::string text;
};
std::vector<WarnCase> warning_corpus();

/// Module whose `==` sits in a branch no input can reach.
std::string dead_code_module();

/// if/else mux with each statement on its own line (header 3, then 4, else 6).
std::string mux_module();

/// Five sessions of three checks each plus their extended-suite verdicts.
struct SessionRow {
  std::vector<bool> checks;
  bool extended = false;
};
std::vector<SessionRow> five_sessions();
std::vector<rtlmend::MutantResult> five_session_results();

}  // namespace testsupport
