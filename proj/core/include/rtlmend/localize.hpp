#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rtlmend/elaborate.hpp"
#include "rtlmend/sim.hpp"
#include "rtlmend/testbench.hpp"
#include "rtlmend/value.hpp"

namespace rtlmend {

/// Mismatch facts extracted from a verification log.
struct MismatchFacts {
  std::vector<std::size_t> times;                               // MT, ascending
  std::vector<std::string> signals;                             // MS, first-failure order
  std::map<std::size_t, std::map<std::string, Value>> inputs;   // IV

  bool empty() const { return times.empty(); }
};

/// Parses L_UVM lines; inputs are looked up in `trace` for every failing cycle.
/// Throws MalformedLog.
MismatchFacts err_chk(const std::vector<std::string>& log_lines, const Trace& trace,
                      const std::vector<std::string>& input_names);

/// Enclosing condition of an assignment.
struct DfgGuard {
  enum class Kind { kThen, kElse, kCaseItem, kCaseDefault, kLoop };
  Kind kind = Kind::kThen;
  const Stmt* stmt = nullptr;  // the if/case/for statement
  std::size_t item = 0;        // case item index
  int scope = 0;
  std::uint32_t line = 0;      // header line
  std::uint32_t item_line = 0; // case item label line
  bool in_loop = false;        // may depend on a loop variable; never evaluated
};

/// Dependency `from` -> `to`; `from` is -1 for a constant right-hand side.
struct DfgEdge {
  int from = -1;
  int to = -1;
  bool guard = false;       // control dependency through a guard expression
  bool sequential = false;  // written by an edge-triggered process
  bool blocking = false;    // blocking write (matters inside sequential processes)
  int process = -1;
  std::uint32_t line = 0;   // assignment line
  std::vector<std::uint32_t> context;  // guard and block-header lines
  std::vector<int> guards;  // indices into Dfg::guards, outermost first
};

struct Dfg {
  std::string root;
  int root_signal = -1;
  std::vector<int> nodes;  // signal indices, BFS order from the root
  std::vector<DfgEdge> edges;
  std::vector<DfgGuard> guards;

  std::vector<const DfgEdge*> into(int signal) const;
  bool combinational_acyclic() const;
};

/// Backward def-use graph of `signal` across instance boundaries. Throws UnknownSignal.
Dfg build_dfg(const ElaboratedDesign& design, const std::string& signal);

struct SourceLine {
  std::string file;
  std::uint32_t line = 0;
  bool operator==(const SourceLine&) const = default;
};

struct SliceResult {
  std::vector<SourceLine> lines;      // frequency descending, then line ascending
  std::vector<std::size_t> counts;    // mismatch cycles whose slice contains lines[i]
  std::vector<std::string> signals;   // non-input signals reached on executed edges
};

/// Time-aware backward slice from the DFG root at each cycle of `times`.
/// `program` must be the one that produced `trace`. Throws TimeBeyondHorizon.
SliceResult dynamic_slice(const SimProgram& program, const Dfg& dfg,
                          const std::vector<std::size_t>& times, const Trace& trace);
SliceResult dynamic_slice(const ElaboratedDesign& design, const Dfg& dfg,
                          const std::vector<std::size_t>& times, const Trace& trace);

/// Every line reachable backwards from the root, guards ignored.
std::vector<SourceLine> static_slice(const ElaboratedDesign& design, const Dfg& dfg);

inline constexpr int kDefaultThreshold = 2;
inline constexpr std::size_t kMaxMismatchTimes = 16;

struct ErrInfo {
  enum class Mode { kMS, kSL };
  Mode mode = Mode::kMS;
  std::vector<std::string> signals;
  std::vector<std::size_t> times;
  std::map<std::size_t, std::map<std::string, Value>> inputs;
  std::vector<SourceLine> lines;

  nlohmann::json to_json() const;
  static ErrInfo from_json(const nlohmann::json& j);
  std::string to_string() const;  // compact JSON, as embedded in prompts
};

const char* to_string(ErrInfo::Mode m);

/// MS mode while iter < th, otherwise SL mode with slices and signal expansion.
ErrInfo fetch_err_info(const ElaboratedDesign& design, const VerifyReport& report, int iter,
                       int th = kDefaultThreshold);

}  // namespace rtlmend
