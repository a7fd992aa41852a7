#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "rtlmend/elaborate.hpp"
#include "rtlmend/sim.hpp"
#include "rtlmend/stimulus.hpp"

namespace rtlmend {

inline constexpr int kExhaustiveBitLimit = 14;
inline constexpr int kDefaultResetCycles = 2;

/// Total width of the inputs a stimulus randomizes or enumerates (clock and
/// reset excluded).
int data_input_bits(const ElaboratedDesign& design);

/// Builds a stimulus under the reset protocol. Exhaustive mode ignores
/// `cycles` and emits one cycle per input pattern. Directed mode reads
/// `directed_file` ({"reset_cycles": n, "vectors": [{"a": 3, ...}, ...]}).
Stimulus make_stimulus(const ElaboratedDesign& design, StimulusMode mode, std::uint64_t seed,
                       std::size_t cycles, int reset_cycles = kDefaultResetCycles,
                       const std::string& directed_file = {});

/// Exhaustive when legal; random seed sweep (8 seeds x 256 cycles from
/// `seed_base`) for wide designs and, in addition, for sequential ones.
Stimulus default_suite(const ElaboratedDesign& design, std::uint64_t seed_base = 1);

/// Extended validation suite with seeds disjoint from the default suite.
Stimulus extended_suite(const ElaboratedDesign& design, std::uint64_t seed_base = 1001,
                        int seeds = 32, std::size_t cycles = 1024);

struct Check {
  std::uint32_t time = 0;
  int output = 0;  // index into VerifyReport::outputs
  Value expected;
  Value actual;
  bool pass = true;
};

struct MismatchRecord {
  std::uint32_t time = 0;
  std::string signal;
  Value expected;
  Value actual;
};

struct VerifyReport {
  std::size_t total_checks = 0;
  std::size_t passed_checks = 0;
  double pass_rate = 0.0;
  std::vector<std::string> outputs;
  std::vector<MismatchRecord> mismatches;
  std::vector<Check> checks;
  Trace trace;  // DUT waveform

  /// L_UVM: one JSON object per check plus a trailing summary line.
  std::vector<std::string> log_lines() const;
  std::string log_text() const;
};

/// Golden side of a verification: simulated once, reused for every DUT.
class Verifier {
 public:
  Verifier(const ElaboratedDesign& golden, Stimulus stimulus);

  const Stimulus& stimulus() const { return stimulus_; }
  /// Throws PortContractViolation, CombLoopDetected.
  VerifyReport verify(const ElaboratedDesign& dut, bool record_trace = true) const;

 private:
  std::shared_ptr<const SimProgram> golden_;
  Stimulus stimulus_;
  std::vector<std::string> outputs_;
  std::vector<Value> expected_;  // cycles x outputs
};

void check_port_contract(const ElaboratedDesign& dut, const ElaboratedDesign& golden);

VerifyReport run_verify(const ElaboratedDesign& dut, const ElaboratedDesign& golden,
                        const Stimulus& stimulus, std::size_t cycles);

}  // namespace rtlmend
