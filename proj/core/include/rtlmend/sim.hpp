#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rtlmend/elaborate.hpp"
#include "rtlmend/stimulus.hpp"
#include "rtlmend/value.hpp"

namespace rtlmend {

namespace detail {

enum class OpCode : std::uint8_t {
  kConst, kLoad, kLoadSlice, kLoadBit, kLoadWord, kZext,
  kConcat, kReplicate,
  kNot, kNeg, kLogNot, kRedAnd, kRedOr, kRedXor,
  kAdd, kSub, kMul, kDiv, kMod, kAnd, kOr, kXor, kLogAnd, kLogOr,
  kEq, kNe, kLt, kLe, kGt, kGe, kShl, kShr,
  kTernary,
};

struct Node {
  OpCode op = OpCode::kConst;
  int width = 1;
  int a = 0;  // slot / operand count / replicate count
  int b = 0;  // shift / depth
  int c = 0;  // declared lsb / array low bound
  Value k;
};

}  // namespace detail

/// Expression lowered to a postorder program over a slot array, with every
/// context-determined width resolved at compile time.
class CompiledExpr {
 public:
  int width() const { return width_; }
  Value eval(const Value* slots) const;
  bool empty() const { return nodes_.empty(); }

 private:
  friend class ExprCompiler;
  std::vector<detail::Node> nodes_;
  int width_ = 1;
  int stack_ = 1;
};

/// True when a condition value selects the then-branch (some bit known 1).
bool truthy(const Value& v);
/// Exact four-state equality used by case item matching.
bool case_equal(const Value& a, const Value& b);

struct SlotInfo {
  std::string path;  // "u0.sum", or "mem[3]" for array words
  int width = 1;
  int signal = -1;
  int word = -1;     // array word index, -1 for scalars and vectors
};

struct CompiledStmt;

/// Immutable simulation model of an elaborated design; share freely across
/// threads, one Simulator per run.
class SimProgram {
 public:
  static std::shared_ptr<const SimProgram> build(const ElaboratedDesign& design);
  ~SimProgram();

  const ElaboratedDesign& design() const { return design_; }
  const std::vector<SlotInfo>& slots() const { return slots_; }
  int slot_of(int signal) const { return signal_slot_[static_cast<std::size_t>(signal)]; }
  int clock_slot() const { return clock_slot_; }
  /// Compiles an expression resolved in `scope`; `width` 0 means self-determined.
  CompiledExpr compile(const Expr& e, int scope, int width = 0) const;

  struct Impl;
  const Impl& impl() const { return *impl_; }

 private:
  SimProgram() = default;
  ElaboratedDesign design_;
  std::vector<SlotInfo> slots_;
  std::vector<int> signal_slot_;
  int clock_slot_ = -1;
  std::unique_ptr<Impl> impl_;
};

/// Cycle-stepped two-region simulator.
class Simulator {
 public:
  explicit Simulator(std::shared_ptr<const SimProgram> program);

  /// Maps the columns of subsequent `cycle` calls to top-level inputs.
  void bind_inputs(const std::vector<std::string>& names);
  /// Runs one cycle: apply inputs, settle, fire asynchronous edges, sample,
  /// clock edge, re-settle.
  void cycle(const std::vector<std::uint64_t>& inputs);

  const std::vector<Value>& state() const { return state_; }
  /// Values just before the clock edge of the last cycle.
  const std::vector<Value>& sampled() const { return sampled_; }
  const SimProgram& program() const { return *program_; }

 private:
  void write(int slot, const Value& v, int writer);
  void settle();
  void run_stmt(const CompiledStmt& s, bool sequential);
  void assign(const CompiledStmt& s, bool nonblocking);
  void run_process(int p);
  void fire(const std::vector<int>& blocks);
  void dispatch_events();

  std::shared_ptr<const SimProgram> program_;
  std::vector<Value> state_;
  std::vector<Value> sampled_;
  std::vector<std::uint8_t> dirty_;
  std::vector<Value> last_edge_;
  std::vector<int> input_slots_;
  std::vector<int> input_widths_;
  struct Pending {
    int slot;
    int shift;
    int width;
    Value v;
  };
  std::vector<Pending> nba_;
  int current_ = -1;
  std::vector<Value> stack_;
};

struct TraceSignal {
  std::string path;
  int width = 1;
  int slot = 0;
};

/// Dense per-cycle record of every slot. `post` holds values after each
/// cycle settles; `pre` holds the values sampled by the clock edge.
class Trace {
 public:
  std::vector<TraceSignal> signals;  // clock excluded
  std::size_t stride = 0;
  std::size_t cycles = 0;
  std::vector<Value> post;
  std::vector<Value> pre;  // empty when not recorded

  std::size_t horizon() const { return cycles == 0 ? 0 : cycles - 1; }
  bool has_sampled() const { return !pre.empty(); }
  void index();
  int slot(const std::string& path) const;  // -1 when untraced

  /// Value in effect at `time`. Throws UnknownSignal / TimeBeyondHorizon.
  Value query(const std::string& path, std::size_t time) const;
  const Value* row(std::size_t t) const { return &post[t * stride]; }
  const Value* sampled_row(std::size_t t) const {
    return pre.empty() ? row(t) : &pre[t * stride];
  }
  const Value& at(int slot, std::size_t t) const { return post[t * stride + static_cast<std::size_t>(slot)]; }

  /// Change list of one slot: the time-0 entry plus every later change.
  std::vector<std::pair<std::size_t, Value>> changes(int slot) const;

  /// {"signal": [[time, "binstring"], ...], ...}
  nlohmann::json to_json() const;
  static Trace from_json(const nlohmann::json& j);

  std::string to_vcd() const;
  void export_vcd(const std::string& path) const;

 private:
  std::unordered_map<std::string, int> by_path_;
};

Trace simulate(const SimProgram& program, const Stimulus& stimulus, std::size_t cycles,
               bool record_sampled = true);
Trace simulate(const ElaboratedDesign& design, const Stimulus& stimulus, std::size_t cycles);

}  // namespace rtlmend
