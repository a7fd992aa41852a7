#pragma once

#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "rtlmend/ast.hpp"
#include "rtlmend/source.hpp"

namespace rtlmend {

/// A flattened net or variable. Top-level names carry no prefix; nested ones
/// are dotted instance paths ("u0.sum").
struct ElabSignal {
  std::string path;
  std::string name;
  int scope = 0;
  int width = 1;
  int lsb = 0;        // declared lsb; storage bit i is index lsb + i
  int depth = 0;      // 0 for scalars/vectors
  int array_lo = 0;
  NetKind kind = NetKind::kWire;
  Direction direction = Direction::kInternal;
  bool top_port = false;
  std::uint32_t decl_line = 0;
};

struct ElabScope {
  std::string prefix;
  const ModuleDecl* module = nullptr;
  int parent = -1;
  const Instance* instance = nullptr;
  std::unordered_map<std::string, int> signals;
};

/// One concurrent process of the flattened design.
struct ElabProcess {
  enum class Kind { kAssign, kCombinational, kSequential, kPortIn, kPortOut };

  Kind kind = Kind::kAssign;
  int scope = 0;  // scope in which the AST of this process is resolved
  const ContinuousAssign* assign = nullptr;
  const AlwaysBlock* always = nullptr;
  const Instance* instance = nullptr;
  const PortConnection* connection = nullptr;
  int child_signal = -1;  // port bindings: the port inside the child scope
  Span span;

  bool combinational() const { return kind != Kind::kSequential; }
};

struct ElaboratedDesign {
  std::shared_ptr<const Design> design;
  std::vector<ElabSignal> signals;
  std::vector<ElabScope> scopes;
  std::vector<ElabProcess> processes;
  std::vector<int> inputs;   // top-level input ports, declaration order
  std::vector<int> outputs;  // top-level output ports
  int clock = -1;
  int reset = -1;
  bool reset_active_low = false;
  std::vector<Diagnostic> warnings;

  const std::string& file() const { return design->source->path(); }
  const SourceFile& source() const { return *design->source; }
  int find_signal(const std::string& path) const;
  /// Resolves a local identifier in `scope`; -1 when absent.
  int resolve(int scope, const std::string& name) const;
  /// Self-determined width of an expression resolved in `scope`.
  int self_width(const Expr& e, int scope) const;
  bool sequential() const;
};

struct ElabResult {
  std::optional<ElaboratedDesign> design;
  std::vector<Diagnostic> diagnostics;  // errors and width warnings

  bool ok() const { return design.has_value(); }
};

ElabResult elaborate(const Design& design);
ElabResult elaborate(std::shared_ptr<const Design> design);

/// Parse + elaborate in one step; diagnostics from whichever stage failed.
ElabResult compile_text(std::string text, std::string path = "<memory>");

/// Self-determined width of `e` with identifiers resolved among `m`'s nets.
int self_width(const Expr& e, const ModuleDecl& m);

/// Heuristics shared by the testbench and lint.
bool is_reset_name(const std::string& name);
bool is_active_low_name(const std::string& name);
bool is_clock_name(const std::string& name);

}  // namespace rtlmend
