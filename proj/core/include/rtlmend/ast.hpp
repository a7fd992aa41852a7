#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rtlmend/source.hpp"

namespace rtlmend {

inline constexpr int kMaxWidth = 64;
inline constexpr int kMaxArrayDepth = 1024;

/// Number literal. `text` is kept verbatim so printing never changes radix.
struct Literal {
  std::string text;
  int width = 32;
  bool sized = false;
  std::uint64_t bits = 0;
  std::uint64_t xmask = 0;

  /// Bits needed to hold the value; used for unsized literals in width checks.
  int min_width() const;
};

enum class UnaryOp { kBitNot, kLogicalNot, kNegate, kReduceAnd, kReduceOr, kReduceXor };
enum class BinaryOp {
  kAdd, kSub, kMul, kDiv, kMod,
  kBitAnd, kBitOr, kBitXor,
  kLogicalAnd, kLogicalOr,
  kEq, kNe, kLt, kLe, kGt, kGe,
  kShl, kShr,
};

const char* spelling(UnaryOp op);
const char* spelling(BinaryOp op);
bool is_comparison(BinaryOp op);
bool is_arithmetic(BinaryOp op);

struct Expr {
  enum class Kind {
    kLiteral,
    kIdent,
    kBitSelect,   // name[operands[0]]; also array word select
    kPartSelect,  // name[msb:lsb]
    kConcat,      // {operands...}
    kReplicate,   // {count{operands...}}
    kUnary,
    kBinary,
    kTernary,
  };

  Kind kind = Kind::kLiteral;
  std::string name;
  Literal literal;
  UnaryOp unary = UnaryOp::kBitNot;
  BinaryOp binary = BinaryOp::kAdd;
  int msb = 0;
  int lsb = 0;
  int count = 0;
  std::vector<Expr> operands;
  Span span;
  Span op_span;  // operator token for unary/binary

  static Expr ident(std::string n, Span s = {});
};

enum class Edge { kPos, kNeg };

struct Stmt;

struct CaseItem {
  std::vector<Expr> labels;  // empty for default
  bool is_default = false;
  std::vector<Stmt> body;    // exactly one statement
  Span span;                 // label list
};

struct Stmt {
  enum class Kind { kBlock, kBlocking, kNonblocking, kIf, kCase, kFor, kEmpty };

  Kind kind = Kind::kEmpty;
  Expr lhs;
  Expr rhs;
  Expr cond;                      // if condition, case subject, for condition
  std::vector<Stmt> body;         // block members, if-then, for body
  std::vector<Stmt> else_body;    // if-else (0 or 1)
  std::vector<CaseItem> items;    // case
  std::vector<Stmt> loop_control; // for: [init, step]
  Span span;
  Span op_span;                   // `=` / `<=` token of an assignment
  Span head_span;                 // `if (...)`, `case (...)`, `for (...)` header
};

enum class Direction { kInternal, kInput, kOutput };
enum class NetKind { kWire, kReg, kInteger };

const char* to_string(Direction d);
const char* to_string(NetKind k);

struct NetDecl {
  std::string name;
  Direction direction = Direction::kInternal;
  NetKind kind = NetKind::kWire;
  bool kind_explicit = false;  // `wire`/`reg`/`integer` keyword written
  bool has_range = false;
  int msb = 0;
  int lsb = 0;
  bool is_array = false;
  int array_lo = 0;
  int array_hi = 0;
  Span span;        // whole declaration
  Span name_span;
  Span kind_span;   // keyword token; empty position marks where it would go
  Span range_span;  // `[msb:lsb]`

  int width() const { return has_range ? msb - lsb + 1 : (kind == NetKind::kInteger ? 32 : 1); }
  int depth() const { return is_array ? array_hi - array_lo + 1 : 0; }
};

struct ContinuousAssign {
  Expr lhs;
  Expr rhs;
  Span span;
};

struct SensItem {
  Edge edge = Edge::kPos;
  std::string signal;
  Span span;
};

struct AlwaysBlock {
  bool star = false;           // @(*) or @*
  std::vector<SensItem> sens;  // edge list otherwise
  Stmt body;
  Span span;
  Span sens_span;              // parenthesized list including parens

  bool edge_triggered() const { return !star; }
};

struct PortConnection {
  std::string port;
  std::optional<Expr> expr;  // empty for `.p()`
  Span span;
};

struct Instance {
  std::string module;
  std::string name;
  std::vector<PortConnection> connections;
  Span span;
};

using ModuleItem = std::variant<ContinuousAssign, AlwaysBlock, Instance>;

Span span_of(const ModuleItem& item);

struct ModuleDecl {
  std::string name;
  bool ansi = false;
  std::vector<std::string> port_order;
  std::vector<NetDecl> nets;
  std::vector<ModuleItem> items;
  Span span;
  Span header_span;

  const NetDecl* find_net(const std::string& n) const;
  std::vector<const NetDecl*> ports() const;
};

struct Design {
  std::vector<ModuleDecl> modules;
  std::string top;
  std::shared_ptr<const SourceFile> source;

  const ModuleDecl* find_module(const std::string& n) const;
  const ModuleDecl& top_module() const;
};

// Structural equality ignores spans and literal radix spelling is compared
// verbatim.
bool structurally_equal(const Expr& a, const Expr& b);
bool structurally_equal(const Stmt& a, const Stmt& b);
bool structurally_equal(const ModuleDecl& a, const ModuleDecl& b);
bool structurally_equal(const Design& a, const Design& b);

/// Visits every expression reachable from a statement (lhs, rhs, guards, labels).
template <class F>
void for_each_expr(const Stmt& s, F&& f);

/// Visits `e` and all sub-expressions, preorder.
template <class F>
void walk(const Expr& e, F&& f) {
  f(e);
  for (const auto& op : e.operands) walk(op, f);
}

template <class F>
void walk(Expr& e, F&& f) {
  f(e);
  for (auto& op : e.operands) walk(op, f);
}

/// Preorder over statements.
template <class F>
void walk(const Stmt& s, F&& f) {
  f(s);
  for (const auto& c : s.loop_control) walk(c, f);
  for (const auto& c : s.body) walk(c, f);
  for (const auto& c : s.else_body) walk(c, f);
  for (const auto& it : s.items)
    for (const auto& c : it.body) walk(c, f);
}

template <class F>
void for_each_expr(const Stmt& s, F&& f) {
  walk(s, [&](const Stmt& st) {
    switch (st.kind) {
      case Stmt::Kind::kBlocking:
      case Stmt::Kind::kNonblocking:
        f(st.lhs);
        f(st.rhs);
        break;
      case Stmt::Kind::kIf:
      case Stmt::Kind::kFor:
        f(st.cond);
        break;
      case Stmt::Kind::kCase:
        f(st.cond);
        for (const auto& it : st.items)
          for (const auto& l : it.labels) f(l);
        break;
      default:
        break;
    }
  });
}

/// Names of all identifiers an expression reads (select bases included).
void collect_reads(const Expr& e, std::vector<std::string>& out);
/// Base names an lvalue writes, plus identifiers its index expressions read.
void collect_lvalue(const Expr& lhs, std::vector<std::string>& written,
                    std::vector<std::string>& index_reads);

}  // namespace rtlmend
