#include "rtlmend/ast.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace rtlmend {

int Literal::min_width() const {
  if (sized) return width;
  std::uint64_t v = bits | xmask;
  return v == 0 ? 1 : 64 - std::countl_zero(v);
}

const char* spelling(UnaryOp op) {
  switch (op) {
    case UnaryOp::kBitNot: return "~";
    case UnaryOp::kLogicalNot: return "!";
    case UnaryOp::kNegate: return "-";
    case UnaryOp::kReduceAnd: return "&";
    case UnaryOp::kReduceOr: return "|";
    case UnaryOp::kReduceXor: return "^";
  }
  return "?";
}

const char* spelling(BinaryOp op) {
  switch (op) {
    case BinaryOp::kAdd: return "+";
    case BinaryOp::kSub: return "-";
    case BinaryOp::kMul: return "*";
    case BinaryOp::kDiv: return "/";
    case BinaryOp::kMod: return "%";
    case BinaryOp::kBitAnd: return "&";
    case BinaryOp::kBitOr: return "|";
    case BinaryOp::kBitXor: return "^";
    case BinaryOp::kLogicalAnd: return "&&";
    case BinaryOp::kLogicalOr: return "||";
    case BinaryOp::kEq: return "==";
    case BinaryOp::kNe: return "!=";
    case BinaryOp::kLt: return "<";
    case BinaryOp::kLe: return "<=";
    case BinaryOp::kGt: return ">";
    case BinaryOp::kGe: return ">=";
    case BinaryOp::kShl: return "<<";
    case BinaryOp::kShr: return ">>";
  }
  return "?";
}

bool is_comparison(BinaryOp op) {
  switch (op) {
    case BinaryOp::kEq:
    case BinaryOp::kNe:
    case BinaryOp::kLt:
    case BinaryOp::kLe:
    case BinaryOp::kGt:
    case BinaryOp::kGe:
      return true;
    default:
      return false;
  }
}

bool is_arithmetic(BinaryOp op) {
  switch (op) {
    case BinaryOp::kAdd:
    case BinaryOp::kSub:
    case BinaryOp::kMul:
    case BinaryOp::kDiv:
    case BinaryOp::kMod:
      return true;
    default:
      return false;
  }
}

const char* to_string(Direction d) {
  switch (d) {
    case Direction::kInput: return "input";
    case Direction::kOutput: return "output";
    case Direction::kInternal: return "internal";
  }
  return "internal";
}

const char* to_string(NetKind k) {
  switch (k) {
    case NetKind::kWire: return "wire";
    case NetKind::kReg: return "reg";
    case NetKind::kInteger: return "integer";
  }
  return "wire";
}

Expr Expr::ident(std::string n, Span s) {
  Expr e;
  e.kind = Kind::kIdent;
  e.name = std::move(n);
  e.span = s;
  return e;
}

Span span_of(const ModuleItem& item) {
  return std::visit([](const auto& i) { return i.span; }, item);
}

const NetDecl* ModuleDecl::find_net(const std::string& n) const {
  for (const auto& net : nets)
    if (net.name == n) return &net;
  return nullptr;
}

std::vector<const NetDecl*> ModuleDecl::ports() const {
  std::vector<const NetDecl*> out;
  for (const auto& p : port_order)
    if (const NetDecl* n = find_net(p)) out.push_back(n);
  return out;
}

const ModuleDecl* Design::find_module(const std::string& n) const {
  for (const auto& m : modules)
    if (m.name == n) return &m;
  return nullptr;
}

const ModuleDecl& Design::top_module() const {
  if (const ModuleDecl* m = find_module(top)) return *m;
  throw std::logic_error("design has no top module '" + top + "'");
}

namespace {

template <class T, class Eq>
bool all_equal(const std::vector<T>& a, const std::vector<T>& b, Eq eq) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!eq(a[i], b[i])) return false;
  return true;
}

bool literal_equal(const Literal& a, const Literal& b) {
  return a.text == b.text && a.width == b.width && a.sized == b.sized && a.bits == b.bits &&
         a.xmask == b.xmask;
}

bool net_equal(const NetDecl& a, const NetDecl& b) {
  return a.name == b.name && a.direction == b.direction && a.kind == b.kind &&
         a.has_range == b.has_range && a.msb == b.msb && a.lsb == b.lsb &&
         a.is_array == b.is_array && a.array_lo == b.array_lo && a.array_hi == b.array_hi;
}

bool case_item_equal(const CaseItem& a, const CaseItem& b) {
  return a.is_default == b.is_default &&
         all_equal(a.labels, b.labels,
                   [](const Expr& x, const Expr& y) { return structurally_equal(x, y); }) &&
         all_equal(a.body, b.body,
                   [](const Stmt& x, const Stmt& y) { return structurally_equal(x, y); });
}

bool item_equal(const ModuleItem& a, const ModuleItem& b) {
  if (a.index() != b.index()) return false;
  if (auto* x = std::get_if<ContinuousAssign>(&a)) {
    const auto& y = std::get<ContinuousAssign>(b);
    return structurally_equal(x->lhs, y.lhs) && structurally_equal(x->rhs, y.rhs);
  }
  if (auto* x = std::get_if<AlwaysBlock>(&a)) {
    const auto& y = std::get<AlwaysBlock>(b);
    return x->star == y.star &&
           all_equal(x->sens, y.sens,
                     [](const SensItem& p, const SensItem& q) {
                       return p.edge == q.edge && p.signal == q.signal;
                     }) &&
           structurally_equal(x->body, y.body);
  }
  const auto& x = std::get<Instance>(a);
  const auto& y = std::get<Instance>(b);
  return x.module == y.module && x.name == y.name &&
         all_equal(x.connections, y.connections,
                   [](const PortConnection& p, const PortConnection& q) {
                     if (p.port != q.port || p.expr.has_value() != q.expr.has_value())
                       return false;
                     return !p.expr || structurally_equal(*p.expr, *q.expr);
                   });
}

}  // namespace

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Expr::Kind::kLiteral:
      return literal_equal(a.literal, b.literal);
    case Expr::Kind::kIdent:
      return a.name == b.name;
    case Expr::Kind::kPartSelect:
      return a.name == b.name && a.msb == b.msb && a.lsb == b.lsb;
    case Expr::Kind::kBitSelect:
      if (a.name != b.name) return false;
      break;
    case Expr::Kind::kReplicate:
      if (a.count != b.count) return false;
      break;
    case Expr::Kind::kUnary:
      if (a.unary != b.unary) return false;
      break;
    case Expr::Kind::kBinary:
      if (a.binary != b.binary) return false;
      break;
    default:
      break;
  }
  return all_equal(a.operands, b.operands,
                   [](const Expr& x, const Expr& y) { return structurally_equal(x, y); });
}

bool structurally_equal(const Stmt& a, const Stmt& b) {
  if (a.kind != b.kind) return false;
  auto stmts = [](const std::vector<Stmt>& x, const std::vector<Stmt>& y) {
    return all_equal(x, y, [](const Stmt& p, const Stmt& q) { return structurally_equal(p, q); });
  };
  switch (a.kind) {
    case Stmt::Kind::kBlocking:
    case Stmt::Kind::kNonblocking:
      return structurally_equal(a.lhs, b.lhs) && structurally_equal(a.rhs, b.rhs);
    case Stmt::Kind::kBlock:
      return stmts(a.body, b.body);
    case Stmt::Kind::kIf:
      return structurally_equal(a.cond, b.cond) && stmts(a.body, b.body) &&
             stmts(a.else_body, b.else_body);
    case Stmt::Kind::kCase:
      return structurally_equal(a.cond, b.cond) && all_equal(a.items, b.items, case_item_equal);
    case Stmt::Kind::kFor:
      return structurally_equal(a.cond, b.cond) && stmts(a.loop_control, b.loop_control) &&
             stmts(a.body, b.body);
    case Stmt::Kind::kEmpty:
      return true;
  }
  return false;
}

bool structurally_equal(const ModuleDecl& a, const ModuleDecl& b) {
  if (a.name != b.name || a.ansi != b.ansi || a.port_order != b.port_order) return false;
  // Declaration order is irrelevant; compare by name.
  if (a.nets.size() != b.nets.size()) return false;
  for (const auto& n : a.nets) {
    const NetDecl* m = b.find_net(n.name);
    if (!m || !net_equal(n, *m)) return false;
  }
  return all_equal(a.items, b.items, item_equal);
}

bool structurally_equal(const Design& a, const Design& b) {
  return a.top == b.top &&
         all_equal(a.modules, b.modules, [](const ModuleDecl& x, const ModuleDecl& y) {
           return structurally_equal(x, y);
         });
}

void collect_reads(const Expr& e, std::vector<std::string>& out) {
  walk(e, [&](const Expr& x) {
    if (x.kind == Expr::Kind::kIdent || x.kind == Expr::Kind::kBitSelect ||
        x.kind == Expr::Kind::kPartSelect)
      out.push_back(x.name);
  });
}

void collect_lvalue(const Expr& lhs, std::vector<std::string>& written,
                    std::vector<std::string>& index_reads) {
  switch (lhs.kind) {
    case Expr::Kind::kIdent:
    case Expr::Kind::kPartSelect:
      written.push_back(lhs.name);
      break;
    case Expr::Kind::kBitSelect:
      written.push_back(lhs.name);
      for (const auto& op : lhs.operands) collect_reads(op, index_reads);
      break;
    case Expr::Kind::kConcat:
      for (const auto& op : lhs.operands) collect_lvalue(op, written, index_reads);
      break;
    default:
      break;
  }
}

}  // namespace rtlmend
