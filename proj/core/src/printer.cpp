#include <sstream>

#include "rtlmend/frontend.hpp"

namespace rtlmend {
namespace {

int precedence(BinaryOp op) {
  switch (op) {
    case BinaryOp::kLogicalOr: return 1;
    case BinaryOp::kLogicalAnd: return 2;
    case BinaryOp::kBitOr: return 3;
    case BinaryOp::kBitXor: return 4;
    case BinaryOp::kBitAnd: return 5;
    case BinaryOp::kEq:
    case BinaryOp::kNe: return 6;
    case BinaryOp::kLt:
    case BinaryOp::kLe:
    case BinaryOp::kGt:
    case BinaryOp::kGe: return 7;
    case BinaryOp::kShl:
    case BinaryOp::kShr: return 8;
    case BinaryOp::kAdd:
    case BinaryOp::kSub: return 9;
    case BinaryOp::kMul:
    case BinaryOp::kDiv:
    case BinaryOp::kMod: return 10;
  }
  return 0;
}

void emit(std::ostream& os, const Expr& e);

void emit_operand(std::ostream& os, const Expr& e, int parent_prec, bool right) {
  bool paren = false;
  if (e.kind == Expr::Kind::kTernary) {
    paren = true;
  } else if (e.kind == Expr::Kind::kBinary) {
    int p = precedence(e.binary);
    paren = right ? p <= parent_prec : p < parent_prec;
  }
  if (paren) os << '(';
  emit(os, e);
  if (paren) os << ')';
}

void emit(std::ostream& os, const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::kLiteral:
      os << e.literal.text;
      return;
    case Expr::Kind::kIdent:
      os << e.name;
      return;
    case Expr::Kind::kBitSelect:
      os << e.name << '[';
      emit(os, e.operands[0]);
      os << ']';
      return;
    case Expr::Kind::kPartSelect:
      os << e.name << '[' << e.msb << ':' << e.lsb << ']';
      return;
    case Expr::Kind::kConcat:
    case Expr::Kind::kReplicate: {
      os << '{';
      if (e.kind == Expr::Kind::kReplicate) os << e.count << '{';
      for (std::size_t i = 0; i < e.operands.size(); ++i) {
        if (i) os << ", ";
        emit(os, e.operands[i]);
      }
      if (e.kind == Expr::Kind::kReplicate) os << '}';
      os << '}';
      return;
    }
    case Expr::Kind::kUnary: {
      os << spelling(e.unary);
      const Expr& x = e.operands[0];
      bool paren = x.kind == Expr::Kind::kBinary || x.kind == Expr::Kind::kTernary ||
                   x.kind == Expr::Kind::kUnary;
      if (paren) os << '(';
      emit(os, x);
      if (paren) os << ')';
      return;
    }
    case Expr::Kind::kBinary: {
      int p = precedence(e.binary);
      emit_operand(os, e.operands[0], p, false);
      os << ' ' << spelling(e.binary) << ' ';
      emit_operand(os, e.operands[1], p, true);
      return;
    }
    case Expr::Kind::kTernary: {
      const Expr& c = e.operands[0];
      bool paren = c.kind == Expr::Kind::kTernary;
      if (paren) os << '(';
      emit(os, c);
      if (paren) os << ')';
      os << " ? ";
      emit(os, e.operands[1]);
      os << " : ";
      emit(os, e.operands[2]);
      return;
    }
  }
}

std::string pad(int indent) { return std::string(static_cast<std::size_t>(indent) * 2, ' '); }

void emit_stmt(std::ostream& os, const Stmt& s, int indent);

// Writes `s` as the body of a header line already written (no newline yet).
void emit_body(std::ostream& os, const Stmt& s, int indent) {
  if (s.kind == Stmt::Kind::kBlock) {
    os << " begin\n";
    for (const auto& c : s.body) {
      emit_stmt(os, c, indent + 1);
      os << '\n';
    }
    os << pad(indent) << "end";
  } else {
    os << '\n';
    emit_stmt(os, s, indent + 1);
  }
}

void emit_assign(std::ostream& os, const Stmt& s) {
  emit(os, s.lhs);
  os << (s.kind == Stmt::Kind::kNonblocking ? " <= " : " = ");
  emit(os, s.rhs);
}

void emit_if_chain(std::ostream& os, const Stmt& s, int indent) {
  os << "if (";
  emit(os, s.cond);
  os << ')';
  emit_body(os, s.body[0], indent);
  if (!s.else_body.empty()) {
    const Stmt& e = s.else_body[0];
    os << (s.body[0].kind == Stmt::Kind::kBlock ? " " : "\n" + pad(indent)) << "else";
    if (e.kind == Stmt::Kind::kIf) {
      os << ' ';
      emit_if_chain(os, e, indent);
    } else {
      emit_body(os, e, indent);
    }
  }
}

void emit_stmt(std::ostream& os, const Stmt& s, int indent) {
  os << pad(indent);
  switch (s.kind) {
    case Stmt::Kind::kEmpty:
      os << ";";
      break;
    case Stmt::Kind::kBlocking:
    case Stmt::Kind::kNonblocking:
      emit_assign(os, s);
      os << ';';
      break;
    case Stmt::Kind::kBlock:
      os << "begin\n";
      for (const auto& c : s.body) {
        emit_stmt(os, c, indent + 1);
        os << '\n';
      }
      os << pad(indent) << "end";
      break;
    case Stmt::Kind::kIf:
      emit_if_chain(os, s, indent);
      break;
    case Stmt::Kind::kCase:
      os << "case (";
      emit(os, s.cond);
      os << ")\n";
      for (const auto& it : s.items) {
        os << pad(indent + 1);
        if (it.is_default) {
          os << "default:";
        } else {
          for (std::size_t i = 0; i < it.labels.size(); ++i) {
            if (i) os << ", ";
            emit(os, it.labels[i]);
          }
          os << ':';
        }
        emit_body(os, it.body[0], indent + 1);
        os << '\n';
      }
      os << pad(indent) << "endcase";
      break;
    case Stmt::Kind::kFor:
      os << "for (";
      emit_assign(os, s.loop_control[0]);
      os << "; ";
      emit(os, s.cond);
      os << "; ";
      emit_assign(os, s.loop_control[1]);
      os << ')';
      emit_body(os, s.body[0], indent);
      break;
  }
}

std::string range(const NetDecl& n) {
  if (!n.has_range) return "";
  return "[" + std::to_string(n.msb) + ":" + std::to_string(n.lsb) + "] ";
}

std::string decl_text(const NetDecl& n, bool with_direction) {
  std::string s;
  if (with_direction && n.direction != Direction::kInternal) {
    s += to_string(n.direction);
    s += ' ';
    if (n.kind != NetKind::kWire) {
      s += to_string(n.kind);
      s += ' ';
    }
  } else {
    s += to_string(n.kind);
    s += ' ';
  }
  if (n.kind != NetKind::kInteger) s += range(n);
  s += n.name;
  if (n.is_array) s += " [" + std::to_string(n.array_lo) + ":" + std::to_string(n.array_hi) + "]";
  return s;
}

}  // namespace

std::string print(const Expr& expr) {
  std::ostringstream os;
  emit(os, expr);
  return os.str();
}

std::string print(const Stmt& stmt, int indent) {
  std::ostringstream os;
  emit_stmt(os, stmt, indent);
  os << '\n';
  return os.str();
}

std::string print(const ModuleDecl& m) {
  std::ostringstream os;
  os << "module " << m.name;
  if (m.ansi) {
    os << " (\n";
    auto ports = m.ports();
    for (std::size_t i = 0; i < ports.size(); ++i) {
      os << "  " << decl_text(*ports[i], true) << (i + 1 < ports.size() ? ",\n" : "\n");
    }
    os << ");\n";
  } else {
    os << '(';
    for (std::size_t i = 0; i < m.port_order.size(); ++i) {
      if (i) os << ", ";
      os << m.port_order[i];
    }
    os << ");\n";
    for (const auto* p : m.ports()) os << "  " << decl_text(*p, true) << ";\n";
  }
  for (const auto& n : m.nets)
    if (n.direction == Direction::kInternal) os << "  " << decl_text(n, false) << ";\n";
  for (const auto& item : m.items) {
    os << '\n';
    if (const auto* a = std::get_if<ContinuousAssign>(&item)) {
      os << "  assign ";
      emit(os, a->lhs);
      os << " = ";
      emit(os, a->rhs);
      os << ";\n";
    } else if (const auto* b = std::get_if<AlwaysBlock>(&item)) {
      os << "  always @(";
      if (b->star) {
        os << '*';
      } else {
        for (std::size_t i = 0; i < b->sens.size(); ++i) {
          if (i) os << " or ";
          os << (b->sens[i].edge == Edge::kPos ? "posedge " : "negedge ") << b->sens[i].signal;
        }
      }
      os << ')';
      emit_body(os, b->body, 1);
      os << '\n';
    } else {
      const auto& inst = std::get<Instance>(item);
      os << "  " << inst.module << ' ' << inst.name << " (";
      for (std::size_t i = 0; i < inst.connections.size(); ++i) {
        const auto& c = inst.connections[i];
        if (i) os << ", ";
        os << '.' << c.port << '(';
        if (c.expr) emit(os, *c.expr);
        os << ')';
      }
      os << ");\n";
    }
  }
  os << "endmodule\n";
  return os.str();
}

std::string print(const Design& design) {
  std::string out;
  for (std::size_t i = 0; i < design.modules.size(); ++i) {
    if (i) out += '\n';
    out += print(design.modules[i]);
  }
  return out;
}

}  // namespace rtlmend
