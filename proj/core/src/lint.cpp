#include "rtlmend/lint.hpp"

#include <algorithm>
#include <set>

#include "rtlmend/elaborate.hpp"
#include "rtlmend/error.hpp"
#include "rtlmend/frontend.hpp"

namespace rtlmend {

const char* to_string(WarnCode c) {
  switch (c) {
    case WarnCode::kW1: return "W1";
    case WarnCode::kW2: return "W2";
    case WarnCode::kW3: return "W3";
    case WarnCode::kW4: return "W4";
    case WarnCode::kW5: return "W5";
    case WarnCode::kW6: return "W6";
  }
  return "W?";
}

bool is_templated(WarnCode c) {
  return c == WarnCode::kW1 || c == WarnCode::kW2 || c == WarnCode::kW3;
}

Diagnostic Warning::diagnostic(const SourceFile& src) const {
  std::uint32_t col = span.valid() ? src.locate(span.begin).col : 1;
  return Diagnostic{Severity::kWarning, span.line, col, to_string(code), message};
}

namespace {

// Width with unsized literals counted at their minimal width.
int lint_width(const Expr& e, const ModuleDecl& m) {
  switch (e.kind) {
    case Expr::Kind::kLiteral:
      return e.literal.sized ? e.literal.width : e.literal.min_width();
    case Expr::Kind::kUnary:
      if (e.unary == UnaryOp::kBitNot || e.unary == UnaryOp::kNegate)
        return lint_width(e.operands[0], m);
      return 1;
    case Expr::Kind::kBinary:
      if (is_comparison(e.binary) || e.binary == BinaryOp::kLogicalAnd ||
          e.binary == BinaryOp::kLogicalOr)
        return 1;
      if (e.binary == BinaryOp::kShl || e.binary == BinaryOp::kShr)
        return lint_width(e.operands[0], m);
      return std::max(lint_width(e.operands[0], m), lint_width(e.operands[1], m));
    case Expr::Kind::kTernary:
      return std::max(lint_width(e.operands[1], m), lint_width(e.operands[2], m));
    default:
      return self_width(e, m);
  }
}

bool widening_ok(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::kLiteral:
      return !e.literal.sized;
    case Expr::Kind::kBinary:
      return is_arithmetic(e.binary) || e.binary == BinaryOp::kShl;
    case Expr::Kind::kTernary:
      return widening_ok(e.operands[1]) || widening_ok(e.operands[2]);
    default:
      return false;
  }
}

class Linter {
 public:
  Linter(const Design& d, std::vector<Warning>& out) : d_(d), out_(out) {}

  void module(const ModuleDecl& m) {
    m_ = &m;
    driven_.clear();
    read_.clear();
    for (const auto& n : m.nets)
      if (n.direction == Direction::kInput) driven_.insert(n.name);
    for (const auto& item : m.items) {
      if (const auto* a = std::get_if<ContinuousAssign>(&item)) {
        lvalue(a->lhs);
        reads(a->rhs);
        width_check(a->lhs, a->rhs, a->span);
      } else if (const auto* b = std::get_if<AlwaysBlock>(&item)) {
        always(*b);
      } else {
        instance(std::get<Instance>(item));
      }
    }
    for (const auto& n : m.nets) {
      if (n.direction == Direction::kInput) continue;
      if (read_.count(n.name) && !driven_.count(n.name))
        add(WarnCode::kW5, n.span, "'" + n.name + "' is read but never driven");
    }
  }

 private:
  void add(WarnCode code, const Span& span, std::string msg, Span edit = {},
           std::string replacement = {}) {
    Warning w;
    w.code = code;
    w.span = span;
    w.message = std::move(msg);
    w.fixable = is_templated(code);
    w.module = m_->name;
    w.edit = edit;
    w.replacement = std::move(replacement);
    out_.push_back(std::move(w));
  }

  void reads(const Expr& e) {
    std::vector<std::string> names;
    collect_reads(e, names);
    read_.insert(names.begin(), names.end());
  }

  void lvalue(const Expr& e) {
    std::vector<std::string> w, r;
    collect_lvalue(e, w, r);
    driven_.insert(w.begin(), w.end());
    read_.insert(r.begin(), r.end());
  }

  void width_check(const Expr& lhs, const Expr& rhs, const Span& at) {
    int l = self_width(lhs, *m_);
    int r = lint_width(rhs, *m_);
    if (r > l) {
      add(WarnCode::kW4, at,
          "right-hand side is " + std::to_string(r) + " bits but the target is " +
              std::to_string(l) + " bits");
    } else if (r < l && !widening_ok(rhs)) {
      add(WarnCode::kW4, at,
          "right-hand side is " + std::to_string(r) + " bits but the target is " +
              std::to_string(l) + " bits");
    }
  }

  void always(const AlwaysBlock& b) {
    for (const auto& s : b.sens) read_.insert(s.signal);
    stmt(b.body, b);
    if (!b.star) reset_sensitivity(b);
  }

  void stmt(const Stmt& s, const AlwaysBlock& b) {
    switch (s.kind) {
      case Stmt::Kind::kEmpty:
        return;
      case Stmt::Kind::kBlocking:
      case Stmt::Kind::kNonblocking:
        lvalue(s.lhs);
        reads(s.rhs);
        width_check(s.lhs, s.rhs, s.span);
        if (b.star && s.kind == Stmt::Kind::kNonblocking)
          add(WarnCode::kW1, s.span, "nonblocking assignment in a combinational block", s.op_span, "=");
        if (!b.star && s.kind == Stmt::Kind::kBlocking)
          add(WarnCode::kW2, s.span, "blocking assignment in an edge-triggered block", s.op_span, "<=");
        return;
      case Stmt::Kind::kBlock:
        for (const auto& c : s.body) stmt(c, b);
        return;
      case Stmt::Kind::kIf:
        reads(s.cond);
        stmt(s.body[0], b);
        if (!s.else_body.empty()) stmt(s.else_body[0], b);
        return;
      case Stmt::Kind::kCase: {
        reads(s.cond);
        bool has_default = false;
        for (const auto& it : s.items) {
          has_default |= it.is_default;
          for (const auto& l : it.labels) reads(l);
          stmt(it.body[0], b);
        }
        if (!has_default && !covers_all(s))
          add(WarnCode::kW6, s.head_span.valid() ? s.head_span : s.span,
              "case statement has no default and does not cover every value");
        return;
      }
      case Stmt::Kind::kFor:
        // Loop control is exempt from the blocking/nonblocking rules.
        for (const auto& c : s.loop_control) {
          lvalue(c.lhs);
          reads(c.rhs);
        }
        reads(s.cond);
        stmt(s.body[0], b);
        return;
    }
  }

  bool covers_all(const Stmt& s) const {
    int w = self_width(s.cond, *m_);
    if (w > 16) return false;
    std::set<std::uint64_t> seen;
    for (const auto& it : s.items)
      for (const auto& l : it.labels) {
        if (l.kind != Expr::Kind::kLiteral || l.literal.xmask) return false;
        seen.insert(l.literal.bits);
      }
    std::size_t need = std::size_t{1} << w;
    std::size_t in_range = 0;
    for (auto v : seen)
      if (v < need) ++in_range;
    return in_range == need;
  }

  // The reset test of an asynchronous-reset block: the condition of the
  // block's first if statement.
  void reset_sensitivity(const AlwaysBlock& b) {
    const Stmt* first = &b.body;
    while (first->kind == Stmt::Kind::kBlock && !first->body.empty()) first = &first->body[0];
    if (first->kind != Stmt::Kind::kIf) return;
    const Expr& c = first->cond;
    std::string sig;
    Edge edge = Edge::kPos;
    auto zero = [](const Expr& e) {
      return e.kind == Expr::Kind::kLiteral && e.literal.xmask == 0 && e.literal.bits == 0;
    };
    auto one = [](const Expr& e) {
      return e.kind == Expr::Kind::kLiteral && e.literal.xmask == 0 && e.literal.bits == 1;
    };
    if (c.kind == Expr::Kind::kIdent) {
      sig = c.name;
    } else if (c.kind == Expr::Kind::kUnary &&
               (c.unary == UnaryOp::kLogicalNot || c.unary == UnaryOp::kBitNot) &&
               c.operands[0].kind == Expr::Kind::kIdent) {
      sig = c.operands[0].name;
      edge = Edge::kNeg;
    } else if (c.kind == Expr::Kind::kBinary &&
               (c.binary == BinaryOp::kEq || c.binary == BinaryOp::kNe) &&
               c.operands[0].kind == Expr::Kind::kIdent &&
               (zero(c.operands[1]) || one(c.operands[1]))) {
      sig = c.operands[0].name;
      bool low = zero(c.operands[1]) == (c.binary == BinaryOp::kEq);
      edge = low ? Edge::kNeg : Edge::kPos;
    } else {
      return;
    }
    if (!is_reset_name(sig)) return;
    for (const auto& s : b.sens)
      if (s.signal == sig) return;
    if (!b.sens_span.valid()) return;
    Span at{b.sens_span.end - 1, b.sens_span.end - 1, b.sens_span.end_line, b.sens_span.end_line};
    std::string text = std::string(" or ") + (edge == Edge::kNeg ? "negedge " : "posedge ") + sig;
    add(WarnCode::kW3, b.sens_span,
        "reset '" + sig + "' is tested asynchronously but missing from the sensitivity list", at,
        text);
  }

  void instance(const Instance& inst) {
    const ModuleDecl* child = d_.find_module(inst.module);
    for (const auto& c : inst.connections) {
      if (!c.expr) continue;
      const NetDecl* port = child ? child->find_net(c.port) : nullptr;
      if (port && port->direction == Direction::kOutput) {
        lvalue(*c.expr);
      } else {
        reads(*c.expr);
      }
      if (!port) continue;
      if (c.expr->kind == Expr::Kind::kLiteral && !c.expr->literal.sized) {
        if (c.expr->literal.min_width() > port->width())
          add(WarnCode::kW4, c.span, "connection to port '" + c.port + "' is wider than the port");
        continue;
      }
      int w = self_width(*c.expr, *m_);
      if (w != port->width())
        add(WarnCode::kW4, c.span,
            "port '" + c.port + "' is " + std::to_string(port->width()) +
                " bits but the connection is " + std::to_string(w) + " bits");
    }
  }

  const Design& d_;
  std::vector<Warning>& out_;
  const ModuleDecl* m_ = nullptr;
  std::set<std::string> driven_;
  std::set<std::string> read_;
};

}  // namespace

std::vector<Warning> lint(const Design& design) {
  std::vector<Warning> out;
  Linter l(design, out);
  for (const auto& m : design.modules) l.module(m);
  std::stable_sort(out.begin(), out.end(), [](const Warning& a, const Warning& b) {
    return a.span.begin < b.span.begin;
  });
  return out;
}

std::vector<Warning> fixable(const std::vector<Warning>& warns) {
  std::vector<Warning> out;
  for (const auto& w : warns)
    if (w.fixable) out.push_back(w);
  return out;
}

Design apply_templates(const Design& design, const std::vector<Warning>& warns) {
  if (warns.empty()) return design;
  struct Edit {
    std::uint32_t begin, end;
    std::string text;
  };
  std::vector<Edit> edits;
  for (const auto& w : warns) {
    if (!w.fixable || !is_templated(w.code))
      throw NotFixable(std::string(to_string(w.code)) + " has no fix template: " + w.message);
    edits.push_back({w.edit.begin, w.edit.end, w.replacement});
  }
  std::sort(edits.begin(), edits.end(), [](const Edit& a, const Edit& b) {
    return a.begin != b.begin ? a.begin > b.begin : a.end > b.end;
  });
  edits.erase(std::unique(edits.begin(), edits.end(),
                          [](const Edit& a, const Edit& b) {
                            return a.begin == b.begin && a.end == b.end && a.text == b.text;
                          }),
              edits.end());
  std::string text = design.source->text();
  for (const auto& e : edits) text.replace(e.begin, e.end - e.begin, e.text);
  ParseResult r = parse_text(std::move(text), design.source->path());
  if (!r.ok())
    throw Error("TemplateFailed", "template rewrite produced an unparsable design: " +
                                      (r.diagnostics.empty() ? std::string("?")
                                                             : r.diagnostics.front().message));
  return std::move(*r.design);
}

}  // namespace rtlmend
