#include "rtlmend/elaborate.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "rtlmend/frontend.hpp"

namespace rtlmend {
namespace {

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

class Elaborator {
 public:
  Elaborator(std::shared_ptr<const Design> d, std::vector<Diagnostic>& diags)
      : design_(std::move(d)), diags_(diags) {}

  std::optional<ElaboratedDesign> run() {
    out_.design = design_;
    const ModuleDecl* top = design_->find_module(design_->top);
    if (!top) {
      error(Span{}, "no-top", "top module '" + design_->top + "' not found");
      return std::nullopt;
    }
    std::vector<std::string> stack;
    build_scope(*top, "", -1, nullptr, stack);
    if (has_errors(diags_)) return std::nullopt;
    for (const auto* p : top->ports()) {
      int idx = out_.resolve(0, p->name);
      if (p->direction == Direction::kInput) out_.inputs.push_back(idx);
      if (p->direction == Direction::kOutput) out_.outputs.push_back(idx);
      out_.signals[static_cast<std::size_t>(idx)].top_port = true;
    }
    check_widths();
    if (has_errors(diags_)) return std::nullopt;
    pick_clock_and_reset(*top);
    return std::move(out_);
  }

 private:
  void error(const Span& s, std::string code, std::string msg) {
    diags_.push_back({Severity::kError, s.line, col(s), std::move(code), std::move(msg)});
  }
  void warning(const Span& s, std::string code, std::string msg) {
    Diagnostic d{Severity::kWarning, s.line, col(s), std::move(code), std::move(msg)};
    diags_.push_back(d);
    out_.warnings.push_back(d);
  }
  std::uint32_t col(const Span& s) const {
    return s.valid() ? design_->source->locate(s.begin).col : 1;
  }

  int build_scope(const ModuleDecl& m, const std::string& prefix, int parent,
                  const Instance* via, std::vector<std::string>& stack) {
    int id = static_cast<int>(out_.scopes.size());
    ElabScope scope;
    scope.prefix = prefix;
    scope.module = &m;
    scope.parent = parent;
    scope.instance = via;
    out_.scopes.push_back(std::move(scope));
    for (const auto& n : m.nets) {
      ElabSignal s;
      s.path = prefix + n.name;
      s.name = n.name;
      s.scope = id;
      s.width = n.width();
      s.lsb = n.has_range ? n.lsb : 0;
      s.depth = n.depth();
      s.array_lo = n.array_lo;
      s.kind = n.kind;
      s.direction = n.direction;
      s.decl_line = n.span.line;
      out_.scopes[static_cast<std::size_t>(id)].signals[n.name] =
          static_cast<int>(out_.signals.size());
      out_.signals.push_back(std::move(s));
    }
    stack.push_back(m.name);
    std::set<std::string> instance_names;
    for (const auto& item : m.items) {
      if (const auto* a = std::get_if<ContinuousAssign>(&item)) {
        ElabProcess p;
        p.kind = ElabProcess::Kind::kAssign;
        p.scope = id;
        p.assign = a;
        p.span = a->span;
        out_.processes.push_back(p);
      } else if (const auto* b = std::get_if<AlwaysBlock>(&item)) {
        ElabProcess p;
        p.kind = b->star ? ElabProcess::Kind::kCombinational : ElabProcess::Kind::kSequential;
        p.scope = id;
        p.always = b;
        p.span = b->span;
        out_.processes.push_back(p);
      } else {
        const auto& inst = std::get<Instance>(item);
        if (!instance_names.insert(inst.name).second) {
          error(inst.span, "duplicate-instance", "instance name '" + inst.name + "' is reused");
          continue;
        }
        if (m.find_net(inst.name)) {
          error(inst.span, "duplicate-instance",
                "instance name '" + inst.name + "' collides with a net");
          continue;
        }
        const ModuleDecl* child = design_->find_module(inst.module);
        if (!child) {
          error(inst.span, "unknown-module", "instantiated module '" + inst.module +
                                                 "' is not declared");
          continue;
        }
        if (std::find(stack.begin(), stack.end(), child->name) != stack.end()) {
          error(inst.span, "recursive-instance",
                "recursive instantiation of module '" + child->name + "'");
          continue;
        }
        int child_id = build_scope(*child, prefix + inst.name + ".", id, &inst, stack);
        bind_ports(id, child_id, inst, *child);
      }
    }
    stack.pop_back();
    return id;
  }

  void bind_ports(int parent, int child, const Instance& inst, const ModuleDecl& cm) {
    std::set<std::string> connected;
    for (const auto& c : inst.connections) {
      const NetDecl* port = cm.find_net(c.port);
      if (!port || port->direction == Direction::kInternal) {
        error(c.span, "unknown-port",
              "module '" + cm.name + "' has no port named '" + c.port + "'");
        continue;
      }
      if (!connected.insert(c.port).second) {
        error(c.span, "duplicate-connection", "port '" + c.port + "' is connected twice");
        continue;
      }
      if (!c.expr) {
        if (port->direction == Direction::kInput)
          error(c.span, "unconnected-input", "input port '" + c.port + "' of instance '" +
                                                 inst.name + "' is unconnected");
        continue;
      }
      int child_sig = out_.resolve(child, port->name);
      ElabProcess p;
      p.instance = &inst;
      p.connection = &c;
      p.child_signal = child_sig;
      p.span = c.span;
      p.scope = parent;
      int expr_width = out_.self_width(*c.expr, parent);
      if (port->direction == Direction::kInput) {
        p.kind = ElabProcess::Kind::kPortIn;
        bool flexible = c.expr->kind == Expr::Kind::kLiteral && !c.expr->literal.sized;
        if (!flexible && expr_width != port->width())
          warning(c.span, "port-width",
                  "port '" + c.port + "' of instance '" + inst.name + "' is " +
                      std::to_string(port->width()) + " bits but the connection is " +
                      std::to_string(expr_width) + " bits");
      } else {
        p.kind = ElabProcess::Kind::kPortOut;
        if (!check_output_target(*c.expr, parent, c, inst)) continue;
        if (expr_width != port->width())
          warning(c.span, "port-width",
                  "port '" + c.port + "' of instance '" + inst.name + "' is " +
                      std::to_string(port->width()) + " bits but the connection is " +
                      std::to_string(expr_width) + " bits");
      }
      out_.processes.push_back(p);
    }
    for (const auto* port : cm.ports()) {
      if (port->direction == Direction::kInput && !connected.count(port->name) &&
          std::none_of(inst.connections.begin(), inst.connections.end(),
                       [&](const PortConnection& c) { return c.port == port->name; }))
        error(inst.span, "unconnected-input", "input port '" + port->name + "' of instance '" +
                                                  inst.name + "' is unconnected");
    }
  }

  bool check_output_target(const Expr& e, int scope, const PortConnection& c,
                           const Instance& inst) {
    switch (e.kind) {
      case Expr::Kind::kConcat:
        for (const auto& op : e.operands)
          if (!check_output_target(op, scope, c, inst)) return false;
        return true;
      case Expr::Kind::kIdent:
      case Expr::Kind::kBitSelect:
      case Expr::Kind::kPartSelect: {
        int sig = out_.resolve(scope, e.name);
        if (sig < 0) return false;
        const auto& s = out_.signals[static_cast<std::size_t>(sig)];
        if (s.kind != NetKind::kWire) {
          error(c.span, "output-drives-reg",
                "output port '" + c.port + "' of instance '" + inst.name + "' drives reg '" +
                    s.name + "'");
          return false;
        }
        if (s.direction == Direction::kInput) {
          error(c.span, "assign-input", "output port '" + c.port + "' drives input '" +
                                            s.name + "'");
          return false;
        }
        return true;
      }
      default:
        error(c.span, "bad-lvalue",
              "output port '" + c.port + "' must connect to a net, select or concatenation");
        return false;
    }
  }

  void check_expr_width(const Expr& e, int scope, const Span& at) {
    bool reported = false;
    walk(e, [&](const Expr& x) {
      if (reported) return;
      if (out_.self_width(x, scope) > kMaxWidth) {
        error(at, "too-wide", "expression is wider than 64 bits");
        reported = true;
      }
    });
  }

  void check_widths() {
    for (const auto& p : out_.processes) {
      if (p.assign) {
        check_expr_width(p.assign->lhs, p.scope, p.span);
        check_expr_width(p.assign->rhs, p.scope, p.span);
      } else if (p.always) {
        for_each_expr(p.always->body, [&](const Expr& e) { check_expr_width(e, p.scope, p.span); });
      } else if (p.connection && p.connection->expr) {
        check_expr_width(*p.connection->expr, p.scope, p.span);
      }
    }
  }

  void pick_clock_and_reset(const ModuleDecl& top) {
    std::set<std::string> edge_signals;
    for (const auto& item : top.items)
      if (const auto* b = std::get_if<AlwaysBlock>(&item))
        for (const auto& s : b->sens) edge_signals.insert(s.signal);
    // Port bindings of clock-like inputs into children count as edge use too.
    for (int idx : out_.inputs) {
      const auto& s = out_.signals[static_cast<std::size_t>(idx)];
      if (s.width == 1 && is_clock_name(s.name)) {
        out_.clock = idx;
        break;
      }
    }
    if (out_.clock < 0) {
      for (int idx : out_.inputs) {
        const auto& s = out_.signals[static_cast<std::size_t>(idx)];
        if (s.width == 1 && edge_signals.count(s.name) && !is_reset_name(s.name)) {
          out_.clock = idx;
          break;
        }
      }
    }
    for (int idx : out_.inputs) {
      const auto& s = out_.signals[static_cast<std::size_t>(idx)];
      if (idx != out_.clock && s.width == 1 && is_reset_name(s.name)) {
        out_.reset = idx;
        out_.reset_active_low = is_active_low_name(s.name);
        break;
      }
    }
    if (out_.clock < 0 && !out_.sequential()) out_.reset = -1;
  }

  std::shared_ptr<const Design> design_;
  std::vector<Diagnostic>& diags_;
  ElaboratedDesign out_;
};

}  // namespace

bool is_reset_name(const std::string& name) {
  std::string l = lower(name);
  return l.find("rst") != std::string::npos || l.find("reset") != std::string::npos;
}

bool is_active_low_name(const std::string& name) {
  std::string l = lower(name);
  if (l.empty()) return false;
  return l.back() == 'n' || (l.size() > 2 && l.compare(l.size() - 2, 2, "_b") == 0);
}

bool is_clock_name(const std::string& name) {
  std::string l = lower(name);
  return l == "clk" || l == "clock" || l == "clk_i" || l == "i_clk" || l == "sys_clk";
}

int ElaboratedDesign::find_signal(const std::string& path) const {
  for (std::size_t i = 0; i < signals.size(); ++i)
    if (signals[i].path == path) return static_cast<int>(i);
  return -1;
}

int ElaboratedDesign::resolve(int scope, const std::string& name) const {
  const auto& m = scopes[static_cast<std::size_t>(scope)].signals;
  auto it = m.find(name);
  return it == m.end() ? -1 : it->second;
}

bool ElaboratedDesign::sequential() const {
  return std::any_of(processes.begin(), processes.end(), [](const ElabProcess& p) {
    return p.kind == ElabProcess::Kind::kSequential;
  });
}

namespace {

// `lookup(name)` yields {width, depth} or {-1, 0} when unresolved.
template <class Lookup>
int width_of(const Expr& e, const Lookup& lookup) {
  switch (e.kind) {
    case Expr::Kind::kLiteral:
      return e.literal.width;
    case Expr::Kind::kIdent: {
      auto [w, depth] = lookup(e.name);
      return w < 0 ? 1 : w;
    }
    case Expr::Kind::kBitSelect: {
      auto [w, depth] = lookup(e.name);
      return depth > 0 ? w : 1;
    }
    case Expr::Kind::kPartSelect:
      return e.msb - e.lsb + 1;
    case Expr::Kind::kConcat:
    case Expr::Kind::kReplicate: {
      int w = 0;
      for (const auto& op : e.operands) w += width_of(op, lookup);
      return e.kind == Expr::Kind::kReplicate ? w * e.count : w;
    }
    case Expr::Kind::kUnary:
      if (e.unary == UnaryOp::kBitNot || e.unary == UnaryOp::kNegate)
        return width_of(e.operands[0], lookup);
      return 1;
    case Expr::Kind::kBinary:
      if (is_comparison(e.binary) || e.binary == BinaryOp::kLogicalAnd ||
          e.binary == BinaryOp::kLogicalOr)
        return 1;
      if (e.binary == BinaryOp::kShl || e.binary == BinaryOp::kShr)
        return width_of(e.operands[0], lookup);
      return std::max(width_of(e.operands[0], lookup), width_of(e.operands[1], lookup));
    case Expr::Kind::kTernary:
      return std::max(width_of(e.operands[1], lookup), width_of(e.operands[2], lookup));
  }
  return 1;
}

}  // namespace

int ElaboratedDesign::self_width(const Expr& e, int scope) const {
  return width_of(e, [&](const std::string& name) -> std::pair<int, int> {
    int s = resolve(scope, name);
    if (s < 0) return {-1, 0};
    const auto& sig = signals[static_cast<std::size_t>(s)];
    return {sig.width, sig.depth};
  });
}

int self_width(const Expr& e, const ModuleDecl& m) {
  return width_of(e, [&](const std::string& name) -> std::pair<int, int> {
    const NetDecl* n = m.find_net(name);
    if (!n) return {-1, 0};
    return {n->width(), n->depth()};
  });
}

ElabResult elaborate(std::shared_ptr<const Design> design) {
  ElabResult r;
  Elaborator e(std::move(design), r.diagnostics);
  auto out = e.run();
  if (out && !has_errors(r.diagnostics)) r.design = std::move(out);
  return r;
}

ElabResult elaborate(const Design& design) {
  return elaborate(std::make_shared<const Design>(design));
}

ElabResult compile_text(std::string text, std::string path) {
  ParseResult p = parse_text(std::move(text), std::move(path));
  if (!p.ok()) {
    ElabResult r;
    r.diagnostics = std::move(p.diagnostics);
    return r;
  }
  return elaborate(std::make_shared<const Design>(std::move(*p.design)));
}

}  // namespace rtlmend
