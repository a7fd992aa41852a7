#include "rtlmend/sim.hpp"

#include <algorithm>
#include <stdexcept>

#include "rtlmend/error.hpp"

namespace rtlmend {

using detail::Node;
using detail::OpCode;

namespace {

constexpr int kMaxLoopIterations = 1 << 16;
constexpr int kMaxEventRounds = 64;

Value resize(const Value& v, int w) {
  std::uint64_t m = width_mask(w);
  return Value{w, v.bits & m, v.xmask & m};
}

// 0, 1 or 2 (unknown) truth value of a vector.
int tri(const Value& v) {
  if (v.bits) return 1;
  return v.xmask ? 2 : 0;
}

Value bit(int t) { return t == 2 ? Value{1, 0, 1} : Value{1, static_cast<std::uint64_t>(t), 0}; }

Value unary(OpCode op, const Value& a, int w) {
  std::uint64_t m = width_mask(w);
  std::uint64_t am = width_mask(a.width);
  switch (op) {
    case OpCode::kNot:
      return Value{w, ~a.bits & ~a.xmask & m, a.xmask & m};
    case OpCode::kNeg:
      if (a.xmask) return Value::all_x(w);
      return Value{w, (~a.bits + 1) & m, 0};
    case OpCode::kLogNot: {
      int t = tri(a);
      return bit(t == 2 ? 2 : 1 - t);
    }
    case OpCode::kRedAnd:
      if (~a.bits & ~a.xmask & am) return bit(0);
      return bit(a.xmask ? 2 : 1);
    case OpCode::kRedOr:
      if (a.bits) return bit(1);
      return bit(a.xmask ? 2 : 0);
    case OpCode::kRedXor:
      if (a.xmask) return bit(2);
      return bit(__builtin_parityll(a.bits));
    default:
      break;
  }
  throw std::logic_error("bad unary opcode");
}

Value binary(OpCode op, const Value& a, const Value& b, int w) {
  std::uint64_t m = width_mask(w);
  switch (op) {
    case OpCode::kAnd: {
      std::uint64_t zero = (~a.bits & ~a.xmask) | (~b.bits & ~b.xmask);
      std::uint64_t x = (a.xmask | b.xmask) & ~zero & m;
      return Value{w, a.bits & b.bits & m, x};
    }
    case OpCode::kOr: {
      std::uint64_t one = (a.bits | b.bits) & m;
      return Value{w, one, (a.xmask | b.xmask) & ~one & m};
    }
    case OpCode::kXor: {
      std::uint64_t x = (a.xmask | b.xmask) & m;
      return Value{w, (a.bits ^ b.bits) & ~x & m, x};
    }
    case OpCode::kLogAnd: {
      int ta = tri(a), tb = tri(b);
      if (ta == 0 || tb == 0) return bit(0);
      return bit(ta == 1 && tb == 1 ? 1 : 2);
    }
    case OpCode::kLogOr: {
      int ta = tri(a), tb = tri(b);
      if (ta == 1 || tb == 1) return bit(1);
      return bit(ta == 0 && tb == 0 ? 0 : 2);
    }
    case OpCode::kShl:
    case OpCode::kShr: {
      if (b.xmask) return Value::all_x(w);
      if (b.bits >= static_cast<std::uint64_t>(w)) return Value::known(w, 0);
      auto s = static_cast<unsigned>(b.bits);
      if (op == OpCode::kShl) return Value{w, (a.bits << s) & m, (a.xmask << s) & m};
      return Value{w, (a.bits >> s) & m, (a.xmask >> s) & m};
    }
    default:
      break;
  }
  if (a.xmask || b.xmask) {
    bool cmp = op >= OpCode::kEq && op <= OpCode::kGe;
    return cmp ? bit(2) : Value::all_x(w);
  }
  std::uint64_t x = a.bits, y = b.bits;
  switch (op) {
    case OpCode::kAdd: return Value{w, (x + y) & m, 0};
    case OpCode::kSub: return Value{w, (x - y) & m, 0};
    case OpCode::kMul: return Value{w, (x * y) & m, 0};
    case OpCode::kDiv: return y == 0 ? Value::all_x(w) : Value{w, (x / y) & m, 0};
    case OpCode::kMod: return y == 0 ? Value::all_x(w) : Value{w, (x % y) & m, 0};
    case OpCode::kEq: return bit(x == y);
    case OpCode::kNe: return bit(x != y);
    case OpCode::kLt: return bit(x < y);
    case OpCode::kLe: return bit(x <= y);
    case OpCode::kGt: return bit(x > y);
    case OpCode::kGe: return bit(x >= y);
    default: break;
  }
  throw std::logic_error("bad binary opcode");
}

OpCode opcode(UnaryOp op) {
  switch (op) {
    case UnaryOp::kBitNot: return OpCode::kNot;
    case UnaryOp::kLogicalNot: return OpCode::kLogNot;
    case UnaryOp::kNegate: return OpCode::kNeg;
    case UnaryOp::kReduceAnd: return OpCode::kRedAnd;
    case UnaryOp::kReduceOr: return OpCode::kRedOr;
    case UnaryOp::kReduceXor: return OpCode::kRedXor;
  }
  return OpCode::kNot;
}

OpCode opcode(BinaryOp op) {
  switch (op) {
    case BinaryOp::kAdd: return OpCode::kAdd;
    case BinaryOp::kSub: return OpCode::kSub;
    case BinaryOp::kMul: return OpCode::kMul;
    case BinaryOp::kDiv: return OpCode::kDiv;
    case BinaryOp::kMod: return OpCode::kMod;
    case BinaryOp::kBitAnd: return OpCode::kAnd;
    case BinaryOp::kBitOr: return OpCode::kOr;
    case BinaryOp::kBitXor: return OpCode::kXor;
    case BinaryOp::kLogicalAnd: return OpCode::kLogAnd;
    case BinaryOp::kLogicalOr: return OpCode::kLogOr;
    case BinaryOp::kEq: return OpCode::kEq;
    case BinaryOp::kNe: return OpCode::kNe;
    case BinaryOp::kLt: return OpCode::kLt;
    case BinaryOp::kLe: return OpCode::kLe;
    case BinaryOp::kGt: return OpCode::kGt;
    case BinaryOp::kGe: return OpCode::kGe;
    case BinaryOp::kShl: return OpCode::kShl;
    case BinaryOp::kShr: return OpCode::kShr;
  }
  return OpCode::kAdd;
}

}  // namespace

bool truthy(const Value& v) { return v.bits != 0; }

bool case_equal(const Value& a, const Value& b) {
  return a.bits == b.bits && a.xmask == b.xmask;
}

Value CompiledExpr::eval(const Value* slots) const {
  thread_local std::vector<Value> stack;
  if (stack.size() < static_cast<std::size_t>(stack_)) stack.resize(static_cast<std::size_t>(stack_));
  Value* sp = stack.data();  // next free entry
  for (const Node& n : nodes_) {
    switch (n.op) {
      case OpCode::kConst:
        *sp++ = n.k;
        break;
      case OpCode::kLoad:
        *sp++ = slots[n.a];
        break;
      case OpCode::kLoadSlice: {
        const Value& v = slots[n.a];
        std::uint64_t m = width_mask(n.width);
        *sp++ = Value{n.width, (v.bits >> n.b) & m, (v.xmask >> n.b) & m};
        break;
      }
      case OpCode::kLoadBit: {
        Value idx = sp[-1];
        std::int64_t pos = static_cast<std::int64_t>(idx.bits) - n.c;
        if (idx.xmask || idx.bits > 0xffffffffull || pos < 0 || pos >= n.b) {
          sp[-1] = Value{1, 0, 1};
        } else {
          const Value& v = slots[n.a];
          sp[-1] = Value{1, (v.bits >> pos) & 1, (v.xmask >> pos) & 1};
        }
        break;
      }
      case OpCode::kLoadWord: {
        Value idx = sp[-1];
        std::int64_t pos = static_cast<std::int64_t>(idx.bits) - n.c;
        if (idx.xmask || idx.bits > 0xffffffffull || pos < 0 || pos >= n.b)
          sp[-1] = Value::all_x(n.width);
        else
          sp[-1] = slots[n.a + pos];
        break;
      }
      case OpCode::kZext:
        sp[-1] = resize(sp[-1], n.width);
        break;
      case OpCode::kConcat: {
        Value* base = sp - n.a;
        Value acc{n.width, 0, 0};
        for (int i = 0; i < n.a; ++i) {
          int w = base[i].width;
          acc.bits = (w >= 64 ? 0 : acc.bits << w) | base[i].bits;
          acc.xmask = (w >= 64 ? 0 : acc.xmask << w) | base[i].xmask;
        }
        sp = base;
        *sp++ = acc;
        break;
      }
      case OpCode::kReplicate: {
        Value part = sp[-1];
        Value acc{n.width, 0, 0};
        for (int i = 0; i < n.a; ++i) {
          int w = part.width;
          acc.bits = (w >= 64 ? 0 : acc.bits << w) | part.bits;
          acc.xmask = (w >= 64 ? 0 : acc.xmask << w) | part.xmask;
        }
        sp[-1] = acc;
        break;
      }
      case OpCode::kNot:
      case OpCode::kNeg:
      case OpCode::kLogNot:
      case OpCode::kRedAnd:
      case OpCode::kRedOr:
      case OpCode::kRedXor:
        sp[-1] = unary(n.op, sp[-1], n.width);
        break;
      case OpCode::kTernary: {
        Value c = sp[-3];
        const Value& t = sp[-2];
        const Value& f = sp[-1];
        Value r;
        switch (tri(c)) {
          case 1: r = t; break;
          case 0: r = f; break;
          default: {
            std::uint64_t x = ((t.bits ^ f.bits) | t.xmask | f.xmask) & width_mask(n.width);
            r = Value{n.width, t.bits & ~x, x};
          }
        }
        sp -= 2;
        sp[-1] = r;
        break;
      }
      default:
        sp[-2] = binary(n.op, sp[-2], sp[-1], n.width);
        --sp;
        break;
    }
  }
  return sp[-1];
}

// ---------------------------------------------------------------------------
// Compilation

struct CompiledTarget {
  enum class Kind { kSlice, kBit, kWord };
  Kind kind = Kind::kSlice;
  int slot = 0;
  int shift = 0;
  int width = 1;
  int sig_width = 1;
  int decl_lsb = 0;
  int depth = 0;
  int lo = 0;
  CompiledExpr index;
};

struct CompiledStmt {
  Stmt::Kind kind = Stmt::Kind::kEmpty;
  std::vector<CompiledTarget> targets;  // msb part first
  int lhs_width = 0;
  CompiledExpr rhs;
  CompiledExpr cond;
  std::vector<CompiledStmt> body;
  std::vector<CompiledStmt> else_body;
  std::vector<std::vector<CompiledExpr>> labels;
  int default_arm = -1;
};

struct CompiledProcess {
  int elab = -1;
  bool sequential = false;
  bool clocked = false;
  CompiledStmt stmt;
  std::vector<int> reads;
  std::vector<int> writes;
  int assignments = 0;
};

struct SimProgram::Impl {
  std::vector<CompiledProcess> processes;
  std::vector<int> comb_order;           // process indices, settle order
  std::vector<int> comb_pos;             // process -> position in comb_order
  std::vector<std::vector<int>> readers; // slot -> comb positions
  bool cyclic = false;
  int sweep_limit = 2;
  std::vector<int> clocked;              // sequential process indices
  struct Watch {
    int slot;
    std::vector<std::pair<int, Edge>> blocks;
  };
  std::vector<Watch> watches;
};

class ExprCompiler {
 public:
  ExprCompiler(const ElaboratedDesign& d, const std::vector<int>& signal_slot, int scope)
      : d_(d), slot_(signal_slot), scope_(scope) {}

  CompiledExpr compile(const Expr& e, int ctx) {
    CompiledExpr out;
    depth_ = 0;
    max_ = 1;
    nodes_ = &out.nodes_;
    emit(e, ctx);
    out.width_ = std::max(ctx, d_.self_width(e, scope_));
    out.stack_ = max_;
    return out;
  }

  /// Reads one whole slot, zero-extended to `ctx`.
  static CompiledExpr load(int slot, int width, int ctx) {
    CompiledExpr out;
    out.nodes_.push_back(Node{OpCode::kLoad, width, slot, 0, 0, {}});
    if (ctx > width) out.nodes_.push_back(Node{OpCode::kZext, ctx, 0, 0, 0, {}});
    out.width_ = std::max(ctx, width);
    out.stack_ = 1;
    return out;
  }

  CompiledTarget target(const Expr& e) {
    CompiledTarget t;
    int sig = d_.resolve(scope_, e.name);
    if (sig < 0) throw std::logic_error("unresolved lvalue " + e.name);
    const auto& s = d_.signals[static_cast<std::size_t>(sig)];
    t.slot = slot_[static_cast<std::size_t>(sig)];
    t.sig_width = s.width;
    t.decl_lsb = s.lsb;
    switch (e.kind) {
      case Expr::Kind::kIdent:
        t.width = s.width;
        break;
      case Expr::Kind::kPartSelect:
        t.shift = e.lsb - s.lsb;
        t.width = e.msb - e.lsb + 1;
        break;
      case Expr::Kind::kBitSelect:
        t.index = compile(e.operands[0], 0);
        if (s.depth > 0) {
          t.kind = CompiledTarget::Kind::kWord;
          t.width = s.width;
          t.depth = s.depth;
          t.lo = s.array_lo;
        } else {
          t.kind = CompiledTarget::Kind::kBit;
          t.width = 1;
        }
        break;
      default:
        throw std::logic_error("bad lvalue");
    }
    return t;
  }

  void targets(const Expr& e, std::vector<CompiledTarget>& out) {
    if (e.kind == Expr::Kind::kConcat) {
      for (const auto& op : e.operands) targets(op, out);
    } else {
      out.push_back(target(e));
    }
  }

 private:
  void push(Node n, int pops) {
    nodes_->push_back(n);
    depth_ += 1 - pops;
    max_ = std::max(max_, depth_);
  }
  void zext(int from, int to) {
    if (to > from) push(Node{OpCode::kZext, to, 0, 0, 0, {}}, 1);
  }

  void emit(const Expr& e, int ctx) {
    int self = d_.self_width(e, scope_);
    int w = std::max(ctx, self);
    switch (e.kind) {
      case Expr::Kind::kLiteral: {
        Value k{e.literal.width, e.literal.bits, e.literal.xmask};
        push(Node{OpCode::kConst, w, 0, 0, 0, resize(k, w)}, 0);
        return;
      }
      case Expr::Kind::kIdent: {
        int sig = resolve(e.name);
        const auto& s = d_.signals[static_cast<std::size_t>(sig)];
        push(Node{OpCode::kLoad, s.width, slot_[static_cast<std::size_t>(sig)], 0, 0, {}}, 0);
        zext(s.width, w);
        return;
      }
      case Expr::Kind::kBitSelect: {
        int sig = resolve(e.name);
        const auto& s = d_.signals[static_cast<std::size_t>(sig)];
        emit(e.operands[0], 0);
        int slot = slot_[static_cast<std::size_t>(sig)];
        if (s.depth > 0) {
          push(Node{OpCode::kLoadWord, s.width, slot, s.depth, s.array_lo, {}}, 1);
          zext(s.width, w);
        } else {
          push(Node{OpCode::kLoadBit, 1, slot, s.width, s.lsb, {}}, 1);
          zext(1, w);
        }
        return;
      }
      case Expr::Kind::kPartSelect: {
        int sig = resolve(e.name);
        const auto& s = d_.signals[static_cast<std::size_t>(sig)];
        int pw = e.msb - e.lsb + 1;
        push(Node{OpCode::kLoadSlice, pw, slot_[static_cast<std::size_t>(sig)], e.lsb - s.lsb, 0, {}},
             0);
        zext(pw, w);
        return;
      }
      case Expr::Kind::kConcat:
      case Expr::Kind::kReplicate: {
        int inner = 0;
        for (const auto& op : e.operands) {
          emit(op, 0);
          inner += d_.self_width(op, scope_);
        }
        int n = static_cast<int>(e.operands.size());
        if (n > 1 || e.kind == Expr::Kind::kConcat)
          push(Node{OpCode::kConcat, inner, n, 0, 0, {}}, n);
        if (e.kind == Expr::Kind::kReplicate)
          push(Node{OpCode::kReplicate, inner * e.count, e.count, 0, 0, {}}, 1);
        zext(self, w);
        return;
      }
      case Expr::Kind::kUnary: {
        OpCode op = opcode(e.unary);
        if (op == OpCode::kNot || op == OpCode::kNeg) {
          emit(e.operands[0], w);
          push(Node{op, w, 0, 0, 0, {}}, 1);
        } else {
          emit(e.operands[0], 0);
          push(Node{op, 1, 0, 0, 0, {}}, 1);
          zext(1, w);
        }
        return;
      }
      case Expr::Kind::kBinary: {
        OpCode op = opcode(e.binary);
        if (is_comparison(e.binary)) {
          int cw = std::max(d_.self_width(e.operands[0], scope_), d_.self_width(e.operands[1], scope_));
          emit(e.operands[0], cw);
          emit(e.operands[1], cw);
          push(Node{op, 1, 0, 0, 0, {}}, 2);
          zext(1, w);
        } else if (op == OpCode::kLogAnd || op == OpCode::kLogOr) {
          emit(e.operands[0], 0);
          emit(e.operands[1], 0);
          push(Node{op, 1, 0, 0, 0, {}}, 2);
          zext(1, w);
        } else if (op == OpCode::kShl || op == OpCode::kShr) {
          emit(e.operands[0], w);
          emit(e.operands[1], 0);
          push(Node{op, w, 0, 0, 0, {}}, 2);
        } else {
          emit(e.operands[0], w);
          emit(e.operands[1], w);
          push(Node{op, w, 0, 0, 0, {}}, 2);
        }
        return;
      }
      case Expr::Kind::kTernary:
        emit(e.operands[0], 0);
        emit(e.operands[1], w);
        emit(e.operands[2], w);
        push(Node{OpCode::kTernary, w, 0, 0, 0, {}}, 3);
        return;
    }
  }

  int resolve(const std::string& name) const {
    int sig = d_.resolve(scope_, name);
    if (sig < 0) throw std::logic_error("unresolved identifier " + name);
    return sig;
  }

  const ElaboratedDesign& d_;
  const std::vector<int>& slot_;
  int scope_;
  std::vector<Node>* nodes_ = nullptr;
  int depth_ = 0;
  int max_ = 1;
};

namespace {

class ProgramBuilder {
 public:
  ProgramBuilder(const ElaboratedDesign& d, const std::vector<int>& slot, SimProgram::Impl& impl)
      : d_(d), slot_(slot), impl_(impl) {}

  void build() {
    for (std::size_t i = 0; i < d_.processes.size(); ++i) add_process(static_cast<int>(i));
    order_combinational();
    wire_events();
  }

 private:
  void slots_of(int scope, const std::string& name, std::vector<int>& out) const {
    int sig = d_.resolve(scope, name);
    if (sig < 0) return;
    const auto& s = d_.signals[static_cast<std::size_t>(sig)];
    int base = slot_[static_cast<std::size_t>(sig)];
    int n = s.depth > 0 ? s.depth : 1;
    for (int i = 0; i < n; ++i) out.push_back(base + i);
  }

  void expr_reads(const Expr& e, int scope, std::vector<int>& out) const {
    std::vector<std::string> names;
    collect_reads(e, names);
    for (const auto& n : names) slots_of(scope, n, out);
  }

  void lvalue(const Expr& e, int scope, std::vector<int>& reads, std::vector<int>& writes) const {
    std::vector<std::string> w, r;
    collect_lvalue(e, w, r);
    for (const auto& n : w) slots_of(scope, n, writes);
    for (const auto& n : r) slots_of(scope, n, reads);
  }

  CompiledStmt assignment(ExprCompiler& ec, const Expr& lhs, const Expr& rhs, int scope,
                          Stmt::Kind kind) {
    CompiledStmt s;
    s.kind = kind;
    ec.targets(lhs, s.targets);
    s.lhs_width = d_.self_width(lhs, scope);
    s.rhs = ec.compile(rhs, s.lhs_width);
    return s;
  }

  CompiledStmt stmt(ExprCompiler& ec, const Stmt& st, int scope, CompiledProcess& p) {
    CompiledStmt s;
    s.kind = st.kind;
    switch (st.kind) {
      case Stmt::Kind::kEmpty:
        break;
      case Stmt::Kind::kBlocking:
      case Stmt::Kind::kNonblocking:
        ++p.assignments;
        lvalue(st.lhs, scope, p.reads, p.writes);
        expr_reads(st.rhs, scope, p.reads);
        return assignment(ec, st.lhs, st.rhs, scope, st.kind);
      case Stmt::Kind::kBlock:
        for (const auto& c : st.body) s.body.push_back(stmt(ec, c, scope, p));
        break;
      case Stmt::Kind::kIf:
        expr_reads(st.cond, scope, p.reads);
        s.cond = ec.compile(st.cond, 0);
        s.body.push_back(stmt(ec, st.body[0], scope, p));
        if (!st.else_body.empty()) s.else_body.push_back(stmt(ec, st.else_body[0], scope, p));
        break;
      case Stmt::Kind::kCase: {
        expr_reads(st.cond, scope, p.reads);
        int w = d_.self_width(st.cond, scope);
        for (const auto& it : st.items)
          for (const auto& l : it.labels) w = std::max(w, d_.self_width(l, scope));
        s.cond = ec.compile(st.cond, w);
        for (std::size_t i = 0; i < st.items.size(); ++i) {
          const auto& it = st.items[i];
          std::vector<CompiledExpr> labels;
          for (const auto& l : it.labels) {
            expr_reads(l, scope, p.reads);
            labels.push_back(ec.compile(l, w));
          }
          if (it.is_default) s.default_arm = static_cast<int>(i);
          s.labels.push_back(std::move(labels));
          s.body.push_back(stmt(ec, it.body[0], scope, p));
        }
        break;
      }
      case Stmt::Kind::kFor:
        expr_reads(st.cond, scope, p.reads);
        s.body.push_back(stmt(ec, st.loop_control[0], scope, p));
        s.body.push_back(stmt(ec, st.loop_control[1], scope, p));
        s.body.push_back(stmt(ec, st.body[0], scope, p));
        s.cond = ec.compile(st.cond, 0);
        break;
    }
    return s;
  }

  void add_process(int index) {
    const ElabProcess& ep = d_.processes[static_cast<std::size_t>(index)];
    CompiledProcess p;
    p.elab = index;
    ExprCompiler ec(d_, slot_, ep.scope);
    switch (ep.kind) {
      case ElabProcess::Kind::kAssign:
        p.assignments = 1;
        lvalue(ep.assign->lhs, ep.scope, p.reads, p.writes);
        expr_reads(ep.assign->rhs, ep.scope, p.reads);
        p.stmt = assignment(ec, ep.assign->lhs, ep.assign->rhs, ep.scope, Stmt::Kind::kBlocking);
        break;
      case ElabProcess::Kind::kCombinational:
        p.stmt = stmt(ec, ep.always->body, ep.scope, p);
        break;
      case ElabProcess::Kind::kSequential: {
        p.sequential = true;
        p.stmt = stmt(ec, ep.always->body, ep.scope, p);
        break;
      }
      case ElabProcess::Kind::kPortIn: {
        p.assignments = 1;
        const auto& child = d_.signals[static_cast<std::size_t>(ep.child_signal)];
        int cslot = slot_[static_cast<std::size_t>(ep.child_signal)];
        expr_reads(*ep.connection->expr, ep.scope, p.reads);
        p.writes.push_back(cslot);
        CompiledStmt s;
        s.kind = Stmt::Kind::kBlocking;
        CompiledTarget t;
        t.slot = cslot;
        t.width = child.width;
        t.sig_width = child.width;
        s.targets.push_back(std::move(t));
        s.lhs_width = child.width;
        s.rhs = ec.compile(*ep.connection->expr, child.width);
        p.stmt = std::move(s);
        break;
      }
      case ElabProcess::Kind::kPortOut: {
        p.assignments = 1;
        const auto& child = d_.signals[static_cast<std::size_t>(ep.child_signal)];
        int cslot = slot_[static_cast<std::size_t>(ep.child_signal)];
        p.reads.push_back(cslot);
        lvalue(*ep.connection->expr, ep.scope, p.reads, p.writes);
        CompiledStmt s;
        s.kind = Stmt::Kind::kBlocking;
        ec.targets(*ep.connection->expr, s.targets);
        s.lhs_width = d_.self_width(*ep.connection->expr, ep.scope);
        s.rhs = ExprCompiler::load(cslot, child.width, s.lhs_width);
        p.stmt = std::move(s);
        break;
      }
    }
    auto uniq = [](std::vector<int>& v) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    uniq(p.reads);
    uniq(p.writes);
    impl_.processes.push_back(std::move(p));
  }

  void order_combinational() {
    std::vector<int> comb;
    int assignments = 0;
    for (std::size_t i = 0; i < impl_.processes.size(); ++i) {
      if (!impl_.processes[i].sequential) {
        comb.push_back(static_cast<int>(i));
        assignments += impl_.processes[i].assignments;
      }
    }
    impl_.sweep_limit = std::max(2, 2 * assignments);
    std::size_t n_slots = slot_count();
    std::vector<std::vector<int>> writers(n_slots);
    for (int p : comb)
      for (int s : impl_.processes[static_cast<std::size_t>(p)].writes)
        writers[static_cast<std::size_t>(s)].push_back(p);
    // Kahn's algorithm; ties broken by process index for determinism.
    std::vector<std::vector<int>> succ(impl_.processes.size());
    std::vector<int> indeg(impl_.processes.size(), 0);
    for (int q : comb) {
      std::vector<int> preds;
      for (int s : impl_.processes[static_cast<std::size_t>(q)].reads)
        for (int p : writers[static_cast<std::size_t>(s)])
          if (p != q) preds.push_back(p);
      std::sort(preds.begin(), preds.end());
      preds.erase(std::unique(preds.begin(), preds.end()), preds.end());
      for (int p : preds) succ[static_cast<std::size_t>(p)].push_back(q);
      indeg[static_cast<std::size_t>(q)] = static_cast<int>(preds.size());
    }
    std::vector<int> ready;
    for (int p : comb)
      if (indeg[static_cast<std::size_t>(p)] == 0) ready.push_back(p);
    std::vector<int> order;
    std::vector<std::uint8_t> placed(impl_.processes.size(), 0);
    while (!ready.empty()) {
      auto it = std::min_element(ready.begin(), ready.end());
      int p = *it;
      ready.erase(it);
      order.push_back(p);
      placed[static_cast<std::size_t>(p)] = 1;
      for (int q : succ[static_cast<std::size_t>(p)])
        if (--indeg[static_cast<std::size_t>(q)] == 0) ready.push_back(q);
    }
    if (order.size() != comb.size()) {
      impl_.cyclic = true;
      for (int p : comb)
        if (!placed[static_cast<std::size_t>(p)]) order.push_back(p);
    }
    impl_.comb_order = order;
    impl_.comb_pos.assign(impl_.processes.size(), -1);
    for (std::size_t i = 0; i < order.size(); ++i)
      impl_.comb_pos[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
    impl_.readers.assign(n_slots, {});
    for (std::size_t i = 0; i < order.size(); ++i)
      for (int s : impl_.processes[static_cast<std::size_t>(order[i])].reads)
        impl_.readers[static_cast<std::size_t>(s)].push_back(static_cast<int>(i));
  }

  void wire_events() {
    std::vector<std::uint8_t> clocky(d_.signals.size(), 0);
    if (d_.clock >= 0) {
      clocky[static_cast<std::size_t>(d_.clock)] = 1;
      bool changed = true;
      while (changed) {
        changed = false;
        for (const auto& p : d_.processes) {
          if (p.kind != ElabProcess::Kind::kPortIn || !p.connection->expr) continue;
          const Expr& e = *p.connection->expr;
          if (e.kind != Expr::Kind::kIdent) continue;
          int src = d_.resolve(p.scope, e.name);
          if (src >= 0 && clocky[static_cast<std::size_t>(src)] &&
              !clocky[static_cast<std::size_t>(p.child_signal)]) {
            clocky[static_cast<std::size_t>(p.child_signal)] = 1;
            changed = true;
          }
        }
      }
    }
    for (std::size_t i = 0; i < impl_.processes.size(); ++i) {
      auto& cp = impl_.processes[i];
      if (!cp.sequential) continue;
      const ElabProcess& ep = d_.processes[static_cast<std::size_t>(cp.elab)];
      for (const auto& item : ep.always->sens) {
        int sig = d_.resolve(ep.scope, item.signal);
        if (sig < 0) continue;
        if (clocky[static_cast<std::size_t>(sig)]) {
          cp.clocked = true;
          continue;
        }
        int slot = slot_[static_cast<std::size_t>(sig)];
        auto w = std::find_if(impl_.watches.begin(), impl_.watches.end(),
                              [&](const SimProgram::Impl::Watch& x) { return x.slot == slot; });
        if (w == impl_.watches.end()) {
          impl_.watches.push_back({slot, {}});
          w = impl_.watches.end() - 1;
        }
        w->blocks.emplace_back(static_cast<int>(i), item.edge);
      }
      if (cp.clocked) impl_.clocked.push_back(static_cast<int>(i));
    }
  }

  std::size_t slot_count() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < d_.signals.size(); ++i) {
      const auto& s = d_.signals[i];
      n = std::max(n, static_cast<std::size_t>(slot_[i] + (s.depth > 0 ? s.depth : 1)));
    }
    return n;
  }

  const ElaboratedDesign& d_;
  const std::vector<int>& slot_;
  SimProgram::Impl& impl_;
};

}  // namespace

SimProgram::~SimProgram() = default;

std::shared_ptr<const SimProgram> SimProgram::build(const ElaboratedDesign& design) {
  std::shared_ptr<SimProgram> p(new SimProgram());
  p->design_ = design;
  const auto& d = p->design_;
  for (std::size_t i = 0; i < d.signals.size(); ++i) {
    const auto& s = d.signals[i];
    p->signal_slot_.push_back(static_cast<int>(p->slots_.size()));
    if (s.depth > 0) {
      for (int w = 0; w < s.depth; ++w)
        p->slots_.push_back({s.path + "[" + std::to_string(s.array_lo + w) + "]", s.width,
                             static_cast<int>(i), w});
    } else {
      p->slots_.push_back({s.path, s.width, static_cast<int>(i), -1});
    }
  }
  if (d.clock >= 0) p->clock_slot_ = p->signal_slot_[static_cast<std::size_t>(d.clock)];
  p->impl_ = std::make_unique<Impl>();
  ProgramBuilder(d, p->signal_slot_, *p->impl_).build();
  return p;
}

CompiledExpr SimProgram::compile(const Expr& e, int scope, int width) const {
  ExprCompiler ec(design_, signal_slot_, scope);
  return ec.compile(e, width);
}

// ---------------------------------------------------------------------------
// Simulator

Simulator::Simulator(std::shared_ptr<const SimProgram> program) : program_(std::move(program)) {
  const auto& slots = program_->slots();
  state_.reserve(slots.size());
  for (const auto& s : slots) state_.push_back(Value::all_x(s.width));
  sampled_ = state_;
  const auto& impl = program_->impl();
  dirty_.assign(impl.comb_order.size(), 1);
  last_edge_.assign(impl.watches.size(), Value{1, 0, 1});
}

void Simulator::bind_inputs(const std::vector<std::string>& names) {
  const auto& d = program_->design();
  input_slots_.clear();
  input_widths_.clear();
  std::vector<int> covered;
  for (const auto& n : names) {
    int sig = d.resolve(0, n);
    if (sig < 0 || d.signals[static_cast<std::size_t>(sig)].direction != Direction::kInput ||
        sig == d.clock)
      throw StimulusMismatch("stimulus drives '" + n + "', which is not a top-level data input");
    covered.push_back(sig);
    input_slots_.push_back(program_->slot_of(sig));
    input_widths_.push_back(d.signals[static_cast<std::size_t>(sig)].width);
  }
  for (int in : d.inputs) {
    if (in == d.clock) continue;
    if (std::find(covered.begin(), covered.end(), in) == covered.end())
      throw StimulusMismatch("stimulus does not drive input '" +
                             d.signals[static_cast<std::size_t>(in)].name + "'");
  }
}

void Simulator::write(int slot, const Value& v, int writer) {
  Value& cur = state_[static_cast<std::size_t>(slot)];
  if (cur.bits == v.bits && cur.xmask == v.xmask) return;
  cur.bits = v.bits;
  cur.xmask = v.xmask;
  for (int r : program_->impl().readers[static_cast<std::size_t>(slot)])
    if (r != writer) dirty_[static_cast<std::size_t>(r)] = 1;
}

void Simulator::assign(const CompiledStmt& s, bool nonblocking) {
  Value v = s.rhs.eval(state_.data());
  int pos = 0;
  for (auto it = s.targets.rbegin(); it != s.targets.rend(); ++it) {
    const CompiledTarget& t = *it;
    std::uint64_t m = width_mask(t.width);
    Value part = pos >= 64 ? Value::known(t.width, 0)
                           : Value{t.width, (v.bits >> pos) & m, (v.xmask >> pos) & m};
    pos += t.width;
    int slot = t.slot;
    int shift = t.shift;
    if (t.kind != CompiledTarget::Kind::kSlice) {
      Value idx = t.index.eval(state_.data());
      std::int64_t p = static_cast<std::int64_t>(idx.bits) -
                       (t.kind == CompiledTarget::Kind::kWord ? t.lo : t.decl_lsb);
      std::int64_t limit = t.kind == CompiledTarget::Kind::kWord ? t.depth : t.sig_width;
      if (idx.xmask || idx.bits > 0xffffffffull || p < 0 || p >= limit) continue;
      if (t.kind == CompiledTarget::Kind::kWord)
        slot += static_cast<int>(p);
      else
        shift = static_cast<int>(p);
    }
    if (nonblocking) {
      nba_.push_back({slot, shift, t.width, part});
      continue;
    }
    const Value& old = state_[static_cast<std::size_t>(slot)];
    std::uint64_t wm = width_mask(t.width) << shift;
    Value nv{old.width, (old.bits & ~wm) | ((part.bits << shift) & wm),
             (old.xmask & ~wm) | ((part.xmask << shift) & wm)};
    write(slot, nv, current_);
  }
}

void Simulator::run_stmt(const CompiledStmt& s, bool sequential) {
  switch (s.kind) {
    case Stmt::Kind::kEmpty:
      return;
    case Stmt::Kind::kBlocking:
      assign(s, false);
      return;
    case Stmt::Kind::kNonblocking:
      assign(s, sequential);
      return;
    case Stmt::Kind::kBlock:
      for (const auto& c : s.body) run_stmt(c, sequential);
      return;
    case Stmt::Kind::kIf:
      if (truthy(s.cond.eval(state_.data())))
        run_stmt(s.body[0], sequential);
      else if (!s.else_body.empty())
        run_stmt(s.else_body[0], sequential);
      return;
    case Stmt::Kind::kCase: {
      Value subject = s.cond.eval(state_.data());
      for (std::size_t i = 0; i < s.labels.size(); ++i)
        for (const auto& l : s.labels[i])
          if (case_equal(subject, l.eval(state_.data()))) {
            run_stmt(s.body[i], sequential);
            return;
          }
      if (s.default_arm >= 0) run_stmt(s.body[static_cast<std::size_t>(s.default_arm)], sequential);
      return;
    }
    case Stmt::Kind::kFor: {
      run_stmt(s.body[0], sequential);
      int n = 0;
      while (truthy(s.cond.eval(state_.data()))) {
        if (++n > kMaxLoopIterations)
          throw LoopLimitExceeded("for loop exceeded " + std::to_string(kMaxLoopIterations) +
                                  " iterations");
        run_stmt(s.body[2], sequential);
        run_stmt(s.body[1], sequential);
      }
      return;
    }
  }
}

void Simulator::run_process(int p) {
  const auto& cp = program_->impl().processes[static_cast<std::size_t>(p)];
  run_stmt(cp.stmt, cp.sequential);
}

void Simulator::settle() {
  const auto& impl = program_->impl();
  const auto& order = impl.comb_order;
  if (!impl.cyclic) {
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (!dirty_[i]) continue;
      dirty_[i] = 0;
      current_ = static_cast<int>(i);
      run_process(order[i]);
    }
    current_ = -1;
    return;
  }
  for (int sweep = 0;; ++sweep) {
    bool any = false;
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (!dirty_[i]) continue;
      if (sweep >= impl.sweep_limit)
        throw CombLoopDetected("combinational logic did not settle within " +
                               std::to_string(impl.sweep_limit) + " sweeps");
      any = true;
      dirty_[i] = 0;
      current_ = static_cast<int>(i);
      run_process(order[i]);
    }
    current_ = -1;
    if (!any) return;
  }
}

void Simulator::fire(const std::vector<int>& blocks) {
  current_ = -1;
  nba_.clear();
  for (int b : blocks) run_process(b);
  for (const auto& n : nba_) {
    const Value& old = state_[static_cast<std::size_t>(n.slot)];
    std::uint64_t wm = width_mask(n.width) << n.shift;
    Value nv{old.width, (old.bits & ~wm) | ((n.v.bits << n.shift) & wm),
             (old.xmask & ~wm) | ((n.v.xmask << n.shift) & wm)};
    write(n.slot, nv, -1);
  }
  nba_.clear();
}

void Simulator::dispatch_events() {
  const auto& watches = program_->impl().watches;
  if (watches.empty()) return;
  std::vector<int> triggered;
  for (int round = 0; round < kMaxEventRounds; ++round) {
    triggered.clear();
    for (std::size_t i = 0; i < watches.size(); ++i) {
      const Value& v = state_[static_cast<std::size_t>(watches[i].slot)];
      Value cur{1, v.bits & 1, v.xmask & 1};
      Value prev = last_edge_[i];
      if (cur == prev) continue;
      last_edge_[i] = cur;
      bool rise = (prev.xmask || prev.bits == 0) && (cur.xmask || cur.bits == 1) &&
                  !(prev.xmask && cur.xmask);
      bool fall = (prev.xmask || prev.bits == 1) && (cur.xmask || cur.bits == 0) &&
                  !(prev.xmask && cur.xmask);
      for (const auto& [block, edge] : watches[i].blocks)
        if ((edge == Edge::kPos && rise) || (edge == Edge::kNeg && fall))
          triggered.push_back(block);
    }
    if (triggered.empty()) return;
    std::sort(triggered.begin(), triggered.end());
    triggered.erase(std::unique(triggered.begin(), triggered.end()), triggered.end());
    fire(triggered);
    settle();
  }
  throw CombLoopDetected("edge-triggered events did not quiesce");
}

void Simulator::cycle(const std::vector<std::uint64_t>& inputs) {
  if (inputs.size() != input_slots_.size())
    throw StimulusMismatch("stimulus row has " + std::to_string(inputs.size()) + " values, expected " +
                           std::to_string(input_slots_.size()));
  for (std::size_t i = 0; i < inputs.size(); ++i)
    write(input_slots_[i], Value::known(input_widths_[i], inputs[i]), -1);
  settle();
  dispatch_events();
  sampled_ = state_;
  const auto& clocked = program_->impl().clocked;
  if (!clocked.empty()) {
    fire(clocked);
    settle();
    dispatch_events();
  }
}

// ---------------------------------------------------------------------------

Trace simulate(const SimProgram& program, const Stimulus& stimulus, std::size_t cycles,
               bool record_sampled) {
  if (cycles > stimulus.cycles())
    throw StimulusMismatch("stimulus has " + std::to_string(stimulus.cycles()) +
                           " cycles, " + std::to_string(cycles) + " requested");
  // The simulator only needs shared ownership for its own lifetime; alias it.
  std::shared_ptr<const SimProgram> alias(std::shared_ptr<const SimProgram>{}, &program);
  Simulator sim(alias);
  sim.bind_inputs(stimulus.inputs);
  Trace t;
  const auto& slots = program.slots();
  for (std::size_t i = 0; i < slots.size(); ++i)
    if (static_cast<int>(i) != program.clock_slot())
      t.signals.push_back({slots[i].path, slots[i].width, static_cast<int>(i)});
  t.stride = slots.size();
  t.cycles = cycles;
  t.post.reserve(cycles * t.stride);
  bool sampled = record_sampled && program.design().sequential();
  if (sampled) t.pre.reserve(cycles * t.stride);
  for (std::size_t c = 0; c < cycles; ++c) {
    sim.cycle(stimulus.vectors[c]);
    t.post.insert(t.post.end(), sim.state().begin(), sim.state().end());
    if (sampled) t.pre.insert(t.pre.end(), sim.sampled().begin(), sim.sampled().end());
  }
  t.index();
  return t;
}

Trace simulate(const ElaboratedDesign& design, const Stimulus& stimulus, std::size_t cycles) {
  auto program = SimProgram::build(design);
  return simulate(*program, stimulus, cycles);
}

}  // namespace rtlmend
