#include "rtlmend/localize.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <tuple>

#include <nlohmann/json.hpp>

#include "rtlmend/error.hpp"

namespace rtlmend {

// ---------------------------------------------------------------------------
// err_chk

MismatchFacts err_chk(const std::vector<std::string>& log_lines, const Trace& trace,
                      const std::vector<std::string>& input_names) {
  MismatchFacts f;
  std::set<std::size_t> times;
  std::set<std::string> seen;
  std::size_t n = 0;
  for (const auto& line : log_lines) {
    ++n;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("kind") || !j["kind"].is_string())
      throw MalformedLog("log line " + std::to_string(n) + " is not a log record");
    const std::string kind = j["kind"].get<std::string>();
    if (kind == "summary") continue;
    if (kind != "check") throw MalformedLog("log line " + std::to_string(n) + ": unknown kind '" + kind + "'");
    if (!j.contains("time") || !j["time"].is_number_unsigned() || !j.contains("signal") ||
        !j["signal"].is_string() || !j.contains("pass") || !j["pass"].is_boolean())
      throw MalformedLog("log line " + std::to_string(n) + ": check record lacks time/signal/pass");
    if (j["pass"].get<bool>()) continue;
    times.insert(j["time"].get<std::size_t>());
    std::string sig = j["signal"].get<std::string>();
    if (seen.insert(sig).second) f.signals.push_back(std::move(sig));
  }
  f.times.assign(times.begin(), times.end());
  for (std::size_t t : f.times) {
    auto& row = f.inputs[t];
    for (const auto& in : input_names) row[in] = trace.query(in, t);
  }
  return f;
}

// ---------------------------------------------------------------------------
// DFG construction

namespace {

struct Collector {
  const ElaboratedDesign& d;
  std::vector<DfgEdge> edges;
  std::vector<DfgGuard> guards;

  void reads(const Expr& e, int scope, std::vector<int>& out) const {
    std::vector<std::string> names;
    collect_reads(e, names);
    for (const auto& n : names) {
      int s = d.resolve(scope, n);
      if (s >= 0 && std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    }
  }

  void add(const std::vector<int>& targets, const std::vector<int>& data, int proc, bool seq, bool blocking,
           std::uint32_t line, const std::vector<int>& gstack, std::uint32_t header, int scope) {
    std::vector<std::uint32_t> ctx;
    for (int g : gstack) {
      const auto& gd = guards[static_cast<std::size_t>(g)];
      ctx.push_back(gd.line);
      if (gd.item_line && gd.item_line != gd.line) ctx.push_back(gd.item_line);
    }
    if (header) ctx.push_back(header);
    std::vector<int> gsrc;
    for (int g : gstack) {
      const auto& gd = guards[static_cast<std::size_t>(g)];
      reads(gd.stmt->cond, scope, gsrc);
      if (gd.kind == DfgGuard::Kind::kCaseItem || gd.kind == DfgGuard::Kind::kCaseDefault)
        for (const auto& it : gd.stmt->items)
          for (const auto& l : it.labels) reads(l, scope, gsrc);
    }
    for (int t : targets) {
      for (int s : data)
        edges.push_back({s, t, false, seq, blocking, proc, line, ctx, gstack});
      for (int s : gsrc)
        edges.push_back({s, t, true, seq, blocking, proc, line, ctx, gstack});
      if (data.empty() && gsrc.empty()) edges.push_back({-1, t, false, seq, blocking, proc, line, ctx, gstack});
    }
  }

  void stmt(const Stmt& s, int proc, bool seq, int scope, std::vector<int>& gstack, bool in_loop,
            std::uint32_t header) {
    switch (s.kind) {
      case Stmt::Kind::kBlock:
        for (const auto& c : s.body) stmt(c, proc, seq, scope, gstack, in_loop, header);
        break;
      case Stmt::Kind::kBlocking:
      case Stmt::Kind::kNonblocking: {
        std::vector<std::string> written, idx;
        collect_lvalue(s.lhs, written, idx);
        std::vector<int> targets, data;
        for (const auto& w : written) {
          int sig = d.resolve(scope, w);
          if (sig >= 0) targets.push_back(sig);
        }
        reads(s.rhs, scope, data);
        for (const auto& n : idx) {
          int sig = d.resolve(scope, n);
          if (sig >= 0 && std::find(data.begin(), data.end(), sig) == data.end()) data.push_back(sig);
        }
        add(targets, data, proc, seq, s.kind == Stmt::Kind::kBlocking, s.span.line, gstack, header, scope);
        break;
      }
      case Stmt::Kind::kIf: {
        int gt = push_guard(DfgGuard::Kind::kThen, s, 0, scope, in_loop);
        gstack.push_back(gt);
        for (const auto& c : s.body) stmt(c, proc, seq, scope, gstack, in_loop, header);
        gstack.back() = push_guard(DfgGuard::Kind::kElse, s, 0, scope, in_loop);
        for (const auto& c : s.else_body) stmt(c, proc, seq, scope, gstack, in_loop, header);
        gstack.pop_back();
        break;
      }
      case Stmt::Kind::kCase:
        for (std::size_t i = 0; i < s.items.size(); ++i) {
          auto kind = s.items[i].is_default ? DfgGuard::Kind::kCaseDefault : DfgGuard::Kind::kCaseItem;
          gstack.push_back(push_guard(kind, s, i, scope, in_loop));
          for (const auto& c : s.items[i].body) stmt(c, proc, seq, scope, gstack, in_loop, header);
          gstack.pop_back();
        }
        break;
      case Stmt::Kind::kFor:
        gstack.push_back(push_guard(DfgGuard::Kind::kLoop, s, 0, scope, true));
        for (const auto& c : s.body) stmt(c, proc, seq, scope, gstack, true, header);
        gstack.pop_back();
        break;
      case Stmt::Kind::kEmpty:
        break;
    }
  }

  int push_guard(DfgGuard::Kind k, const Stmt& s, std::size_t item, int scope, bool in_loop) {
    std::uint32_t line = s.head_span.valid() ? s.head_span.line : s.span.line;
    std::uint32_t item_line = 0;
    if ((k == DfgGuard::Kind::kCaseItem || k == DfgGuard::Kind::kCaseDefault) && s.items[item].span.valid())
      item_line = s.items[item].span.line;
    guards.push_back({k, &s, item, scope, line, item_line, in_loop});
    return static_cast<int>(guards.size() - 1);
  }

  void build() {
    for (std::size_t p = 0; p < d.processes.size(); ++p) {
      const auto& ep = d.processes[p];
      int proc = static_cast<int>(p);
      std::vector<int> gstack;
      switch (ep.kind) {
        case ElabProcess::Kind::kAssign: {
          std::vector<std::string> written, idx;
          collect_lvalue(ep.assign->lhs, written, idx);
          std::vector<int> targets, data;
          for (const auto& w : written)
            if (int s = d.resolve(ep.scope, w); s >= 0) targets.push_back(s);
          reads(ep.assign->rhs, ep.scope, data);
          for (const auto& n : idx)
            if (int s = d.resolve(ep.scope, n); s >= 0) data.push_back(s);
          add(targets, data, proc, false, true, ep.assign->span.line, gstack, 0, ep.scope);
          break;
        }
        case ElabProcess::Kind::kCombinational:
          stmt(ep.always->body, proc, false, ep.scope, gstack, false, 0);
          break;
        case ElabProcess::Kind::kSequential:
          stmt(ep.always->body, proc, true, ep.scope, gstack, false, ep.always->span.line);
          break;
        case ElabProcess::Kind::kPortIn: {
          std::vector<int> data;
          if (ep.connection->expr) reads(*ep.connection->expr, ep.scope, data);
          add({ep.child_signal}, data, proc, false, true, ep.connection->span.line, gstack, 0, ep.scope);
          break;
        }
        case ElabProcess::Kind::kPortOut: {
          std::vector<std::string> written, idx;
          collect_lvalue(*ep.connection->expr, written, idx);
          std::vector<int> targets;
          for (const auto& w : written)
            if (int s = d.resolve(ep.scope, w); s >= 0) targets.push_back(s);
          add(targets, {ep.child_signal}, proc, false, true, ep.connection->span.line, gstack, 0, ep.scope);
          break;
        }
      }
    }
  }
};

}  // namespace

std::vector<const DfgEdge*> Dfg::into(int signal) const {
  std::vector<const DfgEdge*> out;
  for (const auto& e : edges)
    if (e.to == signal) out.push_back(&e);
  return out;
}

bool Dfg::combinational_acyclic() const {
  std::map<int, std::vector<int>> succ;
  std::map<int, int> indeg;
  for (int n : nodes) indeg[n] = 0;
  for (const auto& e : edges) {
    if (e.sequential || e.from == e.to || e.from < 0) continue;
    succ[e.from].push_back(e.to);
    ++indeg[e.to];
    indeg.emplace(e.from, 0);
  }
  std::deque<int> q;
  for (const auto& [n, k] : indeg)
    if (k == 0) q.push_back(n);
  std::size_t seen = 0;
  while (!q.empty()) {
    int n = q.front();
    q.pop_front();
    ++seen;
    for (int m : succ[n])
      if (--indeg[m] == 0) q.push_back(m);
  }
  return seen == indeg.size();
}

Dfg build_dfg(const ElaboratedDesign& design, const std::string& signal) {
  int root = design.find_signal(signal);
  if (root < 0) throw UnknownSignal("no signal named '" + signal + "'");
  Collector c{design, {}, {}};
  c.build();
  Dfg g;
  g.root = signal;
  g.root_signal = root;
  g.guards = std::move(c.guards);
  std::map<int, std::vector<std::size_t>> by_target;
  for (std::size_t i = 0; i < c.edges.size(); ++i) by_target[c.edges[i].to].push_back(i);
  std::set<int> seen{root};
  std::deque<int> q{root};
  std::vector<char> keep(c.edges.size(), 0);
  while (!q.empty()) {
    int n = q.front();
    q.pop_front();
    g.nodes.push_back(n);
    for (std::size_t i : by_target[n]) {
      keep[i] = 1;
      if (c.edges[i].from >= 0 && seen.insert(c.edges[i].from).second) q.push_back(c.edges[i].from);
    }
  }
  for (std::size_t i = 0; i < c.edges.size(); ++i)
    if (keep[i]) g.edges.push_back(std::move(c.edges[i]));
  return g;
}

// ---------------------------------------------------------------------------
// Slicing

namespace {

std::vector<SourceLine> order_lines(const std::string& file, const std::map<std::uint32_t, std::size_t>& freq) {
  std::vector<std::pair<std::uint32_t, std::size_t>> v(freq.begin(), freq.end());
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<SourceLine> out;
  for (const auto& [line, n] : v) out.push_back({file, line});
  return out;
}

std::vector<std::size_t> ordered_counts(const std::map<std::uint32_t, std::size_t>& freq) {
  std::vector<std::size_t> n;
  for (const auto& [line, c] : freq) n.push_back(c);
  std::sort(n.begin(), n.end(), std::greater<>());
  return n;
}

class GuardEvaluator {
 public:
  GuardEvaluator(const SimProgram& prog, const Dfg& g) : prog_(prog), g_(g) {
    cache_.resize(g.guards.size());
  }

  // True when the guarded branch executed on `row`.
  bool holds(int gi, const Value* row) {
    const auto& g = g_.guards[static_cast<std::size_t>(gi)];
    if (g.in_loop) return true;
    auto& c = compiled(gi);
    switch (g.kind) {
      case DfgGuard::Kind::kThen: return truthy(c.cond.eval(row));
      case DfgGuard::Kind::kElse: return !truthy(c.cond.eval(row));
      case DfgGuard::Kind::kLoop:
        return true;
      case DfgGuard::Kind::kCaseItem:
      case DfgGuard::Kind::kCaseDefault: {
        Value subj = c.cond.eval(row);
        for (std::size_t i = 0; i < c.labels.size(); ++i) {
          bool hit = false;
          for (const auto& l : c.labels[i])
            if (case_equal(subj, l.eval(row))) hit = true;
          if (hit) return g.kind == DfgGuard::Kind::kCaseItem && i == g.item;
        }
        return g.kind == DfgGuard::Kind::kCaseDefault;
      }
    }
    return true;
  }

  // Lines whose evaluation decided guard `gi` on `row`: the header and, for a
  // case, every item label compared up to the first match.
  void decided_by(int gi, const Value* row, std::set<std::uint32_t>& lines) {
    const auto& g = g_.guards[static_cast<std::size_t>(gi)];
    lines.insert(g.line);
    if (g.kind != DfgGuard::Kind::kCaseItem && g.kind != DfgGuard::Kind::kCaseDefault) return;
    if (g.in_loop) {
      for (const auto& it : g.stmt->items) lines.insert(it.span.line);
      return;
    }
    auto& c = compiled(gi);
    Value subj = c.cond.eval(row);
    for (std::size_t i = 0; i < c.labels.size(); ++i) {
      if (c.labels[i].empty()) continue;
      lines.insert(g.stmt->items[i].span.line);
      for (const auto& l : c.labels[i])
        if (case_equal(subj, l.eval(row))) return;
    }
    for (const auto& it : g.stmt->items)
      if (it.is_default) lines.insert(it.span.line);
  }

 private:
  struct Compiled {
    bool ready = false;
    CompiledExpr cond;
    std::vector<std::vector<CompiledExpr>> labels;
  };

  Compiled& compiled(int gi) {
    auto& c = cache_[static_cast<std::size_t>(gi)];
    if (c.ready) return c;
    const auto& g = g_.guards[static_cast<std::size_t>(gi)];
    const Stmt& s = *g.stmt;
    if (s.kind == Stmt::Kind::kCase) {
      const auto& d = prog_.design();
      int w = d.self_width(s.cond, g.scope);
      for (const auto& it : s.items)
        for (const auto& l : it.labels) w = std::max(w, d.self_width(l, g.scope));
      c.cond = prog_.compile(s.cond, g.scope, w);
      for (const auto& it : s.items) {
        c.labels.emplace_back();
        for (const auto& l : it.labels) c.labels.back().push_back(prog_.compile(l, g.scope, w));
      }
    } else {
      c.cond = prog_.compile(s.cond, g.scope);
    }
    c.ready = true;
    return c;
  }

  const SimProgram& prog_;
  const Dfg& g_;
  std::vector<Compiled> cache_;
};

}  // namespace

SliceResult dynamic_slice(const SimProgram& program, const Dfg& dfg, const std::vector<std::size_t>& times,
                          const Trace& trace) {
  const auto& d = program.design();
  SliceResult out;
  if (times.empty()) return out;
  for (std::size_t t : times)
    if (trace.cycles == 0 || t > trace.horizon())
      throw TimeBeyondHorizon("cycle " + std::to_string(t) + " is beyond the trace horizon");

  std::map<int, std::vector<const DfgEdge*>> into;
  for (const auto& e : dfg.edges) into[e.to].push_back(&e);
  std::set<int> inputs(d.inputs.begin(), d.inputs.end());
  GuardEvaluator guards(program, dfg);

  std::map<std::uint32_t, std::size_t> freq;
  std::set<int> reached;
  // State: signal, cycle, phase (0 = settled value after the cycle, 1 = value sampled by its edge).
  using State = std::tuple<int, std::size_t, int>;
  for (std::size_t t0 : times) {
    std::set<State> visited;
    std::set<std::uint32_t> lines;
    std::deque<State> work{{dfg.root_signal, t0, 0}};
    visited.insert(work.front());
    auto push = [&](int sig, std::size_t t, int phase) {
      if (visited.insert({sig, t, phase}).second) work.emplace_back(sig, t, phase);
    };
    while (!work.empty()) {
      auto [sig, t, phase] = work.front();
      work.pop_front();
      if (inputs.count(sig)) continue;
      reached.insert(sig);
      if (auto dl = d.signals[static_cast<std::size_t>(sig)].decl_line) lines.insert(dl);
      auto it = into.find(sig);
      if (it == into.end()) continue;
      bool seq_driver = false, seq_fired = false;
      // Cycle whose clock edge produced the register value in this state.
      bool has_edge_cycle = phase == 0 || t > 0;
      std::size_t tc = phase == 0 ? t : (t > 0 ? t - 1 : 0);
      for (const DfgEdge* e : it->second) {
        const Value* row;
        if (e->sequential) {
          seq_driver = true;
          if (!has_edge_cycle) continue;
          row = trace.sampled_row(tc);
        } else {
          row = phase == 0 ? trace.row(t) : trace.sampled_row(t);
        }
        bool ok = true;
        for (int g : e->guards)
          if (!guards.holds(g, row)) {
            ok = false;
            break;
          }
        if (!ok) continue;
        lines.insert(e->line);
        for (auto l : e->context) lines.insert(l);
        for (int g : e->guards) guards.decided_by(g, row, lines);
        if (e->from < 0) {
          if (e->sequential) seq_fired = true;
        } else if (e->sequential) {
          seq_fired = true;
          // Blocking temporaries of the same block hold their fresh value.
          bool same_block_temp = false;
          for (const auto& f : into[e->from])
            if (f->process == e->process && f->blocking) same_block_temp = true;
          if (same_block_temp)
            push(e->from, tc, 0);
          else
            push(e->from, tc, 1);
        } else {
          push(e->from, t, phase);
        }
      }
      // A register that was not written at this edge holds an older value;
      // the guards that blocked each write decided that.
      if (seq_driver && !seq_fired && has_edge_cycle) {
        const Value* row = trace.sampled_row(tc);
        for (const DfgEdge* e : it->second) {
          if (!e->sequential) continue;
          for (int g : e->guards) {
            if (guards.holds(g, row)) continue;
            guards.decided_by(g, row, lines);
            break;
          }
        }
        if (tc > 0) push(sig, tc, 1);
      }
    }
    for (auto l : lines) ++freq[l];
  }
  out.lines = order_lines(d.file(), freq);
  out.counts = ordered_counts(freq);
  for (int s : reached) out.signals.push_back(d.signals[static_cast<std::size_t>(s)].path);
  return out;
}

SliceResult dynamic_slice(const ElaboratedDesign& design, const Dfg& dfg, const std::vector<std::size_t>& times,
                          const Trace& trace) {
  auto prog = SimProgram::build(design);
  return dynamic_slice(*prog, dfg, times, trace);
}

std::vector<SourceLine> static_slice(const ElaboratedDesign& design, const Dfg& dfg) {
  std::map<std::uint32_t, std::size_t> freq;
  std::set<int> inputs(design.inputs.begin(), design.inputs.end());
  for (int n : dfg.nodes)
    if (!inputs.count(n))
      if (auto dl = design.signals[static_cast<std::size_t>(n)].decl_line) freq[dl] = 1;
  for (const auto& e : dfg.edges) {
    freq[e.line] = 1;
    for (auto l : e.context) freq[l] = 1;
    for (int g : e.guards) {
      const auto& gd = dfg.guards[static_cast<std::size_t>(g)];
      freq[gd.line] = 1;
      if (gd.kind == DfgGuard::Kind::kCaseItem || gd.kind == DfgGuard::Kind::kCaseDefault)
        for (const auto& it : gd.stmt->items) freq[it.span.line] = 1;
    }
  }
  return order_lines(design.file(), freq);
}

// ---------------------------------------------------------------------------
// ErrInfo

const char* to_string(ErrInfo::Mode m) { return m == ErrInfo::Mode::kMS ? "MS" : "SL"; }

namespace {

nlohmann::ordered_json ordered(const ErrInfo& e) {
  nlohmann::ordered_json j;
  j["mode"] = to_string(e.mode);
  j["signals"] = e.signals;
  j["times"] = e.times;
  nlohmann::ordered_json in = nlohmann::ordered_json::object();
  for (const auto& [t, row] : e.inputs) {
    nlohmann::ordered_json r = nlohmann::ordered_json::object();
    for (const auto& [name, v] : row) r[name] = v.to_binstring();
    in[std::to_string(t)] = r;
  }
  j["inputs"] = in;
  j["lines"] = nlohmann::ordered_json::array();
  for (const auto& l : e.lines) j["lines"].push_back({l.file, l.line});
  return j;
}

}  // namespace

nlohmann::json ErrInfo::to_json() const { return nlohmann::json::parse(ordered(*this).dump()); }

ErrInfo ErrInfo::from_json(const nlohmann::json& j) {
  ErrInfo e;
  e.mode = j.at("mode").get<std::string>() == "SL" ? Mode::kSL : Mode::kMS;
  e.signals = j.at("signals").get<std::vector<std::string>>();
  e.times = j.at("times").get<std::vector<std::size_t>>();
  for (auto it = j.at("inputs").begin(); it != j.at("inputs").end(); ++it) {
    auto& row = e.inputs[std::stoull(it.key())];
    for (auto v = it.value().begin(); v != it.value().end(); ++v) {
      auto val = Value::from_binstring(v.value().get<std::string>());
      if (!val) throw MalformedLog("bad value for input '" + v.key() + "'");
      row[v.key()] = *val;
    }
  }
  for (const auto& l : j.at("lines")) e.lines.push_back({l.at(0).get<std::string>(), l.at(1).get<std::uint32_t>()});
  return e;
}

std::string ErrInfo::to_string() const { return ordered(*this).dump(); }

ErrInfo fetch_err_info(const ElaboratedDesign& design, const VerifyReport& report, int iter, int th) {
  if (iter < 1 || th < 1) throw ConfigError("iteration and threshold must be at least 1");
  std::vector<std::string> input_names;
  for (int i : design.inputs) {
    if (i == design.clock) continue;
    input_names.push_back(design.signals[static_cast<std::size_t>(i)].path);
  }
  MismatchFacts f = err_chk(report.log_lines(), report.trace, input_names);
  ErrInfo info;
  info.signals = f.signals;
  std::size_t keep = std::min(f.times.size(), kMaxMismatchTimes);
  info.times.assign(f.times.begin(), f.times.begin() + static_cast<std::ptrdiff_t>(keep));
  for (std::size_t t : info.times) info.inputs[t] = f.inputs[t];
  if (iter < th) return info;

  info.mode = ErrInfo::Mode::kSL;
  auto prog = SimProgram::build(design);
  std::map<std::uint32_t, std::size_t> freq;
  std::vector<std::string> expanded = info.signals;
  for (const auto& ms : f.signals) {
    Dfg g = build_dfg(design, ms);
    SliceResult s = dynamic_slice(*prog, g, info.times, report.trace);
    for (std::size_t i = 0; i < s.lines.size(); ++i) freq[s.lines[i].line] += s.counts[i];
    for (const auto& sig : s.signals)
      if (std::find(expanded.begin(), expanded.end(), sig) == expanded.end()) expanded.push_back(sig);
  }
  info.signals = std::move(expanded);
  info.lines = order_lines(design.file(), freq);
  return info;
}

}  // namespace rtlmend
