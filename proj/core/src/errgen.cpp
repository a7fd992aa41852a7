#include "rtlmend/errgen.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "rtlmend/elaborate.hpp"
#include "rtlmend/error.hpp"
#include "rtlmend/frontend.hpp"
#include "rtlmend/preprocess.hpp"
#include "rtlmend/testbench.hpp"

namespace fs = std::filesystem;

namespace rtlmend {

const char* to_string(MutationKind k) {
  switch (k) {
    case MutationKind::kTypeMisuse: return "TypeMisuse";
    case MutationKind::kBitwidthMisuse: return "BitwidthMisuse";
    case MutationKind::kOperatorMisuse: return "OperatorMisuse";
    case MutationKind::kVariableNameMisuse: return "VariableNameMisuse";
    case MutationKind::kValueMisuse: return "ValueMisuse";
    case MutationKind::kWrongJudgmentValue: return "WrongJudgmentValue";
    case MutationKind::kWrongSensitivity: return "WrongSensitivity";
    case MutationKind::kPortMismatch: return "PortMismatch";
  }
  return "?";
}

std::optional<MutationKind> parse_mutation_kind(const std::string& s) {
  for (auto k : kAllMutationKinds)
    if (s == to_string(k)) return k;
  return std::nullopt;
}

const char* to_string(MutantClass c) { return c == MutantClass::kSyntax ? "syntax" : "functional"; }

// ---------------------------------------------------------------------------
// Site enumeration

namespace {

std::optional<BinaryOp> swap_of(BinaryOp op) {
  switch (op) {
    case BinaryOp::kAdd: return BinaryOp::kSub;
    case BinaryOp::kSub: return BinaryOp::kAdd;
    case BinaryOp::kBitAnd: return BinaryOp::kBitOr;
    case BinaryOp::kBitOr: return BinaryOp::kBitAnd;
    case BinaryOp::kEq: return BinaryOp::kNe;
    case BinaryOp::kNe: return BinaryOp::kEq;
    case BinaryOp::kLt: return BinaryOp::kLe;
    case BinaryOp::kLe: return BinaryOp::kLt;
    case BinaryOp::kGt: return BinaryOp::kGe;
    case BinaryOp::kGe: return BinaryOp::kGt;
    case BinaryOp::kShl: return BinaryOp::kShr;
    case BinaryOp::kShr: return BinaryOp::kShl;
    case BinaryOp::kLogicalAnd: return BinaryOp::kLogicalOr;
    case BinaryOp::kLogicalOr: return BinaryOp::kLogicalAnd;
    default: return std::nullopt;
  }
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// Same size and radix as `lit`, new value.
std::string format_literal(const Literal& lit, std::uint64_t value) {
  auto tick = lit.text.find('\'');
  if (tick == std::string::npos) return std::to_string(value);
  std::string prefix = lit.text.substr(0, tick + 2);
  char radix = static_cast<char>(std::tolower(static_cast<unsigned char>(lit.text[tick + 1])));
  bool upper = std::any_of(lit.text.begin() + static_cast<std::ptrdiff_t>(tick + 2), lit.text.end(),
                           [](char c) { return c >= 'A' && c <= 'F'; });
  std::string digits;
  if (radix == 'd') {
    digits = std::to_string(value);
  } else {
    int per = radix == 'b' ? 1 : radix == 'o' ? 3 : 4;
    std::uint64_t mask = (1ull << per) - 1;
    do {
      int d = static_cast<int>(value & mask);
      digits.insert(digits.begin(), static_cast<char>(d < 10 ? '0' + d : (upper ? 'A' : 'a') + d - 10));
      value >>= per;
    } while (value);
  }
  return prefix + digits;
}

class SiteFinder {
 public:
  SiteFinder(const Design& d, MutationKind kind) : d_(d), text_(d.source->text()), kind_(kind) {}

  std::vector<MutationOp> run() {
    for (const auto& m : d_.modules) module(m);
    std::stable_sort(out_.begin(), out_.end(),
                     [](const MutationOp& a, const MutationOp& b) { return a.site.begin < b.site.begin; });
    return std::move(out_);
  }

 private:
  std::string slice(const Span& s) const { return text_.substr(s.begin, s.end - s.begin); }

  Span make_span(std::uint32_t b, std::uint32_t e) const {
    Span s;
    s.begin = b;
    s.end = e;
    s.line = d_.source->locate(b).line;
    s.end_line = d_.source->locate(e > b ? e - 1 : b).line;
    return s;
  }

  void emit(const ModuleDecl& m, Span site, std::string after) {
    std::string before = slice(site);
    if (before == after) return;
    out_.push_back({kind_, site, std::move(before), std::move(after), m.name});
  }

  void module(const ModuleDecl& m) {
    m_ = &m;
    switch (kind_) {
      case MutationKind::kTypeMisuse: type_sites(m); break;
      case MutationKind::kBitwidthMisuse: width_sites(m); break;
      case MutationKind::kWrongSensitivity: sens_sites(m); break;
      case MutationKind::kPortMismatch: port_sites(m); break;
      default: expr_sites(m); break;
    }
  }

  // Nets with procedural or continuous drivers, by name.
  void drivers(const ModuleDecl& m, std::set<std::string>& proc, std::set<std::string>& cont) const {
    for (const auto& item : m.items) {
      if (const auto* a = std::get_if<ContinuousAssign>(&item)) {
        std::vector<std::string> w, idx;
        collect_lvalue(a->lhs, w, idx);
        cont.insert(w.begin(), w.end());
      } else if (const auto* al = std::get_if<AlwaysBlock>(&item)) {
        walk(al->body, [&](const Stmt& s) {
          if (s.kind == Stmt::Kind::kBlocking || s.kind == Stmt::Kind::kNonblocking) {
            std::vector<std::string> w, idx;
            collect_lvalue(s.lhs, w, idx);
            proc.insert(w.begin(), w.end());
          }
        });
      }
    }
  }

  void type_sites(const ModuleDecl& m) {
    std::set<std::string> proc, cont;
    drivers(m, proc, cont);
    for (const auto& n : m.nets) {
      if (!n.kind_explicit || !n.kind_span.valid() || n.kind_span.end <= n.kind_span.begin) continue;
      if (n.kind == NetKind::kReg && proc.count(n.name)) {
        // Drop the keyword together with the blanks after it.
        std::uint32_t e = n.kind_span.end;
        while (e < text_.size() && (text_[e] == ' ' || text_[e] == '\t')) ++e;
        emit(m, make_span(n.kind_span.begin, e), "");
      } else if (n.kind == NetKind::kWire && cont.count(n.name)) {
        emit(m, n.kind_span, "reg");
      }
    }
  }

  void width_sites(const ModuleDecl& m) {
    for (const auto& n : m.nets) {
      if (n.direction != Direction::kInternal || !n.has_range || !n.range_span.valid()) continue;
      if (n.msb <= n.lsb) continue;
      emit(m, n.range_span, "[" + std::to_string(n.msb - 1) + ":" + std::to_string(n.lsb) + "]");
    }
  }

  void sens_sites(const ModuleDecl& m) {
    for (const auto& item : m.items) {
      const auto* al = std::get_if<AlwaysBlock>(&item);
      if (!al || al->star || al->sens.size() < 2) continue;
      for (std::size_t i = 0; i < al->sens.size(); ++i) {
        // Remove the item with one adjacent `or` separator.
        Span s = i == 0 ? make_span(al->sens[0].span.begin, al->sens[1].span.begin)
                        : make_span(al->sens[i - 1].span.end, al->sens[i].span.end);
        emit(m, s, "");
      }
    }
  }

  int width_of(const Expr& e) const { return self_width(e, *m_); }

  void port_sites(const ModuleDecl& m) {
    for (const auto& item : m.items) {
      const auto* inst = std::get_if<Instance>(&item);
      if (!inst) continue;
      const ModuleDecl* child = d_.find_module(inst->module);
      std::vector<const PortConnection*> idents;
      for (const auto& c : inst->connections) {
        if (!c.expr) continue;
        if (c.expr->kind == Expr::Kind::kConcat && c.expr->operands.size() >= 2)
          emit(m, c.expr->span, slice(c.expr->operands.back().span));
        if (c.expr->kind == Expr::Kind::kIdent) idents.push_back(&c);
      }
      auto dir = [&](const PortConnection* c) {
        const NetDecl* p = child ? child->find_net(c->port) : nullptr;
        return p ? p->direction : Direction::kInternal;
      };
      for (std::size_t i = 0; i + 1 < idents.size(); ++i) {
        const auto* a = idents[i];
        for (std::size_t j = i + 1; j < idents.size(); ++j) {
          const auto* b = idents[j];
          if (a->expr->name == b->expr->name || dir(a) != dir(b) || dir(a) == Direction::kInternal) continue;
          if (width_of(*a->expr) != width_of(*b->expr)) continue;
          std::string between = text_.substr(a->expr->span.end, b->expr->span.begin - a->expr->span.end);
          emit(m, make_span(a->expr->span.begin, b->expr->span.end), b->expr->name + between + a->expr->name);
          break;
        }
      }
    }
  }

  // --- expression-level kinds -------------------------------------------------

  void expr_sites(const ModuleDecl& m) {
    for (const auto& item : m.items) {
      if (const auto* a = std::get_if<ContinuousAssign>(&item)) {
        rvalue(a->rhs, false, false);
      } else if (const auto* al = std::get_if<AlwaysBlock>(&item)) {
        stmt(al->body);
      } else if (const auto* inst = std::get_if<Instance>(&item)) {
        const ModuleDecl* child = d_.find_module(inst->module);
        for (const auto& c : inst->connections) {
          if (!c.expr) continue;
          const NetDecl* p = child ? child->find_net(c.port) : nullptr;
          if (p && p->direction == Direction::kInput) rvalue(*c.expr, false, false);
        }
      }
    }
  }

  void stmt(const Stmt& s) {
    switch (s.kind) {
      case Stmt::Kind::kBlock:
        for (const auto& c : s.body) stmt(c);
        break;
      case Stmt::Kind::kBlocking:
      case Stmt::Kind::kNonblocking:
        rvalue(s.rhs, false, false);
        break;
      case Stmt::Kind::kIf:
        rvalue(s.cond, false, false);
        for (const auto& c : s.body) stmt(c);
        for (const auto& c : s.else_body) stmt(c);
        break;
      case Stmt::Kind::kCase:
        rvalue(s.cond, false, false);
        for (const auto& it : s.items) {
          for (const auto& l : it.labels) rvalue(l, false, false);
          for (const auto& c : it.body) stmt(c);
        }
        break;
      case Stmt::Kind::kFor:
        rvalue(s.cond, true, false);
        for (const auto& c : s.body) stmt(c);
        break;
      case Stmt::Kind::kEmpty:
        break;
    }
  }

  // `loop`: inside a for condition; `compared`: direct operand of a comparison.
  void rvalue(const Expr& e, bool loop, bool compared) {
    switch (e.kind) {
      case Expr::Kind::kLiteral:
        literal(e, loop, compared);
        return;
      case Expr::Kind::kIdent:
      case Expr::Kind::kBitSelect:
      case Expr::Kind::kPartSelect:
        if (kind_ == MutationKind::kVariableNameMisuse) rename(e);
        break;
      case Expr::Kind::kBinary:
        if (kind_ == MutationKind::kOperatorMisuse && e.op_span.valid())
          if (auto sw = swap_of(e.binary)) emit(*m_, e.op_span, spelling(*sw));
        for (const auto& op : e.operands) rvalue(op, loop, is_comparison(e.binary));
        return;
      default:
        break;
    }
    for (const auto& op : e.operands) rvalue(op, loop, false);
  }

  void literal(const Expr& e, bool loop, bool compared) {
    const Literal& lit = e.literal;
    if (lit.xmask) return;
    if (kind_ == MutationKind::kValueMisuse && lit.sized && !compared) {
      emit(*m_, e.span, format_literal(lit, lit.bits == 0 ? 1 : 0));
    } else if (kind_ == MutationKind::kWrongJudgmentValue && compared) {
      std::uint64_t limit = lit.sized ? width_mask(lit.width) : 0xFFFFFFFFull;
      std::uint64_t v = lit.bits;
      std::uint64_t next = loop ? 2 * v + 1 : v + 1;
      if (next > limit) next = v > 0 ? v - 1 : 1;
      emit(*m_, e.span, format_literal(lit, next));
    }
  }

  void rename(const Expr& e) {
    const NetDecl* self = m_->find_net(e.name);
    if (!self || is_clock_name(e.name)) return;
    const NetDecl* best = nullptr;
    std::size_t best_d = 0;
    for (const auto& n : m_->nets) {
      if (n.name == e.name || n.width() != self->width() || n.is_array != self->is_array) continue;
      if (is_clock_name(n.name) || is_reset_name(n.name)) continue;
      std::size_t dist = edit_distance(n.name, e.name);
      if (!best || dist < best_d) {
        best = &n;
        best_d = dist;
      }
    }
    if (!best) return;
    emit(*m_, make_span(e.span.begin, e.span.begin + static_cast<std::uint32_t>(e.name.size())), best->name);
  }

  const Design& d_;
  const std::string& text_;
  MutationKind kind_;
  const ModuleDecl* m_ = nullptr;
  std::vector<MutationOp> out_;
};

std::string apply_op(const std::string& text, const MutationOp& op) {
  if (op.site.end > text.size() || text.compare(op.site.begin, op.site.end - op.site.begin, op.before) != 0)
    throw ConfigError("mutation site does not match the design text");
  return text.substr(0, op.site.begin) + op.after + text.substr(op.site.end);
}

// Reference data for classifying mutants of one golden design.
struct GoldenRef {
  std::optional<ElaboratedDesign> design;
  std::optional<Verifier> verifier;

  explicit GoldenRef(const Design& d) {
    ElabResult r = elaborate(d);
    if (!r.ok()) throw ConfigError("golden design does not elaborate: " + d.source->path());
    design = std::move(r.design);
    verifier.emplace(*design, default_suite(*design));
  }
};

Mutant classify(const Design& base, const GoldenRef& ref, const MutationOp& op) {
  Mutant m;
  m.base = base.source->text();
  m.mutated = apply_op(m.base, op);
  m.op = op;
  m.line = op.site.line;
  m.repair.pairs = diff_pairs(m.mutated, m.base);
  CheckResult cr = check_source(SourceFile(base.source->path(), m.mutated));
  if (!cr.clean()) {
    m.cls = MutantClass::kSyntax;
    return m;
  }
  ElabResult er = elaborate(*cr.design);
  VerifyReport rep = ref.verifier->verify(*er.design, false);
  if (rep.pass_rate >= 1.0)
    throw EquivalentMutant(std::string(to_string(op.kind)) + " at line " + std::to_string(op.site.line) +
                           " passes the default suite");
  m.cls = MutantClass::kFunctional;
  m.pass_rate = rep.pass_rate;
  return m;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

std::vector<MutationOp> enumerate_sites(const Design& design, MutationKind kind) {
  return SiteFinder(design, kind).run();
}

Mutant inject(const Design& design, const MutationOp& op) {
  GoldenRef ref(design);
  return classify(design, ref, op);
}

// ---------------------------------------------------------------------------
// Corpus and benchmark

std::vector<CorpusEntry> load_corpus(const std::string& dir) {
  if (!fs::is_directory(dir)) throw IoError("corpus directory not found: " + dir);
  std::vector<CorpusEntry> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().extension() != ".v") continue;
    CorpusEntry c;
    c.name = e.path().stem().string();
    c.family = e.path().parent_path().filename().string();
    c.path = e.path().string();
    c.text = SourceFile::load(c.path).text();
    fs::path spec = e.path();
    spec.replace_extension(".md");
    if (fs::exists(spec)) c.spec = SourceFile::load(spec.string()).text();
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), [](const CorpusEntry& a, const CorpusEntry& b) {
    return a.family != b.family ? a.family < b.family : a.name < b.name;
  });
  return out;
}

BenchmarkPlan BenchmarkPlan::uniform(int n) {
  BenchmarkPlan p;
  for (auto k : kAllMutationKinds) p.per_module[k] = n;
  return p;
}

nlohmann::json BenchmarkPlan::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, n] : per_module) j[to_string(k)] = n;
  return j;
}

BenchmarkPlan BenchmarkPlan::from_json(const nlohmann::json& j) {
  BenchmarkPlan p;
  for (auto it = j.begin(); it != j.end(); ++it) {
    auto k = parse_mutation_kind(it.key());
    if (!k) throw ConfigError("unknown mutation kind '" + it.key() + "'");
    p.per_module[*k] = it.value().get<int>();
  }
  return p;
}

const CorpusEntry* BenchmarkSet::golden(const std::string& module) const {
  for (const auto& c : corpus)
    if (c.name == module) return &c;
  return nullptr;
}

nlohmann::json BenchmarkSet::manifest() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& m : mutants)
    rows.push_back({{"id", m.id},
                    {"module", m.module},
                    {"family", m.family},
                    {"kind", to_string(m.op.kind)},
                    {"class", to_string(m.cls)},
                    {"line", m.line},
                    {"before", m.op.before},
                    {"after", m.op.after},
                    {"repair", m.repair.to_json()["pairs"]},
                    {"file", "mutants/" + m.id + ".v"},
                    {"golden", "golden/" + m.module + ".v"}});
  return rows;
}

namespace {

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
}

std::string read_text(const fs::path& p) { return SourceFile::load(p.string()).text(); }

}  // namespace

void BenchmarkSet::save(const std::string& dir) const {
  fs::path root(dir);
  fs::create_directories(root / "mutants");
  fs::create_directories(root / "golden");
  write_text(root / "benchmark.json", manifest().dump(2) + "\n");
  nlohmann::json mx = nlohmann::json::object();
  for (const auto& [fam, row] : matrix) {
    nlohmann::json r = nlohmann::json::object();
    for (const auto& [k, n] : row) r[to_string(k)] = n < 0 ? nlohmann::json("×") : nlohmann::json(n);
    mx[fam] = r;
  }
  nlohmann::json meta{{"seed", seed}, {"plan", plan.to_json()}, {"discarded", discarded}, {"matrix", mx}};
  meta["corpus"] = nlohmann::json::array();
  for (const auto& c : corpus) meta["corpus"].push_back({{"name", c.name}, {"family", c.family}});
  write_text(root / "matrix.json", meta.dump(2) + "\n");
  for (const auto& m : mutants) write_text(root / "mutants" / (m.id + ".v"), m.mutated);
  for (const auto& c : corpus) {
    write_text(root / "golden" / (c.name + ".v"), c.text);
    write_text(root / "golden" / (c.name + ".md"), c.spec);
  }
}

BenchmarkSet BenchmarkSet::load(const std::string& dir) {
  fs::path root(dir);
  BenchmarkSet b;
  auto rows = nlohmann::json::parse(read_text(root / "benchmark.json"), nullptr, false);
  auto meta = nlohmann::json::parse(read_text(root / "matrix.json"), nullptr, false);
  if (rows.is_discarded() || !rows.is_array() || meta.is_discarded())
    throw ConfigError(dir + ": malformed benchmark manifest");
  try {
    b.seed = meta.value("seed", std::uint64_t{0});
    b.plan = BenchmarkPlan::from_json(meta.value("plan", nlohmann::json::object()));
    b.discarded = meta.value("discarded", std::size_t{0});
    for (const auto& c : meta.at("corpus")) {
      CorpusEntry e;
      e.name = c.at("name").get<std::string>();
      e.family = c.at("family").get<std::string>();
      e.path = (root / "golden" / (e.name + ".v")).string();
      e.text = read_text(e.path);
      if (fs::exists(root / "golden" / (e.name + ".md"))) e.spec = read_text(root / "golden" / (e.name + ".md"));
      b.corpus.push_back(std::move(e));
    }
    for (auto it = meta.at("matrix").begin(); it != meta.at("matrix").end(); ++it)
      for (auto k = it.value().begin(); k != it.value().end(); ++k) {
        auto kind = parse_mutation_kind(k.key());
        if (!kind) throw ConfigError("unknown kind in matrix: " + k.key());
        b.matrix[it.key()][*kind] = k.value().is_string() ? -1 : k.value().get<int>();
      }
    for (const auto& r : rows) {
      Mutant m;
      m.id = r.at("id").get<std::string>();
      m.module = r.at("module").get<std::string>();
      m.family = r.value("family", "");
      auto kind = parse_mutation_kind(r.at("kind").get<std::string>());
      if (!kind) throw ConfigError("unknown mutation kind in manifest");
      m.op.kind = *kind;
      m.op.module = m.module;
      m.op.before = r.at("before").get<std::string>();
      m.op.after = r.at("after").get<std::string>();
      m.cls = r.at("class").get<std::string>() == "syntax" ? MutantClass::kSyntax : MutantClass::kFunctional;
      m.line = r.at("line").get<std::uint32_t>();
      if (r.contains("repair")) m.repair = PatchSet::from_json({{"pairs", r["repair"]}});
      m.mutated = read_text(root / r.value("file", "mutants/" + m.id + ".v"));
      const CorpusEntry* g = b.golden(m.module);
      if (!g) throw ConfigError("manifest references unknown module '" + m.module + "'");
      m.base = g->text;
      b.mutants.push_back(std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(dir + ": malformed benchmark manifest: " + e.what());
  }
  return b;
}

BenchmarkSet build_benchmark(const std::vector<CorpusEntry>& corpus, const BenchmarkPlan& plan,
                             std::uint64_t seed, int workers) {
  struct Partial {
    std::vector<Mutant> mutants;
    std::map<MutationKind, int> row;
    std::size_t discarded = 0;
    std::string error;
  };
  std::vector<Partial> parts(corpus.size());
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (std::size_t i = next++; i < corpus.size(); i = next++) {
      const CorpusEntry& c = corpus[i];
      Partial& p = parts[i];
      try {
        ParseResult pr = parse_text(c.text, c.path);
        if (!pr.ok()) throw ConfigError("corpus design does not parse: " + c.path);
        const Design& d = *pr.design;
        GoldenRef ref(d);
        for (const auto& [kind, want] : plan.per_module) {
          auto sites = enumerate_sites(d, kind);
          if (sites.empty()) {
            p.row[kind] = -1;
            continue;
          }
          std::mt19937_64 rng(seed ^ fnv1a(c.name + "/" + to_string(kind)));
          for (std::size_t k = sites.size(); k > 1; --k) std::swap(sites[k - 1], sites[rng() % k]);
          int got = 0;
          for (const auto& op : sites) {
            if (got >= want) break;
            try {
              Mutant m = classify(d, ref, op);
              m.module = c.name;
              m.family = c.family;
              m.id = c.name + "-" + to_string(kind) + "-" + std::to_string(got);
              p.mutants.push_back(std::move(m));
              ++got;
            } catch (const Error&) {
              ++p.discarded;
            }
          }
          p.row[kind] = got;
        }
      } catch (const std::exception& e) {
        p.error = e.what();
      }
    }
  };
  int n = std::max(1, std::min<int>(workers, static_cast<int>(corpus.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  BenchmarkSet b;
  b.seed = seed;
  b.plan = plan;
  b.corpus = corpus;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!parts[i].error.empty()) throw ConfigError(parts[i].error);
    for (auto& m : parts[i].mutants) b.mutants.push_back(std::move(m));
    auto& row = b.matrix[corpus[i].family];
    for (const auto& [k, n2] : parts[i].row) {
      auto it = row.find(k);
      if (it == row.end())
        row[k] = n2;
      else if (n2 >= 0)
        it->second = std::max(it->second, 0) + n2;
    }
    b.discarded += parts[i].discarded;
  }
  std::sort(b.mutants.begin(), b.mutants.end(), [](const Mutant& a, const Mutant& c) { return a.id < c.id; });
  return b;
}

}  // namespace rtlmend
