// rtlmend command-line driver.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rtlmend/bench.hpp"
#include "rtlmend/elaborate.hpp"
#include "rtlmend/errgen.hpp"
#include "rtlmend/error.hpp"
#include "rtlmend/frontend.hpp"
#include "rtlmend/lint.hpp"
#include "rtlmend/localize.hpp"
#include "rtlmend/orchestrator.hpp"
#include "rtlmend/preprocess.hpp"
#include "rtlmend/testbench.hpp"

namespace {

using namespace rtlmend;
using nlohmann::json;

enum Exit { kOk = 0, kFailed = 1, kUsage = 2 };

struct Globals {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = 1;
  std::string backend;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
}

// Session settings from --config, then global overrides.
SessionConfig session_config(const Globals& g) {
  SessionConfig c;
  if (!g.config.empty()) c = SessionConfig::load(g.config);
  if (g.seed_set) c.stimulus.seed = g.seed;
  if (!c.backend.is_object()) c.backend = json::object();
  if (!g.backend.empty()) c.backend["kind"] = g.backend;
  if (!c.backend.contains("kind")) c.backend["kind"] = "oracle";
  return c;
}

ElaboratedDesign compile_or_throw(const std::string& path) {
  ElabResult r = compile_text(read_file(path), path);
  if (!r.ok()) {
    std::string msg = path + " does not compile";
    for (const auto& d : r.diagnostics)
      if (d.severity == Severity::kError) msg += "\n  " + to_human(d, path);
    throw ConfigError(msg);
  }
  return std::move(*r.design);
}

// --- lint --------------------------------------------------------------------

struct LintArgs {
  std::string file;
  bool fix = false;
  bool json_out = false;
  std::string out;
  int rounds = 5;
};

int run_lint(const LintArgs& a) {
  SourceFile src(a.file, read_file(a.file));
  CheckResult cr = check_source(src);
  int round = 0;
  while (a.fix && cr.errors.empty() && !fixable(cr.warnings).empty() && round < a.rounds) {
    Design fixed = apply_templates(*cr.design, cr.warnings);
    src = SourceFile(a.file, fixed.source->text());
    cr = check_source(src);
    ++round;
  }
  for (const auto& d : cr.errors) std::cout << (a.json_out ? to_json_line(d) : to_human(d, a.file)) << "\n";
  for (const auto& w : cr.warnings) {
    Diagnostic d = w.diagnostic(src);
    std::cout << (a.json_out ? to_json_line(d) : to_human(d, a.file)) << "\n";
  }
  if (a.fix) {
    if (a.out.empty())
      std::cout << src.text();
    else
      write_file(a.out, src.text());
    std::cerr << "applied templates in " << round << " round(s)\n";
  }
  return cr.clean() ? kOk : kFailed;
}

// --- simulate ----------------------------------------------------------------

struct SimArgs {
  std::string file;
  std::string stimulus = "random";
  std::string directed;
  std::size_t cycles = 32;
  int reset_cycles = kDefaultResetCycles;
  std::string vcd;
  std::string json_out;
};

int run_simulate(const SimArgs& a, const Globals& g) {
  ElaboratedDesign d = compile_or_throw(a.file);
  StimulusConfig sc;
  sc.suite = a.stimulus;
  sc.seed = g.seed_set ? g.seed : 1;
  sc.cycles = a.cycles;
  sc.reset_cycles = a.reset_cycles;
  sc.file = a.directed;
  Stimulus stim = session_stimulus(d, StimulusConfig::from_json(sc.to_json()));
  Trace t = simulate(d, stim, stim.cycles());
  if (!a.vcd.empty()) t.export_vcd(a.vcd);
  if (!a.json_out.empty()) write_file(a.json_out, t.to_json().dump(2) + "\n");
  if (a.vcd.empty() && a.json_out.empty()) std::cout << t.to_vcd();
  std::cerr << "simulated " << t.cycles << " cycles of " << t.signals.size() << " signals\n";
  return kOk;
}

// --- inject ------------------------------------------------------------------

struct InjectArgs {
  std::string corpus;
  std::string out;
  int per_kind = 2;
  std::vector<std::string> kinds;
};

int run_inject(const InjectArgs& a, const Globals& g) {
  auto corpus = load_corpus(a.corpus);
  if (corpus.empty()) throw ConfigError("no designs under " + a.corpus);
  BenchmarkPlan plan;
  if (a.kinds.empty()) {
    plan = BenchmarkPlan::uniform(a.per_kind);
  } else {
    for (const auto& k : a.kinds) {
      auto kind = parse_mutation_kind(k);
      if (!kind) throw ConfigError("unknown mutation kind '" + k + "'");
      plan.per_module[*kind] = a.per_kind;
    }
  }
  BenchmarkSet b = build_benchmark(corpus, plan, g.seed_set ? g.seed : 1, g.workers);
  b.save(a.out);
  std::size_t syntax = 0;
  for (const auto& m : b.mutants) syntax += m.cls == MutantClass::kSyntax ? 1 : 0;
  std::cout << b.mutants.size() << " mutants (" << syntax << " syntax, " << b.mutants.size() - syntax
            << " functional) from " << corpus.size() << " designs; " << b.discarded << " discarded\n";
  return kOk;
}

// --- verify ------------------------------------------------------------------

struct VerifyArgs {
  std::string dut;
  std::string golden;
  std::string log;
  std::string vcd;
  bool errinfo = false;
  int iter = kDefaultThreshold;
};

int run_verify_cmd(const VerifyArgs& a, const Globals& g) {
  SessionConfig cfg = session_config(g);
  ElaboratedDesign golden = compile_or_throw(a.golden);
  ElaboratedDesign dut = compile_or_throw(a.dut);
  Verifier v(golden, session_stimulus(golden, cfg.stimulus));
  VerifyReport r = v.verify(dut, a.errinfo || !a.vcd.empty());
  if (!a.log.empty()) write_file(a.log, r.log_text());
  if (!a.vcd.empty()) r.trace.export_vcd(a.vcd);
  std::cout << "pass_rate " << std::fixed << std::setprecision(6) << r.pass_rate << " (" << r.passed_checks << "/"
            << r.total_checks << ")\n";
  if (a.errinfo && !r.mismatches.empty())
    std::cout << fetch_err_info(dut, r, a.iter, cfg.th).to_json().dump(2) << "\n";
  return r.pass_rate >= 1.0 ? kOk : kFailed;
}

// --- repair ------------------------------------------------------------------

struct RepairArgs {
  std::string dut;
  std::string golden;
  std::string spec;
  std::string session_dir;
  std::string out;
  int max_iter = 0;
  std::string mode;
};

int run_repair(const RepairArgs& a, const Globals& g) {
  SessionConfig cfg = session_config(g);
  if (a.max_iter > 0) cfg.max_iter = a.max_iter;
  if (!a.mode.empty()) {
    auto m = parse_repair_mode(a.mode);
    if (!m) throw ConfigError("unknown repair mode '" + a.mode + "'");
    cfg.mode = *m;
  }
  if (!a.session_dir.empty()) cfg.session_dir = a.session_dir;
  SourceFile dut = SourceFile::load(a.dut);
  SourceFile golden = SourceFile::load(a.golden);
  std::string spec = a.spec.empty() ? std::string() : read_file(a.spec);
  auto backend = make_backend(cfg.backend, golden.text());
  SessionResult r = run_session(dut, golden, spec, *backend, cfg);
  if (!a.out.empty()) write_file(a.out, r.final_text);
  std::cout << to_string(r.outcome) << ": score " << std::fixed << std::setprecision(6) << r.final_score
            << ", stage " << to_string(r.stage) << ", " << r.iterations_used << " iteration(s), " << r.agent_calls
            << " agent call(s), T_exec " << std::setprecision(3) << r.timings.exec() << "s\n";
  if (!r.failure.empty()) std::cout << "reason: " << r.failure << "\n";
  return r.outcome == Outcome::kSuccess ? kOk : kFailed;
}

// --- bench / report ----------------------------------------------------------

struct BenchArgs {
  std::string benchmark;
  std::string out;
  std::string sessions;
  bool no_localize = false;
};

void print_summary(const CampaignResult& c, std::ostream& os) {
  os << std::fixed << std::setprecision(4);
  os << "sessions        " << c.results.size() << "\n";
  os << "HR              " << c.hr.value() << " (" << c.hr.str() << ")\n";
  os << "FR              " << c.fr.value() << " (" << c.fr.str() << ")\n";
  if (c.localization)
    os << "localization    " << c.localization->value() << " (" << c.localization->str() << ")\n";
  os << "mean T_exec     " << c.mean_t_exec << " s (backend latency " << c.mean_backend_latency
     << " s, reported apart)\n";
  os << "stage           hits   FR        T_exec/s\n";
  double n = static_cast<double>(c.results.size());
  for (const auto& [s, v] : c.stages) {
    if (s == Stage::kNone) continue;
    os << std::left << std::setw(16) << to_string(s) << std::right << std::setw(4) << v.hits << "   "
       << std::setw(7) << static_cast<double>(v.fixes) / n << "   " << v.t_exec << "\n";
  }
  os << "FR oracle: extended differential simulation (exhaustive or 32 seeds x 1024 cycles).\n";
  os << "Timings come from the built-in simulator and are not comparable to commercial tool runs.\n";
}

int run_bench(const BenchArgs& a, const Globals& g) {
  BenchmarkSet b = BenchmarkSet::load(a.benchmark);
  CampaignConfig cc;
  cc.session = session_config(g);
  cc.backend = cc.session.backend;
  cc.workers = g.workers;
  cc.localize = !a.no_localize;
  cc.sessions_dir = a.sessions;
  CampaignResult c = run_campaign(b, cc);
  c.save(a.out);
  print_summary(c, std::cout);
  return kOk;
}

struct ReportArgs {
  std::string input;
  std::string format = "table";
};

int run_report(const ReportArgs& a) {
  std::string path = a.input;
  if (std::filesystem::is_directory(path)) path = (std::filesystem::path(path) / "campaign.json").string();
  auto j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw ConfigError(path + ": invalid JSON");
  CampaignResult c = CampaignResult::from_json(j);
  if (a.format == "json") {
    std::cout << c.to_json().dump(2) << "\n";
  } else if (a.format == "csv") {
    std::cout << c.heatmap_csv();
  } else {
    print_summary(c, std::cout);
    std::cout << "\n" << c.heatmap_csv();
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RTL error injection, differential verification, fault localization and repair"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "Session config JSON")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", g.seed, "Seed for stimulus and mutant selection");
  app.add_option("--workers", g.workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--backend", g.backend, "Repair backend")
      ->check(CLI::IsMember({"scripted", "remote", "oracle", "null"}));

  LintArgs la;
  auto* lint = app.add_subcommand("lint", "Report syntax errors and lint warnings");
  lint->add_option("file", la.file)->required()->check(CLI::ExistingFile);
  lint->add_flag("--fix", la.fix, "Apply W1-W3 templates");
  lint->add_option("-o,--out", la.out, "Write the fixed source here instead of stdout");
  lint->add_flag("--json", la.json_out, "One JSON object per diagnostic");

  SimArgs sa;
  auto* sim = app.add_subcommand("simulate", "Simulate a design and dump its waveform");
  sim->add_option("file", sa.file)->required()->check(CLI::ExistingFile);
  sim->add_option("--stimulus", sa.stimulus)->check(CLI::IsMember({"default", "random", "exhaustive", "directed"}));
  sim->add_option("--vectors", sa.directed, "Directed vectors JSON")->check(CLI::ExistingFile);
  sim->add_option("--cycles", sa.cycles);
  sim->add_option("--reset-cycles", sa.reset_cycles);
  sim->add_option("--vcd", sa.vcd, "VCD output path");
  sim->add_option("--json", sa.json_out, "Trace JSON output path");

  InjectArgs ia;
  auto* inject = app.add_subcommand("inject", "Build a mutant benchmark from a corpus");
  inject->add_option("--corpus", ia.corpus)->required()->check(CLI::ExistingDirectory);
  inject->add_option("-o,--out", ia.out)->required();
  inject->add_option("--per-kind", ia.per_kind, "Mutants per kind per design")->check(CLI::PositiveNumber);
  inject->add_option("--kind", ia.kinds, "Restrict to these kinds");

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Score a design against a golden reference");
  verify->add_option("dut", va.dut)->required()->check(CLI::ExistingFile);
  verify->add_option("--golden", va.golden)->required()->check(CLI::ExistingFile);
  verify->add_option("--log", va.log, "Scoreboard log (JSON lines)");
  verify->add_option("--vcd", va.vcd, "DUT waveform");
  verify->add_flag("--errinfo", va.errinfo, "Print localization info for mismatches");
  verify->add_option("--iter", va.iter, "Iteration number for MS/SL selection");

  RepairArgs ra;
  auto* repair = app.add_subcommand("repair", "Run one repair session");
  repair->add_option("dut", ra.dut)->required()->check(CLI::ExistingFile);
  repair->add_option("--golden", ra.golden)->required()->check(CLI::ExistingFile);
  repair->add_option("--spec", ra.spec)->check(CLI::ExistingFile);
  repair->add_option("--session-dir", ra.session_dir);
  repair->add_option("-o,--out", ra.out, "Write the final source here");
  repair->add_option("--max-iter", ra.max_iter)->check(CLI::PositiveNumber);
  repair->add_option("--mode", ra.mode)->check(CLI::IsMember({"pair", "whole-file"}));

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Run a repair campaign over a benchmark");
  bench->add_option("benchmark", ba.benchmark)->required()->check(CLI::ExistingDirectory);
  bench->add_option("-o,--out", ba.out)->required();
  bench->add_option("--sessions", ba.sessions, "Persist every session under this directory");
  bench->add_flag("--no-localize", ba.no_localize, "Skip localization-hit measurement");

  ReportArgs rp;
  auto* report = app.add_subcommand("report", "Render a campaign result");
  report->add_option("input", rp.input, "campaign.json or its directory")->required()->check(CLI::ExistingPath);
  report->add_option("--format", rp.format)->check(CLI::IsMember({"table", "csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  g.seed_set = seed_opt->count() > 0;

  try {
    if (*lint) return run_lint(la);
    if (*sim) return run_simulate(sa, g);
    if (*inject) return run_inject(ia, g);
    if (*verify) return run_verify_cmd(va, g);
    if (*repair) return run_repair(ra, g);
    if (*bench) return run_bench(ba, g);
    if (*report) return run_report(rp);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.kind() << ": " << e.what() << "\n";
    return kFailed;
  }
  return kUsage;
}
