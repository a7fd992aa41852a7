#include "rtlmend/orchestrator.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include "rtlmend/elaborate.hpp"
#include "rtlmend/error.hpp"
#include "rtlmend/preprocess.hpp"
#include "rtlmend/testbench.hpp"

namespace fs = std::filesystem;

namespace rtlmend {

// ---------------------------------------------------------------------------
// Configuration

nlohmann::json StimulusConfig::to_json() const {
  nlohmann::json j{{"suite", suite}, {"seed", seed}, {"cycles", cycles}, {"reset_cycles", reset_cycles}};
  if (!file.empty()) j["file"] = file;
  return j;
}

StimulusConfig StimulusConfig::from_json(const nlohmann::json& j) {
  StimulusConfig c;
  c.suite = j.value("suite", c.suite);
  c.seed = j.value("seed", c.seed);
  c.cycles = j.value("cycles", c.cycles);
  c.reset_cycles = j.value("reset_cycles", c.reset_cycles);
  c.file = j.value("file", c.file);
  if (c.suite != "default" && c.suite != "random" && c.suite != "exhaustive" && c.suite != "directed")
    throw ConfigError("unknown stimulus suite '" + c.suite + "'");
  return c;
}

nlohmann::json SessionConfig::to_json() const {
  return {{"max_iter", max_iter},
          {"th", th},
          {"mode", rtlmend::to_string(mode)},
          {"preprocess_rounds", preprocess_rounds},
          {"stimulus", stimulus.to_json()},
          {"backend", backend}};
}

SessionConfig SessionConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("session config must be a JSON object");
  SessionConfig c;
  try {
    c.max_iter = j.value("max_iter", c.max_iter);
    c.th = j.value("th", c.th);
    c.preprocess_rounds = j.value("preprocess_rounds", c.preprocess_rounds);
    if (j.contains("mode")) {
      auto m = parse_repair_mode(j["mode"].get<std::string>());
      if (!m) throw ConfigError("unknown repair mode '" + j["mode"].get<std::string>() + "'");
      c.mode = *m;
    }
    if (j.contains("stimulus")) c.stimulus = StimulusConfig::from_json(j["stimulus"]);
    if (j.contains("backend")) c.backend = j["backend"];
    c.session_dir = j.value("session_dir", "");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad session config: ") + e.what());
  }
  if (c.max_iter < 1) throw ConfigError("max_iter must be at least 1");
  if (c.th < 1) throw ConfigError("th must be at least 1");
  if (c.preprocess_rounds < 1) throw ConfigError("preprocess_rounds must be at least 1");
  return c;
}

SessionConfig SessionConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError(path + ": invalid JSON");
  return from_json(j);
}

std::unique_ptr<RepairBackend> make_backend(const nlohmann::json& cfg, const std::string& golden_text) {
  std::string kind = cfg.value("kind", "oracle");
  if (kind == "oracle") return std::make_unique<OracleBackend>(golden_text);
  if (kind == "null") return std::make_unique<NullBackend>();
  if (kind == "scripted") {
    if (cfg.contains("script") && cfg["script"].is_object())
      return std::make_unique<ScriptedBackend>(cfg["script"]);
    if (!cfg.contains("file")) throw ConfigError("scripted backend needs \"file\" or \"script\"");
    return ScriptedBackend::from_file(cfg["file"].get<std::string>());
  }
  if (kind == "remote") {
    RemoteConfig rc;
    rc.url = cfg.value("url", rc.url);
    rc.path = cfg.value("path", rc.path);
    rc.model = cfg.value("model", rc.model);
    rc.temperature = cfg.value("temperature", rc.temperature);
    rc.timeout_s = cfg.value("timeout_s", rc.timeout_s);
    rc.key_env = cfg.value("key_env", rc.key_env);
    return std::make_unique<RemoteBackend>(rc);
  }
  throw ConfigError("unknown backend kind '" + kind + "'");
}

Stimulus session_stimulus(const ElaboratedDesign& golden, const StimulusConfig& cfg) {
  if (cfg.suite == "default") return default_suite(golden, cfg.seed);
  if (cfg.suite == "random")
    return make_stimulus(golden, StimulusMode::kRandom, cfg.seed, cfg.cycles, cfg.reset_cycles);
  if (cfg.suite == "exhaustive")
    return make_stimulus(golden, StimulusMode::kExhaustive, cfg.seed, cfg.cycles, cfg.reset_cycles);
  return make_stimulus(golden, StimulusMode::kDirected, cfg.seed, cfg.cycles, cfg.reset_cycles, cfg.file);
}

// ---------------------------------------------------------------------------
// Records

const char* to_string(Version::Status s) { return s == Version::Status::kAccepted ? "accepted" : "rolled-back"; }
const char* to_string(Outcome o) { return o == Outcome::kSuccess ? "Success" : "Failure"; }

const char* to_string(Stage s) {
  switch (s) {
    case Stage::kNone: return "none";
    case Stage::kPreprocess: return "preprocess";
    case Stage::kMS: return "ms";
    case Stage::kSL: return "sl";
  }
  return "?";
}

namespace {

Stage parse_stage(const std::string& s) {
  if (s == "preprocess") return Stage::kPreprocess;
  if (s == "ms") return Stage::kMS;
  if (s == "sl") return Stage::kSL;
  return Stage::kNone;
}

}  // namespace

nlohmann::json Version::to_json() const {
  nlohmann::json j{{"index", index}, {"text", text}, {"score", score}, {"status", rtlmend::to_string(status)}};
  j["patchset"] = patchset ? patchset->to_json() : nlohmann::json(nullptr);
  if (!note.empty()) j["note"] = note;
  return j;
}

Version Version::from_json(const nlohmann::json& j) {
  Version v;
  v.index = j.at("index").get<int>();
  v.text = j.at("text").get<std::string>();
  v.score = j.at("score").get<double>();
  v.status = j.at("status").get<std::string>() == "accepted" ? Status::kAccepted : Status::kRolledBack;
  if (j.contains("patchset") && !j["patchset"].is_null()) v.patchset = PatchSet::from_json(j["patchset"]);
  v.note = j.value("note", "");
  return v;
}

nlohmann::json Timings::to_json() const {
  return {{"preprocess", preprocess}, {"verify", verify},           {"localize", localize},
          {"repair", repair},         {"backend_latency", backend_latency}, {"exec", exec()}};
}

Timings Timings::from_json(const nlohmann::json& j) {
  Timings t;
  t.preprocess = j.value("preprocess", 0.0);
  t.verify = j.value("verify", 0.0);
  t.localize = j.value("localize", 0.0);
  t.repair = j.value("repair", 0.0);
  t.backend_latency = j.value("backend_latency", 0.0);
  return t;
}

nlohmann::json IterationRecord::to_json() const {
  return {{"iter", iter},
          {"mode", mode},
          {"base_version", base_version},
          {"new_version", new_version},
          {"agent_calls", agent_calls},
          {"prompts", prompts},
          {"response_error", response_error},
          {"transport_error", transport_error},
          {"patch_errors", patch_errors},
          {"preprocess_error", preprocess_error},
          {"rolled_back", rolled_back}};
}

IterationRecord IterationRecord::from_json(const nlohmann::json& j) {
  IterationRecord r;
  r.iter = j.at("iter").get<int>();
  r.mode = j.value("mode", "");
  r.base_version = j.value("base_version", 0);
  r.new_version = j.value("new_version", -1);
  r.agent_calls = j.value("agent_calls", std::size_t{0});
  r.prompts = j.value("prompts", std::vector<std::string>{});
  r.response_error = j.value("response_error", "");
  r.transport_error = j.value("transport_error", "");
  r.patch_errors = j.value("patch_errors", std::vector<std::string>{});
  r.preprocess_error = j.value("preprocess_error", "");
  r.rolled_back = j.value("rolled_back", false);
  return r;
}

nlohmann::json SessionResult::to_json() const {
  nlohmann::json j;
  j["outcome"] = rtlmend::to_string(outcome);
  j["stage"] = rtlmend::to_string(stage);
  j["final_text"] = final_text;
  j["final_score"] = final_score;
  j["iterations_used"] = iterations_used;
  j["history"] = nlohmann::json::array();
  for (const auto& v : history) j["history"].push_back(v.to_json());
  j["damage_repairs"] = nlohmann::json::array();
  for (const auto& p : damage_repairs) j["damage_repairs"].push_back(p.to_json());
  j["iterations"] = nlohmann::json::array();
  for (const auto& r : iterations) j["iterations"].push_back(r.to_json());
  j["timings"] = timings.to_json();
  j["agent_calls"] = agent_calls;
  if (!failure.empty()) j["failure"] = failure;
  return j;
}

SessionResult SessionResult::from_json(const nlohmann::json& j) {
  SessionResult r;
  r.outcome = j.at("outcome").get<std::string>() == "Success" ? Outcome::kSuccess : Outcome::kFailure;
  r.stage = parse_stage(j.value("stage", "none"));
  r.final_text = j.at("final_text").get<std::string>();
  r.final_score = j.value("final_score", 0.0);
  r.iterations_used = j.at("iterations_used").get<int>();
  for (const auto& v : j.at("history")) r.history.push_back(Version::from_json(v));
  for (const auto& p : j.at("damage_repairs")) r.damage_repairs.push_back(PatchSet::from_json(p));
  if (j.contains("iterations"))
    for (const auto& i : j["iterations"]) r.iterations.push_back(IterationRecord::from_json(i));
  if (j.contains("timings")) r.timings = Timings::from_json(j["timings"]);
  r.agent_calls = j.value("agent_calls", std::size_t{0});
  r.failure = j.value("failure", "");
  return r;
}

bool should_rollback(const std::vector<Version>& history, double new_score) {
  if (history.empty()) throw ConfigError("should_rollback needs a nonempty history");
  bool any = false;
  double best = 0.0;
  for (const auto& v : history) {
    if (v.status != Version::Status::kAccepted) continue;
    best = any ? std::max(best, v.score) : v.score;
    any = true;
  }
  return any && new_score < best;
}

// ---------------------------------------------------------------------------
// Session

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
}

/// A compiled, scored version.
struct Scored {
  std::optional<ElaboratedDesign> design;
  std::optional<VerifyReport> report;
  double score = 0.0;
  std::string note;
};

class Session {
 public:
  Session(const SourceFile& dut, const SourceFile& golden, const std::string& spec, RepairBackend& backend,
          const SessionConfig& cfg, const Verifier* shared)
      : dut_(dut), golden_src_(golden), spec_(spec), backend_(backend), cfg_(cfg), verifier_(shared) {}

  SessionResult run() {
    if (!verifier_) {
      ElabResult g = compile_text(golden_src_.text(), golden_src_.path());
      if (!g.ok()) throw ConfigError("golden design does not compile: " + golden_src_.path());
      own_verifier_.emplace(*g.design, session_stimulus(*g.design, cfg_.stimulus));
      verifier_ = &*own_verifier_;
    }
    if (!cfg_.session_dir.empty()) fs::create_directories(cfg_.session_dir);

    // Version 0: the preprocessed DUT.
    auto pre = run_preprocess(dut_.text(), nullptr);
    if (!pre) {
      res_.final_text = dut_.text();
      finish();
      return res_;
    }
    Scored cur = score(*pre);
    add_version(*pre, cur, std::nullopt, Version::Status::kAccepted);
    best_ = 0;
    best_scored_ = std::move(cur);

    for (int iter = 1; iter <= cfg_.max_iter; ++iter) {
      if (best_score() >= 1.0) break;
      res_.iterations_used = iter;
      iterate(iter);
      if (best_score() >= 1.0) {
        res_.stage = iter < cfg_.th ? Stage::kMS : Stage::kSL;
        break;
      }
    }
    if (best_score() >= 1.0 && res_.iterations_used == 0) res_.stage = Stage::kPreprocess;
    const Version& b = res_.history[static_cast<std::size_t>(best_)];
    res_.final_text = b.text;
    res_.final_score = b.score;
    res_.outcome = b.score >= 1.0 ? Outcome::kSuccess : Outcome::kFailure;
    if (res_.outcome == Outcome::kFailure) res_.stage = Stage::kNone;
    finish();
    return res_;
  }

 private:
  double best_score() const { return res_.history[static_cast<std::size_t>(best_)].score; }

  // Runs preprocessing; nullopt (with the reason recorded) on failure.
  std::optional<std::string> run_preprocess(const std::string& text, IterationRecord* rec) {
    auto t0 = Clock::now();
    PreprocessOptions opts;
    opts.max_rounds = cfg_.preprocess_rounds;
    opts.spec_text = spec_;
    opts.mode = cfg_.mode;
    opts.damage_repairs = res_.damage_repairs;
    PreprocessLog log;
    std::optional<std::string> out;
    try {
      out = preprocess(SourceFile(dut_.path(), text), backend_, opts, &log).text;
    } catch (const PreprocessFailed& e) {
      if (rec)
        rec->preprocess_error = e.what();
      else
        res_.failure = std::string("PreprocessFailed: ") + e.what();
    }
    res_.agent_calls += log.agent_calls;
    if (rec) {
      rec->agent_calls += log.agent_calls;
      for (const auto& r : log.rounds)
        for (const auto& pe : r.patch_errors) rec->patch_errors.push_back("preprocess " + pe.describe());
    } else {
      preprocess_log_ = log.to_json();
    }
    res_.timings.backend_latency += log.backend_latency_s;
    res_.timings.preprocess += since(t0) - log.backend_latency_s;
    return out;
  }

  Scored score(const std::string& text) {
    auto t0 = Clock::now();
    Scored s;
    ElabResult e = compile_text(text, dut_.path());
    if (!e.ok()) {
      s.note = "does not compile";
    } else {
      s.design = std::move(e.design);
      try {
        s.report = verifier_->verify(*s.design, true);
        s.score = s.report->pass_rate;
      } catch (const Error& err) {
        s.note = err.kind() + ": " + err.what();
      }
    }
    res_.timings.verify += since(t0);
    return s;
  }

  void add_version(const std::string& text, const Scored& s, std::optional<PatchSet> ps, Version::Status st) {
    Version v;
    v.index = static_cast<int>(res_.history.size());
    v.text = text;
    v.score = s.score;
    v.patchset = std::move(ps);
    v.status = st;
    v.note = s.note;
    if (!cfg_.session_dir.empty()) {
      fs::path dir(cfg_.session_dir);
      std::string n = "v" + std::to_string(v.index);
      write_file(dir / (n + ".v"), v.text);
      write_file(dir / (n + ".report.jsonl"),
                 s.report ? s.report->log_text()
                          : nlohmann::json({{"kind", "error"}, {"message", s.note}}).dump() + "\n");
      if (v.patchset) write_file(dir / (n + ".patch.json"), v.patchset->to_json().dump(2) + "\n");
    }
    res_.history.push_back(std::move(v));
  }

  void iterate(int iter) {
    IterationRecord rec;
    rec.iter = iter;
    rec.base_version = best_;
    const Version& base = res_.history[static_cast<std::size_t>(best_)];
    std::string base_text = base.text;

    // Localize.
    auto t0 = Clock::now();
    std::string err_info;
    bool sl = iter >= cfg_.th;
    rec.mode = sl ? "SL" : "MS";
    if (best_scored_.report && best_scored_.design) {
      ErrInfo info = fetch_err_info(*best_scored_.design, *best_scored_.report, iter, cfg_.th);
      err_info = info.to_string();
      if (!cfg_.session_dir.empty())
        write_file(fs::path(cfg_.session_dir) / ("v" + std::to_string(best_) + ".errinfo.json"),
                   info.to_json().dump(2) + "\n");
    } else {
      err_info = nlohmann::json({{"mode", rec.mode}, {"error", base.note}}).dump();
    }
    res_.timings.localize += since(t0);

    // Repair.
    t0 = Clock::now();
    RepairRequest req;
    req.spec_text = spec_;
    req.dut_text = base_text;
    req.err_info = err_info;
    req.damage_repairs = res_.damage_repairs;
    req.mode = cfg_.mode;
    req.profile = PromptProfile::kFunctionalFixer;
    AgentExchange ex = query_agent(backend_, req);
    rec.prompts = ex.prompts;
    rec.agent_calls += ex.prompts.size();
    res_.agent_calls += ex.prompts.size();
    res_.timings.backend_latency += ex.latency_s;
    std::optional<std::string> patched;
    if (ex.transport_error) {
      rec.transport_error = ex.transport_message;
    } else if (!ex.patch) {
      rec.response_error = ex.error ? std::string(to_string(ex.error->kind)) + ": " + ex.error->message : "";
    } else {
      PatchOutcome po = apply_repair(base_text, *ex.patch, cfg_.mode);
      for (const auto& e : po.errors) rec.patch_errors.push_back(e.describe());
      if (po.applied > 0) patched = std::move(po.text);
    }
    res_.timings.repair += since(t0) - ex.latency_s;

    if (patched) {
      // New syntax errors from the patch go back through the preprocessor.
      auto pre = run_preprocess(*patched, &rec);
      Scored s;
      std::string text = pre ? *pre : *patched;
      if (pre)
        s = score(*pre);
      else
        s.note = "PreprocessFailed";
      bool rollback = !pre || !s.design || should_rollback(res_.history, s.score);
      rec.new_version = static_cast<int>(res_.history.size());
      rec.rolled_back = rollback;
      add_version(text, s, *ex.patch,
                  rollback ? Version::Status::kRolledBack : Version::Status::kAccepted);
      if (rollback) {
        res_.damage_repairs.push_back(*ex.patch);
      } else {
        best_ = rec.new_version;
        best_scored_ = std::move(s);
      }
    }
    res_.iterations.push_back(std::move(rec));
  }

  void finish() {
    if (cfg_.session_dir.empty()) return;
    nlohmann::json j = res_.to_json();
    j["config"] = cfg_.to_json();
    if (!preprocess_log_.is_null()) j["preprocess"] = preprocess_log_;
    write_file(fs::path(cfg_.session_dir) / "session.json", j.dump(2) + "\n");
  }

  const SourceFile& dut_;
  const SourceFile& golden_src_;
  const std::string& spec_;
  RepairBackend& backend_;
  const SessionConfig& cfg_;
  const Verifier* verifier_ = nullptr;
  std::optional<Verifier> own_verifier_;
  SessionResult res_;
  int best_ = 0;
  Scored best_scored_;
  nlohmann::json preprocess_log_;
};

}  // namespace

SessionResult run_session(const SourceFile& dut, const SourceFile& golden, const std::string& spec_text,
                          RepairBackend& backend, const SessionConfig& cfg) {
  return Session(dut, golden, spec_text, backend, cfg, nullptr).run();
}

SessionResult run_session(const SourceFile& dut, const SourceFile& golden, const std::string& spec_text,
                          RepairBackend& backend, const SessionConfig& cfg, const Verifier& verifier) {
  return Session(dut, golden, spec_text, backend, cfg, &verifier).run();
}

SessionResult load_session(const std::string& dir) {
  fs::path p = fs::path(dir) / "session.json";
  std::ifstream in(p);
  if (!in) throw IoError("cannot open " + p.string());
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw MalformedLog(p.string() + ": invalid JSON");
  SessionResult r = SessionResult::from_json(j);
  for (const auto& v : r.history) {
    std::ifstream vf(fs::path(dir) / ("v" + std::to_string(v.index) + ".v"), std::ios::binary);
    if (!vf) throw IoError("missing version file v" + std::to_string(v.index) + ".v");
    std::string text((std::istreambuf_iterator<char>(vf)), std::istreambuf_iterator<char>());
    if (text != v.text) throw MalformedLog("v" + std::to_string(v.index) + ".v differs from session.json");
  }
  return r;
}

}  // namespace rtlmend
