#include "rtlmend/bench.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "rtlmend/elaborate.hpp"
#include "rtlmend/error.hpp"
#include "rtlmend/localize.hpp"
#include "rtlmend/testbench.hpp"

namespace rtlmend {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

Stage stage_from(const std::string& s) {
  if (s == "preprocess") return Stage::kPreprocess;
  if (s == "ms") return Stage::kMS;
  if (s == "sl") return Stage::kSL;
  return Stage::kNone;
}

json ratio_json(const Ratio& r) { return {{"num", r.num}, {"den", r.den}, {"value", r.value()}}; }

bool fr_of(const MutantResult& r, const FrConfig& cfg) {
  if (!r.hr_pass) return false;
  if (r.fr_pass) return *r.fr_pass;
  return passes_extended(r.final_text, r.golden_text, cfg);
}

std::string fmt3(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << v;
  return os.str();
}

}  // namespace

json MutantResult::to_json() const {
  json j{{"id", id},
         {"module", module},
         {"family", family},
         {"kind", to_string(kind)},
         {"class", to_string(cls)},
         {"outcome", to_string(outcome)},
         {"stage", to_string(stage)},
         {"iterations", iterations},
         {"final_score", final_score},
         {"hr_pass", hr_pass},
         {"timings", timings.to_json()},
         {"t_exec", timings.exec()},
         {"agent_calls", agent_calls}};
  j["fr_pass"] = fr_pass ? json(*fr_pass) : json(nullptr);
  j["localization_hit"] = localization_hit ? json(*localization_hit) : json(nullptr);
  if (!error.empty()) j["error"] = error;
  return j;
}

MutantResult MutantResult::from_json(const json& j) {
  MutantResult r;
  r.id = j.at("id").get<std::string>();
  r.module = j.value("module", "");
  r.family = j.value("family", "");
  auto k = parse_mutation_kind(j.value("kind", ""));
  if (!k) throw ConfigError("unknown mutation kind in result " + r.id);
  r.kind = *k;
  r.cls = j.value("class", "") == "syntax" ? MutantClass::kSyntax : MutantClass::kFunctional;
  r.outcome = j.value("outcome", "") == "Success" ? Outcome::kSuccess : Outcome::kFailure;
  r.stage = stage_from(j.value("stage", "none"));
  r.iterations = j.value("iterations", 0);
  r.final_score = j.value("final_score", 0.0);
  r.hr_pass = j.value("hr_pass", false);
  if (j.contains("fr_pass") && !j["fr_pass"].is_null()) r.fr_pass = j["fr_pass"].get<bool>();
  if (j.contains("localization_hit") && !j["localization_hit"].is_null())
    r.localization_hit = j["localization_hit"].get<bool>();
  if (j.contains("timings")) r.timings = Timings::from_json(j["timings"]);
  r.agent_calls = j.value("agent_calls", std::size_t{0});
  r.error = j.value("error", "");
  return r;
}

bool passes_extended(const std::string& text, const std::string& golden, const FrConfig& cfg) {
  ElabResult g = compile_text(golden, "golden.v");
  if (!g.ok()) throw ConfigError("golden design does not compile");
  ElabResult d = compile_text(text, "dut.v");
  if (!d.ok()) return false;
  try {
    Verifier v(*g.design, extended_suite(*g.design, cfg.seed_base, cfg.seeds, cfg.cycles));
    return v.verify(*d.design, false).pass_rate >= 1.0;
  } catch (const Error&) {
    return false;
  }
}

Ratio compute_hr(const std::vector<MutantResult>& results) {
  if (results.empty()) throw EmptyResultSet("no sessions to score");
  Ratio r{0, results.size()};
  for (const auto& m : results) r.num += m.hr_pass ? 1 : 0;
  return r;
}

Ratio compute_fr(const std::vector<MutantResult>& results, const FrConfig& cfg) {
  if (results.empty()) throw EmptyResultSet("no sessions to score");
  Ratio r{0, results.size()};
  for (const auto& m : results) r.num += fr_of(m, cfg) ? 1 : 0;
  return r;
}

CampaignResult summarize(std::vector<MutantResult> results,
                         const std::map<std::string, std::map<MutationKind, int>>& matrix) {
  std::sort(results.begin(), results.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  CampaignResult c;
  c.matrix = matrix;
  c.hr = compute_hr(results);
  c.fr = compute_fr(results);
  for (Stage s : {Stage::kPreprocess, Stage::kMS, Stage::kSL}) c.stages[s] = {};
  Ratio loc{0, 0};
  double exec = 0.0, latency = 0.0;
  for (const auto& r : results) {
    bool fr = fr_of(r, {});
    exec += r.timings.exec();
    latency += r.timings.backend_latency;
    if (r.hr_pass) {
      auto& s = c.stages[r.stage];
      ++s.hits;
      s.fixes += fr ? 1 : 0;
      s.t_exec += r.timings.exec();
    }
    auto& cell = c.heatmap[r.family][r.kind];
    ++cell.den;
    cell.num += fr ? 1 : 0;
    if (r.localization_hit) {
      ++loc.den;
      loc.num += *r.localization_hit ? 1 : 0;
    }
  }
  c.mean_t_exec = exec / static_cast<double>(results.size());
  c.mean_backend_latency = latency / static_cast<double>(results.size());
  if (loc.den) c.localization = loc;
  c.results = std::move(results);
  return c;
}

json CampaignResult::to_json() const {
  json j;
  j["n"] = results.size();
  j["hr"] = ratio_json(hr);
  j["fr"] = ratio_json(fr);
  json st = json::object();
  for (const auto& [s, v] : stages)
    st[to_string(s)] = {{"hits", v.hits}, {"fixes", v.fixes}, {"t_exec", v.t_exec}};
  j["stages"] = st;
  j["mean_t_exec"] = mean_t_exec;
  j["mean_backend_latency"] = mean_backend_latency;
  j["localization"] = localization ? ratio_json(*localization) : json(nullptr);
  json hm = json::object();
  for (const auto& [fam, row] : heatmap)
    for (const auto& [k, r] : row) hm[fam][to_string(k)] = ratio_json(r);
  j["heatmap"] = hm;
  json mx = json::object();
  for (const auto& [fam, row] : matrix)
    for (const auto& [k, n] : row) mx[fam][to_string(k)] = n;
  j["matrix"] = mx;
  json rs = json::array();
  for (const auto& r : results) rs.push_back(r.to_json());
  j["results"] = rs;
  return j;
}

CampaignResult CampaignResult::from_json(const json& j) {
  std::vector<MutantResult> rs;
  for (const auto& r : j.at("results")) rs.push_back(MutantResult::from_json(r));
  std::map<std::string, std::map<MutationKind, int>> mx;
  if (j.contains("matrix"))
    for (const auto& [fam, row] : j["matrix"].items())
      for (const auto& [k, n] : row.items())
        if (auto kind = parse_mutation_kind(k)) mx[fam][*kind] = n.get<int>();
  return summarize(std::move(rs), mx);
}

std::string CampaignResult::heatmap_csv() const {
  std::set<std::string> families;
  for (const auto& [f, _] : heatmap) families.insert(f);
  for (const auto& [f, _] : matrix) families.insert(f);
  std::ostringstream os;
  os << "family";
  for (MutationKind k : kAllMutationKinds) os << ',' << to_string(k);
  os << ",Syntax,Function\n";
  for (const auto& fam : families) {
    os << fam;
    auto row = heatmap.find(fam);
    for (MutationKind k : kAllMutationKinds) {
      const Ratio* r = nullptr;
      if (row != heatmap.end()) {
        auto it = row->second.find(k);
        if (it != row->second.end() && it->second.den) r = &it->second;
      }
      os << ',' << (r ? fmt3(r->value()) : std::string("\xC3\x97"));
    }
    Ratio syn{0, 0}, fun{0, 0};
    for (const auto& r : results) {
      if (r.family != fam) continue;
      Ratio& t = r.cls == MutantClass::kSyntax ? syn : fun;
      ++t.den;
      t.num += fr_of(r, {}) ? 1 : 0;
    }
    for (const Ratio& t : {syn, fun}) os << ',' << (t.den ? fmt3(t.value()) : std::string("\xC3\x97"));
    os << '\n';
  }
  return os.str();
}

void CampaignResult::save(const std::string& dir) const {
  fs::create_directories(dir);
  {
    std::ofstream out(fs::path(dir) / "campaign.json");
    if (!out) throw IoError("cannot write " + dir + "/campaign.json");
    out << to_json().dump(2) << '\n';
  }
  std::ofstream out(fs::path(dir) / "heatmap.csv");
  if (!out) throw IoError("cannot write " + dir + "/heatmap.csv");
  out << heatmap_csv();
}

namespace {

struct GoldenCache {
  std::mutex mu;
  std::map<std::string, std::shared_ptr<const Verifier>> session;
  std::map<std::string, std::shared_ptr<const ElaboratedDesign>> designs;

  std::pair<std::shared_ptr<const Verifier>, std::shared_ptr<const ElaboratedDesign>> get(
      const CorpusEntry& e, const StimulusConfig& stim) {
    std::lock_guard<std::mutex> lock(mu);
    auto it = session.find(e.name);
    if (it != session.end()) return {it->second, designs[e.name]};
    ElabResult g = compile_text(e.text, e.path.empty() ? e.name + ".v" : e.path);
    if (!g.ok()) throw ConfigError("golden design does not compile: " + e.name);
    auto d = std::make_shared<const ElaboratedDesign>(std::move(*g.design));
    auto v = std::make_shared<const Verifier>(*d, session_stimulus(*d, stim));
    session[e.name] = v;
    designs[e.name] = d;
    return {v, d};
  }
};

bool localization_hit(const Mutant& m, const Verifier& v, int th) {
  ElabResult d = compile_text(m.mutated, m.module + ".v");
  if (!d.ok()) return false;
  VerifyReport rep = v.verify(*d.design, true);
  if (rep.mismatches.empty()) return false;
  ErrInfo info = fetch_err_info(*d.design, rep, th, th);
  return std::any_of(info.lines.begin(), info.lines.end(),
                     [&](const SourceLine& l) { return l.line == m.line; });
}

MutantResult run_one(const Mutant& m, const CorpusEntry& golden, const CampaignConfig& cfg, GoldenCache& cache) {
  MutantResult r;
  r.id = m.id;
  r.module = m.module;
  r.family = m.family;
  r.kind = m.op.kind;
  r.cls = m.cls;
  r.golden_text = golden.text;
  r.final_text = m.mutated;
  try {
    auto [verifier, gdesign] = cache.get(golden, cfg.session.stimulus);
    SessionConfig sc = cfg.session;
    if (!cfg.sessions_dir.empty()) sc.session_dir = (fs::path(cfg.sessions_dir) / m.id).string();
    auto backend = make_backend(cfg.backend, golden.text);
    SessionResult s = run_session(SourceFile(m.module + ".v", m.mutated), SourceFile(golden.name + ".v", golden.text),
                                  golden.spec, *backend, sc, *verifier);
    r.outcome = s.outcome;
    r.stage = s.stage;
    r.iterations = s.iterations_used;
    r.final_score = s.final_score;
    r.timings = s.timings;
    r.agent_calls = s.agent_calls;
    r.final_text = s.final_text;
    r.error = s.failure;
    r.hr_pass = s.outcome == Outcome::kSuccess;
    r.fr_pass = r.hr_pass && passes_extended(r.final_text, golden.text, cfg.fr);
    if (cfg.localize && m.cls == MutantClass::kFunctional) {
      try {
        r.localization_hit = localization_hit(m, *verifier, cfg.session.th);
      } catch (const Error&) {
        r.localization_hit = false;
      }
    }
  } catch (const Error& e) {
    r.error = e.kind() + ": " + e.what();
    r.hr_pass = false;
    r.fr_pass = false;
  }
  return r;
}

}  // namespace

CampaignResult run_campaign(const BenchmarkSet& benchmark, const CampaignConfig& config) {
  const std::size_t n = benchmark.mutants.size();
  std::vector<MutantResult> results(n);
  GoldenCache cache;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      const Mutant& m = benchmark.mutants[i];
      const CorpusEntry* g = benchmark.golden(m.module);
      if (!g) {
        results[i].id = m.id;
        results[i].module = m.module;
        results[i].family = m.family;
        results[i].kind = m.op.kind;
        results[i].cls = m.cls;
        results[i].error = "ConfigError: no golden design for " + m.module;
        results[i].fr_pass = false;
        continue;
      }
      results[i] = run_one(m, *g, config, cache);
    }
  };
  int workers = std::max(1, std::min<int>(config.workers, static_cast<int>(std::max<std::size_t>(n, 1))));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return summarize(std::move(results), benchmark.matrix);
}

}  // namespace rtlmend
