#include "rtlmend/preprocess.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

#include "rtlmend/elaborate.hpp"
#include "rtlmend/error.hpp"
#include "rtlmend/frontend.hpp"

namespace rtlmend {

bool CheckResult::clean() const {
  if (!errors.empty() || !design) return false;
  for (const auto& w : warnings)
    if (w.fixable) return false;
  return true;
}

std::string CheckResult::error_info() const {
  std::ostringstream os;
  for (const auto& d : errors)
    os << "line " << d.line << ", col " << d.col << ": error: " << d.message << " [" << d.code << "]\n";
  return os.str();
}

CheckResult check_source(const SourceFile& src) {
  CheckResult out;
  ParseResult pr = parse(src);
  if (!pr.ok()) {
    for (auto& d : pr.diagnostics)
      if (d.severity == Severity::kError) out.errors.push_back(std::move(d));
    return out;
  }
  ElabResult er = elaborate(*pr.design);
  if (!er.ok()) {
    for (auto& d : er.diagnostics)
      if (d.severity == Severity::kError) out.errors.push_back(std::move(d));
    return out;
  }
  out.warnings = lint(*pr.design);
  out.design = std::move(pr.design);
  return out;
}

const char* to_string(PreprocessRound::Action a) {
  switch (a) {
    case PreprocessRound::Action::kClean: return "clean";
    case PreprocessRound::Action::kAgent: return "agent";
    case PreprocessRound::Action::kTemplates: return "templates";
  }
  return "?";
}

nlohmann::json PreprocessRound::to_json() const {
  nlohmann::json j;
  j["round"] = round;
  j["action"] = to_string(action);
  j["errors"] = nlohmann::json::array();
  for (const auto& d : errors) j["errors"].push_back(nlohmann::json::parse(to_json_line(d)));
  j["warnings"] = warnings;
  j["patch_errors"] = nlohmann::json::array();
  for (const auto& e : patch_errors) j["patch_errors"].push_back(e.describe());
  if (!response_error.empty()) j["response_error"] = response_error;
  if (!transport_error.empty()) j["transport_error"] = transport_error;
  return j;
}

nlohmann::json PreprocessLog::to_json() const {
  nlohmann::json j;
  j["rounds"] = nlohmann::json::array();
  for (const auto& r : rounds) j["rounds"].push_back(r.to_json());
  j["agent_calls"] = agent_calls;
  return j;
}

PreprocessResult preprocess(const SourceFile& src, RepairBackend& agent, const PreprocessOptions& opts,
                            PreprocessLog* log_out) {
  if (opts.max_rounds < 1) throw ConfigError("max_rounds must be at least 1");
  PreprocessLog log;
  std::string text = src.text();
  auto finish = [&] {
    if (log_out) *log_out = log;
  };
  CheckResult cr;
  for (int round = 1;; ++round) {
    cr = check_source(SourceFile(src.path(), text));
    PreprocessRound r;
    r.round = round;
    r.errors = cr.errors;
    for (const auto& w : cr.warnings)
      if (w.fixable) r.warnings.push_back(std::string(to_string(w.code)) + "@" + std::to_string(w.span.line));
    if (cr.clean()) {
      log.rounds.push_back(std::move(r));
      break;
    }
    if (round > opts.max_rounds) {
      log.rounds.push_back(std::move(r));
      finish();
      std::string msg = "source still has errors after " + std::to_string(opts.max_rounds) + " rounds";
      std::string info = cr.errors.empty() ? std::string() : cr.error_info();
      for (const auto& tag : log.rounds.back().warnings) info += tag + "\n";
      throw PreprocessFailed(msg + (info.empty() ? "" : ":\n" + info));
    }
    if (!cr.errors.empty()) {
      r.action = PreprocessRound::Action::kAgent;
      RepairRequest req;
      req.spec_text = opts.spec_text;
      req.dut_text = text;
      req.err_info = cr.error_info();
      req.mode = opts.mode;
      req.damage_repairs = opts.damage_repairs;
      req.profile = PromptProfile::kSyntaxFixer;
      AgentExchange ex = query_agent(agent, req);
      log.agent_calls += ex.prompts.size();
      log.backend_latency_s += ex.latency_s;
      if (ex.transport_error) {
        r.transport_error = ex.transport_message;
      } else if (!ex.patch) {
        r.response_error = ex.error ? std::string(to_string(ex.error->kind)) + ": " + ex.error->message : "";
      } else {
        PatchOutcome po = apply_repair(text, *ex.patch, opts.mode);
        r.patch_errors = po.errors;
        text = std::move(po.text);
      }
    } else {
      r.action = PreprocessRound::Action::kTemplates;
      try {
        Design fixed = apply_templates(*cr.design, fixable(cr.warnings));
        text = fixed.source->text();
      } catch (const Error& e) {
        r.response_error = e.what();
      }
    }
    log.rounds.push_back(std::move(r));
  }
  finish();
  PreprocessResult out{std::move(*cr.design), text, {}, std::move(log)};
  for (auto& w : cr.warnings)
    if (!w.fixable) out.report_only.push_back(std::move(w));
  return out;
}

}  // namespace rtlmend
