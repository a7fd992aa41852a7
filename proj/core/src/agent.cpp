#include "rtlmend/agent.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rtlmend/lexer.hpp"

namespace rtlmend {

const char* to_string(RepairMode m) { return m == RepairMode::kPair ? "pair" : "whole-file"; }

std::optional<RepairMode> parse_repair_mode(const std::string& s) {
  if (s == "pair") return RepairMode::kPair;
  if (s == "whole-file" || s == "whole_file" || s == "file") return RepairMode::kWholeFile;
  return std::nullopt;
}

nlohmann::json PatchSet::to_json() const {
  nlohmann::json j;
  j["pairs"] = nlohmann::json::array();
  for (const auto& p : pairs) j["pairs"].push_back({{"wrong", p.wrong}, {"right", p.right}});
  j["raw"] = raw;
  return j;
}

PatchSet PatchSet::from_json(const nlohmann::json& j) {
  PatchSet ps;
  for (const auto& p : j.at("pairs"))
    ps.pairs.push_back({p.at("wrong").get<std::string>(), p.at("right").get<std::string>()});
  ps.raw = j.value("raw", "");
  return ps;
}

// ---------------------------------------------------------------------------
// Prompt

namespace {

std::string numbered(const std::string& text) {
  std::ostringstream os;
  std::istringstream is(text);
  std::string line;
  int n = 0;
  std::size_t lines = static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) + 1;
  int w = static_cast<int>(std::to_string(lines).size());
  while (std::getline(is, line)) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%*d", w, ++n);
    os << buf << " | " << line << '\n';
  }
  return os.str();
}

}  // namespace

std::string build_prompt(const RepairRequest& req) {
  std::ostringstream os;
  os << "You are an RTL repair expert. ";
  if (req.profile == PromptProfile::kSyntaxFixer)
    os << "The Verilog design below does not compile. Fix the reported syntax and "
          "elaboration errors without changing the intended behavior.\n";
  else
    os << "The Verilog design below compiles but disagrees with its reference model in "
          "simulation. Fix the functional bug using the error information.\n";
  std::string spec = req.spec_text.empty() ? "(none provided)" : req.spec_text;
  os << "\n## SPECIFICATION\n" << spec;
  if (spec.back() != '\n') os << '\n';
  os << "\n## DUT CODE\n" << numbered(req.dut_text);
  os << "\n## ERROR INFO\n" << req.err_info;
  if (!req.err_info.empty() && req.err_info.back() != '\n') os << '\n';
  if (!req.damage_repairs.empty()) {
    os << "\n## DAMAGE REPAIRS\n"
          "These earlier patches lowered the pass rate and were rolled back. Do not repeat them.\n";
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& ps : req.damage_repairs) {
      nlohmann::json one = nlohmann::json::array();
      for (const auto& p : ps.pairs) one.push_back({{"wrong", p.wrong}, {"right", p.right}});
      arr.push_back(one);
    }
    os << arr.dump(2) << '\n';
  }
  os << "\n## OUTPUT FORMAT\n";
  if (req.mode == RepairMode::kPair)
    os << "Reply with one JSON object whose key \"correct\" holds an array of "
          "{\"wrong\": \"...\", \"right\": \"...\"} objects. Each \"wrong\" must be copied "
          "verbatim from the DUT code (without line numbers) and occur exactly once; \"right\" "
          "is its replacement.\n"
          "Example: {\"correct\": [{\"wrong\": \"result = a - b;\", \"right\": \"result = a + b;\"}]}\n";
  else
    os << "Reply with one JSON object whose key \"code\" holds the complete corrected Verilog "
          "file.\nExample: {\"code\": \"module m(...);\\n...\\nendmodule\\n\"}\n";
  return os.str();
}

std::string format_reminder(const std::string& reason) {
  return "\n## FORMAT REMINDER\nYour previous reply could not be used (" + reason +
         "). Reply with only the JSON object described in OUTPUT FORMAT.\n";
}

// ---------------------------------------------------------------------------
// Response parsing

const char* to_string(ResponseError::Kind k) {
  switch (k) {
    case ResponseError::Kind::kNoJson: return "NoJson";
    case ResponseError::Kind::kSchemaViolation: return "SchemaViolation";
    case ResponseError::Kind::kEmptyCorrect: return "EmptyCorrect";
  }
  return "?";
}

namespace {

// End offset (exclusive) of the balanced object starting at `start`, or npos.
std::size_t balanced_end(const std::string& s, std::size_t start) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = start; i < s.size(); ++i) {
    char c = s[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string::npos;
}

std::optional<nlohmann::json> first_object(const std::string& raw) {
  for (std::size_t pos = raw.find('{'); pos != std::string::npos; pos = raw.find('{', pos + 1)) {
    std::size_t end = balanced_end(raw, pos);
    if (end == std::string::npos) continue;
    auto j = nlohmann::json::parse(raw.begin() + static_cast<std::ptrdiff_t>(pos),
                                   raw.begin() + static_cast<std::ptrdiff_t>(end), nullptr, false);
    if (!j.is_discarded() && j.is_object()) return j;
  }
  return std::nullopt;
}

}  // namespace

std::variant<PatchSet, ResponseError> parse_response(const std::string& raw, RepairMode mode,
                                                     const std::string& old_text) {
  using K = ResponseError::Kind;
  auto j = first_object(raw);
  if (!j) return ResponseError{K::kNoJson, "no JSON object found in the response"};
  PatchSet ps;
  ps.raw = raw;
  if (mode == RepairMode::kWholeFile) {
    auto it = j->find("code");
    if (it == j->end() || !it->is_string() || it->get<std::string>().empty())
      return ResponseError{K::kSchemaViolation, "expected a non-empty string under \"code\""};
    ps.pairs.push_back({old_text, it->get<std::string>()});
    return ps;
  }
  auto it = j->find("correct");
  if (it == j->end() || !it->is_array())
    return ResponseError{K::kSchemaViolation, "expected an array under \"correct\""};
  if (it->empty()) return ResponseError{K::kEmptyCorrect, "\"correct\" is empty"};
  for (const auto& p : *it) {
    if (!p.is_object() || !p.contains("wrong") || !p.contains("right") || !p["wrong"].is_string() ||
        !p["right"].is_string())
      return ResponseError{K::kSchemaViolation,
                           "each element of \"correct\" needs string fields \"wrong\" and \"right\""};
    std::string wrong = p["wrong"].get<std::string>();
    if (wrong.find_first_not_of(" \t\r\n") == std::string::npos)
      return ResponseError{K::kSchemaViolation, "a \"wrong\" snippet is empty"};
    ps.pairs.push_back({std::move(wrong), p["right"].get<std::string>()});
  }
  return ps;
}

// ---------------------------------------------------------------------------
// Patch application

const char* to_string(PatchError::Kind k) {
  switch (k) {
    case PatchError::Kind::kNoMatch: return "NoMatch";
    case PatchError::Kind::kAmbiguousMatch: return "AmbiguousMatch";
    case PatchError::Kind::kLexFailure: return "LexFailure";
  }
  return "?";
}

std::string PatchError::describe() const {
  std::string s = std::string(to_string(kind)) + " (pair " + std::to_string(pair + 1);
  if (kind == Kind::kAmbiguousMatch) s += ", " + std::to_string(count) + " matches";
  return s + ")";
}

namespace {

bool blank(char c) { return c == ' ' || c == '\t' || c == '\r'; }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

// Whitespace-normalized view: per line, leading/trailing blanks removed and
// inner runs collapsed to one space. `pos[i]` maps back to the source.
struct Normalized {
  std::string text;
  std::vector<std::size_t> pos;
};

Normalized normalize(const std::string& s) {
  Normalized n;
  std::size_t i = 0;
  while (i <= s.size()) {
    std::size_t eol = s.find('\n', i);
    if (eol == std::string::npos) eol = s.size();
    std::size_t b = i, e = eol;
    while (b < e && blank(s[b])) ++b;
    while (e > b && blank(s[e - 1])) --e;
    bool gap = false;
    for (std::size_t k = b; k < e; ++k) {
      if (blank(s[k])) {
        if (!gap) {
          n.text += ' ';
          n.pos.push_back(k);
        }
        gap = true;
      } else {
        n.text += s[k];
        n.pos.push_back(k);
        gap = false;
      }
    }
    if (eol == s.size()) break;
    n.text += '\n';
    n.pos.push_back(eol);
    i = eol + 1;
  }
  return n;
}

std::string normalized_snippet(const std::string& s) {
  std::string t = normalize(s).text;
  std::size_t b = t.find_first_not_of('\n');
  if (b == std::string::npos) return {};
  std::size_t e = t.find_last_not_of('\n');
  return t.substr(b, e - b + 1);
}

std::vector<std::size_t> find_all(const Normalized& hay, const std::string& needle) {
  std::vector<std::size_t> hits;
  if (needle.empty()) return hits;
  bool lead = ident_char(needle.front());
  bool trail = ident_char(needle.back());
  for (std::size_t p = hay.text.find(needle); p != std::string::npos; p = hay.text.find(needle, p + 1)) {
    std::size_t end = p + needle.size();
    if (lead && p > 0 && ident_char(hay.text[p - 1])) continue;
    if (trail && end < hay.text.size() && ident_char(hay.text[end])) continue;
    hits.push_back(p);
  }
  return hits;
}

std::string strip_leading_blanks(const std::string& s) {
  std::size_t b = 0;
  while (b < s.size() && (blank(s[b]) || s[b] == '\n')) ++b;
  std::string out = s.substr(b);
  while (!out.empty() && (blank(out.back()) || out.back() == '\n')) out.pop_back();
  return out;
}

}  // namespace

std::size_t count_matches(const std::string& text, const std::string& snippet) {
  return find_all(normalize(text), normalized_snippet(snippet)).size();
}

PatchOutcome apply_patchset(const std::string& dut_text, const PatchSet& ps) {
  PatchOutcome out;
  out.text = dut_text;
  for (std::size_t i = 0; i < ps.pairs.size(); ++i) {
    const auto& pair = ps.pairs[i];
    std::string needle = normalized_snippet(pair.wrong);
    Normalized hay = normalize(out.text);
    auto hits = find_all(hay, needle);
    if (hits.size() != 1) {
      out.errors.push_back({hits.empty() ? PatchError::Kind::kNoMatch : PatchError::Kind::kAmbiguousMatch,
                            i, hits.size()});
      continue;
    }
    std::size_t begin = hay.pos[hits[0]];
    std::size_t end = hay.pos[hits[0] + needle.size() - 1] + 1;
    out.text.replace(begin, end - begin, strip_leading_blanks(pair.right));
    ++out.applied;
  }
  if (!relexes(out.text)) {
    out.errors.push_back({PatchError::Kind::kLexFailure, ps.pairs.size(), 0});
    out.text = dut_text;
    out.applied = 0;
  }
  return out;
}

PatchOutcome apply_repair(const std::string& dut_text, const PatchSet& ps, RepairMode mode) {
  if (mode == RepairMode::kPair) return apply_patchset(dut_text, ps);
  PatchOutcome out;
  out.text = ps.pairs.empty() ? dut_text : ps.pairs.back().right;
  out.applied = ps.pairs.empty() ? 0 : 1;
  return out;
}

// ---------------------------------------------------------------------------
// Line diff for the oracle backend

namespace {

std::vector<std::string> split_lines(const std::string& s) {
  std::vector<std::string> lines;
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t e = s.find('\n', i);
    if (e == std::string::npos) e = s.size();
    lines.push_back(s.substr(i, e - i));
    i = e + 1;
  }
  return lines;
}

std::string join(const std::vector<std::string>& v, std::size_t b, std::size_t e) {
  std::string s;
  for (std::size_t i = b; i < e; ++i) {
    if (i > b) s += '\n';
    s += v[i];
  }
  return s;
}

struct Hunk {
  std::size_t a0, a1, b0, b1;
};

std::vector<Hunk> diff_hunks(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::size_t n = a.size(), m = b.size();
  std::vector<std::vector<std::uint32_t>> lcs(n + 1, std::vector<std::uint32_t>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;)
    for (std::size_t j = m; j-- > 0;)
      lcs[i][j] = a[i] == b[j] ? lcs[i + 1][j + 1] + 1 : std::max(lcs[i + 1][j], lcs[i][j + 1]);
  std::vector<Hunk> hunks;
  std::size_t i = 0, j = 0;
  while (i < n || j < m) {
    if (i < n && j < m && a[i] == b[j]) {
      ++i;
      ++j;
      continue;
    }
    Hunk h{i, i, j, j};
    while ((i < n || j < m) && !(i < n && j < m && a[i] == b[j])) {
      if (j < m && (i == n || lcs[i][j + 1] >= lcs[i + 1][j]))
        ++j;
      else
        ++i;
    }
    h.a1 = i;
    h.b1 = j;
    hunks.push_back(h);
  }
  return hunks;
}

}  // namespace

std::vector<PatchPair> diff_pairs(const std::string& from, const std::string& to) {
  auto a = split_lines(from);
  auto b = split_lines(to);
  std::vector<PatchPair> pairs;
  for (const auto& h : diff_hunks(a, b)) {
    if (h.a0 == h.a1) {
      // Insertion: anchor on the next line (or the previous one at EOF).
      std::string added = join(b, h.b0, h.b1);
      if (h.a0 < a.size())
        pairs.push_back({a[h.a0], added + "\n" + a[h.a0]});
      else if (h.a0 > 0)
        pairs.push_back({a[h.a0 - 1], a[h.a0 - 1] + "\n" + added});
      else
        pairs.push_back({"", added});
      continue;
    }
    std::size_t lo = h.a0, hi = h.a1, blo = h.b0, bhi = h.b1;
    if (h.b0 == h.b1 && hi < a.size()) {
      // Deletion: keep the following line so the replacement is non-empty.
      ++hi;
      ++bhi;
    }
    for (int widen = 0; widen < 3; ++widen) {
      if (count_matches(from, join(a, lo, hi)) <= 1) break;
      if (lo > 0) {
        --lo;
        --blo;
      }
      if (hi < a.size()) {
        ++hi;
        ++bhi;
      }
    }
    pairs.push_back({join(a, lo, hi), join(b, blo, bhi)});
  }
  return pairs;
}

// ---------------------------------------------------------------------------

AgentExchange query_agent(RepairBackend& backend, const RepairRequest& req) {
  AgentExchange ex;
  std::string prompt = build_prompt(req);
  for (int attempt = 0; attempt < 2; ++attempt) {
    ex.prompts.push_back(prompt);
    BackendReply reply = backend.send(req, prompt);
    ex.latency_s += reply.latency_s;
    ex.responses.push_back(reply.text);
    if (reply.transport_error) {
      ex.transport_error = true;
      ex.transport_message = reply.error;
      return ex;
    }
    auto parsed = parse_response(reply.text, req.mode, req.dut_text);
    if (auto* ps = std::get_if<PatchSet>(&parsed)) {
      ex.patch = std::move(*ps);
      ex.error.reset();
      return ex;
    }
    ex.error = std::get<ResponseError>(parsed);
    prompt = build_prompt(req) +
             format_reminder(std::string(to_string(ex.error->kind)) + ": " + ex.error->message);
  }
  return ex;
}

}  // namespace rtlmend
